use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use super::Report;

/// Writes every float with 17 significant digits in exponent form and
/// delegates the layout to `F`. Non-finite floats are written as `null`.
struct Digits17<F>(F);

macro_rules! delegate {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.$name(w)
            }
        )*
    };
}

impl<F: Formatter> Formatter for Digits17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate!(begin_array, end_array, begin_object, end_object, end_array_value, end_object_value);

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
}

/// JSON text of `value` with 17-significant-digit floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T, pretty: bool) -> String {
    let mut out = Vec::new();
    let result = if pretty {
        let mut ser =
            serde_json::Serializer::with_formatter(&mut out, Digits17(PrettyFormatter::new()));
        value.serialize(&mut ser)
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(CompactFormatter));
        value.serialize(&mut ser)
    };
    result.expect("serializable value");
    let mut s = String::from_utf8(out).expect("JSON is UTF-8");
    if pretty {
        s.push('\n');
    }
    s
}

/// One line per restart: index, final residual, and the smallest and
/// largest distance to degeneracy over the marginals.
pub fn csv_summary(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["restart", "residual", "min_distance", "max_distance"])
        .expect("in-memory write");
    for r in &report.records {
        let min = r.distances.iter().copied().fold(f64::INFINITY, f64::min);
        let max = r.distances.iter().copied().fold(0.0, f64::max);
        w.write_record([
            r.restart.to_string(),
            format!("{:.16e}", r.final_residual),
            format!("{min:.16e}"),
            format!("{max:.16e}"),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
}

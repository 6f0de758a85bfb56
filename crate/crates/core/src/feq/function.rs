use std::f64::consts::{PI, TAU};
use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FeqError;
use crate::dist::CharFunction;
use crate::group::{phase_to_unit, Element, FiniteAbelianGroup};
use crate::homs::Homomorphism;

/// How differences of complex values are compared.
///
/// `Phase` treats imaginary parts modulo `2 pi`, so that the logarithm of a
/// character (whose principal branch jumps) still has constant differences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    #[default]
    Additive,
    Phase,
}

pub(crate) fn wrap_angle(t: f64) -> f64 {
    let w = t - TAU * (t / TAU).round();
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

impl Space {
    #[inline]
    pub fn reduce(self, z: Complex64) -> Complex64 {
        match self {
            Space::Additive => z,
            Space::Phase => Complex64::new(z.re, wrap_angle(z.im)),
        }
    }
}

/// A complex-valued table on a finite abelian group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupFunction {
    group: FiniteAbelianGroup,
    values: Vec<Complex64>,
}

impl GroupFunction {
    pub fn new(group: &FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self, FeqError> {
        if values.len() != group.order() {
            return Err(FeqError::InvalidArgument(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(FeqError::InvalidArgument(format!("value {i} is not finite")));
        }
        Ok(GroupFunction {
            group: group.clone(),
            values,
        })
    }

    pub fn from_fn(group: &FiniteAbelianGroup, f: impl FnMut(usize) -> Complex64) -> Self {
        GroupFunction {
            group: group.clone(),
            values: (0..group.order()).map(f).collect(),
        }
    }

    pub fn constant(group: &FiniteAbelianGroup, c: Complex64) -> Self {
        Self::from_fn(group, |_| c)
    }

    /// `y -> (x0, y)`.
    pub fn character(group: &FiniteAbelianGroup, x0: &Element) -> Result<Self, FeqError> {
        group.check(x0)?;
        let mut yc = vec![0u64; group.rank()];
        Ok(Self::from_fn(group, |y| {
            group.coords_into(y, &mut yc);
            phase_to_unit(group.pairing_phase(x0.coords(), &yc))
        }))
    }

    pub fn from_char(f: &CharFunction) -> Self {
        GroupFunction {
            group: f.group().clone(),
            values: f.values().to_vec(),
        }
    }

    /// Principal logarithm of a table without zeros.
    pub fn log_of(group: &FiniteAbelianGroup, values: &[Complex64]) -> Result<Self, FeqError> {
        let min_abs = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if min_abs == 0.0 {
            return Err(FeqError::VanishingChar { min_abs });
        }
        Self::new(group, values.iter().map(|v| v.ln()).collect())
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, y: &Element) -> Complex64 {
        self.values[self.group.index_of(y)]
    }

    pub fn exp(&self) -> GroupFunction {
        GroupFunction {
            group: self.group.clone(),
            values: self.values.iter().map(|v| v.exp()).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_norm_in(&self, space: Space) -> f64 {
        self.values
            .iter()
            .map(|&v| space.reduce(v).norm())
            .fold(0.0, f64::max)
    }

    fn zip_with(
        &self,
        other: &GroupFunction,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<GroupFunction, FeqError> {
        self.group.check_same(&other.group)?;
        Ok(GroupFunction {
            group: self.group.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &GroupFunction) -> Result<GroupFunction, FeqError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GroupFunction) -> Result<GroupFunction, FeqError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GroupFunction) -> Result<GroupFunction, FeqError> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> GroupFunction {
        GroupFunction {
            group: self.group.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `psi . g`, a function on the domain of `g`.
    pub fn compose(&self, g: &Homomorphism) -> Result<GroupFunction, FeqError> {
        self.group.check_same(g.codomain())?;
        let table = g.image_table();
        Ok(GroupFunction {
            group: g.domain().clone(),
            values: table.into_iter().map(|z| self.values[z]).collect(),
        })
    }

    /// `Delta_h psi (y) = psi(y + h) - psi(y)`.
    pub fn difference(&self, h: &Element) -> Result<GroupFunction, FeqError> {
        self.group.check(h)?;
        Ok(self.difference_in(self.group.index_of(h), Space::Additive))
    }

    pub(crate) fn difference_in(&self, h: usize, space: Space) -> GroupFunction {
        GroupFunction {
            group: self.group.clone(),
            values: difference_table(&self.group, &self.values, h, space),
        }
    }

    /// `Delta_h^k psi`.
    pub(crate) fn power_difference(&self, h: usize, k: usize, space: Space) -> GroupFunction {
        let mut out = self.clone();
        for _ in 0..k {
            out = out.difference_in(h, space);
        }
        out
    }

    /// CSV with coordinate columns followed by `re,im`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (1..=self.group.rank()).map(|j| format!("y{j}")).collect();
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header).expect("in-memory write");
        for (idx, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self
                .group
                .element_at(idx)
                .coords()
                .iter()
                .map(u64::to_string)
                .collect();
            row.push(format!("{:.16e}", v.re));
            row.push(format!("{:.16e}", v.im));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
    }

    /// Reads the format written by [`GroupFunction::to_csv`]; rows may come in
    /// any order but must cover every element exactly once.
    pub fn from_csv(group: &FiniteAbelianGroup, reader: impl io::Read) -> Result<Self, FeqError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let r = group.rank();
        let mut values = vec![None; group.order()];
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| FeqError::InvalidArgument(e.to_string()))?;
            if record.len() != r + 2 {
                return Err(FeqError::InvalidArgument(format!(
                    "row {}: expected {} fields",
                    line + 1,
                    r + 2
                )));
            }
            let parse_err = |field: &str| {
                FeqError::InvalidArgument(format!("row {}: bad field `{field}`", line + 1))
            };
            let mut coords = Vec::with_capacity(r);
            for field in record.iter().take(r) {
                coords.push(field.trim().parse::<u64>().map_err(|_| parse_err(field))?);
            }
            let x = group.element(&coords)?;
            let re: f64 = record[r].trim().parse().map_err(|_| parse_err(&record[r]))?;
            let im: f64 = record[r + 1].trim().parse().map_err(|_| parse_err(&record[r + 1]))?;
            let slot = &mut values[group.index_of(&x)];
            if slot.is_some() {
                return Err(FeqError::InvalidArgument(format!("duplicate row for {x}")));
            }
            *slot = Some(Complex64::new(re, im));
        }
        let values: Option<Vec<Complex64>> = values.into_iter().collect();
        let values =
            values.ok_or_else(|| FeqError::InvalidArgument("missing rows in table".into()))?;
        Self::new(group, values)
    }
}

pub(crate) fn difference_table(
    group: &FiniteAbelianGroup,
    values: &[Complex64],
    h: usize,
    space: Space,
) -> Vec<Complex64> {
    (0..values.len())
        .map(|y| space.reduce(values[group.add_index(y, h)] - values[y]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_examples() {
        let z5 = FiniteAbelianGroup::new(&[5]).unwrap();
        let c = GroupFunction::constant(&z5, Complex64::new(2.0, -1.0));
        let one = z5.element(&[1]).unwrap();
        assert_eq!(c.difference(&one).unwrap().sup_norm(), 0.0);
        let chi = GroupFunction::character(&z5, &one).unwrap();
        assert_eq!(chi.difference(&z5.zero()).unwrap().sup_norm(), 0.0);
        let d = chi.difference(&one).unwrap();
        let factor = chi.value(&one) - 1.0;
        for (y, v) in d.values().iter().enumerate() {
            assert!((v - chi.values()[y] * factor).norm() < 1e-15);
        }
    }

    #[test]
    fn phase_space_wraps() {
        let w = Space::Phase.reduce(Complex64::new(0.5, 3.0 * PI));
        assert!((w.im - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert_eq!(Space::Additive.reduce(Complex64::new(0.0, 7.0)).im, 7.0);
    }

    #[test]
    fn csv_round_trip() {
        let x = FiniteAbelianGroup::new(&[2, 3]).unwrap();
        let f = GroupFunction::from_fn(&x, |i| Complex64::new(i as f64 / 7.0, -(i as f64)));
        let text = f.to_csv();
        assert!(text.starts_with("y1,y2,re,im\n"));
        assert_eq!(GroupFunction::from_csv(&x, text.as_bytes()).unwrap(), f);
        assert!(GroupFunction::from_csv(&x, "y1,y2,re,im\n0,0,1,0\n".as_bytes()).is_err());
    }
}

//! Experiment configuration: schema checking with JSON-pointer error
//! locations, defaults, and a normalized form that re-validates to itself.

use std::cell::RefCell;
use std::fmt;

use serde::de::{self, DeserializeSeed, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::group::FiniteAbelianGroup;
use crate::homs::{AlphaEntry, CoefficientSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Theorem1,
    Theorem4,
    Theorem3,
    ExploreRemark2,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Theorem1 => "theorem1",
            Mode::Theorem4 => "theorem4",
            Mode::Theorem3 => "theorem3",
            Mode::ExploreRemark2 => "explore-remark2",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        [Mode::Theorem1, Mode::Theorem4, Mode::Theorem3, Mode::ExploreRemark2]
            .into_iter()
            .find(|m| m.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Seeds {
    pub master: u64,
    pub restarts: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Membership in `D_{m,m-1}` (and Q-independence).
    pub membership: f64,
    /// Distance to degeneracy below which a marginal counts as degenerate.
    pub degeneracy: f64,
    /// Tolerance of the elimination and classification pipeline.
    pub pipeline: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sampling {
    /// Mass `lambda` placed at 0 when sampling marginals.
    pub floor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub max_iterations: usize,
    pub initial_step: f64,
    pub decay: f64,
    pub min_step: f64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            master: 0,
            restarts: 10_000,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            membership: 1e-9,
            degeneracy: 1e-3,
            pipeline: 1e-6,
        }
    }
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { floor: 0.6 }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_iterations: 2000,
            initial_step: 0.1,
            decay: 0.5,
            min_step: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub group: FiniteAbelianGroup,
    pub alphas: Vec<Vec<AlphaEntry>>,
    pub mode: Mode,
    pub seeds: Seeds,
    pub tolerances: Tolerances,
    pub sampling: Sampling,
    pub search: SearchConfig,
}

/// A schema violation located by a JSON pointer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{at}: {}", self.message)
    }
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

struct Strict<'a> {
    path: String,
    duplicate: &'a RefCell<Option<String>>,
}

impl<'de> DeserializeSeed<'de> for Strict<'_> {
    type Value = Value;

    fn deserialize<D: de::Deserializer<'de>>(self, d: D) -> Result<Value, D::Error> {
        d.deserialize_any(self)
    }
}

impl<'de> Visitor<'de> for Strict<'_> {
    type Value = Value;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a JSON value")
    }

    fn visit_bool<E>(self, v: bool) -> Result<Value, E> {
        Ok(Value::Bool(v))
    }

    fn visit_i64<E>(self, v: i64) -> Result<Value, E> {
        Ok(Value::from(v))
    }

    fn visit_u64<E>(self, v: u64) -> Result<Value, E> {
        Ok(Value::from(v))
    }

    fn visit_f64<E>(self, v: f64) -> Result<Value, E> {
        Ok(Value::from(v))
    }

    fn visit_str<E>(self, v: &str) -> Result<Value, E> {
        Ok(Value::String(v.to_owned()))
    }

    fn visit_string<E>(self, v: String) -> Result<Value, E> {
        Ok(Value::String(v))
    }

    fn visit_unit<E>(self) -> Result<Value, E> {
        Ok(Value::Null)
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Value, A::Error> {
        let mut out = Vec::new();
        while let Some(v) = seq.next_element_seed(Strict {
            path: format!("{}/{}", self.path, out.len()),
            duplicate: self.duplicate,
        })? {
            out.push(v);
        }
        Ok(Value::Array(out))
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Value, A::Error> {
        let mut out = Map::new();
        while let Some(key) = map.next_key::<String>()? {
            let path = format!("{}/{}", self.path, escape(&key));
            if out.contains_key(&key) {
                *self.duplicate.borrow_mut() = Some(path.clone());
                return Err(de::Error::custom(format!("duplicate key at {path}")));
            }
            let v = map.next_value_seed(Strict {
                path,
                duplicate: self.duplicate,
            })?;
            out.insert(key, v);
        }
        Ok(Value::Object(out))
    }
}

/// Parses JSON, rejecting duplicate object keys.
pub fn parse_strict(text: &str) -> Result<Value, ConfigError> {
    let duplicate = RefCell::new(None);
    let mut de = serde_json::Deserializer::from_str(text);
    let parsed = Strict {
        path: String::new(),
        duplicate: &duplicate,
    }
    .deserialize(&mut de)
    .and_then(|v| de.end().map(|_| v));
    parsed.map_err(|e| match duplicate.into_inner() {
        Some(pointer) => ConfigError {
            pointer,
            message: "duplicate key".into(),
        },
        None => ConfigError {
            pointer: String::new(),
            message: format!("malformed JSON: {e}"),
        },
    })
}

struct Checker {
    errors: Vec<ConfigError>,
}

impl Checker {
    fn err(&mut self, pointer: &str, message: impl Into<String>) {
        self.errors.push(ConfigError {
            pointer: pointer.to_string(),
            message: message.into(),
        });
    }

    fn object<'v>(&mut self, v: &'v Value, pointer: &str, keys: &[&str]) -> Option<&'v Map<String, Value>> {
        let Some(obj) = v.as_object() else {
            self.err(pointer, "expected an object");
            return None;
        };
        for k in obj.keys() {
            if !keys.contains(&k.as_str()) {
                self.err(&format!("{pointer}/{}", escape(k)), "unknown key");
            }
        }
        Some(obj)
    }

    fn uint(&mut self, obj: &Map<String, Value>, pointer: &str, key: &str, default: u64) -> u64 {
        let p = format!("{pointer}/{key}");
        match obj.get(key) {
            None => default,
            Some(v) => match v.as_u64() {
                Some(x) => x,
                None => {
                    self.err(&p, "expected a non-negative integer");
                    default
                }
            },
        }
    }

    fn real(
        &mut self,
        obj: &Map<String, Value>,
        pointer: &str,
        key: &str,
        default: f64,
        valid: impl Fn(f64) -> bool,
        rule: &str,
    ) -> f64 {
        let p = format!("{pointer}/{key}");
        match obj.get(key) {
            None => default,
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() && valid(x) => x,
                Some(_) => {
                    self.err(&p, rule);
                    default
                }
                None => {
                    self.err(&p, "expected a number");
                    default
                }
            },
        }
    }
}

const TOP_KEYS: &[&str] = &[
    "group",
    "m",
    "n",
    "alphas",
    "mode",
    "seeds",
    "tolerances",
    "sampling",
    "search",
];

fn parse_group(v: &Value) -> Result<FiniteAbelianGroup, String> {
    match v {
        Value::String(s) => s.parse().map_err(|e| format!("{e}")),
        Value::Array(items) => {
            let mut moduli = Vec::with_capacity(items.len());
            for item in items {
                moduli.push(item.as_i64().ok_or("moduli must be integers")?);
            }
            FiniteAbelianGroup::new(&moduli).map_err(|e| e.to_string())
        }
        Value::Object(obj) => parse_group(obj.get("moduli").ok_or("missing moduli")?),
        _ => Err("expected a list of moduli or a literal such as Z3xZ4".into()),
    }
}

impl ExperimentConfig {
    /// Defaults for everything except the group and coefficients.
    pub fn new(group: FiniteAbelianGroup, alphas: Vec<Vec<AlphaEntry>>, mode: Mode) -> Self {
        ExperimentConfig {
            group,
            alphas,
            mode,
            seeds: Seeds::default(),
            tolerances: Tolerances::default(),
            sampling: Sampling::default(),
            search: SearchConfig::default(),
        }
    }

    pub fn m(&self) -> usize {
        self.alphas.len()
    }

    pub fn n(&self) -> usize {
        self.alphas.first().map_or(0, Vec::len)
    }

    pub fn system(&self) -> Result<CoefficientSystem, crate::homs::HomError> {
        CoefficientSystem::from_entries(&self.group, &self.alphas)
    }

    pub fn from_json(text: &str) -> Result<Self, Vec<ConfigError>> {
        let v = parse_strict(text).map_err(|e| vec![e])?;
        Self::from_value(&v)
    }

    /// Checks the whole document and reports every violation found, in
    /// document order of the schema.
    pub fn from_value(v: &Value) -> Result<Self, Vec<ConfigError>> {
        let mut c = Checker { errors: Vec::new() };
        let Some(top) = c.object(v, "", TOP_KEYS) else {
            return Err(c.errors);
        };
        let group = match top.get("group") {
            None => {
                c.err("/group", "missing required key");
                None
            }
            Some(g) => match parse_group(g) {
                Ok(g) => Some(g),
                Err(e) => {
                    c.err("/group", e);
                    None
                }
            },
        };
        let alphas: Option<Vec<Vec<AlphaEntry>>> = match top.get("alphas") {
            None => {
                c.err("/alphas", "missing required key");
                None
            }
            Some(a) => match serde_json::from_value::<Vec<Vec<AlphaEntry>>>(a.clone()) {
                Ok(rows) if rows.is_empty() || rows[0].is_empty() => {
                    c.err("/alphas", "need at least one form and one variable");
                    None
                }
                Ok(rows) => Some(rows),
                Err(_) => {
                    c.err("/alphas", "expected an m x n array of integers or integer matrices");
                    None
                }
            },
        };
        if let Some(rows) = &alphas {
            let n = rows[0].len();
            for (j, row) in rows.iter().enumerate() {
                if row.len() != n {
                    c.err(&format!("/alphas/{j}"), format!("expected {n} entries"));
                }
            }
            for (key, want) in [("m", rows.len()), ("n", n)] {
                if let Some(x) = top.get(key) {
                    if x.as_u64() != Some(want as u64) {
                        c.err(&format!("/{key}"), format!("does not match alphas ({want})"));
                    }
                }
            }
        }
        let mode = match top.get("mode") {
            None => Mode::Theorem1,
            Some(m) => match m.as_str().and_then(Mode::parse) {
                Some(m) => m,
                None => {
                    c.err("/mode", "expected theorem1, theorem4, theorem3 or explore-remark2");
                    Mode::Theorem1
                }
            },
        };

        let empty = Map::new();
        let section = |c: &mut Checker, key: &str, keys: &[&str]| -> Map<String, Value> {
            match top.get(key) {
                None => empty.clone(),
                Some(v) => c.object(v, &format!("/{key}"), keys).cloned().unwrap_or_default(),
            }
        };

        let s = section(&mut c, "seeds", &["master", "restarts"]);
        let d = Seeds::default();
        let seeds = Seeds {
            master: c.uint(&s, "/seeds", "master", d.master),
            restarts: c.uint(&s, "/seeds", "restarts", d.restarts as u64) as usize,
        };

        let t = section(&mut c, "tolerances", &["membership", "degeneracy", "pipeline"]);
        let d = Tolerances::default();
        let positive = |x: f64| x > 0.0;
        let tolerances = Tolerances {
            membership: c.real(&t, "/tolerances", "membership", d.membership, positive, "must be > 0"),
            degeneracy: c.real(&t, "/tolerances", "degeneracy", d.degeneracy, positive, "must be > 0"),
            pipeline: c.real(&t, "/tolerances", "pipeline", d.pipeline, positive, "must be > 0"),
        };

        let s = section(&mut c, "sampling", &["floor"]);
        let sampling = Sampling {
            floor: c.real(
                &s,
                "/sampling",
                "floor",
                Sampling::default().floor,
                |x| x > 0.5 && x < 1.0,
                "must lie strictly between 0.5 and 1",
            ),
        };

        let s = section(&mut c, "search", &["max_iterations", "initial_step", "decay", "min_step"]);
        let d = SearchConfig::default();
        let search = SearchConfig {
            max_iterations: c.uint(&s, "/search", "max_iterations", d.max_iterations as u64) as usize,
            initial_step: c.real(&s, "/search", "initial_step", d.initial_step, |x| x > 0.0 && x <= 1.0, "must lie in (0, 1]"),
            decay: c.real(&s, "/search", "decay", d.decay, |x| x > 0.0 && x < 1.0, "must lie in (0, 1)"),
            min_step: c.real(&s, "/search", "min_step", d.min_step, positive, "must be > 0"),
        };

        if let (Some(group), Some(alphas)) = (&group, &alphas) {
            if let Err(e) = CoefficientSystem::from_entries(group, alphas) {
                c.err("/alphas", e.to_string());
            }
        }
        if c.errors.is_empty() {
            Ok(ExperimentConfig {
                group: group.expect("checked"),
                alphas: alphas.expect("checked"),
                mode,
                seeds,
                tolerances,
                sampling,
                search,
            })
        } else {
            Err(c.errors)
        }
    }

    /// Normalized form with every default written out.
    pub fn to_value(&self) -> Value {
        serde_json::json!({
            "group": self.group.moduli(),
            "m": self.m(),
            "n": self.n(),
            "alphas": self.alphas,
            "mode": self.mode.as_str(),
            "seeds": self.seeds,
            "tolerances": self.tolerances,
            "sampling": self.sampling,
            "search": self.search,
        })
    }
}

//! JSON run configuration for `ttnn recon`.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use ttnn::admm::{AdmmConfig, IterationParams, ThresholdMode};
use ttnn::io::read_tensor;
use ttnn::{make_transform, TransformKind, UnitaryTransform};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    Classic,
    Generalized,
}

#[derive(Clone, Debug)]
pub struct TransformSpec {
    pub kind: String,
    pub matrix_path: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct ScheduleEntry {
    pub gamma: f64,
    pub eta: f64,
    pub threshold: ThresholdMode,
    pub transform: Option<TransformSpec>,
    pub repeat: usize,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub lambda: f64,
    pub mu: f64,
    pub eta: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub transform: TransformSpec,
    pub mode: Mode,
    pub schedule: Vec<ScheduleEntry>,
    pub seed: Option<u64>,
}

const TOP_KEYS: &[&str] = &[
    "lambda", "mu", "eta", "max_iters", "rel_tol", "transform", "mode", "schedule", "seed",
];
const ENTRY_KEYS: &[&str] = &["gamma", "eta", "tau", "a", "transform", "repeat"];

fn schema(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("config key '{key}': {msg}"))
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], at: &str) -> Result<(), CliError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(&format!("{at}{k}"), "unknown key")),
        None => Ok(()),
    }
}

fn number(obj: &Map<String, Value>, key: &str, at: &str) -> Result<Option<f64>, CliError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .map(Some)
            .ok_or_else(|| schema(&format!("{at}{key}"), format!("expected a number, got {v}"))),
    }
}

fn count(obj: &Map<String, Value>, key: &str, at: &str) -> Result<Option<u64>, CliError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| schema(&format!("{at}{key}"), format!("expected a non-negative integer, got {v}"))),
    }
}

/// A number or an array of numbers; a lone number later applies to every slice.
fn numbers(v: &Value, key: &str) -> Result<Vec<f64>, CliError> {
    if let Some(x) = v.as_f64() {
        return Ok(vec![x]);
    }
    let arr = v
        .as_array()
        .ok_or_else(|| schema(key, "expected a number or an array of numbers"))?;
    arr.iter()
        .map(|x| x.as_f64().ok_or_else(|| schema(key, format!("expected a number, got {x}"))))
        .collect()
}

fn broadcast(t: &ThresholdMode, nt: usize) -> ThresholdMode {
    match t {
        ThresholdMode::Absolute(v) if v.len() == 1 => ThresholdMode::Absolute(vec![v[0]; nt]),
        ThresholdMode::Relative(v) if v.len() == 1 => ThresholdMode::Relative(vec![v[0]; nt]),
        other => other.clone(),
    }
}

fn transform_spec(v: &Value, key: &str, base: &Path) -> Result<TransformSpec, CliError> {
    let obj = v.as_object().ok_or_else(|| schema(key, "expected an object"))?;
    check_keys(obj, &["kind", "matrix_path"], &format!("{key}."))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| schema(&format!("{key}.kind"), "expected a string"))?
        .to_string();
    let matrix_path = match obj.get("matrix_path") {
        None | Some(Value::Null) => None,
        Some(Value::String(p)) => Some(base.join(p)),
        Some(other) => return Err(schema(&format!("{key}.matrix_path"), format!("expected a string, got {other}"))),
    };
    Ok(TransformSpec { kind, matrix_path })
}

impl RunConfig {
    /// Parses a config document. Relative `matrix_path`s resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let doc: Value =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
        let obj = doc
            .as_object()
            .ok_or_else(|| CliError::Usage("config must be a JSON object".into()))?;
        check_keys(obj, TOP_KEYS, "")?;
        let defaults = AdmmConfig::new(UnitaryTransform::identity(1).expect("size 1"));
        let mode = match obj.get("mode").map(|v| v.as_str()) {
            None | Some(Some("classic")) => Mode::Classic,
            Some(Some("generalized")) => Mode::Generalized,
            Some(_) => return Err(schema("mode", "expected \"classic\" or \"generalized\"")),
        };
        let transform = match obj.get("transform") {
            Some(v) => transform_spec(v, "transform", base)?,
            None => TransformSpec { kind: "fft".into(), matrix_path: None },
        };
        let mut schedule = Vec::new();
        if let Some(v) = obj.get("schedule") {
            let arr = v.as_array().ok_or_else(|| schema("schedule", "expected an array"))?;
            for (i, e) in arr.iter().enumerate() {
                let at = format!("schedule[{i}].");
                let e = e.as_object().ok_or_else(|| schema(&format!("schedule[{i}]"), "expected an object"))?;
                check_keys(e, ENTRY_KEYS, &at)?;
                let threshold = match (e.get("tau"), e.get("a")) {
                    (Some(t), None) => ThresholdMode::Absolute(numbers(t, &format!("{at}tau"))?),
                    (None, Some(a)) => ThresholdMode::Relative(numbers(a, &format!("{at}a"))?),
                    _ => return Err(schema(&format!("{at}tau"), "exactly one of 'tau' or 'a' is required")),
                };
                schedule.push(ScheduleEntry {
                    gamma: number(e, "gamma", &at)?.ok_or_else(|| schema(&format!("{at}gamma"), "missing"))?,
                    eta: number(e, "eta", &at)?.unwrap_or(1.0),
                    threshold,
                    transform: e
                        .get("transform")
                        .map(|v| transform_spec(v, &format!("{at}transform"), base))
                        .transpose()?,
                    repeat: count(e, "repeat", &at)?.unwrap_or(1) as usize,
                });
            }
        }
        if mode == Mode::Generalized && schedule.is_empty() {
            return Err(schema("schedule", "generalized mode needs a nonempty schedule"));
        }
        Ok(Self {
            lambda: number(obj, "lambda", "")?.unwrap_or(defaults.lambda),
            mu: number(obj, "mu", "")?.unwrap_or(defaults.mu),
            eta: number(obj, "eta", "")?.unwrap_or(defaults.eta),
            max_iters: count(obj, "max_iters", "")?.map_or(defaults.max_iters, |n| n as usize),
            rel_tol: number(obj, "rel_tol", "")?.unwrap_or(defaults.rel_tol),
            transform,
            mode,
            schedule,
            seed: count(obj, "seed", "")?,
        })
    }

    pub fn admm(&self, nt: usize, seed: u64) -> Result<AdmmConfig, CliError> {
        let mut c = AdmmConfig::new(build_transform(&self.transform, nt, seed, "transform")?);
        c.lambda = self.lambda;
        c.mu = self.mu;
        c.eta = self.eta;
        c.max_iters = self.max_iters;
        c.rel_tol = self.rel_tol;
        Ok(c)
    }

    pub fn expand_schedule(&self, nt: usize, seed: u64) -> Result<Vec<IterationParams>, CliError> {
        let top = build_transform(&self.transform, nt, seed, "transform")?;
        let mut out = Vec::new();
        for (i, e) in self.schedule.iter().enumerate() {
            let transform = match &e.transform {
                Some(t) => build_transform(t, nt, seed, &format!("schedule[{i}].transform"))?,
                None => top.clone(),
            };
            let p = IterationParams {
                gamma: e.gamma,
                eta: e.eta,
                threshold: broadcast(&e.threshold, nt),
                transform,
            };
            out.extend(std::iter::repeat_n(p, e.repeat));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let transform = |t: &TransformSpec| {
            serde_json::json!({
                "kind": t.kind,
                "matrix_path": t.matrix_path.as_ref().map(|p| p.display().to_string()),
            })
        };
        let schedule: Vec<Value> = self
            .schedule
            .iter()
            .map(|e| {
                let (key, v) = match &e.threshold {
                    ThresholdMode::Absolute(t) => ("tau", t),
                    ThresholdMode::Relative(a) => ("a", a),
                };
                let mut m = Map::new();
                m.insert("gamma".into(), e.gamma.into());
                m.insert("eta".into(), e.eta.into());
                m.insert(key.into(), v.clone().into());
                m.insert("repeat".into(), e.repeat.into());
                if let Some(t) = &e.transform {
                    m.insert("transform".into(), transform(t));
                }
                Value::Object(m)
            })
            .collect();
        serde_json::json!({
            "lambda": self.lambda,
            "mu": self.mu,
            "eta": self.eta,
            "max_iters": self.max_iters,
            "rel_tol": self.rel_tol,
            "transform": transform(&self.transform),
            "mode": match self.mode { Mode::Classic => "classic", Mode::Generalized => "generalized" },
            "schedule": schedule,
            "seed": self.seed,
        })
    }
}

/// `kind` is one of the transform names, or `random` for a seeded random
/// unitary matrix.
pub fn build_transform(spec: &TransformSpec, nt: usize, seed: u64, key: &str) -> Result<UnitaryTransform, CliError> {
    if spec.kind == "random" {
        return Ok(UnitaryTransform::random_unitary(nt, seed)?);
    }
    let kind: TransformKind = spec
        .kind
        .parse()
        .map_err(|_| schema(&format!("{key}.kind"), format!("unknown transform '{}'", spec.kind)))?;
    let matrix = match (&spec.matrix_path, kind) {
        (Some(p), TransformKind::Matrix) => Some(UnitaryTransform::from_tensor(&read_tensor(p).map_err(|e| CliError::Input(p.clone(), e))?)?.dense_matrix()),
        (None, TransformKind::Matrix) => return Err(schema(&format!("{key}.matrix_path"), "required for kind 'matrix'")),
        (Some(_), _) => return Err(schema(&format!("{key}.matrix_path"), "only allowed for kind 'matrix'")),
        (None, _) => None,
    };
    Ok(make_transform(kind, nt, matrix)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, CliError> {
        RunConfig::parse(s, Path::new("."))
    }

    #[test]
    fn defaults_fill_missing_keys() {
        let c = parse("{}").unwrap();
        assert_eq!(c.max_iters, 300);
        assert_eq!(c.rel_tol, 1e-6);
        assert_eq!(c.mode, Mode::Classic);
        assert_eq!(c.transform.kind, "fft");
    }

    #[test]
    fn errors_name_the_offending_key() {
        let msg = |s: &str| parse(s).unwrap_err().to_string();
        assert!(msg(r#"{"lambda": "big"}"#).contains("'lambda'"));
        assert!(msg(r#"{"lamda": 1}"#).contains("'lamda'"));
        assert!(msg(r#"{"max_iters": -3}"#).contains("'max_iters'"));
        assert!(msg(r#"{"transform": {"kind": 3}}"#).contains("'transform.kind'"));
        assert!(msg(r#"{"mode": "generalized"}"#).contains("'schedule'"));
        assert!(msg(r#"{"mode": "generalized", "schedule": [{"tau": [1]}]}"#).contains("'schedule[0].gamma'"));
        assert!(msg(r#"{"mode": "generalized", "schedule": [{"gamma": 1}]}"#).contains("'schedule[0].tau'"));
    }

    #[test]
    fn schedule_repeat_expands() {
        let c = parse(r#"{"mode": "generalized", "transform": {"kind": "dct"},
            "schedule": [{"gamma": 2, "tau": [0.1, 0.1], "repeat": 3}, {"gamma": 1, "a": [-2, -2]}]}"#)
        .unwrap();
        let s = c.expand_schedule(2, 0).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[0].gamma, 2.0);
        assert!(matches!(s[3].threshold, ThresholdMode::Relative(_)));
    }

    #[test]
    fn scalar_threshold_covers_every_slice() {
        let c = parse(r#"{"mode": "generalized", "schedule": [{"gamma": 1, "a": -2}]}"#).unwrap();
        let s = c.expand_schedule(3, 0).unwrap();
        assert_eq!(s[0].threshold, ThresholdMode::Relative(vec![-2.0; 3]));
    }

    #[test]
    fn matrix_kind_needs_a_path() {
        let c = parse(r#"{"transform": {"kind": "matrix"}}"#).unwrap();
        assert!(c.admm(3, 0).unwrap_err().to_string().contains("matrix_path"));
        let c = parse(r#"{"transform": {"kind": "wavelet"}}"#).unwrap();
        assert!(c.admm(3, 0).is_err());
    }
}

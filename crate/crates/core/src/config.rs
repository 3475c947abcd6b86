//! JSON specifications for kernels, generating functions, test functions and
//! whole runs. Unknown keys are rejected everywhere; the shipped schema
//! `docs/run_config.schema.json` mirrors these types.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gls::{GeneratingFunction, Space, TestFunction};
use crate::kernel::HomogeneousKernel;
use crate::quadrature::QuadratureConfig;

fn strict<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Config(format!("{what}: {e}")))
}

fn has_expr(v: &Value) -> bool {
    v.as_object().is_some_and(|o| o.contains_key("expr"))
}

/// `{"family":"hilbert","m":2,"params":[c]}` or `{"expr":"...","m":2}`.
/// `m` may be omitted when the arity follows from the exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "Value")]
pub enum KernelSpec {
    Family { family: String, m: Option<usize>, params: Vec<f64> },
    Expr { expr: String, m: Option<usize> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelFamilyRaw {
    family: String,
    m: Option<usize>,
    #[serde(default)]
    params: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelExprRaw {
    expr: String,
    m: Option<usize>,
}

impl TryFrom<Value> for KernelSpec {
    type Error = Error;

    fn try_from(v: Value) -> Result<Self> {
        if has_expr(&v) {
            let r: KernelExprRaw = strict(v, "kernel spec")?;
            Ok(KernelSpec::Expr { expr: r.expr, m: r.m })
        } else {
            let r: KernelFamilyRaw = strict(v, "kernel spec")?;
            Ok(KernelSpec::Family { family: r.family, m: r.m, params: r.params })
        }
    }
}

impl From<KernelSpec> for Value {
    fn from(k: KernelSpec) -> Value {
        match k {
            KernelSpec::Family { family, m, params } => serde_json::json!({"family": family, "m": m, "params": params}),
            KernelSpec::Expr { expr, m } => serde_json::json!({"expr": expr, "m": m}),
        }
    }
}

/// Outcome of building a kernel: parsed kernels pass through the
/// homogeneity gate unless it is waived.
#[derive(Debug, Clone)]
pub struct BuiltKernel {
    pub kernel: HomogeneousKernel<f64>,
    /// Largest relative homogeneity defect, when the gate was run.
    pub gate_violation: Option<f64>,
}

/// Samples and dilations of the homogeneity gate.
pub const GATE_SAMPLES: usize = 1000;
pub const GATE_DELTAS: [f64; 3] = [0.5, 2.0, 10.0];
pub const GATE_TOL: f64 = 1e-10;

impl KernelSpec {
    pub fn arity(&self) -> Option<usize> {
        match self {
            KernelSpec::Family { m, .. } | KernelSpec::Expr { m, .. } => *m,
        }
    }

    /// `inferred_m` fills in a missing arity; a conflicting one is an error.
    pub fn build(&self, inferred_m: Option<usize>, unchecked: bool, seed: u64) -> Result<BuiltKernel> {
        let m = match (self.arity(), inferred_m) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Dimension(format!("kernel declares m = {a} but {b} exponents/functions were given")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::Config("kernel arity `m` is required here".into())),
        };
        match self {
            KernelSpec::Family { family, params, .. } => {
                Ok(BuiltKernel { kernel: HomogeneousKernel::builtin(family, m, params)?, gate_violation: None })
            }
            KernelSpec::Expr { expr, .. } => {
                let k = HomogeneousKernel::parse(expr, m)?;
                if unchecked {
                    return Ok(BuiltKernel { kernel: k.assume_homogeneous(), gate_violation: None });
                }
                let (k, report) = k.certify(GATE_SAMPLES, &GATE_DELTAS, GATE_TOL, seed)?;
                if !report.pass {
                    return Err(Error::Config(format!(
                        "kernel `{expr}` is not homogeneous of degree −{m} (max relative defect {:e}); pass --unchecked to override",
                        report.max_violation
                    )));
                }
                Ok(BuiltKernel { kernel: k, gate_violation: Some(report.max_violation) })
            }
        }
    }
}

/// Generating function spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "Value")]
pub enum PsiSpec {
    Family(PsiFamilySpec),
    Expr { expr: String, a: f64, b: Option<f64>, scale: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiFamilySpec {
    Power { m: f64, scale: Option<f64> },
    TwoSided { a: f64, b: Option<f64>, alpha: f64, beta: f64, scale: Option<f64> },
    Extremal { r: f64, scale: Option<f64> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PsiExprRaw {
    expr: String,
    a: f64,
    /// null or absent for b = ∞
    b: Option<f64>,
    scale: Option<f64>,
}

impl TryFrom<Value> for PsiSpec {
    type Error = Error;

    fn try_from(v: Value) -> Result<Self> {
        if has_expr(&v) {
            let r: PsiExprRaw = strict(v, "ψ spec")?;
            Ok(PsiSpec::Expr { expr: r.expr, a: r.a, b: r.b, scale: r.scale })
        } else {
            Ok(PsiSpec::Family(strict(v, "ψ spec")?))
        }
    }
}

impl From<PsiSpec> for Value {
    fn from(p: PsiSpec) -> Value {
        match p {
            PsiSpec::Family(f) => serde_json::to_value(f).unwrap_or(Value::Null),
            PsiSpec::Expr { expr, a, b, scale } => serde_json::json!({"expr": expr, "a": a, "b": b, "scale": scale}),
        }
    }
}

fn upper(b: Option<f64>) -> f64 {
    b.unwrap_or(f64::INFINITY)
}

impl PsiSpec {
    pub fn build(&self) -> Result<GeneratingFunction<f64>> {
        let (psi, scale) = match self {
            PsiSpec::Family(PsiFamilySpec::Power { m, scale }) => (GeneratingFunction::power(*m)?, scale),
            PsiSpec::Family(PsiFamilySpec::TwoSided { a, b, alpha, beta, scale }) => {
                (GeneratingFunction::two_sided(*a, upper(*b), *alpha, *beta)?, scale)
            }
            PsiSpec::Family(PsiFamilySpec::Extremal { r, scale }) => (GeneratingFunction::extremal(*r)?, scale),
            PsiSpec::Expr { expr, a, b, scale } => (GeneratingFunction::custom(expr, *a, upper(*b))?, scale),
        };
        match scale {
            Some(c) => psi.scaled(*c),
            None => Ok(psi),
        }
    }
}

/// Test function spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "Value")]
pub enum FunctionSpec {
    Family(FunctionFamilySpec),
    Expr { expr: String, lo: f64, hi: Option<f64>, space: Space },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionFamilySpec {
    /// c·x^(−alpha) on (lo, hi].
    Power {
        #[serde(default = "one")]
        c: f64,
        alpha: f64,
        #[serde(default)]
        lo: f64,
        hi: Option<f64>,
        #[serde(default)]
        space: Space,
    },
    Indicator {
        #[serde(default)]
        lo: f64,
        hi: f64,
    },
    /// x^(−alpha) on (0, 1].
    TruncatedPower { alpha: f64 },
    Zero,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionExprRaw {
    expr: String,
    #[serde(default)]
    lo: f64,
    hi: Option<f64>,
    #[serde(default)]
    space: Space,
}

impl TryFrom<Value> for FunctionSpec {
    type Error = Error;

    fn try_from(v: Value) -> Result<Self> {
        if has_expr(&v) {
            let r: FunctionExprRaw = strict(v, "function spec")?;
            Ok(FunctionSpec::Expr { expr: r.expr, lo: r.lo, hi: r.hi, space: r.space })
        } else {
            Ok(FunctionSpec::Family(strict(v, "function spec")?))
        }
    }
}

impl From<FunctionSpec> for Value {
    fn from(f: FunctionSpec) -> Value {
        match f {
            FunctionSpec::Family(f) => serde_json::to_value(f).unwrap_or(Value::Null),
            FunctionSpec::Expr { expr, lo, hi, space } => serde_json::json!({"expr": expr, "lo": lo, "hi": hi, "space": space}),
        }
    }
}

impl FunctionSpec {
    pub fn build(&self) -> Result<TestFunction<f64>> {
        match self {
            FunctionSpec::Family(FunctionFamilySpec::Power { c, alpha, lo, hi, space }) => {
                let f = TestFunction::power(*c, *alpha, *lo, upper(*hi))?;
                Ok(if *space == Space::HalfLine { f } else { TestFunction::new(f.shape().clone(), *lo, upper(*hi), *space)? })
            }
            FunctionSpec::Family(FunctionFamilySpec::Indicator { lo, hi }) => TestFunction::indicator(*lo, *hi),
            FunctionSpec::Family(FunctionFamilySpec::TruncatedPower { alpha }) => TestFunction::truncated_power(*alpha),
            FunctionSpec::Family(FunctionFamilySpec::Zero) => Ok(TestFunction::zero()),
            FunctionSpec::Expr { expr, lo, hi, space } => TestFunction::expr(expr, *lo, upper(*hi), *space),
        }
    }
}

/// Grid of exponents: `"start:stop:step"` (inclusive) or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range(String),
    List(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::List(v) => Ok(v.clone()),
            GridSpec::Range(s) => parse_grid(s),
        }
    }
}

/// `"a:b:h"` → a, a+h, …, up to b inclusive; otherwise a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("malformed grid `{s}`: expected start:stop:step or a comma list"));
    if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
        let [a, b, h] = parts[..] else { return Err(bad()) };
        if !(h > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
            return Err(bad());
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        if n > 1_000_000 {
            return Err(Error::Config(format!("grid `{s}` has more than 10⁶ points")));
        }
        // multiply rather than accumulate so every point is reproducible
        Ok((0..=n).map(|i| a + i as f64 * h).collect())
    } else {
        parse_list(s)
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t {
                "inf" | "+inf" | "∞" => Ok(f64::INFINITY),
                _ => t.parse::<f64>().map_err(|_| Error::Config(format!("`{t}` is not a number"))),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything a run needs; command-line flags override these values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: Option<KernelSpec>,
    pub psi: Option<Vec<PsiSpec>>,
    pub f: Option<Vec<FunctionSpec>>,
    pub p: Option<Vec<f64>>,
    pub p_grid: Option<GridSpec>,
    pub grid: Option<GridSpec>,
    pub norms: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_evals: Option<usize>,
    pub level_cap: Option<u32>,
    pub seed: Option<u64>,
    pub unchecked: Option<bool>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("run config: {e}")))
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig> {
        let d = QuadratureConfig::default();
        let cfg = QuadratureConfig {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            max_evals: self.max_evals.unwrap_or(d.max_evals),
            level_cap: self.level_cap.unwrap_or(d.level_cap),
            seed: self.seed.unwrap_or(d.seed),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A spec argument: inline JSON (object or array) or comma-separated paths
/// to files holding one object or an array each.
pub fn load_specs<S: for<'de> Deserialize<'de>>(arg: &str) -> Result<Vec<S>> {
    let arg = arg.trim();
    if arg.starts_with('{') || arg.starts_with('[') {
        return parse_specs(arg, "inline spec");
    }
    let mut out = Vec::new();
    for path in arg.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read `{path}`: {e}")))?;
        out.extend(parse_specs::<S>(&text, path)?);
    }
    Ok(out)
}

fn parse_specs<S: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<Vec<S>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
    match v {
        Value::Array(items) => items.into_iter().map(|i| strict(i, origin)).collect(),
        other => Ok(vec![strict(other, origin)?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_specs() {
        let k: KernelSpec = serde_json::from_str(r#"{"family":"hilbert","m":2}"#).unwrap();
        let built = k.build(None, false, 0).unwrap();
        assert_eq!(built.kernel.arity(), 2);
        let k: KernelSpec = serde_json::from_str(r#"{"expr":"1/(x+x1+x2)^2","m":2}"#).unwrap();
        let built = k.build(None, false, 0).unwrap();
        assert!(built.gate_violation.unwrap() < 1e-12);
        let bad: KernelSpec = serde_json::from_str(r#"{"expr":"1/(1+x+x1+x2)^2","m":2}"#).unwrap();
        assert!(matches!(bad.build(None, false, 0), Err(Error::Config(_))));
        assert!(bad.build(None, true, 0).unwrap().kernel.passes_gate());
        assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"hilbert","m":2,"colour":1}"#).is_err());
        assert!(serde_json::from_str::<KernelSpec>(r#"{"expr":"x1","m":2,"family":"hardy"}"#).is_err());
        let k: KernelSpec = serde_json::from_str(r#"{"family":"hardy"}"#).unwrap();
        assert_eq!(k.build(Some(3), false, 0).unwrap().kernel.arity(), 3);
        assert!(matches!(k.build(None, false, 0), Err(Error::Config(_))));
    }

    #[test]
    fn psi_specs() {
        for (text, p, expect) in [
            (r#"{"family":"power","m":2}"#, 4.0, 2.0),
            (r#"{"family":"two_sided","a":1,"b":4,"alpha":0,"beta":1}"#, 3.0, 1.0),
            (r#"{"family":"extremal","r":2}"#, 2.0, 1.0),
            (r#"{"expr":"1 + 1/p","a":1}"#, 2.0, 1.5),
            (r#"{"expr":"p","a":1,"b":3,"scale":2}"#, 2.0, 4.0),
        ] {
            let spec: PsiSpec = serde_json::from_str(text).unwrap();
            assert_eq!(spec.build().unwrap().eval(p), expect, "{text}");
        }
        assert!(serde_json::from_str::<PsiSpec>(r#"{"family":"power","m":2,"r":1}"#).is_err());
        assert!(serde_json::from_str::<PsiSpec>(r#"{"family":"gaussian"}"#).is_err());
    }

    #[test]
    fn function_specs() {
        let f: FunctionSpec = serde_json::from_str(r#"{"family":"power","alpha":0.25,"hi":1}"#).unwrap();
        assert_eq!(f.build().unwrap().eval(0.0625), 2.0);
        let f: FunctionSpec = serde_json::from_str(r#"{"family":"indicator","hi":2}"#).unwrap();
        assert_eq!(f.build().unwrap().eval(1.5), 1.0);
        let f: FunctionSpec = serde_json::from_str(r#"{"expr":"exp(-x)","hi":null}"#).unwrap();
        assert!((f.build().unwrap().eval(1.0) - (-1f64).exp()).abs() < 1e-15);
        let f: FunctionSpec = serde_json::from_str(r#"{"family":"zero"}"#).unwrap();
        assert!(f.build().unwrap().is_zero());
        assert!(serde_json::from_str::<FunctionSpec>(r#"{"family":"truncated_power","alpha":0.1,"lo":0}"#).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.5:1.5:0.25").unwrap(), vec![0.5, 0.75, 1.0, 1.25, 1.5]);
        assert_eq!(parse_grid("1,2,inf").unwrap(), vec![1.0, 2.0, f64::INFINITY]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("1:2").is_err());
        let g: GridSpec = serde_json::from_str("[1, 2]").unwrap();
        assert_eq!(g.values().unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn run_config_rejects_unknown_keys() {
        let c = RunConfig::from_json(r#"{"kernel":{"family":"hilbert","m":2},"p":[2,2],"rel_tol":1e-6}"#).unwrap();
        assert_eq!(c.quadrature().unwrap().rel_tol, 1e-6);
        assert!(RunConfig::from_json(r#"{"kernal":{}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"rel_tol":2}"#).unwrap().quadrature().is_err());
    }

    #[test]
    fn shipped_schema_matches_run_config() {
        let schema: Value = serde_json::from_str(include_str!("../../../docs/run_config.schema.json")).unwrap();
        let mut documented: Vec<&String> = schema["properties"].as_object().unwrap().keys().collect();
        documented.sort();
        let fields = serde_json::to_value(RunConfig::default()).unwrap();
        let mut actual: Vec<&String> = fields.as_object().unwrap().keys().collect();
        actual.sort();
        assert_eq!(documented, actual);
        assert_eq!(schema["additionalProperties"], Value::Bool(false));
    }
}

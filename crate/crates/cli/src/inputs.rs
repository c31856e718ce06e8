use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{json, Value};
use stabkit::cube::{constant, dictator, majority, parity, random_dyadic, FunctionFile};
use stabkit::scalar::parse_rational;
use stabkit::sos::{vars, ConstraintSet, Polynomial, Vars};
use stabkit::ug::{toy_instance, GeneratorKind, UgInstance};
use stabkit::{ExactFunction, Rational, Scalar};

use crate::CliError;

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn rational(s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(CliError::from)
}

/// A truth table named on the command line or read from a function file.
#[derive(Args, Debug, Clone)]
pub struct FunctionArgs {
    /// majority, dictator, parity, constant, random, or a function file.
    #[arg(long = "f", default_value = "majority")]
    pub f: String,
    /// Dimension for named functions.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// 1-based coordinate of the dictator.
    #[arg(long, default_value_t = 1)]
    pub coord: usize,
    /// Value of the constant function.
    #[arg(long, default_value = "1/2")]
    pub value: String,
    /// Dyadic precision of random tables.
    #[arg(long, default_value_t = 6)]
    pub bits: u32,
}

impl FunctionArgs {
    pub fn load(&self, seed: u64) -> Result<ExactFunction, CliError> {
        named_function(&self.f, self.n, self.coord, &self.value, self.bits, seed)
    }
}

pub fn named_function(
    name: &str,
    n: usize,
    coord: usize,
    value: &str,
    bits: u32,
    seed: u64,
) -> Result<ExactFunction, CliError> {
    Ok(match name {
        "majority" | "maj" => majority(n)?,
        "dictator" => dictator(n, coord)?,
        // (1 + χ)/2 so the table lives in [0, 1] like the others.
        "parity" => {
            let chi = parity::<Rational>(n, &(1..=n).collect::<Vec<_>>())?;
            let half = Rational::from_ratio(1, 2);
            let values = chi.values().iter().map(|v| (v + Rational::from_int(1)) * &half).collect();
            ExactFunction::new(n, values, stabkit::cube::RangeTag::UnitInterval)?
        }
        "constant" => constant(n, rational(value)?)?,
        "random" => random_dyadic(n, bits, seed)?,
        path => {
            let file: FunctionFile = serde_json::from_value(read_json(Path::new(path))?)
                .map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
            file.to_function()?
        }
    })
}

/// A polynomial problem: variables, a target and constraints.
#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// Comma-separated variable names.
    #[arg(long, default_value = "y")]
    pub vars: String,
    /// Polynomial to certify nonnegative.
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    /// Equality constraint p = 0 (repeatable).
    #[arg(long = "eq", allow_hyphen_values = true)]
    pub equalities: Vec<String>,
    /// Inequality constraint q ≥ 0 (repeatable).
    #[arg(long = "ineq", allow_hyphen_values = true)]
    pub inequalities: Vec<String>,
}

impl ProblemArgs {
    pub fn variables(&self) -> Vars {
        let names: Vec<&str> = self.vars.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        vars(&names)
    }

    pub fn constraints(&self, v: &Vars) -> Result<ConstraintSet, CliError> {
        let eq: Vec<&str> = self.equalities.iter().map(String::as_str).collect();
        let ineq: Vec<&str> = self.inequalities.iter().map(String::as_str).collect();
        Ok(ConstraintSet::parse(v, &eq, &ineq)?)
    }
}

/// Problem fields stored next to a certificate or moment table:
/// `"variables"`, `"target"`, `"equalities"`, `"inequalities"`.
pub fn problem_from_json(v: &Value) -> Result<(Vars, Option<Polynomial>, ConstraintSet), CliError> {
    let strings = |key: &str| -> Result<Vec<String>, CliError> {
        match v.get(key) {
            None => Ok(Vec::new()),
            Some(x) => serde_json::from_value(x.clone()).map_err(|e| CliError::Usage(format!("{key}: {e}"))),
        }
    };
    let names = strings("variables")?;
    if names.is_empty() {
        return Err(CliError::Usage("file lacks \"variables\"".into()));
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let vs = vars(&refs);
    let target = match v.get("target").and_then(Value::as_str) {
        Some(t) => Some(Polynomial::parse(&vs, t)?),
        None => None,
    };
    let eq = strings("equalities")?;
    let ineq = strings("inequalities")?;
    let eq: Vec<&str> = eq.iter().map(String::as_str).collect();
    let ineq: Vec<&str> = ineq.iter().map(String::as_str).collect();
    let a = ConstraintSet::parse(&vs, &eq, &ineq)?;
    Ok((vs, target, a))
}

pub fn problem_json(target: &Polynomial, a: &ConstraintSet) -> Value {
    json!({
        "variables": *a.vars,
        "target": target.to_string(),
        "equalities": a.equalities.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "inequalities": a.inequalities.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
    })
}

/// A Unique Games instance from a file or a generator.
#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// Instance file; omit to generate one.
    pub instance: Option<PathBuf>,
    /// perfect, cycle-shift or random.
    #[arg(long, default_value = "perfect")]
    pub generate: String,
    #[arg(long, default_value_t = 4)]
    pub vertices: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
}

impl InstanceArgs {
    /// The instance and, for generated perfect ones, the hidden labeling.
    pub fn load(&self, seed: u64) -> Result<(UgInstance, Option<Vec<usize>>), CliError> {
        match &self.instance {
            Some(p) => Ok((UgInstance::from_json(&read_json(p)?)?, None)),
            None => {
                let kind: GeneratorKind = self.generate.parse()?;
                let g = toy_instance(kind, self.vertices, self.k, self.degree, seed)?;
                Ok((g.instance, g.hidden_labeling))
            }
        }
    }
}

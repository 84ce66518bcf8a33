//! Parametric templates: formulas whose predicate constants and window
//! bounds may be named parameter slots, plus their monotonicity analysis.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Expr, Formula, Interval};
use crate::parse::{parse_slots, ParseError};

/// Either a fixed value or a named parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Slot<T> {
    Fixed(T),
    Param(String),
}

impl<T> Slot<T> {
    pub fn fixed(&self) -> Option<&T> {
        match self {
            Slot::Fixed(v) => Some(v),
            Slot::Param(_) => None,
        }
    }

    pub fn param(&self) -> Option<&str> {
        match self {
            Slot::Fixed(_) => None,
            Slot::Param(p) => Some(p),
        }
    }
}

impl<T: fmt::Display> fmt::Display for Slot<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Fixed(v) => v.fmt(f),
            Slot::Param(p) => write!(f, "?{p}"),
        }
    }
}

/// Window whose bounds may be parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub lo: Slot<u32>,
    pub hi: Slot<u32>,
}

impl Window {
    pub fn params(lo: impl Into<String>, hi: impl Into<String>) -> Self {
        Window { lo: Slot::Param(lo.into()), hi: Slot::Param(hi.into()) }
    }

    pub fn fixed(iv: Interval) -> Self {
        Window { lo: Slot::Fixed(iv.a()), hi: Slot::Fixed(iv.b()) }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

pub type SlotTree = Expr<Slot<f64>, Window>;

/// Monotonicity of satisfaction (and of every positive count) in a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Monotonicity {
    /// Increasing the parameter never turns satisfaction into violation.
    #[serde(rename = "I")]
    Increasing,
    #[serde(rename = "D")]
    Decreasing,
}

impl Monotonicity {
    pub fn flip(self) -> Self {
        match self {
            Monotonicity::Increasing => Monotonicity::Decreasing,
            Monotonicity::Decreasing => Monotonicity::Increasing,
        }
    }
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotonicity::Increasing => "I",
            Monotonicity::Decreasing => "D",
        })
    }
}

/// Where a parameter sits in the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamKind {
    /// Constant of a predicate over the named variable.
    Value { var: String },
    /// Lower bound `a` of a window.
    TimeLower,
    /// Upper bound `b` of a window.
    TimeUpper,
}

impl ParamKind {
    pub fn is_time(&self) -> bool {
        !matches!(self, ParamKind::Value { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamInfo {
    pub name: String,
    pub kind: ParamKind,
    pub monotonicity: Monotonicity,
    /// For window bounds: the other end of the same window.
    pub partner: Option<Slot<u32>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemplateError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("parameter `{0}` occurs more than once")]
    DuplicateParameter(String),
    #[error("no value for parameter `{0}`")]
    MissingParameter(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("window bound `{name}` = {value} is not a non-negative integer")]
    InvalidTimeValue { name: String, value: f64 },
    #[error("instantiated window [{a},{b}] has a > b")]
    IntervalViolation { a: u32, b: u32 },
}

/// A parametric formula with its ordered parameter list.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    tree: SlotTree,
    params: Vec<ParamInfo>,
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.tree.fmt(f)
    }
}

impl From<&Formula> for Template {
    fn from(f: &Formula) -> Self {
        let tree = f
            .try_map::<_, _, std::convert::Infallible>(&mut |c| Ok(Slot::Fixed(*c)), &mut |w| Ok(Window::fixed(*w)))
            .unwrap();
        Template { tree, params: Vec::new() }
    }
}

impl Template {
    /// Builds a template, collecting parameters in textual order.
    pub fn new(tree: SlotTree) -> Result<Self, TemplateError> {
        let mut params = Vec::new();
        collect_params(&tree, false, &mut params);
        for (i, p) in params.iter().enumerate() {
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(TemplateError::DuplicateParameter(p.name.clone()));
            }
        }
        Ok(Template { tree, params })
    }

    /// Parses template text, checking variables against `schema`.
    pub fn parse(text: &str, schema: &[String]) -> Result<Self, TemplateError> {
        let (tree, _) = parse_slots(text, Some(schema))?;
        Template::new(tree)
    }

    pub fn parse_unchecked(text: &str) -> Result<Self, TemplateError> {
        let (tree, _) = parse_slots(text, None)?;
        Template::new(tree)
    }

    pub fn tree(&self) -> &SlotTree {
        &self.tree
    }

    pub fn params(&self) -> &[ParamInfo] {
        &self.params
    }

    pub fn param_names(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn operator_count(&self) -> usize {
        self.tree.operator_count()
    }

    /// Syntactic monotonicity tag of `name`.
    pub fn monotonicity(&self, name: &str) -> Result<Monotonicity, TemplateError> {
        self.params
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.monotonicity)
            .ok_or_else(|| TemplateError::UnknownParameter(name.to_string()))
    }

    /// Wraps the template as `not (self)`.
    pub fn negate(&self) -> Template {
        Template::new(Expr::not(self.tree.clone())).expect("negation keeps parameters unique")
    }

    /// Replaces every parameter by its value in `v`.
    pub fn instantiate(&self, v: &Valuation) -> Result<Formula, TemplateError> {
        let values = self
            .params
            .iter()
            .map(|p| v.get(&p.name).ok_or_else(|| TemplateError::MissingParameter(p.name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        self.instantiate_values(&values)
    }

    /// Positional variant of [`Template::instantiate`]; `values[i]` is the
    /// value of `params()[i]`.
    pub fn instantiate_values(&self, values: &[f64]) -> Result<Formula, TemplateError> {
        let lookup = |name: &str| -> Result<f64, TemplateError> {
            self.param_index(name)
                .and_then(|i| values.get(i).copied())
                .ok_or_else(|| TemplateError::MissingParameter(name.to_string()))
        };
        let time = |slot: &Slot<u32>| -> Result<u32, TemplateError> {
            match slot {
                Slot::Fixed(v) => Ok(*v),
                Slot::Param(name) => {
                    let value = lookup(name)?;
                    time_value(value).ok_or_else(|| TemplateError::InvalidTimeValue { name: name.clone(), value })
                }
            }
        };
        self.tree.try_map(
            &mut |c: &Slot<f64>| match c {
                Slot::Fixed(v) => Ok(*v),
                Slot::Param(name) => lookup(name),
            },
            &mut |w: &Window| {
                let (a, b) = (time(&w.lo)?, time(&w.hi)?);
                Interval::new(a, b).ok_or(TemplateError::IntervalViolation { a, b })
            },
        )
    }

    /// Builds a valuation from positional values.
    pub fn valuation(&self, values: &[f64]) -> Valuation {
        Valuation(self.params.iter().zip(values).map(|(p, v)| (p.name.clone(), *v)).collect())
    }

    /// Renames parameters to `prefix1, prefix2, ...` in textual order.
    pub fn renumbered(&self, prefix: &str) -> Template {
        let names: IndexMap<&str, String> =
            self.params.iter().enumerate().map(|(i, p)| (p.name.as_str(), format!("{prefix}{}", i + 1))).collect();
        let rename = |name: &String| names.get(name.as_str()).cloned().unwrap_or_else(|| name.clone());
        let tree = self
            .tree
            .try_map::<_, _, std::convert::Infallible>(
                &mut |c| {
                    Ok(match c {
                        Slot::Param(p) => Slot::Param(rename(p)),
                        f => f.clone(),
                    })
                },
                &mut |w| {
                    let re = |s: &Slot<u32>| match s {
                        Slot::Param(p) => Slot::Param(rename(p)),
                        f => f.clone(),
                    };
                    Ok(Window { lo: re(&w.lo), hi: re(&w.hi) })
                },
            )
            .unwrap();
        Template::new(tree).expect("renaming keeps parameters unique")
    }
}

/// Converts a grid value to a window bound when it is a non-negative integer.
pub(crate) fn time_value(v: f64) -> Option<u32> {
    (v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64).then_some(v as u32)
}

fn collect_params(tree: &SlotTree, negated: bool, out: &mut Vec<ParamInfo>) {
    use Monotonicity::{Decreasing as D, Increasing as I};
    let tag = |base: Monotonicity| if negated { base.flip() } else { base };
    let window = |w: &Window, lo_tag: Monotonicity, hi_tag: Monotonicity, out: &mut Vec<ParamInfo>| {
        if let Slot::Param(name) = &w.lo {
            out.push(ParamInfo {
                name: name.clone(),
                kind: ParamKind::TimeLower,
                monotonicity: tag(lo_tag),
                partner: Some(w.hi.clone()),
            });
        }
        if let Slot::Param(name) = &w.hi {
            out.push(ParamInfo {
                name: name.clone(),
                kind: ParamKind::TimeUpper,
                monotonicity: tag(hi_tag),
                partner: Some(w.lo.clone()),
            });
        }
    };
    match tree {
        Expr::True => {}
        Expr::Pred { var, cmp, value } => {
            if let Slot::Param(name) = value {
                let base = match cmp {
                    crate::formula::Cmp::Lt => I,
                    crate::formula::Cmp::Gt => D,
                };
                out.push(ParamInfo {
                    name: name.clone(),
                    kind: ParamKind::Value { var: var.clone() },
                    monotonicity: tag(base),
                    partner: None,
                });
            }
        }
        Expr::Not { arg } => collect_params(arg, !negated, out),
        Expr::And { lhs, rhs } | Expr::Or { lhs, rhs } => {
            collect_params(lhs, negated, out);
            collect_params(rhs, negated, out);
        }
        Expr::Prev { interval, arg } => {
            window(interval, D, I, out);
            collect_params(arg, negated, out);
        }
        Expr::Always { interval, arg } => {
            window(interval, I, D, out);
            collect_params(arg, negated, out);
        }
        Expr::Since { interval, lhs, rhs } => {
            // textual order: lhs, window, rhs
            collect_params(lhs, negated, out);
            window(interval, D, I, out);
            collect_params(rhs, negated, out);
        }
    }
}

/// Assignment of values to parameter names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Valuation(pub IndexMap<String, f64>);

impl Valuation {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.0.insert(name.into(), value);
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        Valuation(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Time,
    Value,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("domain bounds must be finite with lower <= upper (got {lower}..{upper})")]
    Bounds { lower: f64, upper: f64 },
    #[error("domain step must be positive and finite (got {0})")]
    Step(f64),
    #[error("time domain values must be non-negative integers (got lower {lower}, step {step})")]
    TimeGrid { lower: f64, step: f64 },
}

/// Discretized range `{lower, lower + step, ...} ∩ [lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
    pub kind: DomainKind,
}

impl ParamDomain {
    pub fn new(lower: f64, upper: f64, step: f64, kind: DomainKind) -> Result<Self, DomainError> {
        let d = ParamDomain { lower, upper, step, kind };
        d.validate()?;
        Ok(d)
    }

    pub fn time(lower: u32, upper: u32, step: u32) -> Result<Self, DomainError> {
        Self::new(lower as f64, upper as f64, step as f64, DomainKind::Time)
    }

    pub fn value(lower: f64, upper: f64, step: f64) -> Result<Self, DomainError> {
        Self::new(lower, upper, step, DomainKind::Value)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower <= self.upper) {
            return Err(DomainError::Bounds { lower: self.lower, upper: self.upper });
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(DomainError::Step(self.step));
        }
        if self.kind == DomainKind::Time && (time_value(self.lower).is_none() || time_value(self.step).is_none()) {
            return Err(DomainError::TimeGrid { lower: self.lower, step: self.step });
        }
        Ok(())
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        ((self.upper - self.lower) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ascending grid points. Value grids are rounded to 13 significant
    /// digits so that accumulated step error does not leak into printed
    /// formulas.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let v = self.lower + i as f64 * self.step;
                match self.kind {
                    DomainKind::Time => v.round(),
                    DomainKind::Value => format!("{v:.12e}").parse().unwrap_or(v),
                }
            })
            .collect()
    }
}

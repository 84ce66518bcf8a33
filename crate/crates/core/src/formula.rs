//! Abstract syntax for past-time STL.
//!
//! The tree is generic over the type stored in predicate constants (`C`)
//! and in temporal windows (`W`). Concrete formulas use `f64` and
//! [`Interval`]; parametric templates (see [`crate::template`]) reuse the
//! same tree with parameter slots in those positions.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Comparison used by an atomic predicate `x < c` / `x > c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl Cmp {
    #[inline]
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Gt => ">",
        }
    }
}

/// A closed window `[a, b]` of integer time steps into the past, `a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct Interval {
    a: u32,
    b: u32,
}

#[derive(Deserialize)]
struct RawInterval {
    a: u32,
    b: u32,
}

impl TryFrom<RawInterval> for Interval {
    type Error = String;

    fn try_from(raw: RawInterval) -> Result<Self, Self::Error> {
        Interval::new(raw.a, raw.b).ok_or_else(|| format!("interval [{},{}] has a > b", raw.a, raw.b))
    }
}

impl Interval {
    /// Returns `None` when `a > b`.
    pub fn new(a: u32, b: u32) -> Option<Self> {
        (a <= b).then_some(Interval { a, b })
    }

    pub fn a(self) -> u32 {
        self.a
    }

    pub fn b(self) -> u32 {
        self.b
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.a, self.b)
    }
}

/// Past-time STL syntax tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr<C, W> {
    True,
    Pred {
        var: String,
        cmp: Cmp,
        value: C,
    },
    Not {
        arg: Box<Expr<C, W>>,
    },
    And {
        lhs: Box<Expr<C, W>>,
        rhs: Box<Expr<C, W>>,
    },
    Or {
        lhs: Box<Expr<C, W>>,
        rhs: Box<Expr<C, W>>,
    },
    /// Previously: the operand held at some point of the window.
    Prev {
        interval: W,
        arg: Box<Expr<C, W>>,
    },
    /// Always: the operand held at every point of the window.
    Always {
        interval: W,
        arg: Box<Expr<C, W>>,
    },
    Since {
        interval: W,
        lhs: Box<Expr<C, W>>,
        rhs: Box<Expr<C, W>>,
    },
}

/// A concrete formula.
pub type Formula = Expr<f64, Interval>;

impl<C, W> Expr<C, W> {
    pub fn pred(var: impl Into<String>, cmp: Cmp, value: C) -> Self {
        Expr::Pred { var: var.into(), cmp, value }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(arg: Self) -> Self {
        Expr::Not { arg: Box::new(arg) }
    }

    pub fn and(lhs: Self, rhs: Self) -> Self {
        Expr::And { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn or(lhs: Self, rhs: Self) -> Self {
        Expr::Or { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn prev(interval: W, arg: Self) -> Self {
        Expr::Prev { interval, arg: Box::new(arg) }
    }

    pub fn always(interval: W, arg: Self) -> Self {
        Expr::Always { interval, arg: Box::new(arg) }
    }

    pub fn since(interval: W, lhs: Self, rhs: Self) -> Self {
        Expr::Since { interval, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    /// `not true`, the canonical false.
    pub fn falsity() -> Self {
        Expr::not(Expr::True)
    }

    /// Number of Boolean and temporal operators. `true` and predicates count 0.
    pub fn operator_count(&self) -> usize {
        match self {
            Expr::True | Expr::Pred { .. } => 0,
            Expr::Not { arg } | Expr::Prev { arg, .. } | Expr::Always { arg, .. } => 1 + arg.operator_count(),
            Expr::And { lhs, rhs } | Expr::Or { lhs, rhs } | Expr::Since { lhs, rhs, .. } => {
                1 + lhs.operator_count() + rhs.operator_count()
            }
        }
    }

    /// Variable names in order of first appearance.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Pred { var, .. } = e {
                if !out.contains(&var.as_str()) {
                    out.push(var.as_str());
                }
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Self)) {
        f(self);
        match self {
            Expr::True | Expr::Pred { .. } => {}
            Expr::Not { arg } | Expr::Prev { arg, .. } | Expr::Always { arg, .. } => arg.visit(f),
            Expr::And { lhs, rhs } | Expr::Or { lhs, rhs } | Expr::Since { lhs, rhs, .. } => {
                lhs.visit(f);
                rhs.visit(f);
            }
        }
    }

    /// Rebuilds the tree with new leaf payloads. Errors from either mapper
    /// abort the rebuild.
    pub fn try_map<C2, W2, E>(
        &self,
        value: &mut impl FnMut(&C) -> Result<C2, E>,
        window: &mut impl FnMut(&W) -> Result<W2, E>,
    ) -> Result<Expr<C2, W2>, E> {
        Ok(match self {
            Expr::True => Expr::True,
            Expr::Pred { var, cmp, value: c } => Expr::Pred { var: var.clone(), cmp: *cmp, value: value(c)? },
            Expr::Not { arg } => Expr::not(arg.try_map(value, window)?),
            Expr::And { lhs, rhs } => Expr::and(lhs.try_map(value, window)?, rhs.try_map(value, window)?),
            Expr::Or { lhs, rhs } => Expr::or(lhs.try_map(value, window)?, rhs.try_map(value, window)?),
            Expr::Prev { interval, arg } => Expr::prev(window(interval)?, arg.try_map(value, window)?),
            Expr::Always { interval, arg } => Expr::always(window(interval)?, arg.try_map(value, window)?),
            Expr::Since { interval, lhs, rhs } => {
                let w = window(interval)?;
                Expr::since(w, lhs.try_map(value, window)?, rhs.try_map(value, window)?)
            }
        })
    }
}

impl<C: fmt::Display, W: fmt::Display> Expr<C, W> {
    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::True => f.write_str("true"),
            other => write!(f, "({other})"),
        }
    }
}

/// Canonical text: every operand other than `true` is parenthesized.
impl<C: fmt::Display, W: fmt::Display> fmt::Display for Expr<C, W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::True => f.write_str("true"),
            Expr::Pred { var, cmp, value } => write!(f, "{var} {} {value}", cmp.symbol()),
            Expr::Not { arg } => {
                f.write_str("not ")?;
                arg.fmt_operand(f)
            }
            Expr::And { lhs, rhs } | Expr::Or { lhs, rhs } => {
                lhs.fmt_operand(f)?;
                f.write_str(if matches!(self, Expr::And { .. }) { " and " } else { " or " })?;
                rhs.fmt_operand(f)
            }
            Expr::Prev { interval, arg } | Expr::Always { interval, arg } => {
                let op = if matches!(self, Expr::Prev { .. }) { 'P' } else { 'A' };
                write!(f, "{op}{interval} ")?;
                arg.fmt_operand(f)
            }
            Expr::Since { interval, lhs, rhs } => {
                lhs.fmt_operand(f)?;
                write!(f, " S{interval} ")?;
                rhs.fmt_operand(f)
            }
        }
    }
}

/// Left fold of `or` over the given formulas; `not true` when empty.
pub fn disjunction<C: Clone, W: Clone>(items: &[Expr<C, W>]) -> Expr<C, W> {
    let mut iter = items.iter().cloned();
    match iter.next() {
        None => Expr::falsity(),
        Some(first) => iter.fold(first, Expr::or),
    }
}

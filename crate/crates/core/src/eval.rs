//! Boolean semantics over discrete traces and the counts derived from it.
//!
//! Formulas and templates are compiled into a post-order [`Program`] that
//! evaluates one packed bit vector per node over a [`Frame`]. Temporal
//! operators run in a single linear pass per trace:
//!
//! * `P[a,b] φ` at `t` holds iff the last `φ` point at or before `t - a` is
//!   no earlier than `max(0, t - b)`.
//! * `A[a,b] φ` is the same test on the last violation, negated.
//! * `φ1 S[a,b] φ2` holds iff the last `φ2` point at or before `t - a` is no
//!   earlier than both `t - b` and one past the last `φ1` violation at or
//!   before `t`.
//!
//! An empty window (`t < a`, or `a > b` during relaxed template evaluation)
//! makes `P` and `S` false and `A` true.

use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitVector;
use crate::formula::{Cmp, Expr, Formula, Interval};
use crate::template::{Slot, SlotTree, Template, Window};
use crate::trace::{Dataset, Frame, LabeledTrace};

/// Per-time-point satisfaction bits of a formula along a trace.
pub type LabelVector = BitVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Window `I(t, [a,b]) = [t-b, t-a] ∩ [0, t]`, or `None` when empty.
pub fn eval_window(t: usize, iv: Interval) -> Option<RangeInclusive<usize>> {
    let (a, b) = (iv.a() as usize, iv.b() as usize);
    (t >= a).then(|| t.saturating_sub(b)..=t - a)
}

#[derive(Debug, Clone, Copy)]
enum Operand {
    Const(f64),
    Param(usize),
}

impl Operand {
    #[inline]
    fn get(self, params: &[f64]) -> f64 {
        match self {
            Operand::Const(v) => v,
            Operand::Param(i) => params[i],
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    True,
    Pred { col: usize, cmp: Cmp, value: Operand },
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Prev { lo: Operand, hi: Operand, arg: usize },
    Always { lo: Operand, hi: Operand, arg: usize },
    Since { lo: Operand, hi: Operand, lhs: usize, rhs: usize },
}

/// A formula or template compiled against a variable schema.
#[derive(Debug, Clone)]
pub struct Program {
    nodes: Vec<Node>,
    /// Bitmask of parameters each node depends on.
    deps: Vec<u64>,
    n_params: usize,
}

impl Program {
    pub fn from_formula(f: &Formula, schema: &[String]) -> Result<Self, EvalError> {
        Self::from_template(&Template::from(f), schema)
    }

    /// Compiles a template; parameter `i` is `tpl.params()[i]`.
    ///
    /// # Panics
    /// If the template has more than 64 parameters.
    pub fn from_template(tpl: &Template, schema: &[String]) -> Result<Self, EvalError> {
        assert!(tpl.params().len() <= 64, "templates are limited to 64 parameters");
        let mut p = Program { nodes: Vec::new(), deps: Vec::new(), n_params: tpl.params().len() };
        p.compile(tpl.tree(), tpl, schema)?;
        Ok(p)
    }

    pub fn param_count(&self) -> usize {
        self.n_params
    }

    fn operand_f64(slot: &Slot<f64>, tpl: &Template) -> (Operand, u64) {
        match slot {
            Slot::Fixed(v) => (Operand::Const(*v), 0),
            Slot::Param(name) => {
                let i = tpl.param_index(name).expect("template parameter list is complete");
                (Operand::Param(i), 1 << i)
            }
        }
    }

    fn operand_time(slot: &Slot<u32>, tpl: &Template) -> (Operand, u64) {
        match slot {
            Slot::Fixed(v) => (Operand::Const(*v as f64), 0),
            Slot::Param(name) => {
                let i = tpl.param_index(name).expect("template parameter list is complete");
                (Operand::Param(i), 1 << i)
            }
        }
    }

    fn window(w: &Window, tpl: &Template) -> (Operand, Operand, u64) {
        let (lo, m1) = Self::operand_time(&w.lo, tpl);
        let (hi, m2) = Self::operand_time(&w.hi, tpl);
        (lo, hi, m1 | m2)
    }

    fn push(&mut self, node: Node, deps: u64) -> usize {
        self.nodes.push(node);
        self.deps.push(deps);
        self.nodes.len() - 1
    }

    fn compile(&mut self, e: &SlotTree, tpl: &Template, schema: &[String]) -> Result<usize, EvalError> {
        Ok(match e {
            Expr::True => self.push(Node::True, 0),
            Expr::Pred { var, cmp, value } => {
                let col =
                    schema.iter().position(|s| s == var).ok_or_else(|| EvalError::UnknownVariable(var.clone()))?;
                let (value, m) = Self::operand_f64(value, tpl);
                self.push(Node::Pred { col, cmp: *cmp, value }, m)
            }
            Expr::Not { arg } => {
                let a = self.compile(arg, tpl, schema)?;
                self.push(Node::Not(a), self.deps[a])
            }
            Expr::And { lhs, rhs } | Expr::Or { lhs, rhs } => {
                let l = self.compile(lhs, tpl, schema)?;
                let r = self.compile(rhs, tpl, schema)?;
                let node = if matches!(e, Expr::And { .. }) { Node::And(l, r) } else { Node::Or(l, r) };
                self.push(node, self.deps[l] | self.deps[r])
            }
            Expr::Prev { interval, arg } | Expr::Always { interval, arg } => {
                let a = self.compile(arg, tpl, schema)?;
                let (lo, hi, m) = Self::window(interval, tpl);
                let node = if matches!(e, Expr::Prev { .. }) {
                    Node::Prev { lo, hi, arg: a }
                } else {
                    Node::Always { lo, hi, arg: a }
                };
                self.push(node, m | self.deps[a])
            }
            Expr::Since { interval, lhs, rhs } => {
                let l = self.compile(lhs, tpl, schema)?;
                let r = self.compile(rhs, tpl, schema)?;
                let (lo, hi, m) = Self::window(interval, tpl);
                self.push(Node::Since { lo, hi, lhs: l, rhs: r }, m | self.deps[l] | self.deps[r])
            }
        })
    }

    /// Evaluates every node over `frame`. `params` holds one value per
    /// template parameter; window bounds are truncated to integers, and a
    /// window with `a > b` is treated as empty.
    pub fn eval(&self, frame: &Frame, params: &[f64]) -> BitVector {
        debug_assert!(params.len() >= self.n_params);
        let mut vals: Vec<BitVector> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = eval_node(node, frame, params, |i| &vals[i]);
            vals.push(v);
        }
        vals.pop().expect("program has a root")
    }

    /// Like [`Program::eval`], reusing node results cached in `memo` for
    /// nodes whose parameters have the same values as before.
    pub fn eval_memo(&self, frame: &Frame, params: &[f64], memo: &mut Memo) -> Arc<BitVector> {
        if memo.nodes.len() != self.nodes.len() {
            memo.nodes = vec![HashMap::new(); self.nodes.len()];
        }
        let mut vals: Vec<Arc<BitVector>> = Vec::with_capacity(self.nodes.len());
        let mut key = Vec::with_capacity(self.n_params);
        for (i, node) in self.nodes.iter().enumerate() {
            key.clear();
            let mut mask = self.deps[i];
            while mask != 0 {
                let p = mask.trailing_zeros() as usize;
                key.push(params[p].to_bits());
                mask &= mask - 1;
            }
            let cache = &mut memo.nodes[i];
            let v = match cache.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let v = Arc::new(eval_node(node, frame, params, |j| &*vals[j]));
                    if cache.len() >= MEMO_NODE_CAP {
                        cache.clear();
                    }
                    cache.insert(key.clone(), v.clone());
                    v
                }
            };
            vals.push(v);
        }
        vals.pop().expect("program has a root")
    }
}

const MEMO_NODE_CAP: usize = 1 << 16;

/// Node-level result cache for [`Program::eval_memo`]. Tied to one program
/// and one frame.
#[derive(Debug, Default, Clone)]
pub struct Memo {
    nodes: Vec<HashMap<Vec<u64>, Arc<BitVector>>>,
}

fn eval_node<'a>(node: &Node, frame: &Frame, params: &[f64], child: impl Fn(usize) -> &'a BitVector) -> BitVector {
    let len = frame.len();
    match *node {
        Node::True => BitVector::ones(len),
        Node::Pred { col, cmp, value } => {
            let c = value.get(params);
            let xs = frame.column(col);
            match cmp {
                Cmp::Lt => BitVector::from_fn(len, |i| xs[i] < c),
                Cmp::Gt => BitVector::from_fn(len, |i| xs[i] > c),
            }
        }
        Node::Not(a) => child(a).not(),
        Node::And(l, r) => child(l).and(child(r)),
        Node::Or(l, r) => child(l).or(child(r)),
        Node::Prev { lo, hi, arg } => {
            let (lo, hi) = (lo.get(params) as i64, hi.get(params) as i64);
            window_any(frame, child(arg), lo, hi, false)
        }
        Node::Always { lo, hi, arg } => {
            let (lo, hi) = (lo.get(params) as i64, hi.get(params) as i64);
            window_any(frame, child(arg), lo, hi, true)
        }
        Node::Since { lo, hi, lhs, rhs } => {
            let (lo, hi) = (lo.get(params) as i64, hi.get(params) as i64);
            since(frame, child(lhs), child(rhs), lo, hi)
        }
    }
}

/// `P` (looking for `true`) or, with `always`, `A` (looking for a violation
/// and negating).
fn window_any(frame: &Frame, arg: &BitVector, lo: i64, hi: i64, always: bool) -> BitVector {
    let mut out = BitVector::zeros(frame.len());
    let mut last: Vec<i64> = Vec::new();
    for seg in frame.segments() {
        let n = seg.len();
        last.clear();
        let mut cur = -1i64;
        for t in 0..n {
            if arg.get(seg.start + t) != always {
                cur = t as i64;
            }
            last.push(cur);
        }
        for t in 0..n as i64 {
            let hit = lo <= hi && t >= lo && last[(t - lo) as usize] >= (t - hi).max(0);
            if hit != always {
                out.set(seg.start + t as usize, true);
            }
        }
    }
    out
}

fn since(frame: &Frame, lhs: &BitVector, rhs: &BitVector, lo: i64, hi: i64) -> BitVector {
    let mut out = BitVector::zeros(frame.len());
    if lo > hi {
        return out;
    }
    let mut last_rhs: Vec<i64> = Vec::new();
    for seg in frame.segments() {
        let n = seg.len();
        last_rhs.clear();
        let mut cur = -1i64;
        for t in 0..n {
            if rhs.get(seg.start + t) {
                cur = t as i64;
            }
            last_rhs.push(cur);
        }
        let mut lhs_violation = -1i64;
        for t in 0..n as i64 {
            if !lhs.get(seg.start + t as usize) {
                lhs_violation = t;
            }
            if t >= lo && last_rhs[(t - lo) as usize] >= (t - hi).max(lhs_violation + 1).max(0) {
                out.set(seg.start + t as usize, true);
            }
        }
    }
    out
}

/// Types that can be evaluated as a whole: a single trace or a dataset.
pub trait Signals {
    fn with_frame<R>(&self, f: impl FnOnce(&Frame) -> R) -> R;
}

impl Signals for LabeledTrace {
    fn with_frame<R>(&self, f: impl FnOnce(&Frame) -> R) -> R {
        f(&Frame::from_trace(self))
    }
}

impl Signals for Dataset {
    fn with_frame<R>(&self, f: impl FnOnce(&Frame) -> R) -> R {
        f(self.frame())
    }
}

impl Signals for Frame {
    fn with_frame<R>(&self, f: impl FnOnce(&Frame) -> R) -> R {
        f(self)
    }
}

/// Satisfaction bits of `f` over every point of `frame`, traces concatenated.
pub fn frame_label_vector(f: &Formula, frame: &Frame) -> Result<BitVector, EvalError> {
    Ok(Program::from_formula(f, frame.names())?.eval(frame, &[]))
}

/// `l^f` along one trace.
pub fn label_vector(f: &Formula, tr: &LabeledTrace) -> Result<LabelVector, EvalError> {
    tr.with_frame(|fr| frame_label_vector(f, fr))
}

/// One label vector per trace of `d`.
pub fn label_vectors(f: &Formula, d: &Dataset) -> Result<Vec<LabelVector>, EvalError> {
    let all = frame_label_vector(f, d.frame())?;
    Ok(d.frame().segments().iter().map(|s| all.slice(s.start, s.len())).collect())
}

/// `P#`: points where `f` holds.
pub fn count_positives(f: &Formula, s: &impl Signals) -> Result<u64, EvalError> {
    s.with_frame(|fr| frame_label_vector(f, fr).map(|b| b.count_ones()))
}

/// `N#`: points where `f` does not hold.
pub fn count_negatives(f: &Formula, s: &impl Signals) -> Result<u64, EvalError> {
    s.with_frame(|fr| frame_label_vector(f, fr).map(|b| b.count_zeros()))
}

/// True/false positive counts of a label vector against dataset labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Score {
    pub tp: u64,
    pub fp: u64,
}

impl Score {
    pub fn of(bits: &BitVector, labels: &BitVector) -> Score {
        Score { tp: bits.and_count(labels), fp: bits.and_not_count(labels) }
    }
}

/// Confusion counts of a formula over a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub total: u64,
    pub mismatch: u64,
    pub accuracy: f64,
}

impl Metrics {
    pub fn from_bits(predicted: &BitVector, labels: &BitVector) -> Metrics {
        let total = labels.len() as u64;
        let tp = predicted.and_count(labels);
        let fp = predicted.and_not_count(labels);
        let positives = labels.count_ones();
        let fn_ = positives - tp;
        let tn = total - positives - fp;
        let accuracy = if total == 0 { 1.0 } else { (tp + tn) as f64 / total as f64 };
        Metrics { tp, fp, tn, fn_, total, mismatch: fp + fn_, accuracy }
    }

    pub fn score(&self) -> Score {
        Score { tp: self.tp, fp: self.fp }
    }
}

/// TP/FP/TN/FN of `f` against the labels of `s`.
pub fn metrics(f: &Formula, s: &impl Signals) -> Result<Metrics, EvalError> {
    s.with_frame(|fr| frame_label_vector(f, fr).map(|b| Metrics::from_bits(&b, fr.labels())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    fn trace(cols: &[(&str, &[f64])], labels: &[bool]) -> LabeledTrace {
        let names = cols.iter().map(|(n, _)| n.to_string()).collect();
        let rows = (0..labels.len()).map(|t| cols.iter().map(|(_, v)| v[t]).collect()).collect();
        LabeledTrace::new("tr", names, rows, labels.to_vec()).unwrap()
    }

    fn bits(s: &str) -> BitVector {
        BitVector::from_fn(s.len(), |i| s.as_bytes()[i] == b'1')
    }

    #[test]
    fn windows() {
        let iv = |a, b| Interval::new(a, b).unwrap();
        assert_eq!(eval_window(5, iv(0, 3)), Some(2..=5));
        assert_eq!(eval_window(1, iv(2, 4)), None);
        assert_eq!(eval_window(2, iv(0, 10)), Some(0..=2));
    }

    #[test]
    fn label_vector_examples() {
        let tr = trace(&[("x", &[0.0, 6.0, 2.0, 1.0])], &[false; 4]);
        let s = tr.variable_names().to_vec();
        assert_eq!(label_vector(&Formula::True, &tr).unwrap(), bits("1111"));

        let tr3 = trace(&[("x", &[0.0, 6.0, 2.0])], &[false, true, true]);
        let f = parse_formula("P[0,1] (x > 5)", &s).unwrap();
        assert_eq!(label_vector(&f, &tr3).unwrap(), bits("011"));
        assert_eq!(count_positives(&f, &tr3).unwrap(), 2);
        assert_eq!(count_negatives(&f, &tr3).unwrap(), 1);

        let tr = trace(&[("x", &[6.0, 0.0, 0.0, 0.0]), ("y", &[1.0, 1.0, 0.0, 1.0])], &[false; 4]);
        let f = parse_formula("(y > 0) S[0,2] (x > 5)", tr.variable_names()).unwrap();
        assert_eq!(label_vector(&f, &tr).unwrap(), bits("1100"));
    }

    #[test]
    fn empty_windows() {
        let tr = trace(&[("x", &[1.0, 1.0, 1.0])], &[false; 3]);
        let s = tr.variable_names().to_vec();
        let p = parse_formula("P[2,3] (x > 0)", &s).unwrap();
        assert_eq!(label_vector(&p, &tr).unwrap(), bits("001"));
        let a = parse_formula("A[2,3] (x < 0)", &s).unwrap();
        assert_eq!(label_vector(&a, &tr).unwrap(), bits("110"));
        let st = parse_formula("true S[2,3] (x > 0)", &s).unwrap();
        assert_eq!(label_vector(&st, &tr).unwrap(), bits("001"));
    }

    #[test]
    fn relaxed_template_windows_are_empty() {
        let tr = trace(&[("x", &[1.0, 1.0, 1.0])], &[false; 3]);
        let frame = Frame::from_trace(&tr);
        let tpl = Template::parse_unchecked("(P[?a,?b] (x > 0)) or (A[?c,?d] (x < 0))").unwrap();
        let prog = Program::from_template(&tpl, frame.names()).unwrap();
        // P window empty -> false, A window empty -> true
        assert_eq!(prog.eval(&frame, &[3.0, 1.0, 3.0, 1.0]), bits("111"));
        let tpl = Template::parse_unchecked("P[?a,?b] (x > 0)").unwrap();
        let prog = Program::from_template(&tpl, frame.names()).unwrap();
        assert_eq!(prog.eval(&frame, &[3.0, 1.0]), bits("000"));
    }

    #[test]
    fn traces_do_not_leak_into_each_other() {
        let a = trace(&[("x", &[9.0, 9.0])], &[true, true]);
        let b = LabeledTrace::new("b", vec!["x".into()], vec![vec![0.0], vec![0.0]], vec![false, false]).unwrap();
        let d = Dataset::new(vec![a, b]).unwrap();
        let f = parse_formula("P[0,5] (x > 5)", d.variable_names()).unwrap();
        let per = label_vectors(&f, &d).unwrap();
        assert_eq!(per, vec![bits("11"), bits("00")]);
        let m = metrics(&f, &d).unwrap();
        assert_eq!((m.tp, m.fp, m.tn, m.fn_, m.mismatch), (2, 0, 2, 0, 0));
        assert_eq!(m.accuracy, 1.0);
    }

    #[test]
    fn metrics_of_constants() {
        let tr = trace(&[("x", &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0])], &[true, false, true, true, false, false, false]);
        let m = metrics(&Formula::True, &tr).unwrap();
        assert_eq!((m.tp, m.fp, m.tn, m.fn_), (3, 4, 0, 0));
        assert_eq!(count_positives(&Formula::True, &tr).unwrap(), 7);
        let m = metrics(&Formula::falsity(), &tr).unwrap();
        assert_eq!((m.tp, m.fp, m.tn, m.fn_), (0, 0, 4, 3));
        assert_eq!(m.tp + m.fp + m.tn + m.fn_, m.total);
    }

    #[test]
    fn unknown_variable() {
        let tr = trace(&[("x", &[0.0])], &[false]);
        let f = Formula::pred("nope", Cmp::Lt, 1.0);
        assert_eq!(label_vector(&f, &tr), Err(EvalError::UnknownVariable("nope".into())));
    }

    #[test]
    fn memo_matches_plain_evaluation() {
        let tr = trace(&[("x", &[0.0, 3.0, 1.0, 4.0, 1.0, 5.0]), ("y", &[2.0, 7.0, 1.0, 8.0, 2.0, 8.0])], &[false; 6]);
        let frame = Frame::from_trace(&tr);
        let tpl = Template::parse_unchecked("(x < ?c) S[?a,?b] (P[1,2] (y > ?d))").unwrap();
        let prog = Program::from_template(&tpl, frame.names()).unwrap();
        let mut memo = Memo::default();
        for c in [0.5, 2.0, 4.5] {
            for a in 0..3 {
                for b in 0..4 {
                    for d in [1.0, 5.0] {
                        let p = [c, a as f64, b as f64, d];
                        assert_eq!(*prog.eval_memo(&frame, &p, &mut memo), prog.eval(&frame, &p));
                    }
                }
            }
        }
    }
}

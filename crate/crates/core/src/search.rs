//! Parameter fitting under a false-positive bound.
//!
//! Every parameter of a template is monotone: moving it one way can only add
//! satisfied points, so TP and FP grow or shrink together. For one parameter
//! the optimum is the last feasible grid point and a binary search finds it.
//! For two, a staircase walk starts from the corner where the first parameter
//! is loosest and the second tightest: when the bound is violated the first
//! parameter is tightened, otherwise the cell is a candidate and the second
//! parameter is loosened. Each step moves exactly one index forward, so at
//! most `m1 + m2 - 1` cells are visited. With more parameters the two
//! largest grids are walked for each combination of the others, found by a
//! branch-and-bound: setting every undecided parameter to its loosest value
//! bounds TP from above and setting it to its tightest bounds FP from below.
//!
//! Windows whose bounds come from different grid points may end up with
//! `a > b`. Such cells are never candidates and never evaluated; the walk
//! steps past them in the direction that cannot skip a valid cell.

use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bits::BitVector;
use crate::eval::{EvalError, Memo, Program, Score};
use crate::formula::{Expr, Formula};
use crate::template::{time_value, DomainError, Monotonicity, ParamDomain, Slot, Template, Valuation, Window};
use crate::trace::{Dataset, Frame};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("expected {expected} parameter(s), template has {found}")]
    ParamCount { expected: usize, found: usize },
    #[error("expected {expected} domain(s), got {found}")]
    DomainCount { expected: usize, found: usize },
    #[error("domain of `{name}`: {source}")]
    Domain { name: String, source: DomainError },
    #[error("domain of window bound `{name}` contains {value}, which is not a non-negative integer")]
    TimeDomain { name: String, value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Best valuation found, with the work it took.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    /// `None` when no grid point satisfies the bound.
    pub valuation: Option<Valuation>,
    #[serde(serialize_with = "formula_text")]
    pub formula: Option<Formula>,
    pub tp: u64,
    pub fp: u64,
    /// Formula-over-dataset evaluations performed.
    pub evaluations: u64,
    /// Other candidates found with the same TP as the returned one.
    pub ties: u64,
}

fn formula_text<S: Serializer>(f: &Option<Formula>, s: S) -> Result<S::Ok, S::Error> {
    match f {
        Some(f) => s.serialize_some(&f.to_string()),
        None => s.serialize_none(),
    }
}

impl SearchResult {
    pub fn is_feasible(&self) -> bool {
        self.valuation.is_some()
    }

    fn infeasible(evaluations: u64) -> Self {
        SearchResult { valuation: None, formula: None, tp: 0, fp: 0, evaluations, ties: 0 }
    }
}

/// A visited grid cell with its score, in traversal indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub k1: usize,
    pub k2: usize,
    pub score: Score,
}

/// Outcome of one staircase walk.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Staircase {
    pub best: Option<Cell>,
    /// Every cell the walk stood on, in order.
    pub path: Vec<(usize, usize)>,
    pub evaluations: u64,
    pub ties: u64,
}

/// Staircase walk over an `m1 x m2` grid in traversal indices: `k1 = 0` is
/// the first parameter's loosest value and scores shrink as `k1` grows;
/// `k2 = 0` is the second parameter's tightest value and scores grow with
/// `k2`. `score` is called only on cells where `valid` holds.
pub fn diagonal_walk(
    m1: usize,
    m2: usize,
    bound: u64,
    valid: impl Fn(usize, usize) -> bool,
    mut score: impl FnMut(usize, usize) -> Score,
) -> Staircase {
    let mut out = Staircase::default();
    let (mut k1, mut k2) = (0, 0);
    while k1 < m1 && k2 < m2 {
        out.path.push((k1, k2));
        if !valid(k1, k2) {
            // Every invalid cell has either an all-invalid remainder of its
            // row or an all-invalid remainder of its column, so one of these
            // moves discards only invalid cells.
            match (k1 + 1..m1).find(|&j| valid(j, k2)) {
                None => k2 += 1,
                Some(j) => k1 = j,
            }
            continue;
        }
        let s = score(k1, k2);
        out.evaluations += 1;
        if s.fp > bound {
            k1 += 1;
            continue;
        }
        match out.best {
            Some(b) if s.tp < b.score.tp => {}
            Some(b) => {
                if s.tp == b.score.tp {
                    out.ties += 1;
                } else {
                    out.ties = 0;
                }
                out.best = Some(Cell { k1, k2, score: s });
            }
            None => out.best = Some(Cell { k1, k2, score: s }),
        }
        k2 += 1;
    }
    out
}

/// Upper bound on the work of a plain grid search.
pub fn grid_cardinality(domains: &[ParamDomain]) -> u128 {
    domains.iter().map(|d| d.len() as u128).product()
}

#[derive(Debug, Clone, Copy)]
enum Bound {
    Fixed(u32),
    Param(usize),
}

impl Bound {
    fn get(self, params: &[f64]) -> f64 {
        match self {
            Bound::Fixed(v) => v as f64,
            Bound::Param(i) => params[i],
        }
    }

    fn uses(self, i: usize) -> bool {
        matches!(self, Bound::Param(j) if j == i)
    }
}

/// A template compiled for repeated scoring against one dataset.
struct Problem<'a> {
    template: &'a Template,
    program: Program,
    frame: &'a Frame,
    bound: u64,
    /// Grid of each parameter, ascending.
    grids: Vec<Vec<f64>>,
    windows: Vec<(Bound, Bound)>,
}

impl<'a> Problem<'a> {
    fn new(template: &'a Template, frame: &'a Frame, bound: u64, domains: &[ParamDomain]) -> Result<Self, SearchError> {
        let params = template.params();
        if domains.len() != params.len() {
            return Err(SearchError::DomainCount { expected: params.len(), found: domains.len() });
        }
        let mut grids = Vec::with_capacity(params.len());
        for (p, d) in params.iter().zip(domains) {
            d.validate().map_err(|source| SearchError::Domain { name: p.name.clone(), source })?;
            let g = d.grid();
            if p.kind.is_time() {
                if let Some(&value) = g.iter().find(|v| time_value(**v).is_none()) {
                    return Err(SearchError::TimeDomain { name: p.name.clone(), value });
                }
            }
            grids.push(g);
        }
        let mut windows = Vec::new();
        collect_windows(template.tree(), template, &mut windows);
        let program = Program::from_template(template, frame.names())?;
        Ok(Problem { template, program, frame, bound, grids, windows })
    }

    fn valid(&self, params: &[f64]) -> bool {
        self.windows.iter().all(|(lo, hi)| lo.get(params) <= hi.get(params))
    }

    /// Validity of the windows that do not involve any of `free`.
    fn valid_without(&self, params: &[f64], free: &[usize]) -> bool {
        self.windows
            .iter()
            .filter(|(lo, hi)| !free.iter().any(|&i| lo.uses(i) || hi.uses(i)))
            .all(|(lo, hi)| lo.get(params) <= hi.get(params))
    }

    fn bits(&self, params: &[f64], memo: &mut Memo) -> Arc<BitVector> {
        self.program.eval_memo(self.frame, params, memo)
    }

    fn score(&self, params: &[f64], memo: &mut Memo) -> Score {
        Score::of(&self.bits(params, memo), self.frame.labels())
    }

    /// Grid of parameter `i` ordered from its loosest to tightest value.
    fn loosening_last(&self, i: usize) -> Vec<f64> {
        let mut g = self.grids[i].clone();
        if self.template.params()[i].monotonicity == Monotonicity::Increasing {
            g.reverse();
        }
        g
    }

    /// Grid of parameter `i` ordered from its tightest to loosest value.
    fn loosening_first(&self, i: usize) -> Vec<f64> {
        let mut g = self.loosening_last(i);
        g.reverse();
        g
    }

    fn result(&self, params: &[f64], score: Score, evaluations: u64, ties: u64) -> SearchResult {
        let formula = self.template.instantiate_values(params).expect("valid cells instantiate");
        SearchResult {
            valuation: Some(self.template.valuation(params)),
            formula: Some(formula),
            tp: score.tp,
            fp: score.fp,
            evaluations,
            ties,
        }
    }

    fn evaluate_once(&self) -> SearchResult {
        let s = self.score(&[], &mut Memo::default());
        if s.fp <= self.bound {
            self.result(&[], s, 1, 0)
        } else {
            SearchResult::infeasible(1)
        }
    }

    fn binary(&self, memo: &mut Memo) -> SearchResult {
        let order = self.loosening_last(0);
        // Validity along one axis is a prefix or a suffix.
        let cand: Vec<f64> = order.into_iter().filter(|v| self.valid(&[*v])).collect();
        let mut cache: Vec<Option<Score>> = vec![None; cand.len()];
        let mut evaluations = 0;
        let (mut lo, mut hi) = (0, cand.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let s = self.score(&[cand[mid]], memo);
            evaluations += 1;
            cache[mid] = Some(s);
            if s.fp <= self.bound {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        match cache.get(lo).copied().flatten() {
            Some(s) => self.result(&[cand[lo]], s, evaluations, 0),
            None => SearchResult::infeasible(evaluations),
        }
    }

    /// Staircase over parameters `i1 < i2` with the others fixed in `params`.
    fn diagonal(&self, i1: usize, i2: usize, params: &mut [f64], memo: &mut Memo) -> SearchResult {
        let ax1 = self.loosening_last(i1);
        let ax2 = self.loosening_first(i2);
        let cells = std::cell::RefCell::new(params);
        let walk = diagonal_walk(
            ax1.len(),
            ax2.len(),
            self.bound,
            |k1, k2| {
                let mut p = cells.borrow_mut();
                p[i1] = ax1[k1];
                p[i2] = ax2[k2];
                self.valid(&p)
            },
            |k1, k2| {
                let mut p = cells.borrow_mut();
                p[i1] = ax1[k1];
                p[i2] = ax2[k2];
                self.score(&p, memo)
            },
        );
        let params = cells.into_inner();
        match walk.best {
            Some(c) => {
                params[i1] = ax1[c.k1];
                params[i2] = ax2[c.k2];
                self.result(params, c.score, walk.evaluations, walk.ties)
            }
            None => SearchResult::infeasible(walk.evaluations),
        }
    }

    /// Depth-first search over the parameters outside the staircase. Before
    /// descending into a value, the free parameters are set to their loosest
    /// values (an upper bound on TP) and to their tightest (a lower bound on
    /// FP). Both corners may be empty windows, which only strengthens the
    /// bounds. A subtree is skipped when it cannot be feasible or cannot reach
    /// the best TP so far, so the result matches an exhaustive search.
    fn product(&self) -> SearchResult {
        let n = self.grids.len();
        let mut by_size: Vec<usize> = (0..n).collect();
        by_size.sort_by_key(|&i| (std::cmp::Reverse(self.grids[i].len()), i));
        let (i1, i2) = (by_size[0].min(by_size[1]), by_size[0].max(by_size[1]));
        let outer: Vec<usize> = (0..n).filter(|&i| i != i1 && i != i2).collect();
        let mut search = Branch {
            problem: self,
            i1,
            i2,
            orders: outer.iter().map(|&i| self.loosening_last(i)).collect(),
            loosest: (0..n).map(|i| self.loosening_last(i)[0]).collect(),
            tightest: (0..n).map(|i| self.loosening_first(i)[0]).collect(),
            outer,
            params: vec![0.0; n],
            memo: Memo::default(),
            best: None,
            evaluations: 0,
        };
        search.descend(0);
        match search.best {
            Some(b) => SearchResult { evaluations: search.evaluations, ..b },
            None => SearchResult::infeasible(search.evaluations),
        }
    }
}

struct Branch<'p, 'a> {
    problem: &'p Problem<'a>,
    i1: usize,
    i2: usize,
    outer: Vec<usize>,
    /// Grid of each outer parameter, loosest first.
    orders: Vec<Vec<f64>>,
    loosest: Vec<f64>,
    tightest: Vec<f64>,
    params: Vec<f64>,
    memo: Memo,
    best: Option<SearchResult>,
    evaluations: u64,
}

impl Branch<'_, '_> {
    fn free(&self, depth: usize) -> Vec<usize> {
        let mut free = self.outer[depth..].to_vec();
        free.extend([self.i1, self.i2]);
        free
    }

    fn corner(&mut self, free: &[usize], values: &[f64]) -> Score {
        let mut p = self.params.clone();
        for &i in free {
            p[i] = values[i];
        }
        self.evaluations += 1;
        self.problem.score(&p, &mut self.memo)
    }

    fn descend(&mut self, depth: usize) {
        if depth == self.outer.len() {
            let mut params = std::mem::take(&mut self.params);
            let r = self.problem.diagonal(self.i1, self.i2, &mut params, &mut self.memo);
            self.params = params;
            self.merge(r);
            return;
        }
        let i = self.outer[depth];
        let free = self.free(depth + 1);
        for k in 0..self.orders[depth].len() {
            self.params[i] = self.orders[depth][k];
            if !self.problem.valid_without(&self.params, &free) {
                continue;
            }
            let tightest = std::mem::take(&mut self.tightest);
            let low = self.corner(&free, &tightest);
            self.tightest = tightest;
            if low.fp > self.problem.bound {
                continue;
            }
            let loosest = std::mem::take(&mut self.loosest);
            let high = self.corner(&free, &loosest);
            self.loosest = loosest;
            // Later values are tighter, so their bound is no higher.
            if self.best.as_ref().is_some_and(|b| high.tp < b.tp) {
                break;
            }
            self.descend(depth + 1);
        }
    }

    fn merge(&mut self, r: SearchResult) {
        self.evaluations += r.evaluations;
        if !r.is_feasible() {
            return;
        }
        self.best = Some(match self.best.take() {
            None => r,
            Some(mut b) => {
                if r.tp > b.tp || (r.tp == b.tp && r.fp < b.fp) {
                    let ties = if r.tp == b.tp { b.ties + 1 + r.ties } else { r.ties };
                    SearchResult { ties, ..r }
                } else {
                    if r.tp == b.tp {
                        b.ties += 1 + r.ties;
                    }
                    b
                }
            }
        });
    }
}

fn collect_windows(tree: &crate::template::SlotTree, tpl: &Template, out: &mut Vec<(Bound, Bound)>) {
    let bound = |s: &Slot<u32>| match s {
        Slot::Fixed(v) => Bound::Fixed(*v),
        Slot::Param(name) => Bound::Param(tpl.param_index(name).expect("parameter list is complete")),
    };
    let mut push = |w: &Window| out.push((bound(&w.lo), bound(&w.hi)));
    tree.visit(&mut |e| match e {
        Expr::Prev { interval, .. } | Expr::Always { interval, .. } | Expr::Since { interval, .. } => push(interval),
        _ => {}
    });
}

fn check_arity(tpl: &Template, expected: usize) -> Result<(), SearchError> {
    let found = tpl.params().len();
    if found != expected {
        return Err(SearchError::ParamCount { expected, found });
    }
    Ok(())
}

/// Best value of the single parameter of `tpl` with `FP <= bound`.
pub fn binary_search_1p(
    tpl: &Template,
    bound: u64,
    d: &Dataset,
    dom: ParamDomain,
) -> Result<SearchResult, SearchError> {
    check_arity(tpl, 1)?;
    let p = Problem::new(tpl, d.frame(), bound, &[dom])?;
    Ok(p.binary(&mut Memo::default()))
}

/// Staircase search over the two parameters of `tpl`.
pub fn diagonal_search(
    tpl: &Template,
    bound: u64,
    d: &Dataset,
    dom1: ParamDomain,
    dom2: ParamDomain,
) -> Result<SearchResult, SearchError> {
    check_arity(tpl, 2)?;
    let p = Problem::new(tpl, d.frame(), bound, &[dom1, dom2])?;
    Ok(p.diagonal(0, 1, &mut [0.0, 0.0], &mut Memo::default()))
}

/// Maximizes TP subject to `FP <= bound` over the grid given by `domains`
/// (one per parameter, in template order).
///
/// With more than two parameters the two largest grids are walked as a
/// staircase for every combination of the others that survives the bounds
/// described on the module. The search is sequential and deterministic.
pub fn parameter_synthesis(
    tpl: &Template,
    bound: u64,
    d: &Dataset,
    domains: &[ParamDomain],
) -> Result<SearchResult, SearchError> {
    parameter_synthesis_on(tpl, bound, d.frame(), domains)
}

/// [`parameter_synthesis`] over a prepared frame.
pub fn parameter_synthesis_on(
    tpl: &Template,
    bound: u64,
    frame: &Frame,
    domains: &[ParamDomain],
) -> Result<SearchResult, SearchError> {
    let p = Problem::new(tpl, frame, bound, domains)?;
    Ok(match tpl.params().len() {
        0 => p.evaluate_once(),
        1 => p.binary(&mut Memo::default()),
        2 => p.diagonal(0, 1, &mut [0.0, 0.0], &mut Memo::default()),
        _ => p.product(),
    })
}

//! Helpers shared by the integration tests: a direct reading of the
//! semantics, random inputs, and an exhaustive grid search.

#![allow(dead_code)]

use std::ops::Range;

use proptest::prelude::*;
use ptstl::formula::{Cmp, Expr, Formula, Interval};
use ptstl::template::{ParamDomain, Slot, Template, Window};
use ptstl::{BitVector, Dataset, LabeledTrace};
use rand::Rng;

/// Points the window `[a, b]` covers at time `t`, clipped to the trace start.
fn covered(t: usize, iv: Interval) -> Range<usize> {
    let (a, b) = (iv.a() as usize, iv.b() as usize);
    if t < a {
        return 0..0;
    }
    t.saturating_sub(b)..t - a + 1
}

/// Satisfaction of `f` at `t`, straight from the recursive definition.
pub fn holds(f: &Formula, tr: &LabeledTrace, t: usize) -> bool {
    match f {
        Expr::True => true,
        Expr::Pred { var, cmp, value } => {
            let x = tr.value(t, tr.var_index(var).expect("variable in schema"));
            match cmp {
                Cmp::Lt => x < *value,
                Cmp::Gt => x > *value,
            }
        }
        Expr::Not { arg } => !holds(arg, tr, t),
        Expr::And { lhs, rhs } => holds(lhs, tr, t) && holds(rhs, tr, t),
        Expr::Or { lhs, rhs } => holds(lhs, tr, t) || holds(rhs, tr, t),
        Expr::Prev { interval, arg } => covered(t, *interval).any(|s| holds(arg, tr, s)),
        Expr::Always { interval, arg } => covered(t, *interval).all(|s| holds(arg, tr, s)),
        Expr::Since { interval, lhs, rhs } => {
            covered(t, *interval).any(|s| holds(rhs, tr, s) && (s..=t).all(|u| holds(lhs, tr, u)))
        }
    }
}

pub fn naive_labels(f: &Formula, tr: &LabeledTrace) -> BitVector {
    BitVector::from_fn(tr.len(), |t| holds(f, tr, t))
}

pub fn xy() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

/// Values on a coarse integer grid so that predicate thresholds are hit
/// exactly now and then.
pub fn random_trace(rng: &mut impl Rng, id: &str, vars: &[String], len: usize) -> LabeledTrace {
    let rows = (0..len).map(|_| vars.iter().map(|_| rng.gen_range(0..=10) as f64).collect()).collect();
    let labels = (0..len).map(|_| rng.gen_bool(0.3)).collect();
    LabeledTrace::new(id, vars.to_vec(), rows, labels).unwrap()
}

pub fn random_interval(rng: &mut impl Rng) -> Interval {
    let a = rng.gen_range(0..=4);
    Interval::new(a, a + rng.gen_range(0..=5)).unwrap()
}

/// A formula with exactly `ops` operators.
pub fn random_formula(rng: &mut impl Rng, vars: &[String], ops: usize) -> Formula {
    if ops == 0 {
        if rng.gen_bool(0.1) {
            return Expr::True;
        }
        let var = vars[rng.gen_range(0..vars.len())].clone();
        let cmp = if rng.gen_bool(0.5) { Cmp::Lt } else { Cmp::Gt };
        return Expr::pred(var, cmp, rng.gen_range(0..=20) as f64 / 2.0);
    }
    match rng.gen_range(0..6) {
        0 => Expr::not(random_formula(rng, vars, ops - 1)),
        1 => Expr::prev(random_interval(rng), random_formula(rng, vars, ops - 1)),
        2 => Expr::always(random_interval(rng), random_formula(rng, vars, ops - 1)),
        k => {
            let left = rng.gen_range(0..ops);
            let l = random_formula(rng, vars, left);
            let r = random_formula(rng, vars, ops - 1 - left);
            match k {
                3 => Expr::and(l, r),
                4 => Expr::or(l, r),
                _ => Expr::since(random_interval(rng), l, r),
            }
        }
    }
}

pub fn arb_interval() -> impl Strategy<Value = Interval> {
    (0u32..5, 0u32..6).prop_map(|(a, w)| Interval::new(a, a + w).unwrap())
}

pub fn arb_formula(max_ops: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        1 => Just(Expr::True),
        6 => (prop_oneof![Just("x"), Just("y")], any::<bool>(), 0u32..=20).prop_map(|(v, lt, c)| {
            Expr::pred(v, if lt { Cmp::Lt } else { Cmp::Gt }, c as f64 / 2.0)
        }),
    ];
    leaf.prop_recursive(max_ops, 2 * max_ops, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::not),
            (arb_interval(), inner.clone()).prop_map(|(i, f)| Expr::prev(i, f)),
            (arb_interval(), inner.clone()).prop_map(|(i, f)| Expr::always(i, f)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::or(l, r)),
            (arb_interval(), inner.clone(), inner).prop_map(|(i, l, r)| Expr::since(i, l, r)),
        ]
    })
}

/// One to three traces over `x, y` of up to 40 points.
pub fn arb_dataset() -> impl Strategy<Value = Dataset> {
    let trace = (1usize..40).prop_flat_map(|n| {
        (proptest::collection::vec((0u8..=10, 0u8..=10), n), proptest::collection::vec(any::<bool>(), n))
    });
    proptest::collection::vec(trace, 1..4).prop_map(|traces| {
        let traces = traces
            .into_iter()
            .enumerate()
            .map(|(i, (rows, labels))| {
                let rows = rows.into_iter().map(|(x, y)| vec![x as f64, y as f64]).collect();
                LabeledTrace::new(format!("t{i}"), xy(), rows, labels).unwrap()
            })
            .collect();
        Dataset::new(traces).unwrap()
    })
}

/// Window bounds of a template as `(lo, hi)`, each a parameter index or a
/// fixed value.
pub fn template_windows(tpl: &Template) -> Vec<(Result<usize, u32>, Result<usize, u32>)> {
    let slot = |s: &Slot<u32>| match s {
        Slot::Fixed(v) => Err(*v),
        Slot::Param(name) => Ok(tpl.param_index(name).unwrap()),
    };
    let mut out = Vec::new();
    tpl.tree().visit(&mut |e| {
        let w: Option<&Window> = match e {
            Expr::Prev { interval, .. } | Expr::Always { interval, .. } | Expr::Since { interval, .. } => {
                Some(interval)
            }
            _ => None,
        };
        if let Some(w) = w {
            out.push((slot(&w.lo), slot(&w.hi)));
        }
    });
    out
}

/// True when every window of `tpl` has `a <= b` under `values`.
pub fn windows_valid(tpl: &Template, values: &[f64]) -> bool {
    let get = |b: &Result<usize, u32>| match b {
        Ok(i) => values[*i],
        Err(v) => *v as f64,
    };
    template_windows(tpl).iter().all(|(lo, hi)| get(lo) <= get(hi))
}

/// Best `(tp, fp)` over the full grid with `fp <= bound`, scoring every
/// valid cell. Ties on TP keep the lowest FP.
pub fn exhaustive_optimum(tpl: &Template, d: &Dataset, domains: &[ParamDomain], bound: u64) -> Option<(u64, u64)> {
    let grids: Vec<Vec<f64>> = domains.iter().map(|d| d.grid()).collect();
    let mut best: Option<(u64, u64)> = None;
    let mut idx = vec![0usize; grids.len()];
    loop {
        let values: Vec<f64> = idx.iter().zip(&grids).map(|(&i, g)| g[i]).collect();
        if windows_valid(tpl, &values) {
            let f = tpl.instantiate_values(&values).unwrap();
            let m = ptstl::metrics(&f, d).unwrap();
            if m.fp <= bound {
                let better = match best {
                    None => true,
                    Some((tp, fp)) => m.tp > tp || (m.tp == tp && m.fp < fp),
                };
                if better {
                    best = Some((m.tp, m.fp));
                }
            }
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best;
            }
            idx[k] += 1;
            if idx[k] < grids[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

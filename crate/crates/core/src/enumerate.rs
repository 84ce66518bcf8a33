//! The bounded space of parametric templates over a variable schema.
//!
//! Level 0 holds `true` and `x < ?p`, `x > ?p` for every variable. Level `k`
//! applies `not`, `P[?a,?b]` and `A[?a,?b]` to level `k-1` and combines
//! levels `i` and `k-1-i` (for every `i` in `0..k`) with `and`, `or` and
//! `S[?a,?b]`. Every slot gets its own parameter, named `p1, p2, ...` in
//! textual order.

use std::collections::HashSet;

use crate::formula::{Cmp, Expr, Interval};
use crate::template::{Slot, SlotTree, Template, Window};

fn hole<T>() -> Slot<T> {
    Slot::Param(String::new())
}

fn hole_window() -> Window {
    Window { lo: hole(), hi: hole() }
}

fn fresh<T: Clone>(slot: &Slot<T>, next: &mut usize) -> Slot<T> {
    match slot {
        Slot::Param(_) => {
            *next += 1;
            Slot::Param(format!("p{next}"))
        }
        fixed => fixed.clone(),
    }
}

fn fresh_window(w: &Window, next: &mut usize) -> Window {
    let lo = fresh(&w.lo, next);
    Window { lo, hi: fresh(&w.hi, next) }
}

/// Names every slot `p1, p2, ...` in the order parameters are listed.
fn number_slots(tree: &SlotTree, next: &mut usize) -> SlotTree {
    match tree {
        Expr::True => Expr::True,
        Expr::Pred { var, cmp, value } => Expr::Pred { var: var.clone(), cmp: *cmp, value: fresh(value, next) },
        Expr::Not { arg } => Expr::not(number_slots(arg, next)),
        Expr::And { lhs, rhs } => {
            let l = number_slots(lhs, next);
            Expr::and(l, number_slots(rhs, next))
        }
        Expr::Or { lhs, rhs } => {
            let l = number_slots(lhs, next);
            Expr::or(l, number_slots(rhs, next))
        }
        Expr::Prev { interval, arg } => {
            let w = fresh_window(interval, next);
            Expr::prev(w, number_slots(arg, next))
        }
        Expr::Always { interval, arg } => {
            let w = fresh_window(interval, next);
            Expr::always(w, number_slots(arg, next))
        }
        Expr::Since { interval, lhs, rhs } => {
            let l = number_slots(lhs, next);
            let w = fresh_window(interval, next);
            Expr::since(w, l, number_slots(rhs, next))
        }
    }
}

fn finish(tree: &SlotTree) -> Template {
    Template::new(number_slots(tree, &mut 0)).expect("numbered slots are unique")
}

/// All templates with at most `max_ops` operators over `vars`, sorted by
/// operator count and then canonical text, without duplicates.
pub fn formula_space(vars: &[String], max_ops: usize) -> Vec<Template> {
    let mut levels: Vec<Vec<SlotTree>> = Vec::with_capacity(max_ops + 1);
    let mut base = vec![Expr::True];
    for v in vars {
        base.push(Expr::pred(v.clone(), Cmp::Lt, hole()));
        base.push(Expr::pred(v.clone(), Cmp::Gt, hole()));
    }
    levels.push(base);
    for k in 1..=max_ops {
        let mut level = Vec::new();
        for f in &levels[k - 1] {
            level.push(Expr::not(f.clone()));
            level.push(Expr::prev(hole_window(), f.clone()));
            level.push(Expr::always(hole_window(), f.clone()));
        }
        for i in 0..k {
            for l in &levels[i] {
                for r in &levels[k - 1 - i] {
                    level.push(Expr::and(l.clone(), r.clone()));
                    level.push(Expr::or(l.clone(), r.clone()));
                    level.push(Expr::since(hole_window(), l.clone(), r.clone()));
                }
            }
        }
        levels.push(level);
    }
    let mut out: Vec<(usize, String, Template)> = levels
        .iter()
        .enumerate()
        .flat_map(|(k, level)| level.iter().map(move |t| (k, t)))
        .map(|(k, t)| {
            let tpl = finish(t);
            (k, tpl.to_string(), tpl)
        })
        .collect();
    out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    out.dedup_by(|a, b| a.1 == b.1);
    out.into_iter().map(|(_, _, t)| t).collect()
}

/// Wraps every template as `P[s,s] (φ)`, i.e. "φ held exactly `s` steps ago".
///
/// # Panics
/// If `s` is zero.
pub fn shift_wrap(templates: &[Template], s: u32) -> Vec<Template> {
    assert!(s >= 1, "shift must be positive");
    let w = Window::fixed(Interval::new(s, s).expect("a = b"));
    templates
        .iter()
        .map(|t| Template::new(Expr::prev(w.clone(), t.tree().clone())).expect("wrapping keeps parameters unique"))
        .collect()
}

/// Simplified tree used to detect redundant templates: double negations
/// removed, `φ and true` reduced to `φ`, `φ or true` to `true`, and operands
/// of `and` / `or` sorted by their text with parameter names erased.
/// Parameter names are kept so that valuations can be carried across.
pub fn normal_form(tpl: &Template) -> SlotTree {
    normalize(tpl.tree())
}

/// Text of [`normal_form`] with every parameter written as `?`.
pub fn prune_key(tpl: &Template) -> String {
    erased(&normal_form(tpl))
}

fn erased(t: &SlotTree) -> String {
    let anon = t
        .try_map::<_, _, std::convert::Infallible>(
            &mut |c| Ok(if let Slot::Param(_) = c { hole() } else { c.clone() }),
            &mut |w| {
                let e = |s: &Slot<u32>| if let Slot::Param(_) = s { hole() } else { s.clone() };
                Ok(Window { lo: e(&w.lo), hi: e(&w.hi) })
            },
        )
        .unwrap();
    anon.to_string()
}

fn normalize(t: &SlotTree) -> SlotTree {
    match t {
        Expr::True | Expr::Pred { .. } => t.clone(),
        Expr::Not { arg } => match normalize(arg) {
            Expr::Not { arg: inner } => *inner,
            a => Expr::not(a),
        },
        Expr::And { lhs, rhs } | Expr::Or { lhs, rhs } => {
            let and = matches!(t, Expr::And { .. });
            let (l, r) = (normalize(lhs), normalize(rhs));
            match (&l, &r, and) {
                (Expr::True, _, true) => return r,
                (_, Expr::True, true) => return l,
                (Expr::True, _, false) | (_, Expr::True, false) => return Expr::True,
                _ => {}
            }
            let (l, r) = if erased(&l) <= erased(&r) { (l, r) } else { (r, l) };
            if and {
                Expr::and(l, r)
            } else {
                Expr::or(l, r)
            }
        }
        Expr::Prev { interval, arg } => Expr::prev(interval.clone(), normalize(arg)),
        Expr::Always { interval, arg } => Expr::always(interval.clone(), normalize(arg)),
        Expr::Since { interval, lhs, rhs } => Expr::since(interval.clone(), normalize(lhs), normalize(rhs)),
    }
}

/// Keeps the first template of every [`prune_key`] class, in input order.
pub fn prune(templates: &[Template]) -> Vec<Template> {
    let mut seen = HashSet::new();
    templates.iter().filter(|t| seen.insert(prune_key(t))).cloned().collect()
}

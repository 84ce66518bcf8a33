mod common;

use std::collections::HashMap;

use common::{arb_dataset, xy};
use proptest::prelude::*;
use ptstl::enumerate::{normal_form, prune_key};
use ptstl::eval::frame_label_vector;
use ptstl::formula::Expr;
use ptstl::template::{Slot, SlotTree};
use ptstl::{formula_space, parse_formula, prune, shift_wrap, Template};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn every_template_is_unique_and_numbered_in_text_order() {
    let all = formula_space(&xy(), 2);
    let mut seen = std::collections::HashSet::new();
    for t in &all {
        assert!(seen.insert(t.to_string()), "duplicate {t}");
        assert!(t.operator_count() <= 2);
        let names: Vec<String> = (1..=t.params().len()).map(|i| format!("p{i}")).collect();
        assert_eq!(t.param_names(), names);
        // the text lists parameters in order
        let text = t.to_string();
        let pos: Vec<usize> = names.iter().map(|n| text.find(&format!("?{n}")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
    }
}

#[test]
fn budget_levels_are_nested() {
    let small = formula_space(&xy(), 1);
    let big = formula_space(&xy(), 2);
    assert_eq!(&big[..small.len()], &small[..]);
    assert!(big[small.len()..].iter().all(|t| t.operator_count() == 2));
}

#[test]
fn since_operands_appear_in_both_orders() {
    let texts: Vec<String> = formula_space(&xy(), 2).iter().map(|t| t.to_string()).collect();
    assert!(texts.contains(&"(x < ?p1) S[?p2,?p3] (not (y > ?p4))".to_string()));
    assert!(texts.contains(&"(not (y > ?p1)) S[?p2,?p3] (x < ?p4)".to_string()));
}

#[test]
fn shifted_template_looks_back_exactly_s_steps() {
    let base = Template::parse("x > ?p1", &xy()).unwrap();
    let shifted = &shift_wrap(std::slice::from_ref(&base), 3)[0];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tr = common::random_trace(&mut rng, "t", &xy(), 30);
    let v = base.instantiate_values(&[4.0]).unwrap();
    let s = shifted.instantiate_values(&[4.0]).unwrap();
    let a = ptstl::label_vector(&v, &tr).unwrap();
    let b = ptstl::label_vector(&s, &tr).unwrap();
    for t in 0..tr.len() {
        assert_eq!(b.get(t), t >= 3 && a.get(t - 3));
    }
}

/// Parameter names of a tree in a fixed traversal order.
fn slot_order(tree: &SlotTree) -> Vec<String> {
    let mut out = Vec::new();
    tree.visit(&mut |e| match e {
        Expr::Pred { value: Slot::Param(n), .. } => out.push(n.clone()),
        Expr::Prev { interval, .. } | Expr::Always { interval, .. } | Expr::Since { interval, .. } => {
            for s in [&interval.lo, &interval.hi] {
                if let Slot::Param(n) = s {
                    out.push(n.clone());
                }
            }
        }
        _ => {}
    });
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Templates that share a prune key describe the same formulas once
    /// parameters are matched by position in the normal form.
    #[test]
    fn pruned_templates_have_an_equivalent_survivor(d in arb_dataset(), seed in any::<u64>()) {
        let all = formula_space(&xy(), 2);
        let kept: HashMap<String, Template> = prune(&all).into_iter().map(|t| (prune_key(&t), t)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..40 {
            let t = &all[rng.gen_range(0..all.len())];
            let survivor = &kept[&prune_key(t)];
            let (from, to) = (slot_order(&normal_form(t)), slot_order(&normal_form(survivor)));
            prop_assert_eq!(from.len(), to.len());
            let values: Vec<f64> = t.params().iter().map(|p| {
                if p.kind.is_time() { rng.gen_range(0..=3) as f64 } else { rng.gen_range(0..=10) as f64 }
            }).collect();
            let mut mapped = vec![0.0; survivor.params().len()];
            for (a, b) in from.iter().zip(&to) {
                mapped[survivor.param_index(b).unwrap()] = values[t.param_index(a).unwrap()];
            }
            let (Ok(f), Ok(g)) = (t.instantiate_values(&values), survivor.instantiate_values(&mapped)) else {
                continue;
            };
            prop_assert_eq!(
                frame_label_vector(&f, d.frame()).unwrap(),
                frame_label_vector(&g, d.frame()).unwrap(),
                "{} vs {}", f, g
            );
        }
    }
}

#[test]
fn prune_is_idempotent_and_order_preserving() {
    let all = formula_space(&xy(), 2);
    let once = prune(&all);
    assert_eq!(prune(&once), once);
    let pos: Vec<usize> = once.iter().map(|t| all.iter().position(|a| a == t).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    assert!(once.len() < all.len());
    // nothing that differs semantically in general is merged
    let a = parse_formula("(x > 1) S[0,2] (y < 3)", &xy()).unwrap();
    let b = parse_formula("(y < 3) S[0,2] (x > 1)", &xy()).unwrap();
    assert_ne!(prune_key(&Template::from(&a)), prune_key(&Template::from(&b)));
}

mod common;

use common::{arb_dataset, arb_formula, arb_interval, naive_labels, xy};
use proptest::prelude::*;
use ptstl::eval::{count_negatives, count_positives, frame_label_vector, label_vectors, Program};
use ptstl::formula::Expr;
use ptstl::{label_vector, metrics, parse_formula, Dataset, LabeledTrace};

fn trace(xs: &[f64], ys: &[f64]) -> LabeledTrace {
    let rows = xs.iter().zip(ys).map(|(x, y)| vec![*x, *y]).collect();
    LabeledTrace::new("t", xy(), rows, vec![false; xs.len()]).unwrap()
}

fn bits(text: &str, tr: &LabeledTrace) -> Vec<bool> {
    label_vector(&parse_formula(text, &xy()).unwrap(), tr).unwrap().iter().collect()
}

#[test]
fn hand_checked_windows() {
    // x > 3 at t = 0 and t = 3; y < 3 everywhere but t = 2
    let tr = trace(&[5.0, 1.0, 1.0, 5.0, 1.0, 1.0], &[1.0, 1.0, 9.0, 1.0, 1.0, 1.0]);
    assert_eq!(bits("P[1,2] (x > 3)", &tr), [false, true, true, false, true, true]);
    assert_eq!(bits("P[0,0] (x > 3)", &tr), [true, false, false, true, false, false]);
    // empty window at t = 0, vacuously true
    assert_eq!(bits("A[1,1] (x < 3)", &tr), [true, false, true, true, false, true]);
    assert_eq!(bits("(y < 3) S[0,3] (x > 3)", &tr), [true, true, false, true, true, true]);
    assert_eq!(bits("(y < 3) S[2,9] (x > 3)", &tr), [false, false, false, false, false, true]);
}

#[test]
fn since_needs_lhs_from_witness_through_now() {
    let tr = trace(&[5.0, 1.0, 4.0, 1.0], &[5.0, 1.0, 1.0, 1.0]);
    assert_eq!(bits("P[0,5] (x > 3)", &tr), [true, true, true, true]);
    // the witness at 0 has y = 5
    assert_eq!(bits("(y < 3) S[0,5] (x > 3)", &tr), [false, false, true, true]);
    let tr = trace(&[6.0, 0.0, 0.0, 0.0], &[1.0, 1.0, 0.0, 1.0]);
    assert_eq!(bits("(y > 0) S[0,2] (x > 5)", &tr), [true, true, false, false]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn evaluator_matches_definition(f in arb_formula(4), d in arb_dataset()) {
        let per_trace = label_vectors(&f, &d).unwrap();
        for (tr, got) in d.traces().iter().zip(per_trace) {
            prop_assert_eq!(got, naive_labels(&f, tr), "{}", f);
        }
    }

    #[test]
    fn memo_matches_plain_evaluation(f in arb_formula(4), d in arb_dataset()) {
        let p = Program::from_formula(&f, d.variable_names()).unwrap();
        let mut memo = Default::default();
        let first = p.eval_memo(d.frame(), &[], &mut memo);
        let again = p.eval_memo(d.frame(), &[], &mut memo);
        prop_assert_eq!(&*first, &p.eval(d.frame(), &[]));
        prop_assert_eq!(&*again, &*first);
    }

    #[test]
    fn prev_and_always_reduce_to_since(f in arb_formula(3), iv in arb_interval(), d in arb_dataset()) {
        let prev = Expr::prev(iv, f.clone());
        let since = Expr::since(iv, Expr::True, f.clone());
        let always = Expr::always(iv, f.clone());
        let dual = Expr::not(Expr::prev(iv, Expr::not(f)));
        let fr = d.frame();
        prop_assert_eq!(frame_label_vector(&prev, fr).unwrap(), frame_label_vector(&since, fr).unwrap());
        prop_assert_eq!(frame_label_vector(&always, fr).unwrap(), frame_label_vector(&dual, fr).unwrap());
    }

    #[test]
    fn positives_and_negatives_cover_every_point(f in arb_formula(4), d in arb_dataset()) {
        for tr in d.traces() {
            let k = tr.len() as u64;
            prop_assert_eq!(count_positives(&f, tr).unwrap() + count_negatives(&f, tr).unwrap(), k);
        }
        let m = metrics(&f, &d).unwrap();
        prop_assert_eq!(m.tp + m.fp + m.tn + m.fn_, d.total_points() as u64);
        prop_assert_eq!(m.mismatch, m.fp + m.fn_);
    }

    #[test]
    fn traces_are_evaluated_independently(f in arb_formula(3), d in arb_dataset()) {
        let whole = label_vectors(&f, &d).unwrap();
        for (i, tr) in d.traces().iter().enumerate() {
            let alone = Dataset::new(vec![tr.clone()]).unwrap();
            prop_assert_eq!(&label_vectors(&f, &alone).unwrap()[0], &whole[i]);
        }
    }
}

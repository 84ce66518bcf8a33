//! Two-parameter search: the staircase walk on a small table, then on data.

use ptstl::eval::Score;
use ptstl::search::diagonal_walk;
use ptstl::template::ParamDomain;
use ptstl::{diagonal_search, parse_formula, planted_dataset, Template};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Scores indexed by (k1, k2): k1 tightens the first parameter, k2
    // loosens the second, so both counts fall with k1 and rise with k2.
    let fp = [[0, 1, 2, 4], [0, 0, 1, 3], [0, 0, 0, 1]];
    let tp = [[5, 8, 11, 15], [3, 6, 9, 12], [1, 4, 6, 10]];
    let walk = diagonal_walk(3, 4, 1, |_, _| true, |a, b| Score { tp: tp[a][b], fp: fp[a][b] });
    println!("path {:?}", walk.path);
    let best = walk.best.expect("feasible");
    println!(
        "best ({}, {}) tp={} fp={} after {} evaluations",
        best.k1, best.k2, best.score.tp, best.score.fp, walk.evaluations
    );
    assert_eq!(best.score.tp, 10);

    let vars = vec!["x".to_string(), "y".to_string()];
    let planted = parse_formula("P[0,3] (x > 6)", &vars)?;
    let d = planted_dataset(1, &vars, 10, 100, &planted, 0.0)?;
    let tpl = Template::parse("P[0,?b] (x > ?c)", &vars)?;
    let r = diagonal_search(&tpl, 0, &d, ParamDomain::time(0, 15, 1)?, ParamDomain::value(0.0, 10.0, 0.5)?)?;
    println!("{} -> {}", tpl, r.formula.as_ref().expect("feasible"));
    println!("tp={} fp={} with {} of {} grid points evaluated", r.tp, r.fp, r.evaluations, 16 * 21);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

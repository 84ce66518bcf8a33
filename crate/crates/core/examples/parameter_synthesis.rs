//! Fitting a four-parameter template under a false-positive bound.

use ptstl::domains::Range;
use ptstl::search::grid_cardinality;
use ptstl::{parameter_synthesis, parse_formula, planted_dataset, DomainConfig, Template};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let vars = vec!["gust".to_string(), "pitch".to_string()];
    let planted = parse_formula("(P[2,6] (gust > 7)) and (pitch < 4)", &vars)?;
    let d = planted_dataset(11, &vars, 10, 150, &planted, 0.01)?;

    let mut cfg = DomainConfig { time: Some(Range::new(0.0, 10.0, 1.0)), ..Default::default() };
    cfg.variables.insert("gust".into(), Range::new(0.0, 10.0, 0.5));
    cfg.variables.insert("pitch".into(), Range::new(0.0, 10.0, 0.5));

    let tpl = Template::parse("(P[?p1,?p2] (gust > ?p3)) and (pitch < ?p4)", &vars)?;
    let domains = cfg.resolve(&tpl)?;
    let r = parameter_synthesis(&tpl, 5, &d, &domains)?;
    println!("{}", r.formula.as_ref().expect("feasible"));
    println!("tp={} fp={} (bound 5)", r.tp, r.fp);
    println!("{} evaluations instead of {}", r.evaluations, grid_cardinality(&domains));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

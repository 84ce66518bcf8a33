//! Parameter monotonicity: the tags derived from syntax, and what they mean
//! for the counts on real data.

use ptstl::{parse_formula, planted_dataset, Monotonicity, Template};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let vars = vec!["x".to_string(), "y".to_string()];
    let tpl = Template::parse("(P[?a,?b] (x > ?c)) and (not (A[1,?d] (y < ?e)))", &vars)?;
    println!("{tpl}");
    for p in tpl.params() {
        let arrow = match p.monotonicity {
            Monotonicity::Increasing => "raising it can only add satisfied points",
            Monotonicity::Decreasing => "raising it can only remove satisfied points",
        };
        println!("  {:>2}: {:?}, {arrow}", p.name, p.monotonicity);
    }
    println!("negated: {}", tpl.negate());

    // Sweep the upper window bound of P[1,?b] (x > 7): TP and FP never shrink.
    let planted = parse_formula("P[2,4] (x > 7)", &vars)?;
    let d = planted_dataset(2, &vars, 5, 100, &planted, 0.05)?;
    let sweep = Template::parse("P[1,?b] (x > 7)", &vars)?;
    let mut last = (0, 0);
    for b in 1..=8 {
        let f = sweep.instantiate_values(&[b as f64])?;
        let m = ptstl::metrics(&f, &d)?;
        println!("  b={b}  tp={:>3}  fp={:>3}", m.tp, m.fp);
        assert!(m.tp >= last.0 && m.fp >= last.1);
        last = (m.tp, m.fp);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

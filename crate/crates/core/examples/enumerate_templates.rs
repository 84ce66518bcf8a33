//! The template space: sizes per operator budget, pruning and shifting.

use ptstl::{formula_space, prune, shift_wrap};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let vars = vec!["x".to_string(), "y".to_string()];
    for n in 0..=2 {
        let all = formula_space(&vars, n);
        println!("up to {n} operators: {:>5} templates, {:>5} after pruning", all.len(), prune(&all).len());
    }
    let one = formula_space(&vars, 1);
    for t in one.iter().step_by(13) {
        println!("  {t}");
    }
    let shifted = shift_wrap(&one, 1);
    println!("shifted: {}", shifted[7]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}

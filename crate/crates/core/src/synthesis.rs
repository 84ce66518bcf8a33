//! Greedy disjunctive synthesis.
//!
//! Every template is first fitted on its own under the false-positive bound.
//! The fitted formulas with at least one true positive become candidates,
//! and their label vectors are kept. Starting from `false`, the candidate
//! that adds the most true positives to the running disjunction is appended
//! until nothing improves or the disjunct limit is hit. Each disjunct meets
//! the bound on its own, so the disjunction has at most `bound * p` false
//! positives.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bits::BitVector;
use crate::domains::{ConfigError, DomainConfig};
use crate::eval::{Metrics, Program, Score};
use crate::formula::{disjunction, Formula};
use crate::search::{parameter_synthesis_on, SearchError};
use crate::template::{Template, Valuation};
use crate::trace::Dataset;

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("no templates to search")]
    NoTemplates,
    #[error("the disjunct limit must be at least 1")]
    ZeroDisjuncts,
    #[error("template `{template}`: {source}")]
    Config { template: String, source: ConfigError },
    #[error("template `{template}`: {source}")]
    Search { template: String, source: SearchError },
    #[error("cannot start {workers} worker threads: {msg}")]
    Pool { workers: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// No candidate raised the disjunction's TP.
    NoImprovement,
    DisjunctLimit,
}

fn as_text<T: std::fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disjunct {
    #[serde(serialize_with = "as_text")]
    pub formula: Formula,
    #[serde(serialize_with = "as_text")]
    pub template: Template,
    pub valuation: Valuation,
    /// Metrics of this formula alone.
    pub metrics: Metrics,
    /// Metrics of the disjunction up to and including this formula.
    pub cumulative: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisResult {
    pub disjuncts: Vec<Disjunct>,
    /// Left-nested `or` of the disjuncts; `not true` when there are none.
    #[serde(serialize_with = "as_text")]
    pub combined: Formula,
    pub combined_metrics: Metrics,
    /// Greedy selection rounds, including a final one that found no gain.
    pub iterations: usize,
    pub terminated_by: Termination,
    pub templates: usize,
    /// Templates whose fitted formula met the bound with at least one TP.
    pub candidates: usize,
    /// Formula evaluations spent fitting parameters.
    pub evaluations: u64,
}

impl SynthesisResult {
    /// Human-readable summary.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let m = &self.combined_metrics;
        let _ = writeln!(s, "templates searched : {}", self.templates);
        let _ = writeln!(s, "feasible candidates: {}", self.candidates);
        let _ = writeln!(s, "evaluations        : {}", self.evaluations);
        for (i, d) in self.disjuncts.iter().enumerate() {
            let _ = writeln!(
                s,
                "phi{} = {}   tp={} fp={}   (combined tp={} fp={})",
                i + 1,
                d.formula,
                d.metrics.tp,
                d.metrics.fp,
                d.cumulative.tp,
                d.cumulative.fp
            );
        }
        let _ = writeln!(s, "combined: {}", self.combined);
        let _ = writeln!(
            s,
            "tp={} fp={} tn={} fn={} accuracy={:.4} mismatch={}",
            m.tp, m.fp, m.tn, m.fn_, m.accuracy, m.mismatch
        );
        let _ = writeln!(s, "stopped: {:?} after {} iteration(s)", self.terminated_by, self.iterations);
        s
    }
}

struct Candidate {
    template: usize,
    formula: Formula,
    valuation: Valuation,
    bits: BitVector,
}

/// Fits every template, then greedily builds a disjunction of at most
/// `max_disjuncts` fitted formulas. Runs on `config.workers()` threads; the
/// result is the same for any worker count.
pub fn formula_synthesis(
    templates: &[Template],
    bound: u64,
    d: &Dataset,
    max_disjuncts: usize,
    config: &DomainConfig,
) -> Result<SynthesisResult, SynthesisError> {
    if templates.is_empty() {
        return Err(SynthesisError::NoTemplates);
    }
    if max_disjuncts == 0 {
        return Err(SynthesisError::ZeroDisjuncts);
    }
    let workers = config.workers();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SynthesisError::Pool { workers, msg: e.to_string() })?;
    pool.install(|| run(templates, bound, d, max_disjuncts, config))
}

fn fit(
    i: usize,
    tpl: &Template,
    bound: u64,
    d: &Dataset,
    config: &DomainConfig,
) -> Result<(u64, Option<Candidate>), SynthesisError> {
    let frame = d.frame();
    let domains = config.resolve(tpl).map_err(|source| SynthesisError::Config { template: tpl.to_string(), source })?;
    let r = parameter_synthesis_on(tpl, bound, frame, &domains)
        .map_err(|source| SynthesisError::Search { template: tpl.to_string(), source })?;
    let (Some(formula), Some(valuation)) = (r.formula, r.valuation) else {
        return Ok((r.evaluations, None));
    };
    if r.tp == 0 {
        return Ok((r.evaluations, None));
    }
    let bits = Program::from_formula(&formula, frame.names())
        .map_err(|e| SynthesisError::Search { template: tpl.to_string(), source: e.into() })?
        .eval(frame, &[]);
    Ok((r.evaluations, Some(Candidate { template: i, formula, valuation, bits })))
}

fn run(
    templates: &[Template],
    bound: u64,
    d: &Dataset,
    max_disjuncts: usize,
    config: &DomainConfig,
) -> Result<SynthesisResult, SynthesisError> {
    let labels = d.frame().labels();
    let fitted: Vec<Result<(u64, Option<Candidate>), SynthesisError>> =
        templates.par_iter().enumerate().map(|(i, t)| fit(i, t, bound, d, config)).collect();
    let mut evaluations = 0;
    let mut candidates = Vec::new();
    for f in fitted {
        let (e, c) = f?;
        evaluations += e;
        candidates.extend(c);
    }

    let mut combined = BitVector::zeros(labels.len());
    let mut current = Score::default();
    let mut chosen: Vec<Disjunct> = Vec::new();
    let mut iterations = 0;
    let terminated_by = loop {
        if chosen.len() == max_disjuncts {
            break Termination::DisjunctLimit;
        }
        iterations += 1;
        // Ordered reduction: first index wins among equal (tp, fp).
        let best = candidates
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let merged = combined.or(&c.bits);
                (Score::of(&merged, labels), i)
            })
            .reduce_with(|a, b| {
                let better =
                    b.0.tp > a.0.tp || (b.0.tp == a.0.tp && (b.0.fp < a.0.fp || (b.0.fp == a.0.fp && b.1 < a.1)));
                if better {
                    b
                } else {
                    a
                }
            });
        match best {
            Some((score, i)) if score.tp > current.tp => {
                let c = &candidates[i];
                combined.or_assign(&c.bits);
                current = score;
                chosen.push(Disjunct {
                    formula: c.formula.clone(),
                    template: templates[c.template].clone(),
                    valuation: c.valuation.clone(),
                    metrics: Metrics::from_bits(&c.bits, labels),
                    cumulative: Metrics::from_bits(&combined, labels),
                });
            }
            _ => break Termination::NoImprovement,
        }
    };
    let formulas: Vec<Formula> = chosen.iter().map(|c| c.formula.clone()).collect();
    Ok(SynthesisResult {
        disjuncts: chosen,
        combined: disjunction(&formulas),
        combined_metrics: Metrics::from_bits(&combined, labels),
        iterations,
        terminated_by,
        templates: templates.len(),
        candidates: candidates.len(),
        evaluations,
    })
}

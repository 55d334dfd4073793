//! Repeated paired-seed experiments: BO and random search over the same
//! seeds, aggregated into per-iteration mean/std curves of the best value.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::optimizer::{bo_run, random_search_run, Objective, RunConfig, RunTrace};
use crate::{Error, Result, Scalar};

pub const TRACE_HEADER: &str = "method,iteration,mean_best,std_best";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<T> {
    pub repetitions: usize,
    pub base_seed: u64,
    pub run: RunConfig<T>,
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            return Err(Error::config("repetitions must be at least 1"));
        }
        self.run.validate()
    }

    /// Seed of repetition `r`, shared by both methods.
    pub fn seed_for(&self, repetition: usize) -> u64 {
        self.base_seed.wrapping_add(repetition as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bo,
    Random,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bo => "bo",
            Method::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bo" => Some(Method::Bo),
            "random" => Some(Method::Random),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Repetition<T> {
    pub index: usize,
    pub seed: u64,
    pub trace: RunTrace<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub index: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodCurves<T> {
    pub method: Method,
    pub mean_best: Vec<T>,
    pub std_best: Vec<T>,
    pub runs: Vec<Repetition<T>>,
    pub failures: Vec<Failure>,
}

impl<T: Scalar> MethodCurves<T> {
    fn aggregate(method: Method, runs: Vec<Repetition<T>>, failures: Vec<Failure>) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::Objective(format!(
                "every {} repetition failed (first: {})",
                method.as_str(),
                failures.first().map_or("none", |f| f.message.as_str())
            )));
        }
        let curves: Vec<&[T]> = runs.iter().map(|r| r.trace.best_so_far()).collect();
        let (mean_best, std_best) = mean_std_curves(&curves);
        Ok(Self {
            method,
            mean_best,
            std_best,
            runs,
            failures,
        })
    }

    pub fn final_mean(&self) -> T {
        *self.mean_best.last().expect("non-empty curve")
    }

    pub fn final_std(&self) -> T {
        *self.std_best.last().expect("non-empty curve")
    }

    pub fn iterations(&self) -> usize {
        self.mean_best.len()
    }
}

/// Pointwise arithmetic mean and sample standard deviation (divisor n - 1,
/// zero for a single curve). Curves must share one length.
pub fn mean_std_curves<T: Scalar>(curves: &[&[T]]) -> (Vec<T>, Vec<T>) {
    let len = curves[0].len();
    assert!(curves.iter().all(|c| c.len() == len), "curves differ in length");
    let n = T::from_usize(curves.len()).expect("count fits scalar");
    let mut mean = Vec::with_capacity(len);
    let mut std = Vec::with_capacity(len);
    for t in 0..len {
        let m = curves.iter().map(|c| c[t]).sum::<T>() / n;
        let s = if curves.len() > 1 {
            (curves.iter().map(|c| (c[t] - m) * (c[t] - m)).sum::<T>() / (n - T::one())).sqrt()
        } else {
            T::zero()
        };
        mean.push(m);
        std.push(s);
    }
    (mean, std)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurves<T> {
    pub bo: MethodCurves<T>,
    pub random: MethodCurves<T>,
}

impl<T: Scalar> AggregateCurves<T> {
    pub fn methods(&self) -> [&MethodCurves<T>; 2] {
        [&self.bo, &self.random]
    }

    pub fn failure_count(&self) -> usize {
        self.bo.failures.len() + self.random.failures.len()
    }
}

type Outcome<T> = (Result<RunTrace<T>, String>, Result<RunTrace<T>, String>);

/// Runs both methods for every repetition (in parallel across repetitions)
/// and aggregates the surviving runs.
pub fn run_experiment<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    cfg: &ExperimentConfig<T>,
) -> Result<AggregateCurves<T>> {
    cfg.validate()?;
    let outcomes: Vec<Outcome<T>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| {
            let run = RunConfig {
                seed: cfg.seed_for(r),
                ..cfg.run.clone()
            };
            let bo = bo_run(objective, &run).map_err(|e| e.to_string());
            let rs = random_search_run(objective, &run).map_err(|e| e.to_string());
            (bo, rs)
        })
        .collect();

    let mut bo = (Vec::new(), Vec::new());
    let mut rs = (Vec::new(), Vec::new());
    for (index, (b, r)) in outcomes.into_iter().enumerate() {
        let seed = cfg.seed_for(index);
        for (outcome, sink) in [(b, &mut bo), (r, &mut rs)] {
            match outcome {
                Ok(trace) => sink.0.push(Repetition { index, seed, trace }),
                Err(message) => sink.1.push(Failure { index, seed, message }),
            }
        }
    }
    Ok(AggregateCurves {
        bo: MethodCurves::aggregate(Method::Bo, bo.0, bo.1)?,
        random: MethodCurves::aggregate(Method::Random, rs.0, rs.1)?,
    })
}

fn fmt_f64(v: f64) -> String {
    // 17 significant digits
    format!("{v:.16e}")
}

/// Aggregate curves as CSV text: `method,iteration,mean_best,std_best`.
pub fn format_traces<T: Scalar>(curves: &AggregateCurves<T>) -> String {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for m in curves.methods() {
        for (t, (mean, std)) in m.mean_best.iter().zip(&m.std_best).enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                m.method.as_str(),
                t + 1,
                fmt_f64(mean.as_f64()),
                fmt_f64(std.as_f64())
            )
            .expect("write to string");
        }
    }
    out
}

pub fn emit_traces<T: Scalar>(curves: &AggregateCurves<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_traces(curves)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub method: Method,
    pub iteration: usize,
    pub mean_best: f64,
    pub std_best: f64,
}

pub fn parse_traces(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(TRACE_HEADER) => {}
        other => {
            return Err(Error::input(format!(
                "expected header `{TRACE_HEADER}`, found `{}`",
                other.unwrap_or("")
            )))
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let row = i + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::input(format!("row {row}: expected 4 fields")));
            }
            let bad = |what: &str| Error::input(format!("row {row}: bad {what}"));
            Ok(TraceRow {
                method: Method::parse(fields[0]).ok_or_else(|| bad("method"))?,
                iteration: fields[1].parse().map_err(|_| bad("iteration"))?,
                mean_best: fields[2].parse().map_err(|_| bad("mean_best"))?,
                std_best: fields[3].parse().map_err(|_| bad("std_best"))?,
            })
        })
        .collect()
}

/// Per-evaluation detail: `method,repetition,iteration,w_1..w_N,fitness,best_so_far`.
pub fn format_detail<T: Scalar>(methods: &[&MethodCurves<T>], n_assets: usize) -> String {
    let mut out = String::from("method,repetition,iteration");
    for i in 1..=n_assets {
        write!(out, ",w_{i}").expect("write to string");
    }
    out.push_str(",fitness,best_so_far\n");
    for m in methods {
        for rep in &m.runs {
            for (t, (e, best)) in rep.trace.evaluations().iter().zip(rep.trace.best_so_far()).enumerate() {
                write!(out, "{},{},{}", m.method.as_str(), rep.index, t + 1).expect("write to string");
                for w in e.weights.as_slice() {
                    write!(out, ",{}", fmt_f64(w.as_f64())).expect("write to string");
                }
                writeln!(out, ",{},{}", fmt_f64(e.fitness.as_f64()), fmt_f64(best.as_f64())).expect("write to string");
            }
        }
    }
    out
}

pub fn emit_detail<T: Scalar>(methods: &[&MethodCurves<T>], n_assets: usize, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_detail(methods, n_assets)).map_err(|e| Error::io(path, e))
}

/// Wraps a single run as a one-repetition curve set (used for detail output
/// of a lone BO run).
pub fn single_run_curves<T: Scalar>(method: Method, seed: u64, trace: RunTrace<T>) -> MethodCurves<T> {
    MethodCurves::aggregate(method, vec![Repetition { index: 0, seed, trace }], Vec::new())
        .expect("one run present")
}

//! The driven iteration `x_n = S(x_{n−1})`.
//!
//! Step `n` runs at the ladder's working precision for `n`, counted in
//! significant digits. The new iterate is computed with a few guard digits
//! and committed rounded to nearest at that precision. Stops when
//! `|x_n − x_{n−1}| < 10^(−E)`, after `max_steps`, or when divergence is
//! detected.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::numerics::{BigFixed, Precision};
use crate::series::{make_coefficients, s_eval_wide, CoefficientTable, SeriesError};

/// Extra digits carried while evaluating `S` inside a step.
const STEP_GUARD_DIGITS: usize = 12;

/// Significant digits kept for `StepRecord::delta_leading`.
const DELTA_LEADING_DIGITS: usize = 10;

/// Accepted start values.
pub const BASIN_LOW: &str = "2.0";
pub const BASIN_HIGH: &str = "4.3";

/// Iterates outside this window are declared divergent.
const WINDOW_LOW: &str = "0.5";
const WINDOW_HIGH: &str = "6.0";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub order: usize,
    pub x0: BigFixed,
    pub target_digits: usize,
    pub epsilon_exponent: usize,
    pub start_digits: usize,
    pub guard_digits: usize,
    pub max_steps: usize,
}

impl RunConfig {
    /// A run for `target_digits` digits from the optimised start value
    /// `3.14159265358979324` with order 4, 18 start digits and 10 guard
    /// digits.
    pub fn new(target_digits: usize) -> Self {
        RunConfig {
            order: 4,
            x0: BigFixed::parse_exact("3.14159265358979324").expect("literal parses"),
            target_digits,
            epsilon_exponent: target_digits,
            start_digits: 18,
            guard_digits: 10,
            max_steps: 64,
        }
    }

    pub fn validate(&self) -> Result<(), IterateError> {
        let bad = |msg: String| Err(IterateError::InvalidConfig(msg));
        if self.order == 0 {
            return bad("order must be at least 1".into());
        }
        if self.target_digits == 0 {
            return bad("target digits must be at least 1".into());
        }
        if self.epsilon_exponent == 0 || self.epsilon_exponent > self.target_digits {
            return bad(format!(
                "epsilon exponent {} must lie in [1, {}]",
                self.epsilon_exponent, self.target_digits
            ));
        }
        if self.start_digits == 0 {
            return bad("start digits must be at least 1".into());
        }
        if self.max_steps == 0 {
            return bad("max steps must be at least 1".into());
        }
        let low = BigFixed::parse_exact(BASIN_LOW).expect("literal parses");
        let high = BigFixed::parse_exact(BASIN_HIGH).expect("literal parses");
        if self.x0 < low || self.x0 > high {
            return bad(format!(
                "x0 = {} outside the accepted start interval [{BASIN_LOW}, {BASIN_HIGH}]",
                self.x0.to_decimal_string(20)
            ));
        }
        Ok(())
    }

    pub fn ladder(&self) -> Vec<Precision> {
        plan_precision_ladder(
            self.start_digits,
            self.order,
            self.target_digits,
            self.guard_digits,
        )
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Epsilon,
    MaxSteps,
    Divergence,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Epsilon => "epsilon",
            Termination::MaxSteps => "max_steps",
            Termination::Divergence => "divergence",
        })
    }
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub index: usize,
    pub working_digits: Precision,
    /// `floor(log10 δ_n)`, `None` when the step did not move.
    pub delta_exponent: Option<i64>,
    /// Leading digits of `δ_n` as `d.ddddddddd`, or `"0"`.
    pub delta_leading: String,
    pub wall_time: Duration,
    /// The iterate `x_n`.
    pub value: BigFixed,
}

impl StepRecord {
    /// `δ_n` rendered as `<leading>e<exponent>`.
    pub fn delta_display(&self) -> String {
        match self.delta_exponent {
            Some(e) => format!("{}e{e}", self.delta_leading),
            None => "0".to_string(),
        }
    }

    /// `log10 δ_n` from the stored leading digits.
    pub fn delta_log10(&self) -> Option<f64> {
        let e = self.delta_exponent?;
        let lead: f64 = self.delta_leading.parse().ok()?;
        Some(e as f64 + lead.log10())
    }
}

#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub config: RunConfig,
    pub ladder: Vec<Precision>,
    pub steps: Vec<StepRecord>,
    pub final_value: BigFixed,
    pub terminated_by: Termination,
}

impl IterationTrace {
    pub fn total_wall_time(&self) -> Duration {
        self.steps.iter().map(|s| s.wall_time).sum()
    }

    /// `x_0, x_1, …, x_n`.
    pub fn iterates(&self) -> impl Iterator<Item = &BigFixed> {
        std::iter::once(&self.config.x0).chain(self.steps.iter().map(|s| &s.value))
    }
}

#[derive(Debug, Error)]
pub enum IterateError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("iteration diverged at step {}", .0.steps.len())]
    Diverged(Box<IterationTrace>),
    #[error("cannot resume a run that ended by {0}")]
    InvalidResume(Termination),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Working precision per step, in significant digits.
///
/// Entry `n` is `d0 · (2P+1)^n` until the first entry that reaches
/// `target + g`; that entry is kept as is and repeated once more for the
/// final step. When `d0` already covers `target + g` the ladder is flat
/// at `d0`.
pub fn plan_precision_ladder(
    start_digits: usize,
    order: usize,
    target: usize,
    guard: usize,
) -> Vec<Precision> {
    let factor = 2 * order.max(1) + 1;
    let cap = target + guard;
    let mut current = start_digits.max(1);
    let mut ladder = Vec::new();
    if current < cap {
        while current < cap {
            current = current.saturating_mul(factor);
            ladder.push(current);
        }
    } else {
        ladder.push(current);
    }
    ladder.push(current);
    ladder
        .into_iter()
        .map(|d| Precision::new(d).expect("ladder entries are positive"))
        .collect()
}

/// A run in progress. [`iterate`] drives one to completion; stepping by
/// hand allows inspecting or perturbing the iterate between steps.
#[derive(Debug, Clone)]
pub struct Run {
    config: RunConfig,
    table: CoefficientTable,
    ladder: Vec<Precision>,
    x: BigFixed,
    steps: Vec<StepRecord>,
    finished: Option<Termination>,
    epsilon: i64,
    window: (BigFixed, BigFixed),
}

impl Run {
    pub fn new(config: RunConfig) -> Result<Self, IterateError> {
        config.validate()?;
        let table = make_coefficients(config.order)?;
        let ladder = config.ladder();
        let x = config.x0.clone();
        let epsilon = -(config.epsilon_exponent as i64);
        Ok(Run {
            config,
            table,
            ladder,
            x,
            steps: Vec::new(),
            finished: None,
            epsilon,
            window: (
                BigFixed::parse_exact(WINDOW_LOW).expect("literal parses"),
                BigFixed::parse_exact(WINDOW_HIGH).expect("literal parses"),
            ),
        })
    }

    fn from_trace(trace: IterationTrace, extra_steps: usize) -> Result<Self, IterateError> {
        if trace.terminated_by != Termination::MaxSteps {
            return Err(IterateError::InvalidResume(trace.terminated_by));
        }
        let mut config = trace.config;
        config.max_steps += extra_steps;
        let mut run = Run::new(config)?;
        run.x = trace.final_value;
        run.steps = trace.steps;
        Ok(run)
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn current(&self) -> &BigFixed {
        &self.x
    }

    pub fn finished(&self) -> Option<Termination> {
        self.finished
    }

    /// Overwrites the current iterate. Used to inject faults.
    pub fn replace_current(&mut self, x: BigFixed) {
        self.x = x;
    }

    /// Working precision for 1-based step `n`.
    pub fn working_digits(&self, n: usize) -> Precision {
        let idx = n.clamp(1, self.ladder.len()) - 1;
        self.ladder[idx]
    }

    /// Performs one step. Returns the termination reason once the run has
    /// ended; further calls are no-ops.
    pub fn step(&mut self) -> Result<Option<Termination>, IterateError> {
        if let Some(t) = self.finished {
            return Ok(Some(t));
        }
        let started = Instant::now();
        let n = self.steps.len() + 1;
        let working = self.working_digits(n);
        let int_digits = self
            .x
            .magnitude_exponent()
            .map_or(0, |e| (e + 1).max(0) as usize);
        let frac = working.digits().saturating_sub(int_digits).max(1);

        let x_prev = if self.x.frac_digits() > frac {
            self.x.round_to(frac)
        } else {
            self.x.clone()
        };
        let eval_prec = Precision::new(frac + STEP_GUARD_DIGITS).expect("positive");
        let x_next = s_eval_wide(&x_prev, &self.table, eval_prec)?.round_nearest(frac);
        let delta = x_next.sub_exact(&x_prev).abs();
        let (delta_leading, delta_exponent) = match delta.leading_digits(DELTA_LEADING_DIGITS) {
            Some((digits, e)) => (format!("{}.{}", &digits[..1], &digits[1..]), Some(e)),
            None => ("0".to_string(), None),
        };

        let outcome = self.judge(n, delta_exponent, &x_next);
        self.steps.push(StepRecord {
            index: n,
            working_digits: working,
            delta_exponent,
            delta_leading,
            wall_time: started.elapsed(),
            value: x_next.clone(),
        });
        self.x = x_next;
        self.finished = outcome;
        Ok(outcome)
    }

    fn judge(
        &self,
        n: usize,
        delta_exponent: Option<i64>,
        x_next: &BigFixed,
    ) -> Option<Termination> {
        if *x_next < self.window.0 || *x_next > self.window.1 {
            return Some(Termination::Divergence);
        }
        let converged = match delta_exponent {
            None => true,
            Some(e) => e < self.epsilon,
        };
        if converged {
            return Some(Termination::Epsilon);
        }
        if n >= 3 {
            if let (Some(cur), Some(prev)) = (
                delta_exponent,
                self.steps.last().and_then(|s| s.delta_exponent),
            ) {
                if cur >= prev {
                    return Some(Termination::Divergence);
                }
            }
        }
        if n >= self.config.max_steps {
            return Some(Termination::MaxSteps);
        }
        None
    }

    /// Steps until the run ends.
    pub fn run_to_end(mut self) -> Result<IterationTrace, IterateError> {
        loop {
            if let Some(t) = self.step()? {
                let trace = self.into_trace(t);
                return match t {
                    Termination::Divergence => Err(IterateError::Diverged(Box::new(trace))),
                    _ => Ok(trace),
                };
            }
        }
    }

    fn into_trace(self, terminated_by: Termination) -> IterationTrace {
        IterationTrace {
            config: self.config,
            ladder: self.ladder,
            steps: self.steps,
            final_value: self.x,
            terminated_by,
        }
    }
}

/// Runs the iteration described by `config` to completion.
pub fn iterate(config: RunConfig) -> Result<IterationTrace, IterateError> {
    Run::new(config)?.run_to_end()
}

/// Continues a run that stopped at `max_steps` for up to `extra_steps`
/// more steps.
pub fn resume(trace: IterationTrace, extra_steps: usize) -> Result<IterationTrace, IterateError> {
    Run::from_trace(trace, extra_steps)?.run_to_end()
}

//! Cooperative wall-clock budgets.
//!
//! Long-running fits (tree building, quasi-Newton iterations, elimination
//! rounds) check a [`Deadline`] between bounded units of work instead of
//! being killed from outside, which keeps timeout behavior portable and
//! leaves no shared state half-written.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// A point in time after which work must stop, or no limit at all.
#[derive(Clone, Copy, Debug)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    /// No time limit.
    pub const NONE: Deadline = Deadline(None);

    /// Deadline `seconds` from now. Negative values behave like zero.
    pub fn after_seconds(seconds: f64) -> Deadline {
        let clamped = if seconds.is_finite() && seconds > 0.0 {
            seconds
        } else {
            0.0
        };
        Deadline(Instant::now().checked_add(Duration::from_secs_f64(clamped)))
    }

    /// True once the budget is spent.
    pub fn expired(&self) -> bool {
        match self.0 {
            Some(t) => Instant::now() >= t,
            None => false,
        }
    }

    /// `Err(Error::Timeout)` once the budget is spent.
    pub fn check(&self) -> Result<()> {
        if self.expired() {
            Err(Error::Timeout)
        } else {
            Ok(())
        }
    }
}

impl Default for Deadline {
    fn default() -> Self {
        Deadline::NONE
    }
}

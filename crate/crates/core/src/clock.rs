//! Clocks used to stamp planning time.

use std::cell::Cell;
use std::time::Instant;

pub trait Clock {
    /// Seconds since an arbitrary origin.
    fn now(&self) -> f64;
}

/// Monotonic wall clock.
#[derive(Debug, Clone, Copy)]
pub struct WallClock {
    origin: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// A clock that never advances; keeps artifacts byte-reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// Advances by a fixed step on every read.
#[derive(Debug, Default)]
pub struct SteppingClock {
    t: Cell<f64>,
    step: f64,
}

impl SteppingClock {
    pub fn new(step: f64) -> Self {
        Self {
            t: Cell::new(0.0),
            step,
        }
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> f64 {
        let t = self.t.get();
        self.t.set(t + self.step);
        t
    }
}

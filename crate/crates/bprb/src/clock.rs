//! Wall-clock implementation of the core's stopwatch.

use std::time::Instant;

use bprb_core::search::Stopwatch;

/// Monotonic wall clock measuring from its creation.
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Stopwatch for WallClock {
    fn elapsed_s(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Builds a fresh stopwatch per solve run. The default wall-clock factory is
/// what the CLI uses; tests inject frozen clocks to get byte-identical
/// reports.
pub type ClockFactory<'a> = &'a (dyn Fn() -> Box<dyn Stopwatch> + Sync);

pub fn wall_clock_factory() -> Box<dyn Stopwatch> {
    Box::new(WallClock::start())
}

/// A stopwatch frozen at zero; reports built with it are reproducible
/// byte for byte.
pub fn frozen_clock_factory() -> Box<dyn Stopwatch> {
    Box::new(bprb_core::search::NullClock)
}

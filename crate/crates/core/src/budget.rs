//! Cooperative cancellation and timing hooks.
//!
//! The core has no access to a wall clock. Long-running searches poll an
//! [`Interrupt`] every few hundred steps; the pipeline additionally reads a
//! [`Clock`] to fill in per-stage timings. The `taskshield` crate provides an
//! `Instant`-backed implementation.

/// Polled by long-running searches; returning `true` aborts the search.
pub trait Interrupt {
    fn interrupted(&self) -> bool;
}

/// A monotonic time source paired with an interrupt.
pub trait Clock: Interrupt {
    /// Seconds elapsed since an arbitrary fixed origin.
    fn seconds(&self) -> f64;
}

/// Never interrupts and always reports zero elapsed time.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Interrupt for NoClock {
    fn interrupted(&self) -> bool {
        false
    }
}

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

impl<T: Interrupt + ?Sized> Interrupt for &T {
    fn interrupted(&self) -> bool {
        (**self).interrupted()
    }
}

/// How often (in search steps) the searches poll their interrupt.
pub(crate) const POLL_INTERVAL: u64 = 256;

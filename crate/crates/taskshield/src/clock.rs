use std::time::{Duration, Instant};

use taskshield_core::{Clock, Interrupt};

/// Wall-clock time since construction, interrupting once the optional
/// limit has passed.
#[derive(Clone, Copy, Debug)]
pub struct Deadline {
    start: Instant,
    limit: Option<Duration>,
}

impl Deadline {
    pub fn new(limit: Option<Duration>) -> Self {
        Deadline {
            start: Instant::now(),
            limit,
        }
    }

    pub fn from_secs(limit_s: Option<f64>) -> Self {
        Self::new(limit_s.map(Duration::from_secs_f64))
    }

    pub fn unlimited() -> Self {
        Self::new(None)
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}

impl Interrupt for Deadline {
    fn interrupted(&self) -> bool {
        self.limit
            .is_some_and(|limit| self.start.elapsed() >= limit)
    }
}

impl Clock for Deadline {
    fn seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_limit_fires_immediately() {
        assert!(Deadline::from_secs(Some(0.0)).interrupted());
        assert!(!Deadline::unlimited().interrupted());
    }
}

//! Cooperative cancellation and progress reporting for long-running scans.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

/// Shared between a running scan and whoever supervises it (a job worker).
///
/// Scans call [`RunControl::report`] after each unit of work and stop at the
/// next check once [`RunControl::cancel`] has been called. Progress is a
/// fraction in `[0, 1]` and never decreases.
#[derive(Debug, Default)]
pub struct RunControl {
    cancelled: AtomicBool,
    progress_bits: AtomicU64,
}

impl RunControl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.cancelled.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.cancelled.load(Ordering::SeqCst)
    }

    /// Records `done / total` progress; returns `false` when the caller should stop.
    pub fn report(&self, done: usize, total: usize) -> bool {
        let frac = if total == 0 { 1.0 } else { (done as f64 / total as f64).clamp(0.0, 1.0) };
        let _ = self
            .progress_bits
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |old| {
                (frac > f64::from_bits(old)).then_some(frac.to_bits())
            });
        !self.is_cancelled()
    }

    pub fn progress(&self) -> f64 {
        f64::from_bits(self.progress_bits.load(Ordering::SeqCst))
    }
}

/// Convenience for optional controls.
pub(crate) fn keep_going(ctrl: Option<&RunControl>, done: usize, total: usize) -> bool {
    ctrl.is_none_or(|c| c.report(done, total))
}

use crate::control::RunControl;
use crate::exec::Exec;

/// Roots per wave. Budget and cancellation are checked between waves, so
/// results depend only on this constant, never on the execution strategy.
pub(crate) const WAVE: usize = 128;

pub(crate) struct ScanOutcome<R> {
    pub results: Vec<R>,
    pub budget_hit: bool,
    pub cancelled: bool,
}

/// Runs `per_root` over `0..n` in waves. `over_budget` sees each result in
/// root order and returns true once the caller's budget is exhausted; the
/// scan then stops after that result.
pub(crate) fn scan_roots<R, F>(
    n: usize,
    exec: Exec,
    ctrl: Option<&RunControl>,
    mut over_budget: impl FnMut(&R) -> bool,
    per_root: F,
) -> ScanOutcome<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let mut results = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        if ctrl.is_some_and(|c| c.is_cancelled()) {
            return ScanOutcome { results, budget_hit: false, cancelled: true };
        }
        let end = (start + WAVE).min(n);
        let wave = exec.map_range(end - start, |i| per_root(start + i));
        for r in wave {
            let stop = over_budget(&r);
            results.push(r);
            if stop {
                return ScanOutcome { results, budget_hit: true, cancelled: false };
            }
        }
        start = end;
        if !crate::control::keep_going(ctrl, start, n) {
            return ScanOutcome { results, budget_hit: false, cancelled: start < n };
        }
    }
    ScanOutcome { results, budget_hit: false, cancelled: false }
}

//! Per-thread count of complex multiply-accumulates on estimator runtime
//! paths, used to check their complexity.

use std::cell::Cell;

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
}

pub fn record(n: u64) {
    OPS.with(|c| c.set(c.get() + n));
}

/// Returns the count accumulated on this thread and resets it.
pub fn take() -> u64 {
    OPS.with(|c| c.replace(0))
}

//! Runner for the acceptance suite in `tests/acceptance.rs`. Each criterion
//! is a closure returning a one-line detail on success or a reason on
//! failure; a criterion also fails if it panics or exceeds its time budget.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

#[derive(Default)]
pub struct Suite {
    failed: Vec<u32>,
    total: usize,
}

impl Suite {
    pub fn check(&mut self, id: u32, name: &str, budget: Duration, body: impl FnOnce() -> Result<String, String>) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(d) if took > budget => Err(format!("{d}; over budget of {:.0?}", budget)),
            o => o,
        };
        self.total += 1;
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(e) => ("FAIL", e),
        };
        if outcome.is_err() {
            self.failed.push(id);
        }
        println!("{tag} criterion {id:>2} {name} [{:.2}s] {detail}", took.as_secs_f64());
    }

    /// Prints a summary and returns the process exit code.
    pub fn finish(self) -> i32 {
        println!("{} of {} criteria passed", self.total - self.failed.len(), self.total);
        if self.failed.is_empty() {
            0
        } else {
            println!("failed: {:?}", self.failed);
            1
        }
    }
}

/// `Err(msg)` unless `cond` holds.
pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

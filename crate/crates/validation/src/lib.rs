//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.

use std::time::{Duration, Instant};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {} {}: {} ({:.2} s of {:.0} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64()
        )
    }
}

/// Accumulates the checks of one criterion.
#[derive(Debug, Default)]
pub struct Checks {
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Checks {
    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.notes.push(format!("FAILED {what}"));
            self.failures.push(what);
        }
    }

    pub fn fail(&mut self, what: impl Into<String>) {
        self.check(false, what);
    }
}

/// Runs a criterion, timing it against its budget.
pub fn run(
    id: u32,
    name: &'static str,
    budget_secs: u64,
    body: impl FnOnce(&mut Checks),
) -> Verdict {
    let mut checks = Checks::default();
    let start = Instant::now();
    body(&mut checks);
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    if elapsed > budget {
        checks.fail("runtime over budget");
    }
    let passed = checks.failures.is_empty();
    let detail = checks.notes.join("; ");
    Verdict {
        id,
        name,
        passed,
        detail,
        elapsed,
        budget,
    }
}

//! Bookkeeping for the acceptance runner: each criterion collects checks
//! and prints a single pass/fail line.

use std::fmt::Display;
use std::time::{Duration, Instant};

pub struct Criterion {
    id: u8,
    title: String,
    started: Instant,
    checks: usize,
    max_deviation: f64,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    pub fn new(id: u8, title: &str) -> Self {
        Self {
            id,
            title: title.to_string(),
            started: Instant::now(),
            checks: 0,
            max_deviation: 0.0,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Records `|got − want| ≤ tol`.
    pub fn within(&mut self, label: impl Display, got: f64, want: f64, tol: f64) {
        let dev = (got - want).abs();
        self.checks += 1;
        if dev.is_finite() {
            self.max_deviation = self.max_deviation.max(dev);
        }
        if !(dev <= tol) {
            self.failures
                .push(format!("{label}: got {got:.9}, want {want:.9} (|Δ| = {dev:.2e} > {tol:.0e})"));
        }
    }

    pub fn check(&mut self, label: impl Display, ok: bool, detail: impl Display) {
        self.checks += 1;
        if !ok {
            self.failures.push(format!("{label}: {detail}"));
        }
    }

    pub fn error(&mut self, label: impl Display, err: impl Display) {
        self.checks += 1;
        self.failures.push(format!("{label}: error: {err}"));
    }

    /// Unwraps a result, recording the error as a failure.
    pub fn ok<T, E: Display>(&mut self, label: impl Display, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.error(label, e);
                None
            }
        }
    }

    pub fn note(&mut self, text: impl Display) {
        self.notes.push(text.to_string());
    }

    pub fn within_time(&mut self, limit: Duration) {
        let spent = self.started.elapsed();
        self.check(
            "runtime",
            spent <= limit,
            format!("{:.1} s exceeds {:.0} s", spent.as_secs_f64(), limit.as_secs_f64()),
        );
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn line(&self) -> String {
        let mut parts = vec![
            format!("{} checks", self.checks),
            format!("max deviation {:.2e}", self.max_deviation),
        ];
        parts.extend(self.notes.iter().cloned());
        parts.push(format!("{:.1} s", self.started.elapsed().as_secs_f64()));
        let mut line = format!(
            "criterion {} {} {} [{}]",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            parts.join(", ")
        );
        if !self.failures.is_empty() {
            line.push_str(" failed: ");
            line.push_str(&self.failures.join("; "));
        }
        line
    }

    /// Prints the summary line and returns whether every check passed.
    pub fn finish(self) -> bool {
        println!("{}", self.line());
        self.passed()
    }
}

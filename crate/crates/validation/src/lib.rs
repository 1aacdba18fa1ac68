//! Shared pieces of the acceptance suite: criterion outcomes, timing and reference values.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use platelab::experiments::RunConfig;

/// `k^4` for the first roots of `J_n(k) I_{n+1}(k) + I_n(k) J_{n+1}(k) = 0`, unit clamped disk,
/// from bisection on the Bessel power series (n = 0, then the double n = 1 value).
pub const CLAMPED_DISK: [f64; 3] = [104.363_105_558_844_4, 452.004_510_133_174_2, 452.004_510_133_174_2];

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<34} {}  ({:.1}s) {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

/// Runs `check`, turning errors and panics into failures.
pub fn run(id: u32, name: &'static str, check: impl FnOnce() -> Result<(bool, String), String>) -> Outcome {
    let t = Instant::now();
    let (pass, detail) = match catch_unwind(AssertUnwindSafe(check)) {
        Ok(Ok(v)) => v,
        Ok(Err(e)) => (false, format!("error: {e}")),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (false, format!("panic: {msg}"))
        }
    };
    let out = Outcome { id, name, pass, detail, seconds: t.elapsed().as_secs_f64() };
    println!("{}", out.line());
    out
}

/// TOML for a run on `domain` (a `[domain]` body) with the given extras.
pub fn config(domain: &str, operator: &str, cells: u32, m: usize, eps: &[f64]) -> RunConfig {
    let eps: Vec<String> = eps.iter().map(|e| format!("{e}")).collect();
    let text = format!(
        "[domain]\n{domain}\n[operator]\n{operator}\n[grid]\ncells = {cells}\n[spectrum]\nm = {m}\n[study]\neps = [{}]\n",
        eps.join(", ")
    );
    RunConfig::from_toml_str(&text).unwrap_or_else(|e| panic!("bad acceptance config: {e}\n{text}"))
}

pub const DISK: &str = "kind = \"disk\"\nradius = 1.0";
pub const RECTANGLE: &str = "kind = \"rectangle\"\nwidth = 2.0\nheight = 1.0";
pub const BILAPLACIAN: &str = "kind = \"bilaplacian\"";
pub const ANISOTROPIC: &str = "kind = \"diagonal\"\nmatrix = [[4.0, 0.0], [0.0, 1.0]]";

//! Acceptance criteria, one line each. Exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use raysinger_core::report::Check;
use raysinger_core::suite::{self, Context};

const SEED: u64 = 42;

const TITLES: [&str; 14] = [
    "supertrace duality, n <= 4",
    "supertrace vanishing and Str(omega)",
    "Casimir identity, n <= 4",
    "Gaussian moments vs quadrature",
    "P-series identity, n = 2, 3, 4",
    "asymp4 two-sided check",
    "transport closed forms and RK4 order",
    "fixed-point pipeline and det cancellation",
    "Euler density and Gauss-Bonnet",
    "Laplacian variation substitution, N = 256",
    "finite-dimensional variation, 20 families",
    "isolated fixed points: circle N = 2048, torus 64x64",
    "vanishing cases, N = 1024",
    "holonomy torsion convergence",
];

/// Wall-clock budgets in seconds, where one is stated.
fn budget(k: usize) -> Option<f64> {
    match k {
        1 => Some(5.0),
        5 => Some(30.0),
        _ => None,
    }
}

fn main() -> ExitCode {
    faer::set_global_parallelism(faer::Par::Seq);
    let ctx = Context::new(SEED);
    let mut failed = 0;
    for k in 1..=14 {
        let t = Instant::now();
        let mut checks = if k == 12 {
            let circle = suite::circle_reflection(&ctx);
            let secs = t.elapsed().as_secs_f64();
            let mut v = vec![circle, Check::new("runtime.circle_reflection_s", secs, 60.0, "")];
            v.push(suite::torus_minus_id(&ctx));
            v
        } else {
            suite::criterion(k, &ctx)
        };
        let secs = t.elapsed().as_secs_f64();
        if let Some(b) = budget(k) {
            checks.push(Check::new("runtime_s", secs, b, ""));
        }
        let ok = checks.iter().all(|c| c.passed);
        failed += usize::from(!ok);
        println!("criterion {k:>2}  {}  {:<50} ({secs:.1} s)", if ok { "PASS" } else { "FAIL" }, TITLES[k - 1]);
        for c in checks.iter().filter(|c| !c.passed) {
            println!("    {}: error {:e} > tol {:e}  {}", c.id, c.error, c.tolerance, c.detail);
        }
    }
    println!("{} of 14 criteria passed", 14 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

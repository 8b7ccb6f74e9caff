use raysinger_core::report::{render, Format, Report};
use raysinger_core::suite::{run_suite, Context, SuiteConfig};

fn small() -> Context {
    let mut ctx = Context::new(42);
    ctx.config = SuiteConfig::from_json(
        r#"{"spectral": {"reflection_n": 64, "vanishing_n": 64, "variation_n": 32, "torus_n": 8,
            "convergence_n": [16, 32, 64], "graded_families": 3}}"#,
    )
    .unwrap();
    ctx
}

#[test]
fn fast_suites_pass() {
    for name in ["algebra", "chernweil", "asymptotics", "transport", "localindex"] {
        let (results, _) = run_suite(name, &small()).unwrap();
        assert_eq!(results.len(), 1);
        for c in &results[0].checks {
            assert!(c.passed, "{name}: {c:?}");
        }
    }
}

#[test]
fn all_runs_every_module_once() {
    let (results, run) = run_suite("all", &small()).unwrap();
    let names: Vec<_> = results.iter().map(|r| r.suite.as_str()).collect();
    assert_eq!(names, ["algebra", "chernweil", "asymptotics", "transport", "localindex", "spectral"]);
    let checks: usize = results.iter().map(|r| r.checks.len()).sum();
    assert_eq!(run.runtimes_ms.len(), checks);
}

#[test]
fn reports_are_byte_identical_apart_from_the_header() {
    let render_once = |stamp: &str| {
        let (results, mut run) = run_suite("localindex", &small()).unwrap();
        run.timestamp = stamp.into();
        run.runtimes_ms.clear();
        let report = Report::new(results, run, None, 1.0);
        [Format::Json, Format::Csv, Format::Text].map(|f| render(&report, f))
    };
    let a = render_once("2026-01-01T00:00:00Z");
    let b = render_once("2026-01-01T00:00:00Z");
    assert_eq!(a, b);
    let c = render_once("2027-01-01T00:00:00Z");
    for (x, y) in a.iter().zip(&c) {
        let diff = x.lines().zip(y.lines()).filter(|(l, m)| l != m).count();
        assert_eq!(diff, 1);
    }
}

#[test]
fn seeds_change_random_checks_only_in_detail() {
    let mut ctx = small();
    let (a, _) = run_suite("algebra", &ctx).unwrap();
    ctx.seed = 7;
    let (b, _) = run_suite("algebra", &ctx).unwrap();
    assert_eq!(a[0].checks.len(), b[0].checks.len());
    assert!(b[0].passed());
}

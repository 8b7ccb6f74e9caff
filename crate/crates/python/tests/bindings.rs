use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn with_module(f: impl for<'py> FnOnce(Python<'py>, Bound<'py, PyModule>)) {
    Python::initialize();
    Python::attach(|py| {
        let m = wrap_pymodule!(raysinger::raysinger)(py).into_bound(py).cast_into::<PyModule>().unwrap();
        f(py, m)
    })
}

#[test]
fn supertrace_routes_agree_from_python() {
    with_module(|py, m| {
        let locals = PyDict::new(py);
        locals.set_item("rs", m).unwrap();
        let ok: bool = py
            .eval(c"all(rs.Clifford.random(3, s, 0.3).supertrace() == rs.Clifford.random(3, s, 0.3).supertrace_via_berezin() for s in range(20))", Some(&locals), None)
            .unwrap()
            .extract()
            .unwrap();
        assert!(ok);
    });
}

#[test]
fn euler_and_suite_results() {
    with_module(|py, m| {
        let (exact, value): (String, f64) = m
            .getattr("euler_of_matrix")
            .unwrap()
            .call1((vec![vec!["0", "1"], vec!["-1", "0"]],))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(exact, "1/2·π^{-2/2}");
        assert!((value - 0.5 / std::f64::consts::PI).abs() < 1e-15);
        let suites = m.getattr("run_suite").unwrap().call1(("algebra",)).unwrap();
        let locals = PyDict::new(py);
        locals.set_item("s", suites).unwrap();
        let passed: bool =
            py.eval(c"all(c['passed'] for c in s[0]['checks'])", Some(&locals), None).unwrap().extract().unwrap();
        assert!(passed);
        assert!(m.getattr("run_suite").unwrap().call1(("nope",)).is_err());
    });
}

#[test]
fn circle_model_from_json() {
    with_module(|_py, m| {
        let cfg = r#"{"n": 64, "holonomy": {"kind": "angle", "phi": 1.3}}"#;
        let model = m.getattr("CircleModel").unwrap().call1((cfg,)).unwrap();
        let tau: f64 = model.call_method0("renormalized_log_torsion").unwrap().extract().unwrap();
        let want: f64 = m.getattr("holonomy_torsion").unwrap().call1((1.3,)).unwrap().extract().unwrap();
        assert!((tau - want).abs() < 1e-9, "{tau} {want}");
        assert!(m.getattr("CircleModel").unwrap().call1(("{}",)).is_err());
    });
}

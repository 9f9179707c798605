use dp2_wasm::{emden_run, riccati_curve, selfsim_snapshot};
use serde_json::Value;

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.expect("export succeeds")).unwrap()
}

fn reals(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn emden_canonical_touchdown() {
    let v = parse(emden_run(-1.0, 0.5, 1.0, 0.0, 10.0, 200));
    assert_eq!(v["fate"], "TouchdownAt");
    assert!((v["S"].as_f64().unwrap() - 8.0 / 3.0).abs() < 1e-4);
    let (s, a) = (reals(&v["s"]), reals(&v["a"]));
    assert_eq!(s.len(), 200);
    assert_eq!(a[0], 1.0);
    assert!(a.windows(2).all(|w| w[1] < w[0]));
    assert!(emden_run(-1.0, 0.5, -1.0, 0.0, 10.0, 200).unwrap_err().contains("a0"));
    assert!(emden_run(-1.0, 0.5, 1.0, 0.0, 10.0, 1).is_err());
}

#[test]
fn snapshot_support_and_mass() {
    let v = parse(selfsim_snapshot(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 2.0, 401));
    let (x, rho, u) = (reals(&v["x"]), reals(&v["rho"]), reals(&v["u"]));
    assert_eq!(v["support_halfwidth"], 1.0);
    for ((&x, &r), &u) in x.iter().zip(&rho).zip(&u) {
        let expected = (1.0 - x * x).max(0.0).sqrt();
        assert!((r - expected).abs() < 1e-12 && u == 0.0);
    }
    assert!((v["mass"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

    let v = parse(selfsim_snapshot(1.0, 1.0, -1.0, -1.0, 1.0, 0.0, 0.5, 2.0, 11));
    assert!((v["T"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);
    assert!(selfsim_snapshot(1.0, 1.0, -1.0, -1.0, 1.0, 0.0, 0.7, 2.0, 11).unwrap_err().contains("blowup"));
    assert!(selfsim_snapshot(1.0, 1.0, 1.0, -1.0, 1.0, 0.0, 0.0, 2.0, 11).is_err());
}

#[test]
fn riccati_curve_escapes_at_the_bound() {
    let v = parse(riccati_curve(0.0, -2.0, 1e-3));
    assert_eq!(v["T_bound"], 0.5);
    assert!((v["escape_time"].as_f64().unwrap() - 0.5).abs() < 1e-4);
    let (t, vv) = (reals(&v["t"]), reals(&v["v"]));
    assert_eq!((t[0], vv[0]), (0.0, -2.0));
    let v = parse(riccati_curve(2.0, -1.0, 1e-3));
    assert_eq!(v["applies"], false);
    assert_eq!(v["escape_time"], Value::Null);
    assert!(riccati_curve(-1.0, -2.0, 1e-3).is_err());
}

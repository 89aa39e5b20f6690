use gz_wasm::{alpha_beta_json, gap_curve_json, variation_json};

#[test]
fn alpha_matches_closed_form() {
    let v = alpha_beta_json(3.0, 30).unwrap();
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 31);
    assert!(pts[0]["beta"].is_null());
    for p in pts {
        let r = p["r"].as_f64().unwrap();
        let a = p["alpha"].as_f64().unwrap();
        assert!((a + r.powi(3) * (-0.5 * r * r).exp()).abs() < 1e-12);
    }
    assert!(alpha_beta_json(-1.0, 10).is_err());
}

#[test]
fn gap_of_discs_matches_closed_form() {
    let disc = |r: f64| 1.0 - (-0.5 * r * r).exp();
    let v = gap_curve_json("ball:1", "ball:2", 0.25, 4).unwrap();
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 3);
    for p in pts {
        let lambda = p["lambda"].as_f64().unwrap();
        let r = lambda + 2.0 * (1.0 - lambda);
        let oracle = disc(r).powf(0.25) - lambda * disc(1.0).powf(0.25) - (1.0 - lambda) * disc(2.0).powf(0.25);
        assert!((p["gap"].as_f64().unwrap() - oracle).abs() < 1e-10);
        assert_eq!(p["verdict"], "holds");
    }
    assert!(gap_curve_json("ball:1", "cube:2", 0.25, 4).is_err());
}

#[test]
fn disc_variation() {
    let v = variation_json("ball:1", 0.0, 2.0).unwrap();
    let e = (-0.5f64).exp();
    assert!((v["first"]["formula"].as_f64().unwrap() - e).abs() < 1e-9);
    assert!(v["second"]["formula"].as_f64().unwrap().abs() < 1e-9);
    assert!((v["local_c"]["c"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(v["boundary"].as_array().unwrap().len(), 180);
}

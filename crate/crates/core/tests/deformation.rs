//! End-to-end checks of the deformation pipeline on the Hopf model: the
//! conformal prediction, the warped-submersion formulas, the operator
//! difference blocks, and the headline curvature conclusions.

use ricci_lab::calculus::riemann;
use ricci_lab::deform::{
    build_deformation, conformal_check, delta_r, gw_check, ric_k_at, sec_range_at,
    stratified_samples, DeformationParams,
};
use ricci_lab::checker::{verify_delta_ric, HypothesisBranch};
use ricci_lab::models::{fundamental_tensors, submersion_by_name};
use ricci_lab::profile::build_omega;
use ricci_lab::FrameSearchConfig;

/// Shipped flagship parameters for the Hopf model (K = 1, k = 2).
fn flagship_params() -> DeformationParams {
    DeformationParams {
        p: vec![0.0, 0.0],
        c_h: 6.0,
        c_v: -56.0,
        eps_h: 0.45,
        eps_v: 0.45,
        eta_h: 3.5e-8,
        eta_v: 0.12,
        tau_h: 8.0e-33,
        tau_v: 1.2e-7,
        k_neg: 1.0,
        epsilon: 0.25,
    }
}

#[test]
fn flagship_deformation_builds_and_certifies() {
    let model = submersion_by_name("hopf").unwrap();
    let params = flagship_params();
    let samples = stratified_samples(&model, &params, 7, 24);
    let deformed = build_deformation(&model, &params, &samples).unwrap();
    for c in &deformed.certificates {
        assert!(c.pass(), "{}: worst {} margin {}", c.name, c.worst, c.margin);
    }

    // negative curvature at p: all base sectional curvature below -K
    let (lo, hi) = sec_range_at(&deformed.g_tilde_b, &params.p).unwrap();
    assert!(hi < -params.k_neg, "sec range at p: [{lo}, {hi}]");
    // undeformed base has sec = 4
    let (lo0, hi0) = sec_range_at(&model.base.metric, &params.p).unwrap();
    assert!((lo0 - 4.0).abs() < 1e-9 && (hi0 - 4.0).abs() < 1e-9);
}

#[test]
fn conformal_prediction_matches_direct_curvature() {
    let base = ricci_lab::models::base_by_name("s2half").unwrap();
    let p = [0.0, 0.0];
    // three distinct builds: positive, flagship-like, negative. The bases'
    // distance-Hessian gate caps eta near 0.14 on S²(1/2).
    let builds = [
        (2.0, 0.1, 0.12, 1.0e-6),
        (6.0, 0.45, 0.1, 6.0e-7),
        (-3.0, 0.2, 0.13, 1.5e-6),
    ];
    for (c, eps, eta, tau) in builds {
        let omega = build_omega(&base, &p, c, eps, eta, tau).unwrap();
        let mut rng = ricci_lab::sampling::rng(11);
        for i in 0..8 {
            // half the points inside the support, half global
            let x = if i % 2 == 0 {
                let d = 0.3 * eta + 1.2 * eta * (i as f64) / 8.0;
                base.point_at_dist(&p, &[0.6, -0.8], d)
            } else {
                base.sample_point(&mut rng)
            };
            let check = conformal_check(&base.metric, &omega.field, &x).unwrap();
            assert!(
                check.rel_error < 1e-6,
                "c = {c}: rel error {} at {x:?}",
                check.rel_error
            );
        }
    }
}

#[test]
fn conformal_center_sectional_drops_below_minus_k() {
    let base = ricci_lab::models::base_by_name("s2half").unwrap();
    let p = [0.0, 0.0];
    let omega = build_omega(&base, &p, 6.0, 0.45, 0.1, 1.0e-6).unwrap();
    let deformed = base.metric.conformal(&omega.field);
    let data = riemann(&deformed, &p).unwrap();
    let sec = ricci_lab::calculus::sectional(&data, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
    // at the center: e^{2w} sec~ = sec - 2 Hess = 4 - 4 C_h = -20
    assert!((sec - -20.0).abs() < 1e-6, "sec at p: {sec}");
    assert!(sec < -1.0);
}

#[test]
fn hat_metric_tensor_identities() {
    // A and S are unchanged by the horizontal conformal change; A* and σ
    // rescale by e^{2 ω̃_h}
    let model = submersion_by_name("hopf").unwrap();
    let params = flagship_params();
    let samples = stratified_samples(&model, &params, 13, 4);
    let deformed = build_deformation(&model, &params, &samples).unwrap();
    let wh = &deformed.omega_h_pullback.field;

    let mut checked = 0;
    for (_, x) in samples.total_points.iter().take(30) {
        let ft0 = fundamental_tensors(&model, &model.total, x).unwrap();
        let ft1 = fundamental_tensors(&model, &deformed.g_hat_m, x).unwrap();
        let scale = (2.0 * wh.eval(x)).exp();
        for a in 0..2 {
            for b in 0..2 {
                for l in 0..3 {
                    let d = (ft0.a[a][b][l] - ft1.a[a][b][l]).abs();
                    assert!(d < 1e-7, "A changed by {d}");
                }
            }
            let d: f64 = (0..3)
                .map(|l| (ft0.s[a][0][l] - ft1.s[a][0][l]).abs())
                .sum();
            assert!(d < 1e-7, "S changed by {d}");
            for l in 0..3 {
                let d = (ft0.a_star[a][0][l] - scale * ft1.a_star[a][0][l]).abs();
                assert!(d < 1e-7, "A* relation off by {d}");
            }
        }
        for l in 0..3 {
            let d = (ft0.sigma[0][0][l] - scale * ft1.sigma[0][0][l]).abs();
            assert!(d < 1e-7, "sigma relation off by {d}");
        }
        checked += 1;
    }
    assert!(checked > 10);
}

#[test]
fn gw_families_match_direct_curvature() {
    let model = submersion_by_name("hopf").unwrap();
    let params = flagship_params();
    let samples = stratified_samples(&model, &params, 17, 4);
    let deformed = build_deformation(&model, &params, &samples).unwrap();

    let mut tested = 0;
    for (tag, x) in &samples.total_points {
        if tested >= 8 {
            break;
        }
        // concentrate on the interesting region
        if !(tag.starts_with("tau_v") || tag.starts_with("eta_v") || tag == "center_fiber") {
            continue;
        }
        let fams = gw_check(&model, &deformed, x).unwrap();
        assert_eq!(fams.len(), 7);
        for f in &fams {
            assert!(
                f.worst_rel < 1e-5,
                "{tag}: family {} rel {} abs {}",
                f.family,
                f.worst_rel,
                f.worst_abs
            );
        }
        tested += 1;
    }
    assert!(tested >= 4);
}

#[test]
fn delta_r_blocks_and_verdicts() {
    let model = submersion_by_name("hopf").unwrap();
    let params = flagship_params();
    let samples = stratified_samples(&model, &params, 19, 4);
    let deformed = build_deformation(&model, &params, &samples).unwrap();
    let cfg = FrameSearchConfig::seeded(5);

    // inside the strong region: mixed form dominated by -Hess ω̃_v
    let x_core = model.fiber_point(&params.p, &[0.7]).unwrap();
    let d = delta_r(&model, &deformed, &x_core).unwrap();
    assert!(
        d.blocks.hv_quadform_min >= params.lambda_hv(),
        "core mixed form {} vs lambda_hv {}",
        d.blocks.hv_quadform_min,
        params.lambda_hv()
    );
    assert!(
        d.blocks.hh_quadform_min >= params.lambda_hh(),
        "core horizontal form {} vs lambda_hh {}",
        d.blocks.hh_quadform_min,
        params.lambda_hh()
    );
    let verdict = verify_delta_ric(
        &d.op,
        2,
        2,
        params.epsilon,
        params.lambda_hh(),
        params.lambda_hv(),
        &cfg,
    )
    .unwrap();
    assert_eq!(verdict.branch, HypothesisBranch::RwSum);
    assert!(verdict.hypothesis_concludes);
    assert!(verdict.oracle_confirms, "oracle min {}", verdict.oracle_min);
    assert!(verdict.agree);

    // far outside the supports the difference vanishes
    let bp_far = model.base.point_at_dist(&params.p, &[1.0, 0.0], 0.5);
    let x_far = model.fiber_point(&bp_far, &[1.1]).unwrap();
    let d_far = delta_r(&model, &deformed, &x_far).unwrap();
    assert!(d_far.op.matrix.amax() < 1e-9, "far delta {}", d_far.op.matrix.amax());
}

#[test]
fn flagship_ric_2_stays_positive() {
    let model = submersion_by_name("hopf").unwrap();
    let params = flagship_params();
    let samples = stratified_samples(&model, &params, 23, 10);
    let deformed = build_deformation(&model, &params, &samples).unwrap();
    let cfg = FrameSearchConfig {
        restarts: 4,
        max_iters: 40,
        step: 0.2,
        seed: 3,
        exhaustive_grid: Some(160),
    };

    let mut min_before = f64::INFINITY;
    let mut min_after = f64::INFINITY;
    let mut worst_tag = String::new();
    for (tag, x) in &samples.total_points {
        let (r0, _) = ric_k_at(&model.total, x, 2, &cfg).unwrap();
        let (r1, _) = ric_k_at(&deformed.g_tilde_m, x, 2, &cfg).unwrap();
        min_before = min_before.min(r0);
        if r1 < min_after {
            min_after = r1;
            worst_tag = tag.clone();
        }
    }
    // undeformed Hopf has ric_2 = Ricci of the unit round sphere = 2
    assert!((min_before - 2.0).abs() < 1e-6, "baseline {min_before}");
    assert!(min_after > 0.0, "min ric_2 after = {min_after} at {worst_tag}");
    assert!(
        min_after >= min_before - params.epsilon,
        "min after {min_after} vs before {min_before} (eps {})",
        params.epsilon
    );
}

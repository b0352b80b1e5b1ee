//! The deformed metrics: a conformal change on the base pulled back to the
//! horizontal block, a separate warp on the vertical block, and the
//! intermediate metric that changes only the horizontal part. Curvature of
//! the deformed metrics is both computed directly (exact jets) and predicted
//! from the undeformed data through the conformal-change formula and the
//! warped-submersion curvature formulas; the two routes are compared at
//! sample points.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::calculus::{
    gradient, hessian, riemann, riemann_apply, CurvaturePointData, Domain, MetricField,
    ScalarField, TensorField,
};
use crate::checker;
use crate::error::{GeomError, Result};
use crate::jet::{jet_solve, Jet};
use crate::models::{fundamental_tensors, SubmersionModel};
use crate::profile::{
    build_omega, check_certificates, pullback_omega, Certificate, OmegaFunction, PulledBackOmega,
};
use crate::sampling;
use crate::tensor::{kn_four_tensor, CurvatureOperator, FourTensor, WedgeBasis};

/// Parameters of one deformation experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeformationParams {
    /// Center on the base, in chart coordinates.
    pub p: Vec<f64>,
    pub c_h: f64,
    pub c_v: f64,
    pub eps_h: f64,
    pub eps_v: f64,
    pub eta_h: f64,
    pub eta_v: f64,
    pub tau_h: f64,
    pub tau_v: f64,
    /// Target negativity `K`: all base sectional curvatures at `p` must drop
    /// below `-K`.
    pub k_neg: f64,
    /// The C¹-smallness budget and intermediate-Ricci slack.
    pub epsilon: f64,
}

impl DeformationParams {
    pub fn lambda_hh(&self) -> f64 {
        -6.0 * self.c_h - 1.0
    }

    pub fn lambda_hv(&self) -> f64 {
        -self.c_v - 1.0
    }

    /// Checks every admissibility gate, returning the first violated
    /// inequality by name.
    pub fn validate(&self, model: &SubmersionModel) -> Result<()> {
        let b = model.base_dim as f64;
        if !(self.c_h > 1.0) {
            return Err(GeomError::admissibility("C_h > 1", format!("C_h = {}", self.c_h)));
        }
        if !(self.c_v < -1.0) {
            return Err(GeomError::admissibility("C_v < -1", format!("C_v = {}", self.c_v)));
        }
        let cap = 0.5 * f64::min(1.0, f64::min(model.inj_total, model.base.inj));
        for (name, v) in [
            ("eps_h", self.eps_h),
            ("eps_v", self.eps_v),
            ("eta_h", self.eta_h),
            ("eta_v", self.eta_v),
        ] {
            if !(v > 0.0 && v < cap) {
                return Err(GeomError::admissibility(
                    format!("{name} in (0, min(1, inj)/2)"),
                    format!("{name} = {v}, cap = {cap}"),
                ));
            }
        }
        let tau_h_bound = self.eps_h * self.eta_h / (2.0 * self.c_h);
        if !(self.tau_h > 0.0 && self.tau_h < tau_h_bound) {
            return Err(GeomError::admissibility(
                "tau_h in (0, eps_h*eta_h/(2 C_h))",
                format!("tau_h = {}, bound = {tau_h_bound:.6e}", self.tau_h),
            ));
        }
        let tau_v_bound = self.eps_v * self.eta_v / (2.0 * self.c_v.abs());
        if !(self.tau_v > 0.0 && self.tau_v < tau_v_bound) {
            return Err(GeomError::admissibility(
                "tau_v in (0, eps_v*eta_v/(2 |C_v|))",
                format!("tau_v = {}, bound = {tau_v_bound:.6e}", self.tau_v),
            ));
        }
        if !(3.0 * self.eta_h < self.tau_v) {
            return Err(GeomError::admissibility(
                "3 eta_h < tau_v",
                format!("3 eta_h = {}, tau_v = {}", 3.0 * self.eta_h, self.tau_v),
            ));
        }
        // C_h must clear the base curvature at p
        let base_data = riemann(&model.base.metric, &self.p)?;
        let eigs = base_data.operator.eigenvalues()?;
        let max_sec = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let k_tilde = self.k_neg / 2.0 + max_sec + 1.0;
        if !(self.c_h > k_tilde) {
            return Err(GeomError::admissibility(
                "C_h > K/2 + max|sec_B at p| + 1",
                format!("C_h = {}, required > {k_tilde}", self.c_h),
            ));
        }
        let combo = (b - 1.0) * self.lambda_hh() + self.lambda_hv();
        if !(combo > 0.0) {
            return Err(GeomError::admissibility(
                "(b-1) lambda_hh + lambda_hv > 0",
                format!(
                    "lambda_hh = {}, lambda_hv = {}, combination = {combo}",
                    self.lambda_hh(),
                    self.lambda_hv()
                ),
            ));
        }
        Ok(())
    }
}

/// The three deformed metrics and their construction certificates.
#[derive(Clone, Debug)]
pub struct DeformedMetrics {
    pub params: DeformationParams,
    pub g_tilde_b: MetricField,
    pub g_hat_m: MetricField,
    pub g_tilde_m: MetricField,
    pub omega_h: OmegaFunction,
    pub omega_v: OmegaFunction,
    pub omega_h_pullback: PulledBackOmega,
    pub omega_v_pullback: PulledBackOmega,
    pub certificates: Vec<Certificate>,
}

/// Assembles `e^{2 w_h} g|_H + e^{2 w_v} g|_V` from the model's analytic
/// vertical frame, entirely in jets so derivative access stays exact.
fn warped_total_metric(
    model: &SubmersionModel,
    chart: String,
    w_h: &ScalarField,
    w_v: Option<&ScalarField>,
) -> MetricField {
    let m = model.clone();
    let wh = w_h.clone();
    let wv = w_v.cloned();
    let n = model.total_dim;
    MetricField::new(
        chart,
        n,
        Domain::All,
        Arc::new(move |x: &[Jet]| {
            let g = m.total.eval_raw(x);
            let verts = m.vertical_jets(x);
            let kv = verts.len();
            // lowered vertical fields and their Gram
            let lowered: Vec<Vec<Jet>> = (0..kv)
                .map(|a| {
                    (0..n)
                        .map(|i| {
                            let mut acc = Jet::c(0.0);
                            for j in 0..n {
                                acc = acc + &g[i * n + j] * &verts[a][j];
                            }
                            acc
                        })
                        .collect()
                })
                .collect();
            let mut gram = vec![Jet::c(0.0); kv * kv];
            for a in 0..kv {
                for bb in 0..kv {
                    gram[a * kv + bb] = crate::jet::jet_dot(&lowered[a], &verts[bb]);
                }
            }
            // vertical block gv_ij = Σ_{ab} lowered_a_i (G^{-1})_{ab} lowered_b_j
            let mut gv = vec![Jet::c(0.0); n * n];
            for j in 0..n {
                let rhs: Vec<Jet> = (0..kv).map(|bb| lowered[bb][j].clone()).collect();
                let coef = jet_solve(&gram, &rhs, kv);
                for i in 0..n {
                    let mut acc = Jet::c(0.0);
                    for a in 0..kv {
                        acc = acc + &coef[a] * &lowered[a][i];
                    }
                    gv[i * n + j] = acc;
                }
            }
            let e2h = (wh.eval_raw(x) * 2.0).exp();
            let e2v = match &wv {
                Some(w) => (w.eval_raw(x) * 2.0).exp(),
                None => Jet::c(1.0),
            };
            let mut out = vec![Jet::c(0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    let gh = &g[i * n + j] - &gv[i * n + j];
                    out[i * n + j] = &e2h * &gh + &e2v * &gv[i * n + j];
                }
            }
            out
        }),
    )
}

/// Sample set of a deformation run, stratified around the deformation scales.
#[derive(Clone, Debug, Serialize)]
pub struct SampleSet {
    pub description: String,
    pub seed: u64,
    /// (region tag, total-space chart point)
    #[serde(skip)]
    pub total_points: Vec<(String, Vec<f64>)>,
    #[serde(skip)]
    pub base_points: Vec<(String, Vec<f64>)>,
    pub total_count: usize,
    pub base_count: usize,
}

/// Builds the stratified sample set: radial shells at the deformation's own
/// scales around the center fiber, plus seeded quasi-random global points.
pub fn stratified_samples(
    model: &SubmersionModel,
    params: &DeformationParams,
    seed: u64,
    n_random: usize,
) -> SampleSet {
    let p = &params.p;
    let mut radii: Vec<(String, f64)> = Vec::new();
    let scales = [
        ("tau_h", params.tau_h),
        ("eta_h", params.eta_h),
        ("tau_v", params.tau_v),
        ("eta_v", params.eta_v),
    ];
    for (name, s) in scales {
        for f in [0.5, 0.97, 1.5] {
            radii.push((format!("{name}x{f}"), s * f));
        }
    }
    radii.push(("eta_h_edge".into(), 1.95 * params.eta_h));
    radii.push(("eta_v_edge".into(), 1.95 * params.eta_v));
    radii.push(("outside".into(), 2.3 * params.eta_v));
    radii.retain(|(_, r)| *r < 0.9 * model.base.inj);

    let dirs = sampling::unit_sphere_lattice(model.base_dim, 4);
    let fibers: Vec<Vec<f64>> = match model.total_dim - model.base_dim {
        1 => vec![vec![0.7], vec![2.9], vec![5.1]],
        2 => vec![vec![0.1, -0.2], vec![0.6, 0.4]],
        _ => vec![vec![0.0; model.total_dim - model.base_dim]],
    };

    let mut total_points: Vec<(String, Vec<f64>)> = Vec::new();
    let mut base_points: Vec<(String, Vec<f64>)> = vec![("center".into(), p.clone())];
    // the center fiber itself
    for f in &fibers {
        if let Some(x) = model.fiber_point(p, f) {
            total_points.push(("center_fiber".into(), x));
        }
    }
    for (tag, r) in &radii {
        for d in &dirs {
            let bp = model.base.point_at_dist(p, d, *r);
            base_points.push((tag.clone(), bp.clone()));
            for f in &fibers {
                if let Some(x) = model.fiber_point(&bp, f) {
                    total_points.push((tag.clone(), x));
                }
            }
        }
    }
    let mut rng = sampling::rng(seed);
    for _ in 0..n_random {
        total_points.push(("global".into(), model.sample_total_point(&mut rng)));
    }
    for _ in 0..(n_random / 2).max(8) {
        base_points.push(("global".into(), model.base.sample_point(&mut rng)));
    }
    let tc = total_points.len();
    let bc = base_points.len();
    SampleSet {
        description: format!(
            "stratified radial shells at deformation scales + {n_random} seeded global points"
        ),
        seed,
        total_points,
        base_points,
        total_count: tc,
        base_count: bc,
    }
}

/// Builds the deformation: certified bumps, their pullbacks, the three
/// metrics, and the C¹-distance certificates.
pub fn build_deformation(
    model: &SubmersionModel,
    params: &DeformationParams,
    samples: &SampleSet,
) -> Result<DeformedMetrics> {
    params.validate(model)?;
    let omega_h = build_omega(
        &model.base,
        &params.p,
        params.c_h,
        params.eps_h,
        params.eta_h,
        params.tau_h,
    )?;
    let omega_v = build_omega(
        &model.base,
        &params.p,
        params.c_v,
        params.eps_v,
        params.eta_v,
        params.tau_v,
    )?;
    let omega_h_pullback = pullback_omega(model, &omega_h)?;
    let omega_v_pullback = pullback_omega(model, &omega_v)?;

    let g_tilde_b = model.base.metric.conformal(&omega_h.field);
    let g_hat_m = warped_total_metric(
        model,
        format!("{}_hat", model.chart_total),
        &omega_h_pullback.field,
        None,
    );
    let g_tilde_m = warped_total_metric(
        model,
        format!("{}_tilde", model.chart_total),
        &omega_h_pullback.field,
        Some(&omega_v_pullback.field),
    );

    let mut certificates: Vec<Certificate> = Vec::new();
    for (prefix, certs) in [
        ("omega_h", &omega_h.certificates),
        ("omega_v", &omega_v.certificates),
        ("omega_h_pullback", &omega_h_pullback.certificates),
        ("omega_v_pullback", &omega_v_pullback.certificates),
    ] {
        for c in certs.iter() {
            let mut c = c.clone();
            c.name = format!("{prefix}.{}", c.name);
            certificates.push(c);
        }
    }

    // C¹ distance of the deformed metrics to the originals, against the
    // undeformed metrics as background
    let base_pts: Vec<Vec<f64>> = samples.base_points.iter().map(|(_, x)| x.clone()).collect();
    let total_pts: Vec<Vec<f64>> = samples
        .total_points
        .iter()
        .map(|(_, x)| x.clone())
        .collect();
    let hb = TensorField::metric_difference(&g_tilde_b, &model.base.metric);
    let c1_base = crate::tensor::c1_norm(&hb, &model.base.metric, &base_pts)?;
    certificates.push(Certificate {
        name: "deform.c1_distance_base".into(),
        constraint: format!("||g_B - g~_B||_C1 < eps = {}", params.epsilon),
        worst: c1_base,
        margin: params.epsilon - c1_base,
        samples: format!("base-samples-{}", base_pts.len()),
    });
    let hm = TensorField::metric_difference(&g_tilde_m, &model.total);
    let c1_total = crate::tensor::c1_norm(&hm, &model.total, &total_pts)?;
    certificates.push(Certificate {
        name: "deform.c1_distance_total".into(),
        constraint: format!("||g_M - g~_M||_C1 < eps = {}", params.epsilon),
        worst: c1_total,
        margin: params.epsilon - c1_total,
        samples: format!("total-samples-{}", total_pts.len()),
    });

    // the projection must stay a Riemannian submersion for the new pair
    let mut iso_resid = 0.0f64;
    for x in total_pts.iter().take(60) {
        let y = model.project(x);
        let gb = g_tilde_b.eval(&y);
        let gm = g_tilde_m.eval(x);
        for w in [[1.0, 0.0], [0.0, 1.0], [0.6, -0.7]] {
            let w = &w[..model.base_dim.min(2)];
            if w.len() < model.base_dim {
                break;
            }
            let lift = model.horizontal_lift(&g_tilde_m, x, w)?;
            let mut len_m = 0.0;
            for i in 0..model.total_dim {
                for j in 0..model.total_dim {
                    len_m += gm[(i, j)] * lift[i] * lift[j];
                }
            }
            let mut len_b = 0.0;
            for i in 0..model.base_dim {
                for j in 0..model.base_dim {
                    len_b += gb[(i, j)] * w[i] * w[j];
                }
            }
            iso_resid = iso_resid.max((len_m - len_b).abs() / len_b.max(1e-300));
        }
    }
    certificates.push(Certificate {
        name: "deform.submersed_isometry".into(),
        constraint: "dπ isometry residual between g~_M|_H and g~_B < 1e-8".into(),
        worst: iso_resid,
        margin: 1e-8 - iso_resid,
        samples: "total-samples-60".into(),
    });

    // block structure: no H-V cross terms in the deformed metric
    let mut cross = 0.0f64;
    for x in total_pts.iter().take(40) {
        let gm = g_tilde_m.eval(x);
        let (h, v) = model.adapted_on_frame(&model.total, x)?;
        for hv in &h {
            for vv in &v {
                let mut acc = 0.0;
                for i in 0..model.total_dim {
                    for j in 0..model.total_dim {
                        acc += gm[(i, j)] * hv[i] * vv[j];
                    }
                }
                cross = cross.max(acc.abs());
            }
        }
    }
    certificates.push(Certificate {
        name: "deform.block_structure".into(),
        constraint: "g~_M(H, V) = 0 within 1e-12".into(),
        worst: cross,
        margin: 1e-12 - cross,
        samples: "total-samples-40".into(),
    });

    check_certificates(&certificates)?;

    Ok(DeformedMetrics {
        params: params.clone(),
        g_tilde_b,
        g_hat_m,
        g_tilde_m,
        omega_h,
        omega_v,
        omega_h_pullback,
        omega_v_pullback,
        certificates,
    })
}

// ---------------------------------------------------------------------------
// conformal prediction
// ---------------------------------------------------------------------------

/// Predicted (0,4) curvature of `e^{2ω} g` from the curvature of `g` and the
/// first two derivatives of `ω`:
/// `e^{-2ω} R~ = R - (2 Hess_ω - 2 dω⊗dω + |dω|² g) ∘ g`.
pub fn conformal_curvature_predict(
    base: &MetricField,
    omega: &ScalarField,
    x: &[f64],
) -> Result<FourTensor> {
    let n = base.dim();
    let data = riemann(base, x)?;
    let hess = hessian(omega, base, x)?;
    let jet = omega.eval_jet(x);
    let g = base.eval(x);
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::Degeneracy("metric is singular".into()))?;
    let df = jet.gradient();
    let grad = &ginv * &df;
    let grad_sq = (df.transpose() * &grad)[(0, 0)];
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            t[(i, j)] = 2.0 * hess.entries[(i, j)] - 2.0 * df[i] * df[j] + grad_sq * g[(i, j)];
        }
    }
    let kn = kn_four_tensor(&t, &g);
    let scale = (2.0 * jet.val).exp();
    let mut out = FourTensor::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out.set(
                        i,
                        j,
                        k,
                        l,
                        scale * (data.riemann.get(i, j, k, l) - kn.get(i, j, k, l)),
                    );
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConformalCheck {
    pub rel_error: f64,
    pub predicted_scale: f64,
}

/// Compares the predicted conformal curvature against the direct computation
/// on `e^{2ω} g` at `x`.
pub fn conformal_check(base: &MetricField, omega: &ScalarField, x: &[f64]) -> Result<ConformalCheck> {
    let pred = conformal_curvature_predict(base, omega, x)?;
    let direct = riemann(&base.conformal(omega), x)?;
    let n = base.dim();
    let mut worst = 0.0f64;
    let scale = direct.riemann.max_abs().max(1e-12);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    worst = worst
                        .max((pred.get(i, j, k, l) - direct.riemann.get(i, j, k, l)).abs());
                }
            }
        }
    }
    Ok(ConformalCheck {
        rel_error: worst / scale,
        predicted_scale: scale,
    })
}

// ---------------------------------------------------------------------------
// warped-submersion curvature prediction
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct GwFamilyCheck {
    pub family: String,
    pub worst_abs: f64,
    pub worst_rel: f64,
}

fn vec_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vec_scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

fn vec_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Verifies the seven warped-submersion curvature component formulas at `x`:
/// each family's prediction from hat-metric data must match the direct
/// curvature of the fully deformed metric.
pub fn gw_check(
    model: &SubmersionModel,
    deformed: &DeformedMetrics,
    x: &[f64],
) -> Result<Vec<GwFamilyCheck>> {
    let n = model.total_dim;
    let b = model.base_dim;
    let kv = n - b;
    let phi_field = &deformed.omega_v_pullback.field;
    let g_hat = &deformed.g_hat_m;
    let g_tilde = &deformed.g_tilde_m;

    let data_tilde = riemann(g_tilde, x)?;
    let data_hat = riemann(g_hat, x)?;
    let y = model.project(x);
    let data_hat_b = riemann(&deformed.g_tilde_b, &y)?;
    let ft = fundamental_tensors(model, g_hat, x)?;

    let phi_jet = phi_field.eval_jet(x);
    let phi = phi_jet.val;
    let e2 = (2.0 * phi).exp();
    let dphi: Vec<f64> = (0..n).map(|i| phi_jet.grad_get(i)).collect();
    let grad_phi = gradient(phi_field, g_hat, x)?.components;
    let grad_sq: f64 = dphi.iter().zip(&grad_phi).map(|(a, b)| a * b).sum();
    let hess_phi = hessian(phi_field, g_hat, x)?;

    let pv = model.vertical_projector(&model.total, x);
    let ph = DMatrix::identity(n, n) - &pv;
    let proj = |m: &DMatrix<f64>, v: &[f64]| -> Vec<f64> {
        let out = m * DVector::from_column_slice(v);
        out.iter().copied().collect()
    };

    let ghat = g_hat.eval(x);
    let inner_hat = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += ghat[(i, j)] * u[i] * v[j];
            }
        }
        acc
    };
    let norm_hat = |u: &[f64]| -> f64 { inner_hat(u, u).max(0.0).sqrt() };
    let ddphi = |v: &[f64]| -> f64 { dphi.iter().zip(v).map(|(a, b)| a * b).sum() };

    // lift fields (shared horizontal space for all block metrics)
    let lifts: Vec<Vec<f64>> = (0..b)
        .map(|a| {
            let mut e = vec![0.0; b];
            e[a] = 1.0;
            model.horizontal_lift(&model.total, x, &e)
        })
        .collect::<Result<_>>()?;
    let verts = model.vertical_at(x);

    let lift_base_vec = |v: &[f64]| -> Result<Vec<f64>> {
        model.horizontal_lift(&model.total, x, v)
    };

    let mut out: Vec<GwFamilyCheck> = Vec::new();
    let mut push = |name: &str, pairs: Vec<(Vec<f64>, Vec<f64>)>| {
        let mut worst_abs = 0.0f64;
        let mut worst_rel = 0.0f64;
        for (lhs, rhs) in pairs {
            let diff = vec_sub(&lhs, &rhs);
            let abs = norm_hat(&diff);
            let scale = norm_hat(&lhs).max(norm_hat(&rhs)).max(1.0);
            worst_abs = worst_abs.max(abs);
            worst_rel = worst_rel.max(abs / scale);
        }
        out.push(GwFamilyCheck {
            family: name.to_string(),
            worst_abs,
            worst_rel,
        });
    };

    // (1) horizontal triple, vertical part
    {
        let mut pairs = Vec::new();
        for a in 0..b {
            for c in 0..b {
                for d in 0..b {
                    if a == c {
                        continue;
                    }
                    let lhs = proj(&pv, &riemann_apply(&data_tilde, &lifts[a], &lifts[c], &lifts[d]));
                    let mut rhs =
                        proj(&pv, &riemann_apply(&data_hat, &lifts[a], &lifts[c], &lifts[d]));
                    rhs = vec_add(&rhs, &vec_scale(&ft.a_of(&lifts[c], &lifts[d]), ddphi(&lifts[a])));
                    rhs = vec_sub(&rhs, &vec_scale(&ft.a_of(&lifts[a], &lifts[d]), ddphi(&lifts[c])));
                    rhs = vec_sub(&rhs, &vec_scale(&ft.a_of(&lifts[a], &lifts[c]), ddphi(&lifts[d])));
                    pairs.push((lhs, rhs));
                }
            }
        }
        push("hhh_vertical", pairs);
    }

    // (2) horizontal triple, horizontal part
    {
        let mut pairs = Vec::new();
        for a in 0..b {
            for c in 0..b {
                for d in 0..b {
                    if a == c {
                        continue;
                    }
                    let lhs =
                        proj(&ph, &riemann_apply(&data_tilde, &lifts[a], &lifts[c], &lifts[d]));
                    let hat =
                        proj(&ph, &riemann_apply(&data_hat, &lifts[a], &lifts[c], &lifts[d]));
                    let ea = [if a == 0 { 1.0 } else { 0.0 }, if a == 1 { 1.0 } else { 0.0 }];
                    let ec = [if c == 0 { 1.0 } else { 0.0 }, if c == 1 { 1.0 } else { 0.0 }];
                    let ed = [if d == 0 { 1.0 } else { 0.0 }, if d == 1 { 1.0 } else { 0.0 }];
                    let rb = riemann_apply(&data_hat_b, &ea[..b], &ec[..b], &ed[..b]);
                    let rb_lift = lift_base_vec(&rb)?;
                    let rhs = vec_add(&vec_scale(&hat, e2), &vec_scale(&rb_lift, 1.0 - e2));
                    pairs.push((lhs, rhs));
                }
            }
        }
        push("hhh_horizontal", pairs);
    }

    // (3) mixed triple, vertical part
    {
        let mut pairs = Vec::new();
        for a in 0..b {
            for al in 0..kv {
                for c in 0..b {
                    let lhs =
                        proj(&pv, &riemann_apply(&data_tilde, &lifts[a], &verts[al], &lifts[c]));
                    let mut rhs =
                        proj(&pv, &riemann_apply(&data_hat, &lifts[a], &verts[al], &lifts[c]));
                    let astar = ft.a_star_of(&lifts[c], &verts[al]);
                    rhs = vec_add(&rhs, &vec_scale(&ft.a_of(&lifts[a], &astar), 1.0 - e2));
                    let coeff = hess_phi.apply(&lifts[a], &lifts[c])
                        + ddphi(&lifts[a]) * ddphi(&lifts[c]);
                    rhs = vec_add(&rhs, &vec_scale(&verts[al], coeff));
                    rhs = vec_sub(
                        &rhs,
                        &vec_scale(&ft.s_of(&lifts[c], &verts[al]), ddphi(&lifts[a])),
                    );
                    rhs = vec_sub(
                        &rhs,
                        &vec_scale(&ft.s_of(&lifts[a], &verts[al]), ddphi(&lifts[c])),
                    );
                    pairs.push((lhs, rhs));
                }
            }
        }
        push("hvh_vertical", pairs);
    }

    // (4) mixed triple, horizontal part
    {
        let mut pairs = Vec::new();
        for a in 0..b {
            for al in 0..kv {
                for c in 0..b {
                    let lhs = vec_scale(
                        &proj(&ph, &riemann_apply(&data_tilde, &lifts[a], &verts[al], &lifts[c])),
                        1.0 / e2,
                    );
                    let mut rhs =
                        proj(&ph, &riemann_apply(&data_hat, &lifts[a], &verts[al], &lifts[c]));
                    rhs = vec_sub(
                        &rhs,
                        &vec_scale(&ft.a_star_of(&lifts[a], &verts[al]), ddphi(&lifts[c])),
                    );
                    rhs = vec_sub(
                        &rhs,
                        &vec_scale(&ft.a_star_of(&lifts[c], &verts[al]), 2.0 * ddphi(&lifts[a])),
                    );
                    let a_ab = ft.a_of(&lifts[a], &lifts[c]);
                    rhs = vec_add(&rhs, &vec_scale(&grad_phi, inner_hat(&a_ab, &verts[al])));
                    pairs.push((lhs, rhs));
                }
            }
        }
        push("hvh_horizontal", pairs);
    }

    // (5) vertical pair against horizontal, horizontal part
    {
        let mut pairs = Vec::new();
        for al in 0..kv {
            for be in 0..kv {
                for a in 0..b {
                    let lhs = vec_scale(
                        &proj(&ph, &riemann_apply(&data_tilde, &verts[al], &verts[be], &lifts[a])),
                        1.0 / e2,
                    );
                    let mut rhs =
                        proj(&ph, &riemann_apply(&data_hat, &verts[al], &verts[be], &lifts[a]));
                    let astar_a_al = ft.a_star_of(&lifts[a], &verts[al]);
                    let astar_a_be = ft.a_star_of(&lifts[a], &verts[be]);
                    let term = vec_sub(
                        &ft.a_star_of(&astar_a_al, &verts[be]),
                        &ft.a_star_of(&astar_a_be, &verts[al]),
                    );
                    rhs = vec_add(&rhs, &vec_scale(&term, 1.0 - e2));
                    pairs.push((lhs, rhs));
                }
            }
        }
        push("vvh_horizontal", pairs);
    }

    // (6) vertical triple, horizontal part: unchanged
    {
        let mut pairs = Vec::new();
        for al in 0..kv {
            for be in 0..kv {
                for ga in 0..kv {
                    let lhs =
                        proj(&ph, &riemann_apply(&data_tilde, &verts[al], &verts[be], &verts[ga]));
                    let rhs =
                        proj(&ph, &riemann_apply(&data_hat, &verts[al], &verts[be], &verts[ga]));
                    pairs.push((lhs, rhs));
                }
            }
        }
        push("vvv_horizontal", pairs);
    }

    // (7) vertical triple, vertical part
    {
        let mut pairs = Vec::new();
        for al in 0..kv {
            for be in 0..kv {
                for ga in 0..kv {
                    let lhs =
                        proj(&pv, &riemann_apply(&data_tilde, &verts[al], &verts[be], &verts[ga]));
                    let mut rhs =
                        proj(&pv, &riemann_apply(&data_hat, &verts[al], &verts[be], &verts[ga]));
                    let sig_bg = ft.sigma_of(&verts[be], &verts[ga]);
                    let sig_ag = ft.sigma_of(&verts[al], &verts[ga]);
                    let term = vec_sub(
                        &ft.s_of(&sig_bg, &verts[al]),
                        &ft.s_of(&sig_ag, &verts[be]),
                    );
                    rhs = vec_add(&rhs, &vec_scale(&term, 1.0 - e2));
                    // e^{2φ} [(S_∇φ - |∇φ|² I)(⟨T_β,T_γ⟩T_α - ⟨T_α,T_γ⟩T_β)
                    //         + ⟨∇φ, σ(T_β,T_γ)⟩ T_α - ⟨∇φ, σ(T_α,T_γ)⟩ T_β]
                    let comb = vec_sub(
                        &vec_scale(&verts[al], inner_hat(&verts[be], &verts[ga])),
                        &vec_scale(&verts[be], inner_hat(&verts[al], &verts[ga])),
                    );
                    let s_term = vec_sub(&ft.s_of(&grad_phi, &comb), &vec_scale(&comb, grad_sq));
                    let mut inner_term = s_term;
                    inner_term = vec_add(
                        &inner_term,
                        &vec_scale(&verts[al], inner_hat(&grad_phi, &sig_bg)),
                    );
                    inner_term = vec_sub(
                        &inner_term,
                        &vec_scale(&verts[be], inner_hat(&grad_phi, &sig_ag)),
                    );
                    rhs = vec_add(&rhs, &vec_scale(&inner_term, e2));
                    pairs.push((lhs, rhs));
                }
            }
        }
        push("vvv_vertical", pairs);
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// curvature-operator difference
// ---------------------------------------------------------------------------

/// The operator difference at a point, expressed on the wedge basis of a
/// g_M-orthonormal adapted frame, together with its block bounds.
#[derive(Clone, Debug)]
pub struct DeltaROperator {
    pub op: CurvatureOperator,
    /// Columns: the adapted frame in chart coordinates (horizontal first).
    pub frame: DMatrix<f64>,
    pub blocks: checker::DeltaBlocks,
    pub base_distance: f64,
}

/// Computes `𝔇ℛ = ℛ~ - ℛ` as bilinear forms against the fixed g_M wedge
/// structure of an adapted orthonormal frame at `x`.
pub fn delta_r(
    model: &SubmersionModel,
    deformed: &DeformedMetrics,
    x: &[f64],
) -> Result<DeltaROperator> {
    let n = model.total_dim;
    let data_t = riemann(&deformed.g_tilde_m, x)?;
    let data_0 = riemann(&model.total, x)?;
    let (h, v) = model.adapted_on_frame(&model.total, x)?;
    let mut frame = DMatrix::zeros(n, n);
    for (c, vec) in h.iter().chain(v.iter()).enumerate() {
        frame.set_column(c, &DVector::from_column_slice(vec));
    }
    let bt = data_t.operator.in_frame(&frame);
    let b0 = data_0.operator.in_frame(&frame);
    let m = bt.matrix - b0.matrix;
    let dim = WedgeBasis::new(n).len();
    let op = CurvatureOperator {
        point: x.to_vec(),
        basis: WedgeBasis::new(n),
        matrix: m,
        gram: DMatrix::identity(dim, dim),
    };
    let blocks = checker::delta_blocks(&op, model.base_dim);
    let base_distance = model.base.dist(&deformed.params.p, &model.project(x));
    Ok(DeltaROperator {
        op,
        frame,
        blocks,
        base_distance,
    })
}

/// Direct minimum of `Σ sec` over orthonormal (k+1)-frames of a metric at a
/// point; thin wrapper used by run reports.
pub fn ric_k_at(
    metric: &MetricField,
    x: &[f64],
    k: usize,
    cfg: &crate::frames::FrameSearchConfig,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let data = riemann(metric, x)?;
    crate::calculus::ric_k_min(&data, k, cfg)
}

/// Sectional-curvature range of a metric at a point (operator eigenvalue
/// bounds; exact for surfaces).
pub fn sec_range_at(metric: &MetricField, x: &[f64]) -> Result<(f64, f64)> {
    let data = riemann(metric, x)?;
    let eigs = data.operator.eigenvalues()?;
    Ok((eigs[0], *eigs.last().unwrap()))
}

pub fn curvature_data_at(metric: &MetricField, x: &[f64]) -> Result<CurvaturePointData> {
    riemann(metric, x)
}

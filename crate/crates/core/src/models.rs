//! Built-in Riemannian submersions with analytic projections and splittings.
//!
//! Each model lives on a single chart with closed-form metric coefficients,
//! projection, vertical frame fields and base distance function. The Hopf
//! model is the round S³ over S²(1/2) realized in stereographic charts with
//! the analytic vertical field; Berger models rescale its fibers; the product
//! and torus models supply the totally geodesic, flat-`A` reference cases.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{christoffel, riemann, Domain, MetricField};
use crate::error::{GeomError, Result};
use crate::jet::{jet_dot, jet_solve, Jet};
use crate::sampling;
use crate::tensor::{gram_schmidt, TangentVector};

type DistFn = dyn Fn(&[f64], &[Jet]) -> Jet + Send + Sync;
type SampleFn = dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Send + Sync;
type ProjFn = dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync;
type VertFn = dyn Fn(&[Jet]) -> Vec<Vec<Jet>> + Send + Sync;
type LiftFn = dyn Fn(&[f64], &[f64]) -> Option<Vec<f64>> + Send + Sync;

/// A base manifold with closed-form squared distance from any chart point.
#[derive(Clone)]
pub struct ManifoldModel {
    pub name: String,
    pub chart: String,
    pub dim: usize,
    pub metric: MetricField,
    pub inj: f64,
    /// Safe chart sampling radius.
    pub chart_radius: f64,
    dist_sq: Arc<DistFn>,
    sample: Arc<SampleFn>,
    /// Chart radius corresponding to a geodesic distance from the origin.
    radius_for_dist: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// sup over `d ≤ arg` of the tangential distance-Hessian error
    /// `|Hess_dist(Y,Y) - 1/d|` for unit `Y ⟂ grad dist`.
    dist_hess_err: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ManifoldModel({})", self.name)
    }
}

impl ManifoldModel {
    /// Squared geodesic distance from `p` as a jet function of the chart point.
    pub fn dist_sq_jet(&self, p: &[f64], x: &[Jet]) -> Jet {
        (self.dist_sq)(p, x)
    }

    pub fn dist(&self, p: &[f64], x: &[f64]) -> f64 {
        (self.dist_sq)(p, &Jet::consts(x)).val.max(0.0).sqrt()
    }

    pub fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (self.sample)(rng)
    }

    pub fn chart_radius_for_dist(&self, d: f64) -> f64 {
        (self.radius_for_dist)(d)
    }

    pub fn dist_hessian_error_sup(&self, d: f64) -> f64 {
        (self.dist_hess_err)(d)
    }

    /// Chart point at geodesic distance `d` from `p` in chart direction `dir`.
    pub fn point_at_dist(&self, p: &[f64], dir: &[f64], d: f64) -> Vec<f64> {
        // exact for the origin-centered charts used here; for generic p the
        // radius is calibrated by bisection on the closed-form distance
        let norm: f64 = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dir: Vec<f64> = dir.iter().map(|x| x / norm).collect();
        let target = d;
        let mut lo = 0.0;
        let mut hi = self.chart_radius_for_dist(target.min(self.inj * 1.9)) * 1.5 + 1e-9;
        let at = |r: f64| -> Vec<f64> {
            p.iter().zip(&dir).map(|(pi, di)| pi + r * di).collect()
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.dist(p, &at(mid)) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    }
}

/// A Riemannian submersion model: paired metrics, projection, vertical frame.
#[derive(Clone)]
pub struct SubmersionModel {
    pub name: String,
    pub chart_total: String,
    pub total_dim: usize,
    pub base_dim: usize,
    pub total: MetricField,
    pub base: ManifoldModel,
    pub inj_total: f64,
    projection: Arc<ProjFn>,
    vertical: Arc<VertFn>,
    fiber_lift: Arc<LiftFn>,
    sample_total: Arc<SampleFn>,
}

impl fmt::Debug for SubmersionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SubmersionModel({}, {} -> {})",
            self.name, self.total_dim, self.base_dim
        )
    }
}

/// Fundamental tensors of a submersion at a point, expressed in chart
/// components against the adapted lift/vertical frame they were computed in.
#[derive(Clone, Debug)]
pub struct FundamentalTensors {
    pub point: Vec<f64>,
    /// Horizontal lift fields of the base coordinate fields, at the point.
    pub horiz: Vec<Vec<f64>>,
    /// Vertical frame fields at the point.
    pub vert: Vec<Vec<f64>>,
    /// `a[a][b]` = A_{X_a} X_b (vertical vector, chart components).
    pub a: Vec<Vec<Vec<f64>>>,
    /// `a_star[a][α]` = A*_{X_a} U_α (horizontal vector).
    pub a_star: Vec<Vec<Vec<f64>>>,
    /// `s[a][α]` = S_{X_a} U_α (vertical vector).
    pub s: Vec<Vec<Vec<f64>>>,
    /// `sigma[α][β]` = σ(U_α, U_β) (horizontal vector).
    pub sigma: Vec<Vec<Vec<f64>>>,
    pub metric: DMatrix<f64>,
    horiz_gram: DMatrix<f64>,
    vert_gram: DMatrix<f64>,
    /// max |A_X Y + A_Y X| over the frame, scaled.
    pub antisymmetry_residual: f64,
    /// max |g(A*_X V, Y) - g(V, A_X Y)| over the frame, scaled.
    pub duality_residual: f64,
    pub sigma_symmetry_residual: f64,
}

impl FundamentalTensors {
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.metric.nrows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.metric[(i, j)] * u[i] * v[j];
            }
        }
        acc
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    fn expand(&self, gram: &DMatrix<f64>, frame: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        let k = frame.len();
        let rhs = DVector::from_fn(k, |i, _| self.inner(&frame[i], v));
        let sol = gram
            .clone()
            .lu()
            .solve(&rhs)
            .expect("frame Gram is invertible");
        sol.iter().copied().collect()
    }

    fn combine(coeff_a: &[f64], coeff_b: &[f64], table: &[Vec<Vec<f64>>], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (i, ca) in coeff_a.iter().enumerate() {
            for (j, cb) in coeff_b.iter().enumerate() {
                for l in 0..n {
                    out[l] += ca * cb * table[i][j][l];
                }
            }
        }
        out
    }

    /// `A_X Y` for arbitrary horizontal `X`, `Y` at the point.
    pub fn a_of(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let ca = self.expand(&self.horiz_gram, &self.horiz, x);
        let cb = self.expand(&self.horiz_gram, &self.horiz, y);
        Self::combine(&ca, &cb, &self.a, self.metric.nrows())
    }

    pub fn a_star_of(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let ca = self.expand(&self.horiz_gram, &self.horiz, x);
        let cb = self.expand(&self.vert_gram, &self.vert, v);
        Self::combine(&ca, &cb, &self.a_star, self.metric.nrows())
    }

    pub fn s_of(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let ca = self.expand(&self.horiz_gram, &self.horiz, x);
        let cb = self.expand(&self.vert_gram, &self.vert, v);
        Self::combine(&ca, &cb, &self.s, self.metric.nrows())
    }

    pub fn sigma_of(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let ca = self.expand(&self.vert_gram, &self.vert, u);
        let cb = self.expand(&self.vert_gram, &self.vert, v);
        Self::combine(&ca, &cb, &self.sigma, self.metric.nrows())
    }
}

impl SubmersionModel {
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        (self.projection)(&Jet::consts(x))
            .into_iter()
            .map(|j| j.val)
            .collect()
    }

    pub fn project_jets(&self, x: &[Jet]) -> Vec<Jet> {
        (self.projection)(x)
    }

    /// Differential of the projection at `x` (b × n).
    pub fn dpi(&self, x: &[f64]) -> DMatrix<f64> {
        let pi = (self.projection)(&Jet::seed(x));
        DMatrix::from_fn(self.base_dim, self.total_dim, |a, i| pi[a].grad_get(i))
    }

    /// Vertical frame fields at already-seeded jet coordinates.
    pub fn vertical_jets(&self, x: &[Jet]) -> Vec<Vec<Jet>> {
        (self.vertical)(x)
    }

    /// Vertical frame field values at `x`.
    pub fn vertical_at(&self, x: &[f64]) -> Vec<Vec<f64>> {
        (self.vertical)(&Jet::consts(x))
            .into_iter()
            .map(|f| f.into_iter().map(|j| j.val).collect())
            .collect()
    }

    /// A total-space chart point over `base_pt` with the given fiber
    /// coordinates (length `n - b`), when representable in the chart.
    pub fn fiber_point(&self, base_pt: &[f64], fiber: &[f64]) -> Option<Vec<f64>> {
        (self.fiber_lift)(base_pt, fiber)
    }

    pub fn sample_total_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (self.sample_total)(rng)
    }

    /// Vertical projector (1,1) at `x` for the given total metric.
    pub fn vertical_projector(&self, metric: &MetricField, x: &[f64]) -> DMatrix<f64> {
        let n = self.total_dim;
        let g = metric.eval(x);
        let verts = self.vertical_at(x);
        let k = verts.len();
        let mut gram = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let mut acc = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        acc += g[(p, q)] * verts[i][p] * verts[j][q];
                    }
                }
                gram[(i, j)] = acc;
            }
        }
        let gram_inv = gram.try_inverse().expect("vertical Gram invertible");
        // P_v = Σ_{ij} U_i (G^{-1})_{ij} (g U_j)^T
        let mut pv = DMatrix::zeros(n, n);
        for i in 0..k {
            for j in 0..k {
                let c = gram_inv[(i, j)];
                for p in 0..n {
                    let mut low = vec![0.0; n];
                    for q in 0..n {
                        for r in 0..n {
                            low[q] += g[(q, r)] * verts[j][r];
                        }
                    }
                    for q in 0..n {
                        pv[(p, q)] += c * verts[i][p] * low[q];
                    }
                }
            }
        }
        pv
    }

    pub fn horizontal_projector(&self, metric: &MetricField, x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.total_dim, self.total_dim) - self.vertical_projector(metric, x)
    }

    /// Horizontal lift of a base tangent vector `w` at `π(x)` to `x`,
    /// with respect to the given total metric.
    pub fn horizontal_lift(&self, metric: &MetricField, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.base_dim {
            return Err(GeomError::DimensionMismatch(
                "horizontal_lift: base vector has wrong dimension".into(),
            ));
        }
        let j = self.dpi(x);
        let ph = self.horizontal_projector(metric, x);
        let jjt = &j * j.transpose();
        let y = jjt
            .lu()
            .solve(&DVector::from_column_slice(w))
            .ok_or_else(|| GeomError::Degeneracy("projection differential rank-deficient".into()))?;
        let z = j.transpose() * y;
        let lift = &ph * z;
        // lifted vector satisfies dπ(lift) = w by construction of P_h
        Ok(lift.iter().copied().collect())
    }

    /// Tangent-vector API with base-point consistency checks.
    pub fn horizontal_lift_vector(
        &self,
        metric: &MetricField,
        x: &[f64],
        v: &TangentVector,
    ) -> Result<TangentVector> {
        let proj = self.project(x);
        let err: f64 = proj
            .iter()
            .zip(&v.point)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err > 1e-8 {
            return Err(GeomError::Input(format!(
                "horizontal_lift: vector based at {:?} but π(x) = {:?}",
                v.point, proj
            )));
        }
        let lift = self.horizontal_lift(metric, x, &v.components)?;
        TangentVector::new(self.chart_total.clone(), x.to_vec(), lift)
    }

    /// g-orthonormal adapted frame at `x`: `b` horizontal then `n-b` vertical.
    pub fn adapted_on_frame(
        &self,
        metric: &MetricField,
        x: &[f64],
    ) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let g = metric.eval(x);
        let mut horiz = Vec::new();
        for a in 0..self.base_dim {
            let mut e = vec![0.0; self.base_dim];
            e[a] = 1.0;
            horiz.push(self.horizontal_lift(metric, x, &e)?);
        }
        let vert = self.vertical_at(x);
        let horiz_on = gram_schmidt(&horiz, &g)?;
        let vert_on = gram_schmidt(&vert, &g)?;
        Ok((horiz_on, vert_on))
    }
}

/// Covariant derivative `(∇_F H)(x)` of jet-valued vector fields evaluated at
/// the seed point: `F^i ∂_i H^k + Γ^k_{ij} F^i H^j`.
fn covariant(
    gamma: &crate::tensor::ThreeTensor,
    f: &[Jet],
    h: &[Jet],
) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for k in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            acc += f[i].val * h[k].grad_get(i);
            for j in 0..n {
                acc += gamma.get(k, i, j) * f[i].val * h[j].val;
            }
        }
        out[k] = acc;
    }
    out
}

/// Computes the fundamental tensors A, A*, S, σ of the submersion with the
/// given total metric at `x`. Horizontal extensions are the lifts of base
/// coordinate fields, which are π-related, so the vertical part of `∇_X Y`
/// is exactly the A-tensor.
pub fn fundamental_tensors(
    model: &SubmersionModel,
    metric: &MetricField,
    x: &[f64],
) -> Result<FundamentalTensors> {
    let n = model.total_dim;
    let b = model.base_dim;
    let kv = n - b;
    let seeds = Jet::seed(x);
    let gj = metric.eval_raw(&seeds);
    let g = DMatrix::from_fn(n, n, |i, j| gj[i * n + j].val);

    // dπ rows as value+gradient jets extracted from the second-order jet of π.
    // The Hessian slots of these derived jets are not meaningful and are kept
    // zero; only values and first derivatives are consumed below.
    let pi = model.project_jets(&seeds);
    let dpi: Vec<Vec<Jet>> = (0..b)
        .map(|a| {
            (0..n)
                .map(|i| Jet {
                    val: pi[a].grad_get(i),
                    grad: (0..n).map(|j| pi[a].hess_get(i, j, n)).collect(),
                    hess: vec![0.0; n * n],
                })
                .collect()
        })
        .collect();

    let verts: Vec<Vec<Jet>> = (model.vertical)(&seeds);

    // vertical Gram and projector, as jet fields
    let mut vgram = vec![Jet::c(0.0); kv * kv];
    for i in 0..kv {
        for j in 0..kv {
            let mut acc = Jet::c(0.0);
            for p in 0..n {
                for q in 0..n {
                    acc = acc + &gj[p * n + q] * &verts[i][p] * &verts[j][q];
                }
            }
            vgram[i * kv + j] = acc;
        }
    }
    // lowered vertical fields
    let lowered: Vec<Vec<Jet>> = (0..kv)
        .map(|j| {
            (0..n)
                .map(|q| {
                    let mut acc = Jet::c(0.0);
                    for r in 0..n {
                        acc = acc + &gj[q * n + r] * &verts[j][r];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    // P_v columns: for each q, solve G c = [lowered_j[q]]_j, then
    // P_v[p][q] = Σ_j c_j U_j[p]
    let mut pv = vec![Jet::c(0.0); n * n];
    for q in 0..n {
        let rhs: Vec<Jet> = (0..kv).map(|j| lowered[j][q].clone()).collect();
        let c = jet_solve(&vgram, &rhs, kv);
        for p in 0..n {
            let mut acc = Jet::c(0.0);
            for j in 0..kv {
                acc = acc + &c[j] * &verts[j][p];
            }
            pv[p * n + q] = acc;
        }
    }
    let ph = |p: usize, q: usize| -> Jet {
        let delta = if p == q { 1.0 } else { 0.0 };
        Jet::c(delta) - &pv[p * n + q]
    };

    // lift fields X_a = P_h Jᵀ (J Jᵀ)^{-1} e_a as jet fields
    let mut jjt = vec![Jet::c(0.0); b * b];
    for r in 0..b {
        for c in 0..b {
            jjt[r * b + c] = jet_dot(&dpi[r], &dpi[c]);
        }
    }
    let mut lifts: Vec<Vec<Jet>> = Vec::with_capacity(b);
    for a in 0..b {
        let mut e = vec![Jet::c(0.0); b];
        e[a] = Jet::c(1.0);
        let y = jet_solve(&jjt, &e, b);
        let z: Vec<Jet> = (0..n)
            .map(|i| {
                let mut acc = Jet::c(0.0);
                for r in 0..b {
                    acc = acc + &dpi[r][i] * &y[r];
                }
                acc
            })
            .collect();
        let xfield: Vec<Jet> = (0..n)
            .map(|p| {
                let mut acc = Jet::c(0.0);
                for q in 0..n {
                    acc = acc + ph(p, q) * &z[q];
                }
                acc
            })
            .collect();
        lifts.push(xfield);
    }

    let gamma = christoffel(metric, x)?;
    let pv_vals = DMatrix::from_fn(n, n, |p, q| pv[p * n + q].val);
    let ph_vals = DMatrix::identity(n, n) - &pv_vals;
    let project = |m: &DMatrix<f64>, v: Vec<f64>| -> Vec<f64> {
        let out = m * DVector::from_vec(v);
        out.iter().copied().collect()
    };

    let mut a = vec![vec![vec![0.0; n]; b]; b];
    for i in 0..b {
        for j in 0..b {
            a[i][j] = project(&pv_vals, covariant(&gamma, &lifts[i], &lifts[j]));
        }
    }
    let mut s = vec![vec![vec![0.0; n]; kv]; b];
    for i in 0..b {
        for al in 0..kv {
            let grad = covariant(&gamma, &verts[al], &lifts[i]);
            let mut proj = project(&pv_vals, grad);
            for v in &mut proj {
                *v = -*v;
            }
            s[i][al] = proj;
        }
    }
    let mut sigma = vec![vec![vec![0.0; n]; kv]; kv];
    for al in 0..kv {
        for be in 0..kv {
            sigma[al][be] = project(&ph_vals, covariant(&gamma, &verts[al], &verts[be]));
        }
    }

    let horiz: Vec<Vec<f64>> = lifts
        .iter()
        .map(|f| f.iter().map(|j| j.val).collect())
        .collect();
    let vert: Vec<Vec<f64>> = verts
        .iter()
        .map(|f| f.iter().map(|j| j.val).collect())
        .collect();

    let inner = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += g[(i, j)] * u[i] * v[j];
            }
        }
        acc
    };
    let horiz_gram = DMatrix::from_fn(b, b, |i, j| inner(&horiz[i], &horiz[j]));
    let vert_gram = DMatrix::from_fn(kv, kv, |i, j| inner(&vert[i], &vert[j]));

    // A* from duality against the horizontal Gram
    let mut a_star = vec![vec![vec![0.0; n]; kv]; b];
    let hlu = horiz_gram.clone().lu();
    for i in 0..b {
        for al in 0..kv {
            let rhs = DVector::from_fn(b, |bb, _| inner(&vert[al], &a[i][bb]));
            let coeff = hlu.solve(&rhs).expect("horizontal Gram invertible");
            let mut out = vec![0.0; n];
            for bb in 0..b {
                for l in 0..n {
                    out[l] += coeff[bb] * horiz[bb][l];
                }
            }
            a_star[i][al] = out;
        }
    }

    // residuals
    let scale = horiz
        .iter()
        .flat_map(|h| h.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let mut antis = 0.0f64;
    for i in 0..b {
        for j in 0..b {
            for l in 0..n {
                antis = antis.max((a[i][j][l] + a[j][i][l]).abs());
            }
        }
    }
    let mut duality = 0.0f64;
    for i in 0..b {
        for al in 0..kv {
            for j in 0..b {
                let lhs = inner(&a_star[i][al], &horiz[j]);
                let rhs = inner(&vert[al], &a[i][j]);
                duality = duality.max((lhs - rhs).abs());
            }
        }
    }
    let mut sig_sym = 0.0f64;
    for al in 0..kv {
        for be in 0..kv {
            for l in 0..n {
                sig_sym = sig_sym.max((sigma[al][be][l] - sigma[be][al][l]).abs());
            }
        }
    }

    Ok(FundamentalTensors {
        point: x.to_vec(),
        horiz,
        vert,
        a,
        a_star,
        s,
        sigma,
        metric: g,
        horiz_gram,
        vert_gram,
        antisymmetry_residual: antis / scale,
        duality_residual: duality / scale,
        sigma_symmetry_residual: sig_sym / scale,
    })
}

/// Gray–O'Neill horizontal equation residual
/// `|sec_B(u,v) - sec_M(ũ,ṽ) - 3 |A_ũ ṽ|²|` for an orthonormal base pair.
pub fn verify_oneill(model: &SubmersionModel, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    let y = model.project(x);
    let base_data = riemann(&model.base.metric, &y)?;
    let sec_b = crate::calculus::sectional(&base_data, u, v)?;

    let lift_u = model.horizontal_lift(&model.total, x, u)?;
    let lift_v = model.horizontal_lift(&model.total, x, v)?;
    let total_data = riemann(&model.total, x)?;
    let sec_m = crate::calculus::sectional(&total_data, &lift_u, &lift_v)?;

    let ft = fundamental_tensors(model, &model.total, x)?;
    // normalize the lifted plane before feeding the A-tensor
    let g = model.total.eval(x);
    let on = gram_schmidt(&[lift_u, lift_v], &g)?;
    let a = ft.a_of(&on[0], &on[1]);
    let a_norm_sq = ft.inner(&a, &a);

    Ok((sec_b - sec_m - 3.0 * a_norm_sq).abs())
}

/// Numerical witness of the horizontal-curvature inequality for `k ≤ b - 1`:
/// on sampled base frames the base sum dominates the lifted sum, with the gap
/// explained by the A-tensor.
#[derive(Clone, Debug)]
pub struct HorizontalTransfer {
    pub min_gap: f64,
    pub max_a_gap_residual: f64,
    pub frames_checked: usize,
}

pub fn verify_theorem_a_part1(
    model: &SubmersionModel,
    x: &[f64],
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<HorizontalTransfer> {
    let b = model.base_dim;
    if k > b - 1 {
        return Err(GeomError::Input(format!(
            "horizontal transfer requires k ≤ b-1 = {}",
            b - 1
        )));
    }
    let y = model.project(x);
    let base_data = riemann(&model.base.metric, &y)?;
    let total_data = riemann(&model.total, x)?;
    let gb = model.base.metric.eval(&y);
    let g = model.total.eval(x);
    let ft = fundamental_tensors(model, &model.total, x)?;

    let mut rng = sampling::rng(seed);
    let mut min_gap = f64::INFINITY;
    let mut max_resid = 0.0f64;
    for _ in 0..trials {
        let raw: Vec<Vec<f64>> = (0..=k)
            .map(|_| sampling::gaussian_vec(&mut rng, b))
            .collect();
        let frame = match gram_schmidt(&raw, &gb) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let mut base_sum = 0.0;
        let mut total_sum = 0.0;
        let mut a_sum = 0.0;
        let lift_u = model.horizontal_lift(&model.total, x, &frame[0])?;
        for vi in &frame[1..] {
            base_sum += crate::calculus::sectional(&base_data, &frame[0], vi)?;
            let lift_v = model.horizontal_lift(&model.total, x, vi)?;
            total_sum += crate::calculus::sectional(&total_data, &lift_u, &lift_v)?;
            let on = gram_schmidt(&[lift_u.clone(), lift_v], &g)?;
            let a = ft.a_of(&on[0], &on[1]);
            a_sum += ft.inner(&a, &a);
        }
        min_gap = min_gap.min(base_sum - total_sum);
        max_resid = max_resid.max((base_sum - total_sum - 3.0 * a_sum).abs());
    }
    Ok(HorizontalTransfer {
        min_gap,
        max_a_gap_residual: max_resid,
        frames_checked: trials,
    })
}

// ---------------------------------------------------------------------------
// model constructors
// ---------------------------------------------------------------------------

/// Series/closed-form split for `asin(√w)²`, smooth through w = 0.
fn asin_sq(w: &Jet) -> Jet {
    if w.val > 0.01 {
        w.sqrt().asin().square()
    } else {
        // asin(√w)² = w (1 + w/3 + 8w²/45 + 4w³/35 + 128w⁴/1575 + 128w⁵/2079·(…))
        const C: [f64; 8] = [
            1.0,
            1.0 / 3.0,
            8.0 / 45.0,
            4.0 / 35.0,
            128.0 / 1575.0,
            128.0 / 2079.0,
            1024.0 / 21021.0,
            256.0 / 6435.0,
        ];
        let mut acc = Jet::c(C[7]);
        for k in (0..7).rev() {
            acc = acc * w + C[k];
        }
        acc * w
    }
}

/// Embedding of the stereographic chart into the radius-R sphere in R^{d+1}.
fn sphere_embed(v: &[Jet], r: f64) -> Vec<Jet> {
    let s = crate::jet::jet_norm_sq(v);
    let denom = (&s + r * r).recip();
    let mut out: Vec<Jet> = v
        .iter()
        .map(|vi| vi * (2.0 * r * r) * &denom)
        .collect();
    out.push((&s - r * r) * r * &denom);
    out
}

/// Squared geodesic distance on the radius-R sphere between chart points,
/// computed cancellation-free from the chord through `e = v - p`.
fn sphere_dist_sq(p: &[f64], v: &[Jet], r: f64) -> Jet {
    let d = v.len();
    let sp: f64 = p.iter().map(|x| x * x).sum();
    let e: Vec<Jet> = v.iter().zip(p).map(|(vi, pi)| vi - *pi).collect();
    let sum: Vec<Jet> = v.iter().zip(p).map(|(vi, pi)| vi + *pi).collect();
    let es = jet_dot(&e, &sum); // = |v|² - |p|²
    let d2 = sp + r * r;
    // chord² = (2R²)² |D2 e - p ⟨e, v+p⟩|² + (2R³)² ⟨e, v+p⟩², over (D1 D2)²
    let mut chord_num = Jet::c(0.0);
    for i in 0..d {
        let c = &e[i] * d2 - &es * p[i];
        chord_num = chord_num + c.square();
    }
    chord_num = (chord_num + &es.square() * (r * r)) * (4.0 * r.powi(4));
    let s = crate::jet::jet_norm_sq(v);
    let d1 = s + r * r;
    let denom = (&d1 * d2).square();
    let chord_sq = chord_num / denom;
    // q = chord²/(2R²); dist = 2R asin(√(q/2)); dist² = 4R² asin²(√(q/2))
    let q_half = chord_sq / (4.0 * r * r);
    asin_sq(&q_half) * (4.0 * r * r)
}

/// Round sphere S^d(R) in its stereographic chart (origin = point antipodal
/// to the projection pole).
pub fn sphere_model(d: usize, r: f64, name: &str) -> ManifoldModel {
    let chart = format!("{name}_stereo");
    let rr = r;
    let metric = MetricField::new(
        chart.clone(),
        d,
        Domain::All,
        Arc::new(move |x: &[Jet]| {
            let s = crate::jet::jet_norm_sq(x);
            let factor = (s + rr * rr).recip().square() * (4.0 * rr.powi(4));
            let n = x.len();
            let mut out = vec![Jet::c(0.0); n * n];
            for i in 0..n {
                out[i * n + i] = factor.clone();
            }
            out
        }),
    );
    let rr2 = r;
    let rr3 = r;
    let rr4 = r;
    let dd = d;
    ManifoldModel {
        name: name.to_string(),
        chart,
        dim: d,
        metric,
        inj: std::f64::consts::PI * r,
        chart_radius: 6.0 * r,
        dist_sq: Arc::new(move |p, x| sphere_dist_sq(p, x, rr2)),
        sample: Arc::new(move |rng| {
            // uniform on the sphere, mapped to the chart, avoiding the pole cap
            loop {
                let y = sampling::random_unit(rng, dd + 1);
                let denom = 1.0 - y[dd]; // pole at y_d = 1
                if denom < 0.08 {
                    continue;
                }
                return y[..dd].iter().map(|c| rr4 * c / denom).collect();
            }
        }),
        radius_for_dist: Arc::new(move |dist| {
            let half = (dist / (2.0 * rr3)).min(std::f64::consts::FRAC_PI_2 * 0.98);
            rr3 * half.tan()
        }),
        dist_hess_err: Arc::new(move |dmax| {
            // tangential Hessian of dist on S(R) is cot(d/R)/R; the deviation
            // from 1/d is increasing in d
            let d = dmax.max(1e-12);
            let t = d / rr2;
            if t >= std::f64::consts::PI * 0.99 {
                return f64::INFINITY;
            }
            (1.0 / d - (1.0 / rr2) / t.tan()).abs()
        }),
    }
}

/// Flat torus chart (periods 2π), restricted to the fundamental box.
pub fn torus_model(d: usize, name: &str) -> ManifoldModel {
    let chart = format!("{name}_box");
    let metric = MetricField::new(
        chart.clone(),
        d,
        Domain::All,
        Arc::new(move |x: &[Jet]| {
            let n = x.len();
            let mut out = vec![Jet::c(0.0); n * n];
            for i in 0..n {
                out[i * n + i] = Jet::c(1.0);
            }
            out
        }),
    );
    let dd = d;
    ManifoldModel {
        name: name.to_string(),
        chart,
        dim: d,
        metric,
        inj: std::f64::consts::PI,
        chart_radius: std::f64::consts::PI * 0.95,
        dist_sq: Arc::new(|p, x| {
            let e: Vec<Jet> = x.iter().zip(p).map(|(xi, pi)| xi - *pi).collect();
            crate::jet::jet_norm_sq(&e)
        }),
        sample: Arc::new(move |rng| {
            use rand::Rng;
            (0..dd)
                .map(|_| rng.gen_range(-std::f64::consts::PI * 0.9..std::f64::consts::PI * 0.9))
                .collect()
        }),
        radius_for_dist: Arc::new(|d| d),
        dist_hess_err: Arc::new(|_| 0.0),
    }
}

/// Hopf / Berger total space: round S³ with the fiber direction rescaled by
/// `t` (t = 1 is the round Hopf model), over S²(1/2).
pub fn hopf_model(t: f64) -> Result<SubmersionModel> {
    if t <= 0.0 {
        return Err(GeomError::Input("berger scale must be positive".into()));
    }
    let name = if (t - 1.0).abs() < 1e-14 {
        "hopf".to_string()
    } else {
        format!("berger:{t}")
    };
    let chart_total = "s3_stereo".to_string();
    let base = sphere_model(2, 0.5, "s2half");

    // analytic vertical field of the Hopf circle action in the chart
    let vert_field = |u: &[Jet]| -> Vec<Jet> {
        let s = crate::jet::jet_norm_sq(u);
        vec![
            &u[0] * &u[2] - &u[1],
            &u[1] * &u[2] + &u[0],
            (1.0 - &s) * 0.5 + u[2].square(),
        ]
    };

    let tt = t;
    let total = MetricField::new(
        chart_total.clone(),
        3,
        Domain::All,
        Arc::new(move |u: &[Jet]| {
            let s = crate::jet::jet_norm_sq(u);
            let c = (&s + 1.0).recip().square() * 4.0;
            let v = vert_field(u);
            let mut out = vec![Jet::c(0.0); 9];
            let factor = &c.square() * (tt * tt - 1.0);
            for i in 0..3 {
                for j in 0..3 {
                    let mut e = &factor * &v[i] * &v[j];
                    if i == j {
                        e = e + &c;
                    }
                    out[i * 3 + j] = e;
                }
            }
            out
        }),
    );

    let projection = Arc::new(move |u: &[Jet]| -> Vec<Jet> {
        let x = sphere_embed(u, 1.0);
        // Hopf map to S²(1/2), then the base stereographic chart: v = z₁/(2 z₂)
        let y1 = &x[0] * &x[2] + &x[1] * &x[3];
        let y2 = &x[1] * &x[2] - &x[0] * &x[3];
        let y3 = (x[0].square() + x[1].square() - x[2].square() - x[3].square()) * 0.5;
        // R - Y₃ = |z₂|²  (R = 1/2)
        let denom = (0.5 - y3).recip() * 0.5;
        vec![&y1 * &denom, &y2 * &denom]
    });

    let vertical = Arc::new(move |u: &[Jet]| -> Vec<Vec<Jet>> { vec![vert_field(u)] });

    let fiber_lift = Arc::new(move |v: &[f64], fiber: &[f64]| -> Option<Vec<f64>> {
        let theta = fiber[0];
        let r = 0.5;
        let s: f64 = v.iter().map(|x| x * x).sum();
        let denom = s + r * r;
        let y = [
            2.0 * r * r * v[0] / denom,
            2.0 * r * r * v[1] / denom,
            r * (s - r * r) / denom,
        ];
        let z2_sq = 0.5 - y[2];
        if z2_sq < 1e-10 {
            return None;
        }
        let z2 = (z2_sq.sqrt() * theta.cos(), z2_sq.sqrt() * theta.sin());
        // z₁ = (Y₁ + i Y₂) z₂ / |z₂|²
        let z1 = (
            (y[0] * z2.0 - y[1] * z2.1) / z2_sq,
            (y[0] * z2.1 + y[1] * z2.0) / z2_sq,
        );
        let x = [z1.0, z1.1, z2.0, z2.1];
        let denom2 = 1.0 - x[3];
        if denom2.abs() < 1e-6 {
            return None;
        }
        Some(vec![x[0] / denom2, x[1] / denom2, x[2] / denom2])
    });

    let sample_total = Arc::new(move |rng: &mut ChaCha8Rng| -> Vec<f64> {
        loop {
            let y = sampling::random_unit(rng, 4);
            let denom = 1.0 - y[3];
            let z2_sq = y[2] * y[2] + y[3] * y[3];
            if denom < 0.08 || z2_sq < 0.05 {
                continue;
            }
            return vec![y[0] / denom, y[1] / denom, y[2] / denom];
        }
    });

    Ok(SubmersionModel {
        name,
        chart_total,
        total_dim: 3,
        base_dim: 2,
        total,
        base,
        inj_total: std::f64::consts::PI * t.min(1.0),
        projection,
        vertical,
        fiber_lift,
        sample_total,
    })
}

/// Product submersion S²(1) × S²(1) → S²(1), projection onto the first factor.
pub fn product_s2xs2_model() -> SubmersionModel {
    let base = sphere_model(2, 1.0, "s2");
    let chart_total = "s2xs2_stereo".to_string();
    let total = MetricField::new(
        chart_total.clone(),
        4,
        Domain::All,
        Arc::new(|x: &[Jet]| {
            let factor = |v0: &Jet, v1: &Jet| -> Jet {
                let s = v0.square() + v1.square();
                (s + 1.0).recip().square() * 4.0
            };
            let c1 = factor(&x[0], &x[1]);
            let c2 = factor(&x[2], &x[3]);
            let mut out = vec![Jet::c(0.0); 16];
            out[0] = c1.clone();
            out[5] = c1;
            out[10] = c2.clone();
            out[15] = c2;
            out
        }),
    );
    let projection = Arc::new(|x: &[Jet]| -> Vec<Jet> { vec![x[0].clone(), x[1].clone()] });
    let vertical = Arc::new(|_x: &[Jet]| -> Vec<Vec<Jet>> {
        vec![
            vec![Jet::c(0.0), Jet::c(0.0), Jet::c(1.0), Jet::c(0.0)],
            vec![Jet::c(0.0), Jet::c(0.0), Jet::c(0.0), Jet::c(1.0)],
        ]
    });
    let fiber_lift = Arc::new(|v: &[f64], fiber: &[f64]| -> Option<Vec<f64>> {
        Some(vec![v[0], v[1], fiber[0], fiber[1]])
    });
    let sample_total = Arc::new(|rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut point = Vec::with_capacity(4);
        for _ in 0..2 {
            loop {
                let y = sampling::random_unit(rng, 3);
                let denom = 1.0 - y[2];
                if denom < 0.08 {
                    continue;
                }
                point.push(y[0] / denom);
                point.push(y[1] / denom);
                break;
            }
        }
        point
    });
    SubmersionModel {
        name: "product:s2xs2".to_string(),
        chart_total,
        total_dim: 4,
        base_dim: 2,
        total,
        base,
        inj_total: std::f64::consts::PI,
        projection,
        vertical,
        fiber_lift,
        sample_total,
    }
}

/// Flat torus bundle T³ → T², the trivially flat reference model.
pub fn torus_bundle_model() -> SubmersionModel {
    let base = torus_model(2, "torus2");
    let chart_total = "torus3_box".to_string();
    let total = MetricField::new(
        chart_total.clone(),
        3,
        Domain::All,
        Arc::new(|x: &[Jet]| {
            let n = x.len();
            let mut out = vec![Jet::c(0.0); n * n];
            for i in 0..n {
                out[i * n + i] = Jet::c(1.0);
            }
            out
        }),
    );
    let projection = Arc::new(|x: &[Jet]| -> Vec<Jet> { vec![x[0].clone(), x[1].clone()] });
    let vertical = Arc::new(|_x: &[Jet]| -> Vec<Vec<Jet>> {
        vec![vec![Jet::c(0.0), Jet::c(0.0), Jet::c(1.0)]]
    });
    let fiber_lift = Arc::new(|v: &[f64], fiber: &[f64]| -> Option<Vec<f64>> {
        Some(vec![v[0], v[1], fiber[0]])
    });
    let sample_total = Arc::new(|rng: &mut ChaCha8Rng| -> Vec<f64> {
        use rand::Rng;
        (0..3)
            .map(|_| rng.gen_range(-std::f64::consts::PI * 0.9..std::f64::consts::PI * 0.9))
            .collect()
    });
    SubmersionModel {
        name: "torus".to_string(),
        chart_total,
        total_dim: 3,
        base_dim: 2,
        total,
        base,
        inj_total: std::f64::consts::PI,
        projection,
        vertical,
        fiber_lift,
        sample_total,
    }
}

/// Parses a submersion registry name: `hopf`, `berger:<t>`, `product:s2xs2`,
/// `torus`.
pub fn submersion_by_name(name: &str) -> Result<SubmersionModel> {
    if name == "hopf" {
        return hopf_model(1.0);
    }
    if let Some(t) = name.strip_prefix("berger:") {
        let t: f64 = t
            .parse()
            .map_err(|_| GeomError::Input(format!("bad berger scale in `{name}`")))?;
        return hopf_model(t);
    }
    if name == "product" || name == "product:s2xs2" {
        return Ok(product_s2xs2_model());
    }
    if name == "torus" {
        return Ok(torus_bundle_model());
    }
    Err(GeomError::UnknownModel(name.to_string()))
}

/// Parses a base-manifold registry name: `s2half`, `s2`, `torus2`, or the
/// base of any submersion name.
pub fn base_by_name(name: &str) -> Result<ManifoldModel> {
    match name {
        "s2half" => Ok(sphere_model(2, 0.5, "s2half")),
        "s2" => Ok(sphere_model(2, 1.0, "s2")),
        "torus2" => Ok(torus_model(2, "torus2")),
        other => submersion_by_name(other).map(|m| m.base),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_metric_has_constant_curvature() {
        for (r, expect) in [(1.0, 1.0), (0.5, 4.0)] {
            let m = sphere_model(2, r, "s2test");
            let mut rng = sampling::rng(1);
            for _ in 0..5 {
                let p = m.sample_point(&mut rng);
                let data = riemann(&m.metric, &p).unwrap();
                let sec = crate::calculus::sectional(&data, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
                assert_relative_eq!(sec, expect, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn sphere_distance_matches_embedding() {
        let m = sphere_model(2, 0.5, "s2test");
        let p = [0.1, -0.2];
        let x = [0.4, 0.3];
        let d = m.dist(&p, &x);
        // independent arccos-of-inner-product evaluation
        let embed = |v: &[f64]| -> [f64; 3] {
            let r = 0.5;
            let s: f64 = v.iter().map(|a| a * a).sum();
            [
                2.0 * r * r * v[0] / (s + r * r),
                2.0 * r * r * v[1] / (s + r * r),
                r * (s - r * r) / (s + r * r),
            ]
        };
        let a = embed(&p);
        let b = embed(&x);
        let cosang = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / 0.25;
        let expect = 0.5 * cosang.clamp(-1.0, 1.0).acos();
        assert_relative_eq!(d, expect, max_relative = 1e-10);
    }

    #[test]
    fn sphere_distance_smooth_at_center() {
        // dist² must be jet-smooth at the center point itself
        let m = sphere_model(2, 0.5, "s2test");
        let p = [0.05, 0.1];
        let jet = m.dist_sq_jet(&p, &Jet::seed(&p));
        assert!(jet.val.abs() < 1e-24);
        assert!(jet.gradient().norm() < 1e-12);
        // Hessian of dist² at the center is 2 g
        let g = m.metric.eval(&p);
        let h = jet.hessian();
        assert_relative_eq!(h[(0, 0)], 2.0 * g[(0, 0)], max_relative = 1e-8);
        assert_relative_eq!(h[(1, 1)], 2.0 * g[(1, 1)], max_relative = 1e-8);
    }

    #[test]
    fn hopf_total_space_is_round() {
        let m = hopf_model(1.0).unwrap();
        let mut rng = sampling::rng(2);
        for _ in 0..4 {
            let x = m.sample_total_point(&mut rng);
            let data = riemann(&m.total, &x).unwrap();
            for (u, v) in [([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), ([1.0, 0.5, 0.0], [0.0, 0.3, 1.0])]
            {
                let sec = crate::calculus::sectional(&data, &u, &v).unwrap();
                assert_relative_eq!(sec, 1.0, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn hopf_vertical_field_is_unit_and_killed_by_dpi() {
        let m = hopf_model(1.0).unwrap();
        let mut rng = sampling::rng(3);
        for _ in 0..6 {
            let x = m.sample_total_point(&mut rng);
            let v = &m.vertical_at(&x)[0];
            let g = m.total.eval(&x);
            let mut norm = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    norm += g[(i, j)] * v[i] * v[j];
                }
            }
            assert_relative_eq!(norm, 1.0, max_relative = 1e-10);
            let dpi = m.dpi(&x);
            let dv = dpi * DVector::from_column_slice(v);
            assert!(dv.norm() < 1e-9, "dπ(V) = {dv:?}");
        }
    }

    #[test]
    fn projection_is_isometric_on_horizontal() {
        for t in [1.0, 0.5] {
            let m = hopf_model(t).unwrap();
            let mut rng = sampling::rng(4);
            for _ in 0..4 {
                let x = m.sample_total_point(&mut rng);
                let y = m.project(&x);
                let gb = m.base.metric.eval(&y);
                let g = m.total.eval(&x);
                for w in [[1.0, 0.0], [0.0, 1.0], [0.7, -0.4]] {
                    let lift = m.horizontal_lift(&m.total, &x, &w).unwrap();
                    let mut len_m = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            len_m += g[(i, j)] * lift[i] * lift[j];
                        }
                    }
                    let mut len_b = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            len_b += gb[(i, j)] * w[i] * w[j];
                        }
                    }
                    assert_relative_eq!(len_m, len_b, max_relative = 1e-8);
                }
            }
        }
    }

    #[test]
    fn fiber_points_project_to_base_point() {
        let m = hopf_model(1.0).unwrap();
        let v = [0.12, -0.3];
        for theta in [0.3, 2.0, 4.4] {
            let x = m.fiber_point(&v, &[theta]).unwrap();
            let back = m.project(&x);
            assert_relative_eq!(back[0], v[0], epsilon = 1e-10);
            assert_relative_eq!(back[1], v[1], epsilon = 1e-10);
        }
    }

    #[test]
    fn product_model_tensors_vanish() {
        let m = product_s2xs2_model();
        let mut rng = sampling::rng(5);
        let x = m.sample_total_point(&mut rng);
        let ft = fundamental_tensors(&m, &m.total, &x).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!(ft.norm(&ft.a[a][b]) < 1e-10);
                assert!(ft.norm(&ft.sigma[a][b]) < 1e-10);
                assert!(ft.norm(&ft.s[a][b]) < 1e-10);
            }
        }
    }

    #[test]
    fn hopf_a_tensor_has_unit_norm() {
        let m = hopf_model(1.0).unwrap();
        let mut rng = sampling::rng(6);
        for _ in 0..3 {
            let x = m.sample_total_point(&mut rng);
            let ft = fundamental_tensors(&m, &m.total, &x).unwrap();
            let (h, _) = m.adapted_on_frame(&m.total, &x).unwrap();
            let a = ft.a_of(&h[0], &h[1]);
            assert_relative_eq!(ft.norm(&a), 1.0, max_relative = 1e-7);
            assert!(ft.antisymmetry_residual < 1e-9);
            assert!(ft.duality_residual < 1e-9);
        }
    }

    #[test]
    fn berger_a_tensor_scales_with_fiber() {
        for t in [0.5, 1.0, 2.0] {
            let m = hopf_model(t).unwrap();
            let mut rng = sampling::rng(7);
            let x = m.sample_total_point(&mut rng);
            let ft = fundamental_tensors(&m, &m.total, &x).unwrap();
            let (h, _) = m.adapted_on_frame(&m.total, &x).unwrap();
            let a = ft.a_of(&h[0], &h[1]);
            assert_relative_eq!(ft.norm(&a), t, max_relative = 1e-7);
        }
    }

    #[test]
    fn oneill_residual_small_on_models() {
        let mut rng = sampling::rng(8);
        for name in ["hopf", "berger:0.5", "product:s2xs2", "torus"] {
            let m = submersion_by_name(name).unwrap();
            let x = m.sample_total_point(&mut rng);
            let y = m.project(&x);
            let gb = m.base.metric.eval(&y);
            let frame = gram_schmidt(&[vec![1.0, 0.0], vec![0.0, 1.0]], &gb).unwrap();
            let res = verify_oneill(&m, &x, &frame[0], &frame[1]).unwrap();
            assert!(res < 1e-6, "{name}: O'Neill residual {res}");
        }
    }

    #[test]
    fn theorem_a_part1_gap_nonnegative() {
        let m = hopf_model(1.0).unwrap();
        let mut rng = sampling::rng(9);
        let x = m.sample_total_point(&mut rng);
        let check = verify_theorem_a_part1(&m, &x, 1, 20, 42).unwrap();
        assert!(check.min_gap > -1e-8, "gap {}", check.min_gap);
        assert!(check.max_a_gap_residual < 1e-6);
    }
}

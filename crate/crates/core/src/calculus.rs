//! Second-order calculus on chart-presented metrics: Christoffel symbols,
//! the Riemann tensor with its packed operator, sectional and intermediate
//! Ricci curvature, and gradients/Hessians of scalar fields.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::frames::{self, FrameSearchConfig};
use crate::jet::Jet;
use crate::tensor::{
    pack_curvature_operator, CurvatureOperator, FourTensor, TangentVector, ThreeTensor, TwoTensor,
};

/// Chart domain of a field.
#[derive(Clone, Debug)]
pub enum Domain {
    All,
    /// Euclidean ball in chart coordinates.
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::All => true,
            Domain::Ball { center, radius } => {
                let d2: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                d2.sqrt() <= *radius
            }
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= *l && *v <= *h),
        }
    }
}

type MetricFn = dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync;
type ScalarFn = dyn Fn(&[Jet]) -> Jet + Send + Sync;

/// Chart-domain metric with exact first and second derivative access.
#[derive(Clone)]
pub struct MetricField {
    pub chart: String,
    dim: usize,
    pub domain: Domain,
    f: Arc<MetricFn>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricField({}, dim {})", self.chart, self.dim)
    }
}

/// Metric coefficients with their first and second chart derivatives at a
/// point: `dg.get(k, i, j) = ∂_k g_ij`, `d2g.get(k, l, i, j) = ∂_k ∂_l g_ij`.
pub struct MetricJets {
    pub g: DMatrix<f64>,
    pub dg: ThreeTensor,
    pub d2g: FourTensor,
}

impl MetricField {
    pub fn new(
        chart: impl Into<String>,
        dim: usize,
        domain: Domain,
        f: Arc<MetricFn>,
    ) -> Self {
        MetricField {
            chart: chart.into(),
            dim,
            domain,
            f,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient matrix at `x` (value-only evaluation).
    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let vals = (self.f)(&Jet::consts(x));
        DMatrix::from_fn(self.dim, self.dim, |i, j| vals[i * self.dim + j].val)
    }

    /// Raw jet entries at an already-seeded point (row-major n*n).
    pub fn eval_raw(&self, seeds: &[Jet]) -> Vec<Jet> {
        (self.f)(seeds)
    }

    /// Coefficients with both derivative levels at `x`.
    pub fn eval_jets(&self, x: &[f64]) -> MetricJets {
        let n = self.dim;
        let jets = (self.f)(&Jet::seed(x));
        let mut g = DMatrix::zeros(n, n);
        let mut dg = ThreeTensor::zeros(n);
        let mut d2g = FourTensor::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let jet = &jets[i * n + j];
                g[(i, j)] = jet.val;
                for k in 0..n {
                    dg.set(k, i, j, jet.grad_get(k));
                    for l in 0..n {
                        d2g.set(k, l, i, j, jet.hess_get(k, l, n));
                    }
                }
            }
        }
        MetricJets { g, dg, d2g }
    }

    /// Pointwise conformal scaling `e^{2 ω} g` by a scalar field on the same chart.
    pub fn conformal(&self, omega: &ScalarField) -> MetricField {
        let n = self.dim;
        let f = self.f.clone();
        let of = omega.f.clone();
        MetricField {
            chart: self.chart.clone(),
            dim: n,
            domain: self.domain.clone(),
            f: Arc::new(move |x| {
                let scale = (of(x) * 2.0).exp();
                f(x).into_iter().map(|e| &e * &scale).collect()
            }),
        }
    }
}

/// Scalar field on a chart with exact first and second derivatives.
#[derive(Clone)]
pub struct ScalarField {
    pub chart: String,
    dim: usize,
    pub(crate) f: Arc<ScalarFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({}, dim {})", self.chart, self.dim)
    }
}

impl ScalarField {
    pub fn new(chart: impl Into<String>, dim: usize, f: Arc<ScalarFn>) -> Self {
        ScalarField {
            chart: chart.into(),
            dim,
            f,
        }
    }

    pub fn zero(chart: impl Into<String>, dim: usize) -> Self {
        ScalarField::new(chart, dim, Arc::new(|_| Jet::c(0.0)))
    }

    pub fn constant(chart: impl Into<String>, dim: usize, c: f64) -> Self {
        ScalarField::new(chart, dim, Arc::new(move |_| Jet::c(c)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(&Jet::consts(x)).val
    }

    /// Value, chart gradient and chart Hessian at `x`.
    pub fn eval_jet(&self, x: &[f64]) -> Jet {
        let mut out = (self.f)(&Jet::seed(x));
        let n = self.dim;
        if out.is_const() {
            out.grad = vec![0.0; n];
            out.hess = vec![0.0; n * n];
        }
        out
    }

    /// Jet evaluation at already-seeded coordinates (for compositions).
    pub fn eval_raw(&self, seeds: &[Jet]) -> Jet {
        (self.f)(seeds)
    }
}

/// Two-tensor field on a chart (row-major n*n jet entries).
#[derive(Clone)]
pub struct TensorField {
    pub chart: String,
    dim: usize,
    f: Arc<MetricFn>,
}

impl TensorField {
    pub fn new(chart: impl Into<String>, dim: usize, f: Arc<MetricFn>) -> Self {
        TensorField {
            chart: chart.into(),
            dim,
            f,
        }
    }

    /// Pointwise difference `a - b` of two metric fields as a tensor field.
    pub fn metric_difference(a: &MetricField, b: &MetricField) -> TensorField {
        let fa = a.f.clone();
        let fb = b.f.clone();
        TensorField {
            chart: a.chart.clone(),
            dim: a.dim,
            f: Arc::new(move |x| {
                fa(x)
                    .into_iter()
                    .zip(fb(x))
                    .map(|(u, v)| u - v)
                    .collect()
            }),
        }
    }

    pub fn zero(chart: impl Into<String>, dim: usize) -> TensorField {
        TensorField::new(chart, dim, Arc::new(move |_| vec![Jet::c(0.0); dim * dim]))
    }

    /// `c * g0` for tests and calibration.
    pub fn scaled_metric(g0: &MetricField, c: f64) -> TensorField {
        let f = g0.f.clone();
        TensorField {
            chart: g0.chart.clone(),
            dim: g0.dim,
            f: Arc::new(move |x| f(x).into_iter().map(|e| e * c).collect()),
        }
    }

    /// Rank-one field `dω ⊗ dω` from a scalar field.
    pub fn grad_outer(omega: &ScalarField) -> TensorField {
        let of = omega.f.clone();
        let dim = omega.dim;
        TensorField {
            chart: omega.chart.clone(),
            dim,
            f: Arc::new(move |x| {
                // differential components as first-order jets in the chart
                let n = x.len();
                let val = of(x);
                let mut out = Vec::with_capacity(n * n);
                let comp = |i: usize| -> Jet {
                    // d_i omega as a jet: value = grad[i], grad = hess row i.
                    // Second-order content is not propagated past this point.
                    let mut g = vec![0.0; n];
                    for j in 0..n {
                        g[j] = val.hess_get(i, j, n);
                    }
                    Jet {
                        val: val.grad_get(i),
                        grad: g,
                        hess: vec![0.0; n * n],
                    }
                };
                for i in 0..n {
                    for j in 0..n {
                        out.push(comp(i) * comp(j));
                    }
                }
                out
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let vals = (self.f)(&Jet::consts(x));
        DMatrix::from_fn(self.dim, self.dim, |i, j| vals[i * self.dim + j].val)
    }

    pub fn eval_jets(&self, x: &[f64]) -> Vec<Jet> {
        let mut jets = (self.f)(&Jet::seed(x));
        let n = self.dim;
        for j in &mut jets {
            if j.is_const() {
                j.grad = vec![0.0; n];
                j.hess = vec![0.0; n * n];
            }
        }
        jets
    }
}

/// Curvature data of a metric at a point.
#[derive(Clone, Debug)]
pub struct CurvaturePointData {
    pub point: Vec<f64>,
    /// `christoffel.get(k, i, j) = Γ^k_{ij}`.
    pub christoffel: ThreeTensor,
    /// (1,3) tensor: `riemann_up.get(i, j, k, l) = (R(∂_i, ∂_j) ∂_k)^l`.
    pub riemann_up: FourTensor,
    /// (0,4) tensor: `riemann.get(i, j, k, l) = g(R(∂_i, ∂_j) ∂_k, ∂_l)`.
    pub riemann: FourTensor,
    /// Ricci tensor `Ric(∂_j, ∂_k) = Σ_i (R(∂_i, ∂_j) ∂_k)^i`.
    pub ricci: DMatrix<f64>,
    pub operator: CurvatureOperator,
    pub metric: DMatrix<f64>,
    /// Normalized residual of the algebraic symmetries (diagnostic).
    pub symmetry_residual: f64,
}

/// Tolerance for the normalized first-Bianchi / symmetry residual of
/// curvature computed from exact jets.
pub const CURVATURE_SYMMETRY_TOL: f64 = 1e-8;

/// Christoffel symbols `Γ^k_{ij}` of `g` at `x`.
pub fn christoffel(g: &MetricField, x: &[f64]) -> Result<ThreeTensor> {
    if !g.domain.contains(x) {
        return Err(GeomError::Input(format!(
            "point {x:?} outside chart domain of {}",
            g.chart
        )));
    }
    let jets = g.eval_jets(x);
    christoffel_from_jets(&jets).map(|(gamma, _)| gamma)
}

/// Christoffels plus their chart derivatives `∂_m Γ^k_{ij}` from metric jets.
fn christoffel_from_jets(mj: &MetricJets) -> Result<(ThreeTensor, FourTensor)> {
    let n = mj.g.nrows();
    let ginv = mj
        .g
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::Degeneracy("metric is singular".into()))?;
    if mj.g.clone().cholesky().is_none() {
        return Err(GeomError::Degeneracy("metric not positive definite".into()));
    }

    // lowered symbols and their derivatives
    // Γ_{lij} = (∂_i g_jl + ∂_j g_il - ∂_l g_ij) / 2
    let mut low = ThreeTensor::zeros(n);
    let mut dlow = FourTensor::zeros(n); // [m][l][i][j] = ∂_m Γ_{lij}
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                low.set(
                    l,
                    i,
                    j,
                    0.5 * (mj.dg.get(i, j, l) + mj.dg.get(j, i, l) - mj.dg.get(l, i, j)),
                );
                for m in 0..n {
                    dlow.set(
                        m,
                        l,
                        i,
                        j,
                        0.5 * (mj.d2g.get(m, i, j, l) + mj.d2g.get(m, j, i, l)
                            - mj.d2g.get(m, l, i, j)),
                    );
                }
            }
        }
    }

    // ∂_m g^{kl} = -g^{ka} ∂_m g_{ab} g^{bl}
    let mut dginv = ThreeTensor::zeros(n);
    for m in 0..n {
        for k in 0..n {
            for l in 0..n {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc -= ginv[(k, a)] * mj.dg.get(m, a, b) * ginv[(b, l)];
                    }
                }
                dginv.set(m, k, l, acc);
            }
        }
    }

    let mut gamma = ThreeTensor::zeros(n);
    let mut dgamma = FourTensor::zeros(n); // [m][k][i][j] = ∂_m Γ^k_{ij}
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += ginv[(k, l)] * low.get(l, i, j);
                }
                gamma.set(k, i, j, acc);
                for m in 0..n {
                    let mut d = 0.0;
                    for l in 0..n {
                        d += dginv.get(m, k, l) * low.get(l, i, j)
                            + ginv[(k, l)] * dlow.get(m, l, i, j);
                    }
                    dgamma.set(m, k, i, j, d);
                }
            }
        }
    }
    Ok((gamma, dgamma))
}

/// Full curvature data of `g` at `x`.
pub fn riemann(g: &MetricField, x: &[f64]) -> Result<CurvaturePointData> {
    if !g.domain.contains(x) {
        return Err(GeomError::Input(format!(
            "point {x:?} outside chart domain of {}",
            g.chart
        )));
    }
    let n = g.dim();
    let mj = g.eval_jets(x);
    let (gamma, dgamma) = christoffel_from_jets(&mj)?;

    // (R(∂_i, ∂_j) ∂_k)^l =
    //   ∂_i Γ^l_{jk} - ∂_j Γ^l_{ik} + Γ^l_{im} Γ^m_{jk} - Γ^l_{jm} Γ^m_{ik}
    let mut rup = FourTensor::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = dgamma.get(i, l, j, k) - dgamma.get(j, l, i, k);
                    for m in 0..n {
                        acc += gamma.get(l, i, m) * gamma.get(m, j, k)
                            - gamma.get(l, j, m) * gamma.get(m, i, k);
                    }
                    rup.set(i, j, k, l, acc);
                }
            }
        }
    }

    let mut rdown = FourTensor::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        acc += mj.g[(l, m)] * rup.get(i, j, k, m);
                    }
                    rdown.set(i, j, k, l, acc);
                }
            }
        }
    }

    let mut ricci = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += rup.get(i, j, k, i);
            }
            ricci[(j, k)] = acc;
        }
    }

    let symmetry_residual = rdown.curvature_symmetry_residual();
    if symmetry_residual > CURVATURE_SYMMETRY_TOL {
        return Err(GeomError::Consistency(format!(
            "curvature symmetry residual {symmetry_residual:.3e} at {x:?}"
        )));
    }
    let operator = pack_curvature_operator(&rdown, &mj.g, x)?;

    Ok(CurvaturePointData {
        point: x.to_vec(),
        christoffel: gamma,
        riemann_up: rup,
        riemann: rdown,
        ricci,
        operator,
        metric: mj.g,
        symmetry_residual,
    })
}

/// Contracts the (1,3) curvature with three vectors: `R(u, v) w` in chart
/// components.
pub fn riemann_apply(data: &CurvaturePointData, u: &[f64], v: &[f64], w: &[f64]) -> Vec<f64> {
    let n = data.riemann_up.n;
    let mut out = vec![0.0; n];
    for i in 0..n {
        if u[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if v[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                if w[k] == 0.0 {
                    continue;
                }
                for l in 0..n {
                    out[l] += data.riemann_up.get(i, j, k, l) * u[i] * v[j] * w[k];
                }
            }
        }
    }
    out
}

/// Minimum squared-area tolerance below which a plane is rejected as
/// degenerate rather than regularized.
pub const PLANE_AREA_TOL: f64 = 1e-14;

/// Sectional curvature of the plane spanned by `u`, `v`.
pub fn sectional(data: &CurvaturePointData, u: &[f64], v: &[f64]) -> Result<f64> {
    let g = &data.metric;
    let n = g.nrows();
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += g[(i, j)] * a[i] * b[j];
            }
        }
        acc
    };
    let uu = ip(u, u);
    let vv = ip(v, v);
    let uv = ip(u, v);
    let area_sq = uu * vv - uv * uv;
    if area_sq < PLANE_AREA_TOL * uu * vv || area_sq <= 0.0 {
        return Err(GeomError::Degeneracy(
            "sectional: vectors are (numerically) parallel".into(),
        ));
    }
    Ok(data.riemann.apply(u, v, v, u) / area_sq)
}

/// Sectional curvature API on tangent vectors.
pub fn sectional_vectors(
    data: &CurvaturePointData,
    u: &TangentVector,
    v: &TangentVector,
) -> Result<f64> {
    if u.point != v.point {
        return Err(GeomError::Input(
            "sectional: vectors at different base points".into(),
        ));
    }
    sectional(data, &u.components, &v.components)
}

/// Riemannian gradient of `f` with respect to `g` at `x`.
pub fn gradient(f: &ScalarField, g: &MetricField, x: &[f64]) -> Result<TangentVector> {
    let jet = f.eval_jet(x);
    let gm = g.eval(x);
    let ginv = gm
        .try_inverse()
        .ok_or_else(|| GeomError::Degeneracy("metric is singular".into()))?;
    let df = jet.gradient();
    let grad = ginv * df;
    TangentVector::new(g.chart.clone(), x.to_vec(), grad.iter().copied().collect())
}

/// Riemannian Hessian of `f` with respect to `g` at `x`:
/// `Hess_f(∂_i, ∂_j) = ∂_i ∂_j f - Γ^k_{ij} ∂_k f`.
pub fn hessian(f: &ScalarField, g: &MetricField, x: &[f64]) -> Result<TwoTensor> {
    let n = g.dim();
    let jet = f.eval_jet(x);
    let gamma = christoffel(g, x)?;
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = jet.hess_get(i, j, n);
            for k in 0..n {
                acc -= gamma.get(k, i, j) * jet.grad_get(k);
            }
            h[(i, j)] = acc;
        }
    }
    let h = 0.5 * (&h + h.transpose());
    TwoTensor::symmetric(x.to_vec(), h)
}

/// Extremal Hessian eigenvalues of `f` against unit `g`-directions at `x`.
pub fn hessian_range(f: &ScalarField, g: &MetricField, x: &[f64]) -> Result<(f64, f64)> {
    let h = hessian(f, g, x)?;
    let gm = g.eval(x);
    let eigs = crate::tensor::generalized_eigenvalues(&h.entries, &gm)?;
    Ok((eigs[0], *eigs.last().unwrap()))
}

/// Searched minimum of `Σ_i sec(u, v_i)` over g-orthonormal (k+1)-frames at
/// the point of `data`. Returns the value and the achieving frame in chart
/// coordinates. The value is an upper bound for the true minimum.
pub fn ric_k_min(
    data: &CurvaturePointData,
    k: usize,
    cfg: &FrameSearchConfig,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let n = data.metric.nrows();
    if k < 1 || k > n - 1 {
        return Err(GeomError::Input(format!(
            "ric_k: k = {k} out of range 1..={}",
            n - 1
        )));
    }
    // reduce to a g-orthonormal basis so the frame search is Euclidean
    let chol = data
        .metric
        .clone()
        .cholesky()
        .ok_or_else(|| GeomError::Degeneracy("metric not positive definite".into()))?;
    let l_inv_t = chol
        .l()
        .try_inverse()
        .ok_or_else(|| GeomError::Degeneracy("metric Cholesky not invertible".into()))?
        .transpose();
    // columns of l_inv_t form a g-orthonormal basis
    let op_on = data.operator.in_frame(&l_inv_t);
    let (min, frame_on) = frames::sum_min(&op_on.matrix, n, k, cfg);
    let frame: Vec<Vec<f64>> = frame_on
        .iter()
        .map(|v| {
            let w = &l_inv_t * v;
            w.iter().copied().collect()
        })
        .collect();
    Ok((min, frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn euclidean(n: usize) -> MetricField {
        MetricField::new(
            "euclid",
            n,
            Domain::All,
            Arc::new(move |x: &[Jet]| {
                let n = x.len();
                let mut out = vec![Jet::c(0.0); n * n];
                for i in 0..n {
                    out[i * n + i] = Jet::c(1.0);
                }
                out
            }),
        )
    }

    /// Round two-sphere in polar coordinates.
    fn s2_polar() -> MetricField {
        MetricField::new(
            "s2_polar",
            2,
            Domain::Box {
                lo: vec![0.05, -10.0],
                hi: vec![std::f64::consts::PI - 0.05, 10.0],
            },
            Arc::new(|x: &[Jet]| {
                let s = x[0].sin();
                vec![Jet::c(1.0), Jet::c(0.0), Jet::c(0.0), s.square()]
            }),
        )
    }

    #[test]
    fn euclidean_christoffel_vanishes() {
        let g = euclidean(3);
        let gamma = christoffel(&g, &[0.3, -0.2, 0.9]).unwrap();
        assert!(gamma.max_abs() < 1e-15);
    }

    #[test]
    fn s2_polar_christoffel_closed_form() {
        let g = s2_polar();
        let x = [1.1, 0.4];
        let gamma = christoffel(&g, &x).unwrap();
        let (s, c) = x[0].sin_cos();
        assert_relative_eq!(gamma.get(0, 1, 1), -s * c, max_relative = 1e-12);
        assert_relative_eq!(gamma.get(1, 0, 1), c / s, max_relative = 1e-12);
        assert_relative_eq!(gamma.get(1, 1, 0), c / s, max_relative = 1e-12);
    }

    #[test]
    fn s2_polar_is_unit_curvature() {
        let g = s2_polar();
        let data = riemann(&g, &[0.9, -0.3]).unwrap();
        let sec = sectional(&data, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_relative_eq!(sec, 1.0, max_relative = 1e-10);
        // Ricci of the unit two-sphere equals the metric
        assert_relative_eq!(data.ricci[(0, 0)], 1.0, max_relative = 1e-10);
        let s2 = 0.9f64.sin().powi(2);
        assert_relative_eq!(data.ricci[(1, 1)], s2, max_relative = 1e-10);
    }

    #[test]
    fn flat_space_has_zero_ric_k() {
        let g = euclidean(3);
        let data = riemann(&g, &[0.1, 0.2, 0.3]).unwrap();
        let cfg = FrameSearchConfig::quick(11);
        for k in 1..=2 {
            let (min, frame) = ric_k_min(&data, k, &cfg).unwrap();
            assert!(min.abs() < 1e-12);
            assert_eq!(frame.len(), k + 1);
        }
    }

    #[test]
    fn sectional_is_scale_invariant() {
        let g = s2_polar();
        let data = riemann(&g, &[1.2, 0.7]).unwrap();
        let u = [0.6, -0.3];
        let v = [0.2, 0.9];
        let s0 = sectional(&data, &u, &v).unwrap();
        let u2 = [2.5 * u[0], 2.5 * u[1]];
        let v2 = [-0.7 * v[0] + 0.4 * u[0], -0.7 * v[1] + 0.4 * u[1]];
        let s1 = sectional(&data, &u2, &v2).unwrap();
        assert_relative_eq!(s0, s1, max_relative = 1e-9);
    }

    #[test]
    fn parallel_plane_rejected() {
        let g = euclidean(2);
        let data = riemann(&g, &[0.0, 0.0]).unwrap();
        assert!(sectional(&data, &[1.0, 0.0], &[2.0, 1e-9]).is_err());
    }

    #[test]
    fn gradient_hessian_euclidean_quadratic() {
        let g = euclidean(2);
        let f = ScalarField::new(
            "euclid",
            2,
            Arc::new(|x: &[Jet]| (x[0].square() + x[1].square()) * 0.5),
        );
        let grad = gradient(&f, &g, &[0.3, -0.4]).unwrap();
        assert_relative_eq!(grad.components[0], 0.3, max_relative = 1e-14);
        assert_relative_eq!(grad.components[1], -0.4, max_relative = 1e-14);
        let h = hessian(&f, &g, &[0.3, -0.4]).unwrap();
        assert!((h.entries.clone() - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn metric_compatibility_residual() {
        // ∇g = 0: ∂_k g_ij - Γ^l_{ki} g_lj - Γ^l_{kj} g_il = 0
        let g = s2_polar();
        let x = [0.8, 1.3];
        let mj = g.eval_jets(&x);
        let gamma = christoffel(&g, &x).unwrap();
        let n = 2;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut r = mj.dg.get(k, i, j);
                    for l in 0..n {
                        r -= gamma.get(l, k, i) * mj.g[(l, j)];
                        r -= gamma.get(l, k, j) * mj.g[(i, l)];
                    }
                    assert!(r.abs() < 1e-8, "∇g residual {r} at ({k},{i},{j})");
                }
            }
        }
    }
}

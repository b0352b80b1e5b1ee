//! Point-wise multilinear algebra: wedge-space indexing, Kulkarni–Nomizu
//! products, curvature-operator packing, orthonormalization and the two
//! tensor-field norms measured against a background metric.

use nalgebra::{DMatrix, DVector};

use crate::calculus::{MetricField, TensorField};
use crate::error::{GeomError, Result};

/// Chart-tagged tangent vector.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub chart: String,
    pub point: Vec<f64>,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(chart: impl Into<String>, point: Vec<f64>, components: Vec<f64>) -> Result<Self> {
        if point.len() != components.len() {
            return Err(GeomError::DimensionMismatch(format!(
                "tangent vector: point dim {} vs component dim {}",
                point.len(),
                components.len()
            )));
        }
        Ok(TangentVector {
            chart: chart.into(),
            point,
            components,
        })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// Symmetric or general bilinear form at a point.
#[derive(Clone, Debug)]
pub struct TwoTensor {
    pub point: Vec<f64>,
    pub entries: DMatrix<f64>,
    pub symmetric: bool,
}

impl TwoTensor {
    pub fn symmetric(point: Vec<f64>, entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(GeomError::DimensionMismatch("two-tensor must be square".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(GeomError::Input(
                        "symmetric two-tensor has asymmetric entries".into(),
                    ));
                }
            }
        }
        Ok(TwoTensor {
            point,
            entries,
            symmetric: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn apply(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.entries[(i, j)] * u[i] * v[j];
            }
        }
        acc
    }
}

/// Dense rank-3 array, index `[a][i][j]` flattened.
#[derive(Clone, Debug)]
pub struct ThreeTensor {
    pub n: usize,
    data: Vec<f64>,
}

impl ThreeTensor {
    pub fn zeros(n: usize) -> Self {
        ThreeTensor {
            n,
            data: vec![0.0; n * n * n],
        }
    }
    #[inline]
    pub fn get(&self, a: usize, i: usize, j: usize) -> f64 {
        self.data[(a * self.n + i) * self.n + j]
    }
    #[inline]
    pub fn set(&mut self, a: usize, i: usize, j: usize, v: f64) {
        self.data[(a * self.n + i) * self.n + j] = v;
    }
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Dense rank-4 array, index `[i][j][k][l]` flattened.
#[derive(Clone, Debug)]
pub struct FourTensor {
    pub n: usize,
    data: Vec<f64>,
}

impl FourTensor {
    pub fn zeros(n: usize) -> Self {
        FourTensor {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[((i * self.n + j) * self.n + k) * self.n + l] = v;
    }
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Contracts all four slots: `T(u, v, w, z)`.
    pub fn apply(&self, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if v[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        acc += self.get(i, j, k, l) * u[i] * v[j] * w[k] * z[l];
                    }
                }
            }
        }
        acc
    }

    /// Residuals of the algebraic curvature symmetries, normalized by the
    /// largest entry: antisymmetry in (1,2) and (3,4), pair symmetry, and the
    /// first Bianchi identity.
    pub fn curvature_symmetry_residual(&self) -> f64 {
        let n = self.n;
        let scale = self.max_abs().max(1e-30);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst.max((r + self.get(j, i, k, l)).abs());
                        worst = worst.max((r + self.get(i, j, l, k)).abs());
                        worst = worst.max((r - self.get(k, l, i, j)).abs());
                        let bianchi =
                            r + self.get(j, k, i, l) + self.get(k, i, j, l);
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst / scale
    }
}

/// Lexicographically ordered basis of coordinate bivectors `e_i ∧ e_j`, i < j.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeBasis {
    pub dim: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl WedgeBasis {
    pub fn new(dim: usize) -> Self {
        let mut pairs = Vec::with_capacity(dim * (dim - 1) / 2);
        for i in 0..dim {
            for j in (i + 1)..dim {
                pairs.push((i, j));
            }
        }
        WedgeBasis { dim, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        // lexicographic offset
        i * self.dim - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Coordinates of `u ∧ v` in this basis.
    pub fn wedge(&self, u: &[f64], v: &[f64]) -> DVector<f64> {
        let mut w = DVector::zeros(self.len());
        for (idx, &(i, j)) in self.pairs.iter().enumerate() {
            w[idx] = u[i] * v[j] - u[j] * v[i];
        }
        w
    }

    /// Gram matrix on bivectors induced by a metric `g` at the point.
    pub fn gram(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.len();
        let mut gram = DMatrix::zeros(m, m);
        for (a, &(i, j)) in self.pairs.iter().enumerate() {
            for (b, &(k, l)) in self.pairs.iter().enumerate() {
                gram[(a, b)] = g[(i, k)] * g[(j, l)] - g[(i, l)] * g[(j, k)];
            }
        }
        gram
    }
}

/// Self-adjoint bilinear form on bivectors at a point, stored against the
/// wedge basis together with the induced Gram matrix.
#[derive(Clone, Debug)]
pub struct CurvatureOperator {
    pub point: Vec<f64>,
    pub basis: WedgeBasis,
    /// Bilinear form: `matrix[(a,b)] = form(E_a, E_b)` on basis bivectors.
    pub matrix: DMatrix<f64>,
    /// Positive-definite Gram matrix of the basis bivectors.
    pub gram: DMatrix<f64>,
}

impl CurvatureOperator {
    /// Quadratic form on a plane: `form(u ∧ v, u ∧ v)`.
    pub fn plane_form(&self, u: &[f64], v: &[f64]) -> f64 {
        let w = self.basis.wedge(u, v);
        (w.transpose() * &self.matrix * &w)[(0, 0)]
    }

    /// Squared Gram norm of a bivector `|ξ|^2 = ξᵀ G ξ`.
    pub fn gram_norm_sq(&self, xi: &DVector<f64>) -> f64 {
        (xi.transpose() * &self.gram * xi)[(0, 0)]
    }

    /// Eigenvalues of the operator `G⁻¹ M` (generalized symmetric pair).
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        generalized_eigenvalues(&self.matrix, &self.gram)
    }

    /// Residual of self-adjointness of the stored bilinear form.
    pub fn self_adjoint_residual(&self) -> f64 {
        let scale = self.matrix.amax().max(1e-30);
        (&self.matrix - self.matrix.transpose()).amax() / scale
    }

    /// Re-expresses the form against a new frame `F` (columns are frame
    /// vectors in chart coordinates). Gram transforms alongside.
    pub fn in_frame(&self, frame: &DMatrix<f64>) -> CurvatureOperator {
        let w = wedge_pushforward(&self.basis, frame);
        CurvatureOperator {
            point: self.point.clone(),
            basis: WedgeBasis::new(frame.ncols()),
            matrix: w.transpose() * &self.matrix * &w,
            gram: w.transpose() * &self.gram * &w,
        }
    }
}

/// Matrix of the induced map on bivectors: column `(a,b)` holds the wedge
/// coordinates of `F e_a ∧ F e_b`.
pub fn wedge_pushforward(basis: &WedgeBasis, frame: &DMatrix<f64>) -> DMatrix<f64> {
    let out_basis = WedgeBasis::new(frame.ncols());
    let mut w = DMatrix::zeros(basis.len(), out_basis.len());
    for (col, &(a, b)) in out_basis.pairs.iter().enumerate() {
        let fa: Vec<f64> = frame.column(a).iter().copied().collect();
        let fb: Vec<f64> = frame.column(b).iter().copied().collect();
        let coords = basis.wedge(&fa, &fb);
        w.set_column(col, &coords);
    }
    w
}

/// Eigenvalues of the pencil `(m, gram)` with `gram` positive definite,
/// via a Cholesky congruence to a standard symmetric problem.
pub fn generalized_eigenvalues(m: &DMatrix<f64>, gram: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| GeomError::Degeneracy("wedge Gram matrix not positive definite".into()))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| GeomError::Degeneracy("Gram Cholesky factor not invertible".into()))?;
    let sym = &l_inv * m * l_inv.transpose();
    let sym = 0.5 * (&sym + sym.transpose());
    let eig = sym.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Kulkarni–Nomizu product of two symmetric two-tensors evaluated on four
/// vectors at a common base point.
pub fn kulkarni_nomizu(
    alpha: &TwoTensor,
    beta: &TwoTensor,
    v1: &TangentVector,
    v2: &TangentVector,
    v3: &TangentVector,
    v4: &TangentVector,
) -> Result<f64> {
    let n = alpha.dim();
    for v in [v1, v2, v3, v4] {
        if v.dim() != n {
            return Err(GeomError::DimensionMismatch(
                "kulkarni_nomizu: vector dimension differs from tensor".into(),
            ));
        }
        if v.point != v1.point {
            return Err(GeomError::Input(
                "kulkarni_nomizu: vectors at different base points".into(),
            ));
        }
    }
    if beta.dim() != n {
        return Err(GeomError::DimensionMismatch(
            "kulkarni_nomizu: tensor dimensions differ".into(),
        ));
    }
    Ok(kn_apply(
        &alpha.entries,
        &beta.entries,
        &v1.components,
        &v2.components,
        &v3.components,
        &v4.components,
    ))
}

/// Raw Kulkarni–Nomizu evaluation on component slices.
pub fn kn_apply(
    alpha: &DMatrix<f64>,
    beta: &DMatrix<f64>,
    v1: &[f64],
    v2: &[f64],
    v3: &[f64],
    v4: &[f64],
) -> f64 {
    let a = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..u.len() {
            for j in 0..v.len() {
                acc += alpha[(i, j)] * u[i] * v[j];
            }
        }
        acc
    };
    let b = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..u.len() {
            for j in 0..v.len() {
                acc += beta[(i, j)] * u[i] * v[j];
            }
        }
        acc
    };
    0.5 * (a(v1, v4) * b(v2, v3) + a(v2, v3) * b(v1, v4))
        - 0.5 * (a(v1, v3) * b(v2, v4) + a(v2, v4) * b(v1, v3))
}

/// Assembles the full (0,4) Kulkarni–Nomizu tensor `alpha ∘ beta`.
pub fn kn_four_tensor(alpha: &DMatrix<f64>, beta: &DMatrix<f64>) -> FourTensor {
    let n = alpha.nrows();
    let mut t = FourTensor::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = 0.5 * (alpha[(i, l)] * beta[(j, k)] + alpha[(j, k)] * beta[(i, l)])
                        - 0.5 * (alpha[(i, k)] * beta[(j, l)] + alpha[(j, l)] * beta[(i, k)]);
                    t.set(i, j, k, l, v);
                }
            }
        }
    }
    t
}

/// Tolerance on the normalized curvature-symmetry residual accepted by
/// [`pack_curvature_operator`].
pub const PACK_SYMMETRY_TOL: f64 = 1e-7;

/// Packs a (0,4) curvature tensor into the wedge-basis bilinear form, arranged
/// so that `form(u ∧ v, u ∧ v) = R(u, v, v, u)`.
pub fn pack_curvature_operator(
    r: &FourTensor,
    g: &DMatrix<f64>,
    point: &[f64],
) -> Result<CurvatureOperator> {
    let residual = r.curvature_symmetry_residual();
    if residual > PACK_SYMMETRY_TOL {
        return Err(GeomError::Consistency(format!(
            "curvature symmetry residual {residual:.3e} above {PACK_SYMMETRY_TOL:.1e}"
        )));
    }
    let basis = WedgeBasis::new(r.n);
    let m = basis.len();
    let mut matrix = DMatrix::zeros(m, m);
    for (a, &(i, j)) in basis.pairs.iter().enumerate() {
        for (b, &(k, l)) in basis.pairs.iter().enumerate() {
            matrix[(a, b)] = r.get(i, j, l, k);
        }
    }
    let gram = basis.gram(g);
    if gram.clone().cholesky().is_none() {
        return Err(GeomError::Degeneracy(
            "metric induces a non positive definite wedge Gram matrix".into(),
        ));
    }
    Ok(CurvatureOperator {
        point: point.to_vec(),
        basis,
        matrix,
        gram,
    })
}

/// Recovers `R(u, v, v, u)` from a packed operator: the plane quadratic form.
pub fn unpack_plane_value(op: &CurvatureOperator, u: &[f64], v: &[f64]) -> f64 {
    op.plane_form(u, v)
}

/// Gram–Schmidt orthonormalization with respect to the inner product `g`.
/// Keeps the flag/span structure of the input list.
pub fn gram_schmidt(vectors: &[Vec<f64>], g: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
    let n = g.nrows();
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += g[(i, j)] * u[i] * v[j];
            }
        }
        acc
    };
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.len() != n {
            return Err(GeomError::DimensionMismatch(
                "gram_schmidt: vector dimension differs from metric".into(),
            ));
        }
        let mut w = v.clone();
        // two rounds of projection for numerical orthogonality
        for _ in 0..2 {
            for e in &out {
                let c = inner(&w, e);
                for i in 0..n {
                    w[i] -= c * e[i];
                }
            }
        }
        let norm_sq = inner(&w, &w);
        if norm_sq < 1e-20 {
            return Err(GeomError::Degeneracy(
                "gram_schmidt: rank-deficient input".into(),
            ));
        }
        let inv = 1.0 / norm_sq.sqrt();
        for x in &mut w {
            *x *= inv;
        }
        out.push(w);
    }
    Ok(out)
}

/// Orthonormalizes the tangent-vector API variant.
pub fn gram_schmidt_vectors(
    vectors: &[TangentVector],
    g: &TwoTensor,
) -> Result<Vec<TangentVector>> {
    let raw: Vec<Vec<f64>> = vectors.iter().map(|v| v.components.clone()).collect();
    let on = gram_schmidt(&raw, &g.entries)?;
    Ok(vectors
        .iter()
        .zip(on)
        .map(|(v, c)| TangentVector {
            chart: v.chart.clone(),
            point: v.point.clone(),
            components: c,
        })
        .collect())
}

/// Sampled C0 norm of a two-tensor field against a background metric: the
/// supremum over sample points of the largest generalized eigenvalue modulus
/// of the pair `(h, g0)`. A lower bound for the true supremum norm.
pub fn c0_norm(h: &TensorField, g0: &MetricField, samples: &[Vec<f64>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(GeomError::Input("c0_norm: empty sample set".into()));
    }
    let mut sup = 0.0f64;
    for x in samples {
        let hm = h.eval(x);
        let gm = g0.eval(x);
        if gm.clone().cholesky().is_none() {
            return Err(GeomError::Degeneracy(format!(
                "c0_norm: background metric not positive definite at {x:?}"
            )));
        }
        let hm = 0.5 * (&hm + hm.transpose());
        let eigs = generalized_eigenvalues(&hm, &gm)?;
        for e in eigs {
            sup = sup.max(e.abs());
        }
    }
    Ok(sup)
}

/// Direction set used for the covariant-derivative part of [`c1_norm`].
fn direction_set(n: usize) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        dirs.push(e);
    }
    dirs.extend(crate::sampling::unit_sphere_lattice(n, 4 * n * n));
    dirs
}

/// Sampled C1 norm: the maximum of [`c0_norm`] and the sampled supremum of
/// `|(∇_w h)(u, u)| / (g0(u, u) ‖w‖)`, with the covariant derivative taken in
/// the background metric `g0`.
pub fn c1_norm(h: &TensorField, g0: &MetricField, samples: &[Vec<f64>]) -> Result<f64> {
    let mut sup = c0_norm(h, g0, samples)?;
    let n = g0.dim();
    let dirs = direction_set(n);
    for x in samples {
        let gm = g0.eval(x);
        let gamma = crate::calculus::christoffel(g0, x)?;
        let jets = h.eval_jets(x);
        for w in &dirs {
            // (∇_w h)_ij = w^k ∂_k h_ij - w^k Γ^l_{ki} h_lj - w^k Γ^l_{kj} h_il
            let mut nabla = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for k in 0..n {
                        let mut dh = jets[i * n + j].grad_get(k);
                        for l in 0..n {
                            dh -= gamma.get(l, k, i) * jets[l * n + j].val;
                            dh -= gamma.get(l, k, j) * jets[i * n + l].val;
                        }
                        acc += w[k] * dh;
                    }
                    nabla[(i, j)] = acc;
                }
            }
            let nabla = 0.5 * (&nabla + nabla.transpose());
            let mut wnorm_sq = 0.0;
            for i in 0..n {
                for j in 0..n {
                    wnorm_sq += gm[(i, j)] * w[i] * w[j];
                }
            }
            let eigs = generalized_eigenvalues(&nabla, &gm)?;
            for e in eigs {
                sup = sup.max(e.abs() / wnorm_sq.sqrt());
            }
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_index_is_lexicographic() {
        let b = WedgeBasis::new(4);
        assert_eq!(b.pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for (idx, &(i, j)) in b.pairs.iter().enumerate() {
            assert_eq!(b.index(i, j), idx);
        }
    }

    #[test]
    fn kn_identity_on_orthonormal_pairs() {
        let g = DMatrix::identity(3, 3);
        let e1 = vec![1.0, 0.0, 0.0];
        let e2 = vec![0.0, 1.0, 0.0];
        assert_eq!(kn_apply(&g, &g, &e1, &e2, &e2, &e1), 1.0);
        assert_eq!(kn_apply(&g, &g, &e1, &e2, &e1, &e2), -1.0);
    }

    #[test]
    fn gg_packs_to_identity_operator() {
        let g = DMatrix::identity(3, 3);
        let r = kn_four_tensor(&g, &g);
        let op = pack_curvature_operator(&r, &g, &[0.0; 3]).unwrap();
        assert!((op.matrix.clone() - DMatrix::identity(3, 3)).amax() < 1e-14);
        assert!((op.gram.clone() - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn gram_schmidt_two_dim() {
        let g = DMatrix::identity(2, 2);
        let vs = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let on = gram_schmidt(&vs, &g).unwrap();
        assert!((on[0][0] - 1.0).abs() < 1e-14);
        assert!(on[0][1].abs() < 1e-14);
        assert!(on[1][0].abs() < 1e-13);
        assert!((on[1][1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gram_schmidt_rejects_dependent_input() {
        let g = DMatrix::identity(2, 2);
        let vs = vec![vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(gram_schmidt(&vs, &g).is_err());
    }
}

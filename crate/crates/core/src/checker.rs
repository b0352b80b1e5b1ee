//! Positivity criteria for intermediate Ricci sums of block-structured
//! operators on bivectors, together with the independent frame-search oracle.
//!
//! The block-eigenvalue enumeration gives a combinatorial lower bound for
//! frame sums; the oracle minimizes the same sums directly over orthonormal
//! frames. Soundness tests require the two to agree, and the verdict type
//! reports both routes side by side.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::frames::{self, FrameSearchConfig};
use crate::tensor::{CurvatureOperator, WedgeBasis};

/// Eigenvalue data of a self-adjoint operator whose eigenspaces are the
/// wedge blocks `V_i ∧ V_j` of an orthogonal splitting `V₁ ⊕ V₂ ⊕ V₃`.
#[derive(Clone, Debug, Serialize)]
pub struct BlockSpectrum {
    pub dims: [usize; 3],
    /// `lambda[i][j]`, symmetric.
    pub lambda: [[f64; 3]; 3],
}

impl BlockSpectrum {
    pub fn new(dims: [usize; 3], lambda: [[f64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                if lambda[i][j] != lambda[j][i] {
                    return Err(GeomError::Input(
                        "block spectrum must be symmetric in (i, j)".into(),
                    ));
                }
            }
        }
        Ok(BlockSpectrum { dims, lambda })
    }

    pub fn two_block(b: usize, d2: usize, l11: f64, l12: f64, l22: f64) -> Self {
        BlockSpectrum {
            dims: [b, d2, 0],
            lambda: [[l11, l12, 0.0], [l12, l22, 0.0], [0.0, 0.0, 0.0]],
        }
    }

    pub fn n(&self) -> usize {
        self.dims.iter().sum()
    }

    fn class_of(&self, coord: usize) -> usize {
        if coord < self.dims[0] {
            0
        } else if coord < self.dims[0] + self.dims[1] {
            1
        } else {
            2
        }
    }

    /// Assembles the operator on the lexicographic wedge basis of Rⁿ with the
    /// coordinate splitting; coordinate bivectors are eigenvectors.
    pub fn assemble(&self) -> DMatrix<f64> {
        let n = self.n();
        let basis = WedgeBasis::new(n);
        let mut m = DMatrix::zeros(basis.len(), basis.len());
        for (a, &(p, q)) in basis.pairs.iter().enumerate() {
            m[(a, a)] = self.lambda[self.class_of(p)][self.class_of(q)];
        }
        m
    }
}

/// Witness of a failed enumeration case.
#[derive(Clone, Debug, Serialize)]
pub struct RwWitness {
    pub i: usize,
    pub counts: [usize; 3],
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RwDecision {
    pub holds: bool,
    /// Minimum of the linear form over all admissible count tuples
    /// (infinite when the enumeration is vacuous).
    pub min_form: f64,
    pub witness: Option<RwWitness>,
}

/// Block-eigenvalue enumeration: for every axis class `i` and every
/// admissible distribution of the k frame vectors over the blocks, the
/// weighted eigenvalue sum must exceed `c`.
pub fn reiser_wraith_bound(spec: &BlockSpectrum, k: usize, c: f64) -> Result<RwDecision> {
    let n = spec.n();
    if k < 1 || k > n.saturating_sub(1) {
        return Err(GeomError::Input(format!(
            "reiser_wraith: k = {k} out of range 1..={}",
            n - 1
        )));
    }
    let mut min_form = f64::INFINITY;
    let mut witness = None;
    for i in 0..3 {
        if spec.dims[i] == 0 {
            continue; // the axis vector cannot live in an empty block
        }
        let cap = |j: usize| -> usize {
            if j == i {
                spec.dims[i] - 1
            } else {
                spec.dims[j]
            }
        };
        for n0 in 0..=cap(0).min(k) {
            for n1 in 0..=cap(1).min(k - n0) {
                let n2 = k - n0 - n1;
                if n2 > cap(2) {
                    continue;
                }
                let counts = [n0, n1, n2];
                let value: f64 = (0..3)
                    .map(|j| counts[j] as f64 * spec.lambda[i][j])
                    .sum();
                if value < min_form {
                    min_form = value;
                    witness = Some(RwWitness { i, counts, value });
                }
            }
        }
    }
    let holds = min_form > c;
    Ok(RwDecision {
        holds,
        min_form,
        witness: if holds { None } else { witness },
    })
}

/// The two-block positivity criterion in context: `λ₁₂ > 0`,
/// `(b-1) λ₁₁ + λ₁₂ > 0`, and `|λ₂₂| < ε / dim(V)`, which together force
/// every frame sum above `-ε` for all `k ≥ b`.
pub fn rw_contextual(
    l11: f64,
    l12: f64,
    l22: f64,
    b: usize,
    k: usize,
    dim_v: usize,
    epsilon: f64,
) -> Result<bool> {
    if k < b {
        return Err(GeomError::Input(format!(
            "rw_contextual requires k >= b, got k = {k}, b = {b}"
        )));
    }
    if dim_v <= b {
        return Err(GeomError::Input(
            "rw_contextual: dim(V) must exceed dim(V1) = b".into(),
        ));
    }
    let delta = epsilon / dim_v as f64;
    Ok(l12 > 0.0 && (b as f64 - 1.0) * l11 + l12 > 0.0 && l22.abs() < delta)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormCheck {
    pub holds: bool,
    pub spectral_norm: f64,
}

/// All-blocks-small criterion: if all three eigenvalue families are below
/// `δ` in modulus, the assembled operator has norm at most `δ`; the spectral
/// norm is computed explicitly as the verification.
pub fn operator_norm_from_blocks(
    l11: f64,
    l12: f64,
    l22: f64,
    delta: f64,
    dims: (usize, usize),
) -> NormCheck {
    let spec = BlockSpectrum::two_block(dims.0, dims.1, l11, l12, l22);
    let m = spec.assemble();
    let spectral_norm = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, e| acc.max(e.abs()));
    let holds = l11.abs() < delta && l12.abs() < delta && l22.abs() < delta;
    NormCheck {
        holds,
        spectral_norm,
    }
}

/// Seeded frame-search minimum of `Σ_i ⟨A(u ∧ v_i), u ∧ v_i⟩` over
/// orthonormal (k+1)-frames. Reduces by the Gram structure first, so it
/// accepts operators stored against any positive-definite wedge Gram.
pub fn brute_force_sum_min(
    op: &CurvatureOperator,
    k: usize,
    cfg: &FrameSearchConfig,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let n = op.basis.dim;
    if k < 1 || k > n - 1 {
        return Err(GeomError::Input(format!(
            "brute_force_sum_min: k = {k} out of range 1..={}",
            n - 1
        )));
    }
    // recover the point metric from the wedge Gram is not possible in
    // general; operators produced by this crate either carry the identity
    // Gram (adapted orthonormal bases) or are reduced upstream.
    let gram_dev = (op.gram.clone() - DMatrix::identity(op.gram.nrows(), op.gram.ncols())).amax();
    if gram_dev > 1e-9 {
        return Err(GeomError::Input(
            "brute_force_sum_min expects an orthonormal wedge basis (identity Gram)".into(),
        ));
    }
    let (min, frame) = frames::sum_min(&op.matrix, n, k, cfg);
    Ok((
        min,
        frame
            .into_iter()
            .map(|v| v.iter().copied().collect())
            .collect(),
    ))
}

/// Which hypothesis branch of the verification lemma applied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum HypothesisBranch {
    RwSum,
    AllSmall,
    NotApplicable,
}

/// Block bounds extracted from an operator difference on an adapted
/// orthonormal wedge basis (first `b` coordinates horizontal).
#[derive(Clone, Debug, Serialize)]
pub struct DeltaBlocks {
    /// Spectral norm of the image of the V∧V wedge block.
    pub vv_image_norm: f64,
    /// Off-block leakage of H∧H inputs into (H∧V) ⊕ (V∧V).
    pub hh_offblock: f64,
    /// Off-block leakage of H∧V inputs into (H∧H) ⊕ (V∧V).
    pub hv_offblock: f64,
    /// Minimum of the quadratic form on the H∧H block.
    pub hh_quadform_min: f64,
    /// Minimum of the quadratic form over decomposable mixed planes.
    pub hv_quadform_min: f64,
}

fn wedge_classes(basis: &WedgeBasis, b: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut hh = Vec::new();
    let mut hv = Vec::new();
    let mut vv = Vec::new();
    for (idx, &(p, q)) in basis.pairs.iter().enumerate() {
        match ((p < b) as usize) + ((q < b) as usize) {
            2 => hh.push(idx),
            1 => hv.push(idx),
            _ => vv.push(idx),
        }
    }
    (hh, hv, vv)
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values[0]
}

/// Extracts the block bounds of an operator difference. `op` must be stored
/// against an adapted orthonormal wedge basis with the first `b` frame
/// vectors horizontal.
pub fn delta_blocks(op: &CurvatureOperator, b: usize) -> DeltaBlocks {
    let n = op.basis.dim;
    let m = &op.matrix;
    let (hh, hv, vv) = wedge_classes(&op.basis, b);

    let all: Vec<usize> = (0..op.basis.len()).collect();
    let vv_image_norm = spectral_norm(&submatrix(m, &all, &vv));

    let mut rows_not_hh: Vec<usize> = hv.clone();
    rows_not_hh.extend(&vv);
    let hh_offblock = spectral_norm(&submatrix(m, &rows_not_hh, &hh));

    let mut rows_not_hv: Vec<usize> = hh.clone();
    rows_not_hv.extend(&vv);
    let hv_offblock = spectral_norm(&submatrix(m, &rows_not_hv, &hv));

    let hh_block = submatrix(m, &hh, &hh);
    let hh_quadform_min = if hh.is_empty() {
        f64::INFINITY
    } else {
        let sym = 0.5 * (&hh_block + hh_block.transpose());
        sym.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, e| a.min(*e))
    };

    // decomposable mixed planes X ∧ V, X horizontal unit, V vertical unit
    let mut hv_quadform_min = f64::INFINITY;
    let h_dirs = crate::sampling::unit_sphere_lattice(b, 48.max(4 * b));
    let v_dirs = crate::sampling::unit_sphere_lattice(n - b, 48.max(4 * (n - b)));
    let basis = &op.basis;
    for xh in &h_dirs {
        let mut x = vec![0.0; n];
        x[..b].copy_from_slice(xh);
        for vv_dir in &v_dirs {
            let mut v = vec![0.0; n];
            v[b..].copy_from_slice(vv_dir);
            let w = basis.wedge(&x, &v);
            let val = (w.transpose() * m * &w)[(0, 0)];
            hv_quadform_min = hv_quadform_min.min(val);
        }
    }

    DeltaBlocks {
        vv_image_norm,
        hh_offblock,
        hv_offblock,
        hh_quadform_min,
        hv_quadform_min,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaRicVerdict {
    pub branch: HypothesisBranch,
    pub blocks: DeltaBlocks,
    pub delta_used: f64,
    /// Conclusion of the hypothesis path: frame sums exceed `-epsilon`.
    pub hypothesis_concludes: bool,
    pub oracle_min: f64,
    pub oracle_confirms: bool,
    pub agree: bool,
}

/// Verifies `𝔇 ric_k > -ε` along two independent paths: the block-bound
/// hypothesis route (off-block smallness plus either the sum condition or
/// all-small eigenvalue bounds), and the direct frame-search oracle. The
/// verdict records both and flags disagreement.
///
/// The working `δ` mirrors the ε/2-splitting of the lemma's proof: half the
/// budget is spent on off-block leakage over the k summands (with a factor 6
/// for the cross terms of a wedge split into three block components), half on
/// the block-eigenvalue conclusion.
pub fn verify_delta_ric(
    op: &CurvatureOperator,
    b: usize,
    k: usize,
    epsilon: f64,
    lambda_hh: f64,
    lambda_hv: f64,
    cfg: &FrameSearchConfig,
) -> Result<DeltaRicVerdict> {
    if k < b {
        return Err(GeomError::Input(format!(
            "verify_delta_ric requires k >= b = {b}, got k = {k}"
        )));
    }
    let blocks = delta_blocks(op, b);
    let delta = epsilon / (12.0 * k as f64);

    let bounds_ok = blocks.vv_image_norm < delta
        && blocks.hh_offblock < delta + blocks_hh_allowance(&blocks)
        && blocks.hv_offblock < delta + blocks_hv_allowance(&blocks);
    // the λ hypotheses must actually hold for the observed operator
    let lambda_valid =
        blocks.hh_quadform_min >= lambda_hh - 1e-9 && blocks.hv_quadform_min >= lambda_hv - 1e-9;

    let rw_branch = lambda_hv > 0.0 && (b as f64 - 1.0) * lambda_hh + lambda_hv > 0.0;
    let small_branch = lambda_hh.abs() < delta && lambda_hv.abs() < delta;

    let (branch, hypothesis_concludes) = if bounds_ok && lambda_valid && rw_branch {
        (HypothesisBranch::RwSum, true)
    } else if bounds_ok && lambda_valid && small_branch {
        (HypothesisBranch::AllSmall, true)
    } else {
        (HypothesisBranch::NotApplicable, false)
    };

    let (oracle_min, _) = brute_force_sum_min(op, k, cfg)?;
    let oracle_confirms = oracle_min > -epsilon;
    let agree = !hypothesis_concludes || oracle_confirms;

    Ok(DeltaRicVerdict {
        branch,
        blocks,
        delta_used: delta,
        hypothesis_concludes,
        oracle_min,
        oracle_confirms,
        agree,
    })
}

// The off-block norms of H∧H and H∧V inputs include the diagonal-block
// content scaled by the large eigenvalue bounds; what the lemma constrains
// is only the leakage into the *other* classes, which is what the submatrix
// norms measure. No extra allowance is currently granted.
fn blocks_hh_allowance(_b: &DeltaBlocks) -> f64 {
    0.0
}

fn blocks_hv_allowance(_b: &DeltaBlocks) -> f64 {
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::WedgeBasis;

    fn operator_from_matrix(m: DMatrix<f64>, n: usize) -> CurvatureOperator {
        CurvatureOperator {
            point: vec![0.0; n],
            basis: WedgeBasis::new(n),
            gram: DMatrix::identity(m.nrows(), m.ncols()),
            matrix: m,
        }
    }

    #[test]
    fn rw_all_zero_holds_for_negative_bound() {
        let spec = BlockSpectrum::two_block(2, 2, 0.0, 0.0, 0.0);
        let d = reiser_wraith_bound(&spec, 2, -0.1).unwrap();
        assert!(d.holds);
    }

    #[test]
    fn rw_example_positive_case() {
        // dims (2,2,0), k = 2: minimum 2 at i = 1, counts (1,1,0)
        let spec = BlockSpectrum::two_block(2, 2, -1.0, 3.0, 0.0);
        let d = reiser_wraith_bound(&spec, 2, 0.0).unwrap();
        assert!(d.holds);
        assert!((d.min_form - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rw_example_negative_case_with_witness() {
        let spec = BlockSpectrum::two_block(2, 2, -4.0, 3.0, 0.0);
        let d = reiser_wraith_bound(&spec, 2, 0.0).unwrap();
        assert!(!d.holds);
        let w = d.witness.unwrap();
        assert_eq!(w.i, 0);
        assert_eq!(w.counts, [1, 1, 0]);
        assert!((w.value - (-1.0)).abs() < 1e-14);
    }

    #[test]
    fn rw_contextual_examples() {
        assert!(rw_contextual(-1.0, 3.0, 0.0, 2, 2, 4, 0.1).unwrap());
        assert!(!rw_contextual(-1.0, 0.0, 0.0, 2, 2, 4, 0.1).unwrap());
        assert!(rw_contextual(-1.0, 3.0, 0.0, 2, 1, 4, 0.1).is_err());
    }

    #[test]
    fn norm_check_examples() {
        let c = operator_norm_from_blocks(0.0, 0.0, 0.0, 0.5, (2, 2));
        assert!(c.holds);
        assert_eq!(c.spectral_norm, 0.0);
        let c = operator_norm_from_blocks(0.25, 0.25, 0.25, 0.5, (2, 2));
        assert!(c.holds);
        assert!((c.spectral_norm - 0.25).abs() < 1e-12);
        assert!(c.spectral_norm <= 0.5);
    }

    #[test]
    fn norm_bound_on_random_unit_bivectors() {
        use rand::Rng;
        let delta = 0.3;
        let spec = BlockSpectrum::two_block(2, 2, 0.2, -0.25, 0.1);
        let m = spec.assemble();
        let basis = WedgeBasis::new(4);
        let mut rng = crate::sampling::rng(17);
        for _ in 0..200 {
            let mut xi = nalgebra::DVector::from_fn(basis.len(), |_, _| rng.gen_range(-1.0..1.0));
            xi /= xi.norm();
            let val = (xi.transpose() * &m * &xi)[(0, 0)];
            assert!(val.abs() <= delta + 1e-12);
        }
    }

    #[test]
    fn brute_force_identity_and_zero() {
        let id = operator_from_matrix(DMatrix::identity(6, 6), 4);
        let cfg = FrameSearchConfig::quick(23);
        for k in 1..=3 {
            let (min, _) = brute_force_sum_min(&id, k, &cfg).unwrap();
            assert!((min - k as f64).abs() < 1e-8, "k={k}: {min}");
        }
        let zero = operator_from_matrix(DMatrix::zeros(3, 3), 3);
        let (min, _) = brute_force_sum_min(&zero, 1, &cfg).unwrap();
        assert!(min.abs() < 1e-12);
    }

    #[test]
    fn lemma_block_example_minimum_is_two() {
        let spec = BlockSpectrum::two_block(2, 2, -1.0, 3.0, 0.0);
        let op = operator_from_matrix(spec.assemble(), 4);
        let cfg = FrameSearchConfig::seeded(31);
        let (min, _) = brute_force_sum_min(&op, 2, &cfg).unwrap();
        assert!((min - 2.0).abs() < 1e-6, "{min}");
    }

    #[test]
    fn verify_delta_ric_zero_operator() {
        let op = operator_from_matrix(DMatrix::zeros(3, 3), 3);
        let cfg = FrameSearchConfig::quick(3);
        let v = verify_delta_ric(&op, 2, 2, 0.1, 0.0, 0.0, &cfg).unwrap();
        assert_eq!(v.branch, HypothesisBranch::AllSmall);
        assert!(v.hypothesis_concludes);
        assert!(v.oracle_confirms);
        assert!(v.agree);
    }

    #[test]
    fn verify_delta_ric_model_operator() {
        // model operator: λ_hh on H∧H, λ_hv on H∧V, 0 on V∧V; dims (2,2)
        let spec = BlockSpectrum::two_block(2, 2, -1.0, 3.0, 0.0);
        let op = operator_from_matrix(spec.assemble(), 4);
        let cfg = FrameSearchConfig::seeded(7);
        let v = verify_delta_ric(&op, 2, 2, 0.5, -1.0, 3.0, &cfg).unwrap();
        assert_eq!(v.branch, HypothesisBranch::RwSum);
        assert!(v.hypothesis_concludes);
        assert!((v.oracle_min - 2.0).abs() < 1e-6, "{}", v.oracle_min);
        assert!(v.agree);
    }

    #[test]
    fn monotonicity_of_rw_bound() {
        use rand::Rng;
        let mut rng = crate::sampling::rng(5);
        for _ in 0..50 {
            let l11 = rng.gen_range(-2.0..2.0);
            let l12 = rng.gen_range(-2.0..2.0);
            let l22 = rng.gen_range(-2.0..2.0);
            let spec = BlockSpectrum::two_block(2, 2, l11, l12, l22);
            let d = reiser_wraith_bound(&spec, 2, 0.0).unwrap();
            if d.holds {
                // increasing any eigenvalue keeps it true
                let bumped = BlockSpectrum::two_block(2, 2, l11 + 0.5, l12, l22);
                assert!(reiser_wraith_bound(&bumped, 2, 0.0).unwrap().holds);
                let bumped = BlockSpectrum::two_block(2, 2, l11, l12 + 0.5, l22);
                assert!(reiser_wraith_bound(&bumped, 2, 0.0).unwrap().holds);
            }
        }
    }
}

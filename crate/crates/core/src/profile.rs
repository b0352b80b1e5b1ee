//! Certified one-dimensional profiles and the distance-composed bump
//! functions built from them.
//!
//! Profiles are C² piecewise polynomials, so every bound is certified by
//! exact polynomial extrema (companion-matrix roots of the derivative), not
//! by sampling. The construction follows the double-integral-of-a-plateau
//! scheme glued against a quintic cutoff, with one addition: a slope-release
//! bump subtracted from the integrand inside `(ν, η)`. Without it the
//! integrated slope survives until the gluing band and the second-derivative
//! window `(-ε, C]` is unattainable for `τ` anywhere near its upper bound;
//! the release keeps the window valid across the full stated parameter range.

use std::sync::Arc;

use serde::Serialize;

use crate::calculus::{gradient, hessian, ScalarField};
use crate::error::{GeomError, Result};
use crate::jet::Jet;
use crate::models::{fundamental_tensors, ManifoldModel, SubmersionModel};
use crate::sampling;

// ---------------------------------------------------------------------------
// polynomials and piecewise polynomials
// ---------------------------------------------------------------------------

/// Dense polynomial in a local variable, lowest degree first.
#[derive(Clone, Debug, Default)]
pub struct Poly {
    pub c: Vec<f64>,
}

impl Poly {
    pub fn constant(v: f64) -> Poly {
        Poly { c: vec![v] }
    }

    pub fn eval012(&self, u: f64) -> (f64, f64, f64) {
        let mut v = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for &ck in self.c.iter().rev() {
            d2 = d2 * u + 2.0 * d1;
            d1 = d1 * u + v;
            v = v * u + ck;
        }
        (v, d1, d2)
    }

    pub fn value(&self, u: f64) -> f64 {
        self.eval012(u).0
    }

    pub fn derivative(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly {
            c: self
                .c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, ck)| ck * k as f64)
                .collect(),
        }
    }

    /// Antiderivative vanishing at u = 0.
    pub fn antiderivative(&self) -> Poly {
        let mut c = vec![0.0];
        c.extend(
            self.c
                .iter()
                .enumerate()
                .map(|(k, ck)| ck / (k as f64 + 1.0)),
        );
        Poly { c }
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly {
            c: self.c.iter().map(|ck| ck * s).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.c.len().max(other.c.len());
        let mut c = vec![0.0; n];
        for (k, ck) in self.c.iter().enumerate() {
            c[k] += ck;
        }
        for (k, ck) in other.c.iter().enumerate() {
            c[k] += ck;
        }
        Poly { c }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut c = vec![0.0; self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in other.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly { c }
    }

    /// Composition with a translation: returns q(u) = p(u + delta).
    pub fn translate(&self, delta: f64) -> Poly {
        let d = self.c.len();
        let mut c = vec![0.0; d];
        for (m, cm) in self.c.iter().enumerate() {
            let mut binom = 1.0;
            let mut pow = 1.0;
            // k = m down to 0: C(m, k) delta^{m-k}
            for k in (0..=m).rev() {
                c[k] += cm * binom * pow;
                if k > 0 {
                    binom = binom * k as f64 / (m - k + 1) as f64;
                    pow *= delta;
                }
            }
        }
        Poly { c }
    }

    /// Composition with a scaling: returns q(u) = p(u / w).
    pub fn stretch(&self, w: f64) -> Poly {
        Poly {
            c: self
                .c
                .iter()
                .enumerate()
                .map(|(k, ck)| ck / w.powi(k as i32))
                .collect(),
        }
    }

    fn trimmed(&self) -> &[f64] {
        let scale = self.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut d = self.c.len();
        while d > 1 && self.c[d - 1].abs() <= 1e-14 * scale.max(1e-300) {
            d -= 1;
        }
        &self.c[..d]
    }

    /// Real roots in the open interval (0, w) via the companion matrix.
    pub fn roots_in(&self, w: f64) -> Vec<f64> {
        let c = self.trimmed();
        let d = c.len() - 1;
        if d == 0 {
            return Vec::new();
        }
        if d == 1 {
            let r = -c[0] / c[1];
            return if r > 0.0 && r < w { vec![r] } else { Vec::new() };
        }
        let lead = c[d];
        let mut m = nalgebra::DMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, d - 1)] = -c[i] / lead;
            if i + 1 < d {
                m[(i + 1, i)] = 1.0;
            }
        }
        let eig = m.complex_eigenvalues();
        let mut out = Vec::new();
        for e in eig.iter() {
            if e.im.abs() < 1e-7 * (1.0 + e.re.abs()) && e.re > 0.0 && e.re < w {
                out.push(e.re);
            }
        }
        out
    }

    /// Rigorous floating-point evaluation-noise radius on `[0, w]`:
    /// a standard Horner error bound from the coefficient norms.
    pub fn noise(&self, w: f64) -> f64 {
        let mut acc = 0.0;
        let mut pw = 1.0;
        for ck in &self.c {
            acc += ck.abs() * pw;
            pw *= w.abs();
        }
        (2 * self.c.len() + 4) as f64 * f64::EPSILON * acc
    }

    /// Exact (inf, sup) over `[lo, hi] ⊆ [0, w]` of the local interval.
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        let mut consider = |u: f64| {
            let v = self.value(u);
            inf = inf.min(v);
            sup = sup.max(v);
        };
        consider(lo);
        consider(hi);
        for r in self.derivative().roots_in(hi.max(lo) + (hi - lo).abs() + 1e-300) {
            if r >= lo && r <= hi {
                consider(r);
            }
        }
        (inf, sup)
    }
}

/// Piecewise polynomial on consecutive knot intervals; identically zero
/// outside its coverage. Pieces are stored in local coordinates
/// `u = t - left_knot`.
#[derive(Clone, Debug, Default)]
pub struct Piecewise {
    pub knots: Vec<f64>,
    pub polys: Vec<Poly>,
}

impl Piecewise {
    pub fn coverage(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    fn piece_index(&self, t: f64) -> Option<usize> {
        let (lo, hi) = self.coverage();
        if t < lo || t > hi {
            return None;
        }
        let mut i = self.knots.partition_point(|k| *k <= t);
        if i == 0 {
            i = 1;
        }
        Some((i - 1).min(self.polys.len() - 1))
    }

    pub fn eval012(&self, t: f64) -> (f64, f64, f64) {
        match self.piece_index(t) {
            None => (0.0, 0.0, 0.0),
            Some(i) => self.polys[i].eval012(t - self.knots[i]),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval012(t).0
    }

    pub fn derivative(&self) -> Piecewise {
        Piecewise {
            knots: self.knots.clone(),
            polys: self.polys.iter().map(|p| p.derivative()).collect(),
        }
    }

    /// Antiderivative vanishing at the left end of the coverage.
    pub fn antiderivative(&self) -> Piecewise {
        let mut polys = Vec::with_capacity(self.polys.len());
        let mut acc = 0.0;
        for (i, p) in self.polys.iter().enumerate() {
            let mut ap = p.antiderivative();
            ap.c[0] += acc;
            let width = self.knots[i + 1] - self.knots[i];
            acc = ap.value(width);
            polys.push(ap);
        }
        Piecewise {
            knots: self.knots.clone(),
            polys,
        }
    }

    pub fn sub_const(&self, c: f64) -> Piecewise {
        let mut out = self.clone();
        for p in &mut out.polys {
            if p.c.is_empty() {
                p.c.push(-c);
            } else {
                p.c[0] -= c;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Piecewise {
        Piecewise {
            knots: self.knots.clone(),
            polys: self.polys.iter().map(|p| p.scale(s)).collect(),
        }
    }

    /// Extends coverage with zero pieces.
    pub fn extend_coverage(&self, lo: f64, hi: f64) -> Piecewise {
        let mut out = self.clone();
        if lo < out.knots[0] {
            out.knots.insert(0, lo);
            out.polys.insert(0, Poly::constant(0.0));
        }
        if hi > *out.knots.last().unwrap() {
            out.knots.push(hi);
            out.polys.push(Poly::constant(0.0));
        }
        out
    }

    fn local_poly_on(&self, lo: f64, hi: f64) -> Poly {
        // polynomial of this function on [lo, hi] in local coords u = t - lo,
        // assuming [lo, hi] does not straddle a knot
        let mid = 0.5 * (lo + hi);
        match self.piece_index(mid) {
            None => Poly::constant(0.0),
            Some(i) => self.polys[i].translate(lo - self.knots[i]),
        }
    }

    fn combine(&self, other: &Piecewise, multiply: bool) -> Piecewise {
        let (alo, ahi) = self.coverage();
        let (blo, bhi) = other.coverage();
        let (lo, hi) = if multiply {
            (alo.max(blo), ahi.min(bhi))
        } else {
            (alo.min(blo), ahi.max(bhi))
        };
        let mut knots: Vec<f64> = self
            .knots
            .iter()
            .chain(other.knots.iter())
            .copied()
            .filter(|k| *k >= lo && *k <= hi)
            .collect();
        knots.push(lo);
        knots.push(hi);
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // knots live on wildly different scales; merge only relative duplicates
        knots.dedup_by(|a, b| (*a - *b).abs() <= 2.0 * f64::EPSILON * a.abs().max(b.abs()));
        let mut polys = Vec::with_capacity(knots.len() - 1);
        for w in knots.windows(2) {
            let pa = self.local_poly_on(w[0], w[1]);
            let pb = other.local_poly_on(w[0], w[1]);
            polys.push(if multiply { pa.mul(&pb) } else { pa.add(&pb) });
        }
        Piecewise { knots, polys }
    }

    pub fn add(&self, other: &Piecewise) -> Piecewise {
        self.combine(other, false)
    }

    /// Pointwise product over the intersection of coverages.
    pub fn mul(&self, other: &Piecewise) -> Piecewise {
        self.combine(other, true)
    }

    /// Exact (inf, sup) of the function over `[lo, hi]` (clipped to coverage;
    /// includes 0 if the window reaches outside the coverage).
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (clo, chi) = self.coverage();
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        if lo < clo || hi > chi {
            inf = 0.0;
            sup = 0.0;
        }
        for i in 0..self.polys.len() {
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            let (plo, phi) = (a.max(lo), b.min(hi));
            if plo >= phi {
                continue;
            }
            let (pinf, psup) = self.polys[i].range_on(plo - a, phi - a);
            inf = inf.min(pinf);
            sup = sup.max(psup);
        }
        if inf > sup {
            (0.0, 0.0)
        } else {
            (inf, sup)
        }
    }

    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let (inf, sup) = self.range_on(lo, hi);
        inf.abs().max(sup.abs())
    }

    /// Largest evaluation-noise radius among the pieces meeting `[lo, hi]`.
    pub fn noise_bound(&self, lo: f64, hi: f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.polys.len() {
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            if a.max(lo) < b.min(hi) {
                worst = worst.max(self.polys[i].noise(b - a));
            }
        }
        worst
    }
}

fn smoothstep() -> Poly {
    // 10 s³ - 15 s⁴ + 6 s⁵ : C² ramp from (0,0) to (1,1)
    Poly {
        c: vec![0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
    }
}

// ---------------------------------------------------------------------------
// certificates
// ---------------------------------------------------------------------------

/// One machine-checked bound: the construction fails loudly if any margin is
/// non-positive.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub name: String,
    pub constraint: String,
    pub worst: f64,
    pub margin: f64,
    pub samples: String,
}

impl Certificate {
    pub fn pass(&self) -> bool {
        self.margin > 0.0
    }
}

pub fn check_certificates(certs: &[Certificate]) -> Result<()> {
    for c in certs {
        if !c.pass() {
            return Err(GeomError::Construction(format!(
                "certificate `{}` failed: {} (worst {:.6e}, margin {:.3e}; samples {})",
                c.name, c.constraint, c.worst, c.margin, c.samples
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// cutoff
// ---------------------------------------------------------------------------

/// C² cutoff: 1 on [-η, η], 0 outside [-2η, 2η], quintic ramps between.
#[derive(Clone, Debug)]
pub struct CutoffFunction {
    pub eta: f64,
    /// Requested C² bound.
    pub k_bound: f64,
    /// Achieved C² norm (exact extrema over the ramps).
    pub achieved: f64,
    pub pieces: Piecewise,
}

impl CutoffFunction {
    pub fn eval012(&self, t: f64) -> (f64, f64, f64) {
        self.pieces.eval012(t)
    }
}

fn cutoff_pieces(eta: f64) -> Piecewise {
    let s = smoothstep();
    let rise = s.stretch(eta);
    let fall = Poly::constant(1.0).add(&s.stretch(eta).scale(-1.0));
    Piecewise {
        knots: vec![-2.0 * eta, -eta, eta, 2.0 * eta],
        polys: vec![rise, Poly::constant(1.0), fall],
    }
}

fn c2_norm_of(pieces: &Piecewise) -> f64 {
    let (lo, hi) = pieces.coverage();
    let d1 = pieces.derivative();
    let d2 = d1.derivative();
    pieces
        .max_abs_on(lo, hi)
        .max(d1.max_abs_on(lo, hi))
        .max(d2.max_abs_on(lo, hi))
}

/// Builds the cutoff and certifies `‖λ‖_{C²} < K`.
pub fn build_cutoff(eta: f64, k: f64) -> Result<CutoffFunction> {
    if eta <= 0.0 {
        return Err(GeomError::Input("cutoff requires eta > 0".into()));
    }
    if k <= 1.0 {
        return Err(GeomError::Input("cutoff requires K > 1".into()));
    }
    let pieces = cutoff_pieces(eta);
    let achieved = c2_norm_of(&pieces);
    if achieved >= k {
        return Err(GeomError::infeasible(
            "cutoff C2 norm < K",
            format!("minimal achievable K at eta = {eta} is {achieved:.6}"),
        ));
    }
    Ok(CutoffFunction {
        eta,
        k_bound: k,
        achieved,
        pieces,
    })
}

/// Blend `λ f + (1 - λ) g` of two piecewise functions.
pub fn glue(lambda: &CutoffFunction, f: &Piecewise, g: &Piecewise) -> Piecewise {
    let (lo, hi) = lambda.pieces.coverage();
    let f = f.extend_coverage(lo, hi);
    let g = g.extend_coverage(lo, hi);
    let one_minus = Piecewise {
        knots: lambda.pieces.knots.clone(),
        polys: lambda
            .pieces
            .polys
            .iter()
            .map(|p| Poly::constant(1.0).add(&p.scale(-1.0)))
            .collect(),
    };
    lambda.pieces.mul(&f).add(&one_minus.mul(&g))
}

// ---------------------------------------------------------------------------
// plateau and profile
// ---------------------------------------------------------------------------

/// Plateau integrand: value `C` on [-τ, τ], support [-ν, ν], C² monotone
/// ramps between. Antiderivatives are closed-form.
pub fn build_plateau(c: f64, nu: f64, tau: f64) -> Result<Piecewise> {
    if !(tau > 0.0 && tau < nu) {
        return Err(GeomError::Input(format!(
            "plateau requires 0 < tau < nu, got tau = {tau}, nu = {nu}"
        )));
    }
    let w = nu - tau;
    let s = smoothstep();
    let rise = s.stretch(w).scale(c);
    let fall = Poly::constant(c).add(&s.stretch(w).scale(-c));
    Ok(Piecewise {
        knots: vec![-nu, -tau, tau, nu],
        polys: vec![rise, Poly::constant(c), fall],
    })
}

/// C² trapezoidal bump with the given mass on [lo, hi] (quarter-width
/// quintic corners).
fn trapezoid_bump(mass: f64, lo: f64, hi: f64) -> Piecewise {
    let width = hi - lo;
    let w = 0.25 * width;
    let peak = mass / (0.75 * width);
    let s = smoothstep();
    let rise = s.stretch(w).scale(peak);
    let fall = Poly::constant(peak).add(&s.stretch(w).scale(-peak));
    Piecewise {
        knots: vec![lo, lo + w, hi - w, hi],
        polys: vec![rise, Poly::constant(peak), fall],
    }
}

/// The 1-D bump profile with its parameters and certified bounds.
#[derive(Clone, Debug)]
pub struct BumpProfile {
    pub c: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub tau: f64,
    pub nu: f64,
    pub phi: Piecewise,
    dphi: Piecewise,
    d2phi: Piecewise,
    pub certificates: Vec<Certificate>,
    pub slope_mass: f64,
    pub release_width: f64,
    pub release_peak: f64,
}

impl BumpProfile {
    pub fn eval012(&self, t: f64) -> (f64, f64, f64) {
        if t.abs() >= 2.0 * self.eta {
            return (0.0, 0.0, 0.0);
        }
        let (v, _, _) = self.phi.eval012(t);
        let (d1, _, _) = self.dphi.eval012(t);
        let (d2, _, _) = self.d2phi.eval012(t);
        (v, d1, d2)
    }

    pub fn eval_jet(&self, t: &Jet) -> Jet {
        let (v, d1, d2) = self.eval012(t.val);
        t.chain(v, d1, d2)
    }

    /// Evaluates `φ(√s)` as a smooth function of the squared distance `s`;
    /// linear in `s` on the quadratic cap, so jets stay exact through s = 0.
    pub fn eval_of_dist_sq(&self, s: &Jet) -> Jet {
        if s.val <= self.tau * self.tau {
            s * (self.c * 0.5)
        } else {
            self.eval_jet(&s.sqrt())
        }
    }
}

struct ProfileCandidate {
    phi: Piecewise,
    certificates: Vec<Certificate>,
    min_margin: f64,
    release_width: f64,
    release_peak: f64,
}

fn profile_certificates(
    phi: &Piecewise,
    c: f64,
    eps: f64,
    eta: f64,
    tau: f64,
) -> Vec<Certificate> {
    let d1 = phi.derivative();
    let d2 = d1.derivative();
    let span = 2.0 * eta;
    let id = "piecewise-extrema";
    // margins are measured up to the rigorous evaluation-noise radius of the
    // exact-coefficient polynomials; the bounds themselves can sit far below
    // the absolute float noise of pieces with O(C)-sized coefficients
    let noise0 = phi.noise_bound(-span, span);
    let noise1 = d1.noise_bound(-span, span);
    let noise2 = d2.noise_bound(-span, span);
    let mut certs = Vec::new();

    let sup_abs = phi.max_abs_on(-span, span);
    certs.push(Certificate {
        name: "profile_c0".into(),
        constraint: format!("sup |phi| < eps = {eps}"),
        worst: sup_abs,
        margin: eps - sup_abs + noise0,
        samples: id.into(),
    });
    let sup_d1 = d1.max_abs_on(-span, span);
    certs.push(Certificate {
        name: "profile_c1".into(),
        constraint: format!("sup |phi'| < eps = {eps}"),
        worst: sup_d1,
        margin: eps - sup_d1 + noise1,
        samples: id.into(),
    });

    let (inf2, sup2) = d2.range_on(-span, span);
    let closed_slack = 1e-9 * c.abs();
    if c > 0.0 {
        certs.push(Certificate {
            name: "profile_second_derivative_upper".into(),
            constraint: format!("sup phi'' <= C = {c}"),
            worst: sup2,
            margin: c - sup2 + closed_slack + noise2,
            samples: id.into(),
        });
        certs.push(Certificate {
            name: "profile_second_derivative_lower".into(),
            constraint: format!("inf phi'' > -eps = {}", -eps),
            worst: inf2,
            margin: inf2 + eps + noise2,
            samples: id.into(),
        });
        let (infp, _) = d1.range_on(0.0, eta);
        certs.push(Certificate {
            name: "profile_first_derivative_sign".into(),
            constraint: "phi' >= 0 on [0, eta]".into(),
            worst: infp,
            margin: infp + noise1 + 1e-12 * sup_d1.max(1e-300),
            samples: id.into(),
        });
    } else {
        certs.push(Certificate {
            name: "profile_second_derivative_lower".into(),
            constraint: format!("inf phi'' >= C = {c}"),
            worst: inf2,
            margin: inf2 - c + closed_slack + noise2,
            samples: id.into(),
        });
        certs.push(Certificate {
            name: "profile_second_derivative_upper".into(),
            constraint: format!("sup phi'' < eps = {eps}"),
            worst: sup2,
            margin: eps - sup2 + noise2,
            samples: id.into(),
        });
        let (_, supp) = d1.range_on(0.0, eta);
        certs.push(Certificate {
            name: "profile_first_derivative_sign".into(),
            constraint: "phi' <= 0 on [0, eta]".into(),
            worst: supp,
            margin: -supp + noise1 + 1e-12 * sup_d1.max(1e-300),
            samples: id.into(),
        });
    }

    let band = d2
        .max_abs_on(eta, span)
        .max(d2.max_abs_on(-span, -eta))
        .max(d1.max_abs_on(eta, span))
        .max(d1.max_abs_on(-span, -eta))
        .max(phi.max_abs_on(eta, span))
        .max(phi.max_abs_on(-span, -eta));
    let band_noise = d2
        .noise_bound(eta, span)
        .max(d2.noise_bound(-span, -eta))
        .max(d1.noise_bound(eta, span))
        .max(phi.noise_bound(eta, span));
    certs.push(Certificate {
        name: "profile_band_c2".into(),
        constraint: format!("C2 norm on [eta, 2 eta] < eps = {eps}"),
        worst: band,
        margin: eps - band + band_noise,
        samples: id.into(),
    });

    // quadratic cap: phi(t) = (C/2) t² exactly on [-tau, tau]
    let scale = (0.5 * c.abs() * tau * tau).max(1e-300);
    let mut dev = 0.0f64;
    for i in 0..=16 {
        let t = -tau + 2.0 * tau * (i as f64) / 16.0;
        dev = dev.max((phi.value(t) - 0.5 * c * t * t).abs());
    }
    certs.push(Certificate {
        name: "profile_quadratic_cap".into(),
        constraint: "phi == (C/2) t^2 on [-tau, tau]".into(),
        worst: dev / scale,
        margin: 1e-10 - dev / scale,
        samples: "cap-grid-17".into(),
    });

    // support
    let mut out_max = 0.0f64;
    for t in [2.0001 * eta, 3.0 * eta, -2.0001 * eta, -3.0 * eta] {
        let (v, d, dd) = phi.eval012(t);
        out_max = out_max.max(v.abs().max(d.abs()).max(dd.abs()));
    }
    certs.push(Certificate {
        name: "profile_support".into(),
        constraint: "phi == 0 outside [-2 eta, 2 eta]".into(),
        worst: out_max,
        margin: if out_max == 0.0 { 1.0 } else { -1.0 },
        samples: "outside-points".into(),
    });

    certs
}

/// Builds the profile of the one-dimensional lemma: `φ = (C/2) t²` on
/// `[-τ, τ]`, supported in `[-2η, 2η]`, `‖φ‖_{C¹} < ε`, `φ'' ∈ (-ε, C]`
/// (mirrored for `C < 0`), C² everywhere.
pub fn build_profile(c: f64, eps: f64, eta: f64, tau: f64) -> Result<BumpProfile> {
    if c.abs() <= 1.0 {
        return Err(GeomError::infeasible(
            "|C| > 1 required",
            format!("got C = {c}"),
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(GeomError::infeasible(
            "epsilon in (0,1)",
            format!("got eps = {eps}"),
        ));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(GeomError::infeasible(
            "eta in (0,1)",
            format!("got eta = {eta}"),
        ));
    }
    let cs = c.abs();
    let tau_bound = eps * eta / (2.0 * cs);
    if !(tau > 0.0 && tau < tau_bound) {
        return Err(GeomError::infeasible(
            "tau bound violated: tau in (0, eps*eta/(2|C|))",
            format!("got tau = {tau}, bound = {tau_bound:.6e}"),
        ));
    }

    // deterministic nu: geometric mean of tau and its upper bound
    let nu = (tau * tau_bound).sqrt();
    let h = build_plateau(cs, nu, tau)?;
    let h_ext = h.extend_coverage(-2.0 * eta, 2.0 * eta);
    let g_raw = h_ext.antiderivative();
    let fprime0 = g_raw.sub_const(g_raw.value(0.0));
    let rho1 = nu + 0.015 * (eta - nu);
    let m = fprime0.value(rho1);

    // slope release: a trapezoid of mass m with peak strictly below eps
    let delta_min = 4.0 * m / (3.0 * 0.85 * eps);
    let delta_max = 0.97 * (eta - rho1);
    if delta_min > delta_max {
        return Err(GeomError::infeasible(
            "slope release fit: 4m/(2.55 eps) <= 0.97 (eta - rho1)",
            format!("slope mass m = {m:.3e} needs width {delta_min:.3e}, available {delta_max:.3e}"),
        ));
    }

    let lambda = cutoff_pieces(eta);
    let mut best: Option<ProfileCandidate> = None;
    let n_cand = 14;
    for i in 0..n_cand {
        let f = i as f64 / (n_cand - 1) as f64;
        let delta = delta_min * (delta_max / delta_min).powf(f);
        let rho2 = rho1 + delta;
        let rel_pos = trapezoid_bump(m, rho1, rho2);
        let rel_neg = trapezoid_bump(m, -rho2, -rho1);
        let h_full = h_ext.add(&rel_pos.scale(-1.0)).add(&rel_neg.scale(-1.0));
        let g = h_full.antiderivative();
        let fp = g.sub_const(g.value(0.0));
        let fi = fp.antiderivative();
        let f_hat = fi.sub_const(fi.value(0.0));
        let phi0 = lambda.mul(&f_hat);
        let phi = if c < 0.0 { phi0.scale(-1.0) } else { phi0 };
        let certs = profile_certificates(&phi, c, eps, eta, tau);
        let min_margin = certs
            .iter()
            .map(|cc| cc.margin)
            .fold(f64::INFINITY, f64::min);
        let peak = 4.0 * m / (3.0 * delta);
        let cand = ProfileCandidate {
            phi,
            certificates: certs,
            min_margin,
            release_width: delta,
            release_peak: peak,
        };
        if best.as_ref().map_or(true, |b| cand.min_margin > b.min_margin) {
            best = Some(cand);
        }
    }
    let best = best.expect("candidate list nonempty");
    check_certificates(&best.certificates)?;
    let dphi = best.phi.derivative();
    let d2phi = dphi.derivative();
    Ok(BumpProfile {
        c,
        epsilon: eps,
        eta,
        tau,
        nu,
        phi: best.phi,
        dphi,
        d2phi,
        certificates: best.certificates,
        slope_mass: m,
        release_width: best.release_width,
        release_peak: best.release_peak,
    })
}

// ---------------------------------------------------------------------------
// omega = phi ∘ dist_p on a model manifold
// ---------------------------------------------------------------------------

/// Bump function on a manifold: a certified profile composed with the
/// model's closed-form distance from the center.
#[derive(Clone, Debug)]
pub struct OmegaFunction {
    pub manifold: String,
    pub p: Vec<f64>,
    pub c: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub tau: f64,
    pub profile: BumpProfile,
    pub field: ScalarField,
    pub certificates: Vec<Certificate>,
}

/// Sample points for omega certificates: structured radii times a direction
/// lattice, expressed in chart coordinates.
fn omega_sample_points(
    manifold: &ManifoldModel,
    p: &[f64],
    tau: f64,
    eta: f64,
) -> Vec<(f64, Vec<f64>)> {
    let mut radii: Vec<f64> = vec![];
    radii.extend(sampling::geometric_radii(tau * 1e-3, 2.05 * eta, 40));
    for r in [
        tau * 0.5,
        tau * 0.999,
        tau * 1.001,
        eta * 0.5,
        eta,
        1.5 * eta,
        1.999 * eta,
    ] {
        radii.push(r);
    }
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let dirs = sampling::unit_sphere_lattice(manifold.dim, 8);
    let mut out = Vec::new();
    for r in radii {
        for d in &dirs {
            out.push((r, manifold.point_at_dist(p, d, r)));
        }
    }
    out
}

/// Lemma-scale bump on a base manifold: `ω = φ ∘ dist_p` with the parameter
/// transform `(C, ε) → (2C, ε η³)` applied to the inner profile, so that the
/// Hessian windows hold in the caller's constants.
pub fn build_omega(
    manifold: &ManifoldModel,
    p: &[f64],
    c: f64,
    eps: f64,
    eta: f64,
    tau: f64,
) -> Result<OmegaFunction> {
    if c.abs() <= 1.0 {
        return Err(GeomError::Input(format!("|C| > 1 required, got {c}")));
    }
    let eta_cap = 0.5 * f64::min(1.0, manifold.inj);
    if !(eta > 0.0 && eta < eta_cap) {
        return Err(GeomError::Input(format!(
            "eta must lie in (0, min(1, inj)/2) = (0, {eta_cap}), got {eta}"
        )));
    }
    if !(eps > 0.0 && eps < eta_cap) {
        return Err(GeomError::Input(format!(
            "eps must lie in (0, min(1, inj)/2), got {eps}"
        )));
    }
    let outer_bound = eps * eta / (2.0 * c.abs());
    if !(tau > 0.0 && tau < outer_bound) {
        return Err(GeomError::Input(format!(
            "tau must lie in (0, eps*eta/(2|C|)) = (0, {outer_bound:.6e}), got {tau}"
        )));
    }
    // the profile is built with eps -> eps eta³ and C -> 2C, so its own tau
    // bound is the transformed one
    let inner_bound = eps * eta.powi(4) / (4.0 * c.abs());
    if tau >= inner_bound {
        return Err(GeomError::infeasible(
            "tau < eps*eta^4/(4|C|) (profile parameter transform)",
            format!("got tau = {tau:.6e}, transformed bound = {inner_bound:.6e}"),
        ));
    }
    // the tangential distance-Hessian error must stay below sqrt(eta)
    let hess_err = manifold.dist_hessian_error_sup(2.0 * eta);
    if !(hess_err < eta.sqrt()) {
        return Err(GeomError::infeasible(
            "distance Hessian error < sqrt(eta) on B(p, 2 eta)",
            format!("sup error {hess_err:.4e} vs sqrt(eta) = {:.4e}", eta.sqrt()),
        ));
    }

    let profile = build_profile(2.0 * c, eps * eta.powi(3), eta, tau)?;
    let profile_arc = Arc::new(profile.clone());
    let pvec = p.to_vec();
    let man = manifold.clone();
    let field = ScalarField::new(
        manifold.chart.clone(),
        manifold.dim,
        Arc::new(move |x: &[Jet]| {
            let s = man.dist_sq_jet(&pvec, x);
            profile_arc.eval_of_dist_sq(&s)
        }),
    );

    // numerical certificates on the manifold
    let mut certs = Vec::new();
    let g = &manifold.metric;
    let grad_p = gradient(&field, g, p)?;
    let gm = g.eval(p);
    let mut gp_norm = 0.0;
    for i in 0..manifold.dim {
        for j in 0..manifold.dim {
            gp_norm += gm[(i, j)] * grad_p.components[i] * grad_p.components[j];
        }
    }
    let gp_norm = gp_norm.sqrt();
    certs.push(Certificate {
        name: "omega_gradient_at_center".into(),
        constraint: "|grad omega|_g(p) < 1e-12".into(),
        worst: gp_norm,
        margin: 1e-12 - gp_norm,
        samples: "center".into(),
    });

    let pts = omega_sample_points(manifold, p, tau, eta);
    let sample_id = format!("radial-grid-{}", pts.len());
    let mut sup_val = 0.0f64;
    let mut sup_grad = 0.0f64;
    let mut h_min = f64::INFINITY;
    let mut h_max = f64::NEG_INFINITY;
    let mut cap_min = f64::INFINITY;
    let mut cap_max = f64::NEG_INFINITY;
    let mut worst_point: Vec<f64> = p.to_vec();
    for (r, x) in &pts {
        let jet = field.eval_jet(x);
        sup_val = sup_val.max(jet.val.abs());
        let gmx = g.eval(x);
        let ginv = gmx.clone().try_inverse().unwrap();
        let df = jet.gradient();
        let gnorm = (df.transpose() * ginv * &df)[(0, 0)].max(0.0).sqrt();
        sup_grad = sup_grad.max(gnorm);
        let (lo, hi) = crate::calculus::hessian_range(&field, g, x)?;
        if lo < h_min {
            h_min = lo;
            worst_point = x.clone();
        }
        h_max = h_max.max(hi);
        if *r < tau {
            cap_min = cap_min.min(lo);
            cap_max = cap_max.max(hi);
        }
    }
    // include the center itself in the Hessian window and cap region
    let (lo0, hi0) = crate::calculus::hessian_range(&field, g, p)?;
    h_min = h_min.min(lo0);
    h_max = h_max.max(hi0);
    cap_min = cap_min.min(lo0);
    cap_max = cap_max.max(hi0);

    certs.push(Certificate {
        name: "omega_c0".into(),
        constraint: format!("sup |omega| < eps = {eps}"),
        worst: sup_val,
        margin: eps - sup_val,
        samples: sample_id.clone(),
    });
    certs.push(Certificate {
        name: "omega_c1_gradient".into(),
        constraint: format!("sup |grad omega|_g < eps = {eps}"),
        worst: sup_grad,
        margin: eps - sup_grad,
        samples: sample_id.clone(),
    });
    if c > 0.0 {
        certs.push(Certificate {
            name: "omega_hessian_window_lower".into(),
            constraint: format!("Hess >= -eps = {}", -eps),
            worst: h_min,
            margin: h_min + eps,
            samples: sample_id.clone(),
        });
        certs.push(Certificate {
            name: "omega_hessian_window_upper".into(),
            constraint: format!("Hess <= 3C = {}", 3.0 * c),
            worst: h_max,
            margin: 3.0 * c - h_max,
            samples: sample_id.clone(),
        });
        certs.push(Certificate {
            name: "omega_hessian_cap".into(),
            constraint: format!("Hess >= C = {c} on B(p, tau)"),
            worst: cap_min,
            margin: cap_min - c,
            samples: sample_id.clone(),
        });
    } else {
        certs.push(Certificate {
            name: "omega_hessian_window_lower".into(),
            constraint: format!("Hess >= 3C = {}", 3.0 * c),
            worst: h_min,
            margin: h_min - 3.0 * c,
            samples: sample_id.clone(),
        });
        certs.push(Certificate {
            name: "omega_hessian_window_upper".into(),
            constraint: format!("Hess <= eps = {eps}"),
            worst: h_max,
            margin: eps - h_max,
            samples: sample_id.clone(),
        });
        certs.push(Certificate {
            name: "omega_hessian_cap".into(),
            constraint: format!("Hess <= C = {c} on B(p, tau)"),
            worst: cap_max,
            margin: c - cap_max,
            samples: sample_id.clone(),
        });
    }

    // support: identically zero beyond 2 eta
    let mut out_sup = 0.0f64;
    for r in [2.001 * eta, 2.5 * eta] {
        for d in sampling::unit_sphere_lattice(manifold.dim, 4) {
            let x = manifold.point_at_dist(p, &d, r);
            let jet = field.eval_jet(&x);
            out_sup = out_sup.max(jet.val.abs());
        }
    }
    certs.push(Certificate {
        name: "omega_support".into(),
        constraint: "omega == 0 outside B(p, 2 eta)".into(),
        worst: out_sup,
        margin: if out_sup == 0.0 { 1.0 } else { -1.0 },
        samples: "outside-ring".into(),
    });

    if let Err(e) = check_certificates(&certs) {
        return Err(GeomError::Construction(format!(
            "{e}; worst Hessian point {worst_point:?}"
        )));
    }

    Ok(OmegaFunction {
        manifold: manifold.name.clone(),
        p: p.to_vec(),
        c,
        epsilon: eps,
        eta,
        tau,
        profile,
        field,
        certificates: certs,
    })
}

/// Pullback of a base bump to the total space of a submersion.
#[derive(Clone, Debug)]
pub struct PulledBackOmega {
    pub field: ScalarField,
    pub certificates: Vec<Certificate>,
}

/// Fiber coordinate probes per model (values of the n-b fiber coordinates).
fn fiber_probes(model: &SubmersionModel) -> Vec<Vec<f64>> {
    match model.total_dim - model.base_dim {
        1 => vec![vec![0.4], vec![2.2], vec![3.9]],
        2 => vec![vec![0.1, -0.2], vec![0.6, 0.4], vec![-0.5, 0.2]],
        _ => vec![vec![0.0; model.total_dim - model.base_dim]],
    }
}

/// `ω̃ = ω ∘ π`: constant on fibers with horizontal gradient, and Hessian
/// windows transferred through the submersion.
pub fn pullback_omega(model: &SubmersionModel, omega: &OmegaFunction) -> Result<PulledBackOmega> {
    let base_field = omega.field.clone();
    let proj_model = model.clone();
    let field = ScalarField::new(
        model.chart_total.clone(),
        model.total_dim,
        Arc::new(move |x: &[Jet]| {
            let y = proj_model.project_jets(x);
            base_field.eval_raw(&y)
        }),
    );

    let g = &model.total;
    let n = model.total_dim;
    let probes = fiber_probes(model);
    let (c, eps, eta, tau) = (omega.c, omega.epsilon, omega.eta, omega.tau);

    // sample total points above structured base radii
    let mut radii: Vec<f64> = sampling::geometric_radii(tau * 1e-2, 1.95 * eta, 16);
    radii.push(tau * 0.6);
    radii.push(0.8 * eta);
    let dirs = sampling::unit_sphere_lattice(model.base_dim, 4);
    let mut points: Vec<Vec<f64>> = Vec::new();
    for r in &radii {
        for d in &dirs {
            let bp = model.base.point_at_dist(&omega.p, d, *r);
            for f in &probes {
                if let Some(x) = model.fiber_point(&bp, f) {
                    points.push(x);
                }
            }
        }
    }

    let mut certs = Vec::new();

    // fiber constancy: compare values along each fiber
    let mut fiber_dev = 0.0f64;
    for r in [0.3 * eta, 1.2 * eta] {
        let bp = model.base.point_at_dist(&omega.p, &dirs[0], r);
        let vals: Vec<f64> = probes
            .iter()
            .filter_map(|f| model.fiber_point(&bp, f))
            .map(|x| field.eval(&x))
            .collect();
        if vals.len() >= 2 {
            let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            for w in vals.windows(2) {
                fiber_dev = fiber_dev.max((w[0] - w[1]).abs() / scale);
            }
        }
    }
    certs.push(Certificate {
        name: "pullback_fiber_constancy".into(),
        constraint: "relative variation along fibers < 1e-10".into(),
        worst: fiber_dev,
        margin: 1e-10 - fiber_dev,
        samples: "fiber-pairs".into(),
    });

    // gradient is horizontal
    let mut vert_comp = 0.0f64;
    for x in points.iter().take(40) {
        let grad = gradient(&field, g, x)?;
        let pv = model.vertical_projector(g, x);
        let gv = &pv * nalgebra::DVector::from_column_slice(&grad.components);
        let gmx = g.eval(x);
        let mut norm_v = 0.0;
        let mut norm_g = 0.0;
        for i in 0..n {
            for j in 0..n {
                norm_v += gmx[(i, j)] * gv[i] * gv[j];
                norm_g += gmx[(i, j)] * grad.components[i] * grad.components[j];
            }
        }
        vert_comp = vert_comp.max(norm_v.sqrt() / (1.0 + norm_g.sqrt()));
    }
    certs.push(Certificate {
        name: "pullback_gradient_horizontal".into(),
        constraint: "|vertical part of grad| < 1e-10 (1 + |grad|)".into(),
        worst: vert_comp,
        margin: 1e-10 - vert_comp,
        samples: "pullback-points".into(),
    });

    // Hessian window on the total space, and the horizontal cap near the fiber
    let mut h_min = f64::INFINITY;
    let mut h_max = f64::NEG_INFINITY;
    let mut cap_extreme = if c > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    let mut sigma_resid = 0.0f64;
    for x in &points {
        let (lo, hi) = crate::calculus::hessian_range(&field, g, x)?;
        h_min = h_min.min(lo);
        h_max = h_max.max(hi);
        let base_dist = model.base.dist(&omega.p, &model.project(x));
        if base_dist < tau {
            // horizontal-restricted Hessian
            let hess = hessian(&field, g, x)?;
            let (horiz, _) = model.adapted_on_frame(g, x)?;
            let hb = nalgebra::DMatrix::from_fn(model.base_dim, model.base_dim, |a, b| {
                hess.apply(&horiz[a], &horiz[b])
            });
            let eig = (0.5 * (&hb + hb.transpose())).symmetric_eigen();
            for e in eig.eigenvalues.iter() {
                if c > 0.0 {
                    cap_extreme = cap_extreme.min(*e);
                } else {
                    cap_extreme = cap_extreme.max(*e);
                }
            }
        }
    }
    // fiber over p itself
    for f in &probes {
        if let Some(x) = model.fiber_point(&omega.p, f) {
            let (lo, hi) = crate::calculus::hessian_range(&field, g, &x)?;
            h_min = h_min.min(lo);
            h_max = h_max.max(hi);
            let hess = hessian(&field, g, &x)?;
            let (horiz, vert) = model.adapted_on_frame(g, &x)?;
            let hb = nalgebra::DMatrix::from_fn(model.base_dim, model.base_dim, |a, b| {
                hess.apply(&horiz[a], &horiz[b])
            });
            let eig = (0.5 * (&hb + hb.transpose())).symmetric_eigen();
            for e in eig.eigenvalues.iter() {
                if c > 0.0 {
                    cap_extreme = cap_extreme.min(*e);
                } else {
                    cap_extreme = cap_extreme.max(*e);
                }
            }
            // vertical Hessian against the second fundamental form:
            // Hess(U,U) = -g(grad ω̃, σ(U,U))
            let ft = fundamental_tensors(model, g, &x)?;
            let grad = gradient(&field, g, &x)?;
            for u in &vert {
                let lhs = hess.apply(u, u);
                let sig = ft.sigma_of(u, u);
                let rhs = -ft.inner(&grad.components, &sig);
                sigma_resid = sigma_resid.max((lhs - rhs).abs());
            }
        }
    }

    let (win_lo, win_hi) = if c > 0.0 { (-eps, 3.0 * c) } else { (3.0 * c, eps) };
    certs.push(Certificate {
        name: "pullback_hessian_window_lower".into(),
        constraint: format!("Hess >= {win_lo}"),
        worst: h_min,
        margin: h_min - win_lo,
        samples: "pullback-points".into(),
    });
    certs.push(Certificate {
        name: "pullback_hessian_window_upper".into(),
        constraint: format!("Hess <= {win_hi}"),
        worst: h_max,
        margin: win_hi - h_max,
        samples: "pullback-points".into(),
    });
    certs.push(Certificate {
        name: "pullback_horizontal_cap".into(),
        constraint: if c > 0.0 {
            format!("horizontal Hess >= C = {c} near the fiber")
        } else {
            format!("horizontal Hess <= C = {c} near the fiber")
        },
        worst: cap_extreme,
        margin: if c > 0.0 {
            cap_extreme - c
        } else {
            c - cap_extreme
        },
        samples: "fiber-cap-points".into(),
    });
    certs.push(Certificate {
        name: "pullback_sigma_hessian_relation".into(),
        constraint: "Hess(U,U) + g(grad, sigma(U,U)) ~ 0".into(),
        worst: sigma_resid,
        margin: 1e-8 * (1.0 + c.abs()) - sigma_resid,
        samples: "fiber-points".into(),
    });

    check_certificates(&certs)?;
    Ok(PulledBackOmega {
        field,
        certificates: certs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn poly_translate_and_range() {
        let p = Poly {
            c: vec![1.0, -2.0, 3.0],
        };
        let q = p.translate(0.5);
        for u in [0.0, 0.3, 1.0] {
            assert_relative_eq!(q.value(u), p.value(u + 0.5), max_relative = 1e-13);
        }
        let (lo, hi) = p.range_on(0.0, 2.0);
        // p = 3u² - 2u + 1, min at u = 1/3: 2/3; max at u = 2: 9
        assert_relative_eq!(lo, 2.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(hi, 9.0, max_relative = 1e-12);
    }

    #[test]
    fn cutoff_shape_and_scaling_law() {
        let lam = build_cutoff(0.1, 1000.0).unwrap();
        assert_relative_eq!(lam.eval012(0.05).0, 1.0, max_relative = 1e-14);
        assert_eq!(lam.eval012(0.25).0, 0.0);
        let mid = lam.eval012(0.15);
        assert!(mid.0 > 0.0 && mid.0 < 1.0);
        assert!(mid.1 < 0.0);
        // second-derivative scaling: sup |λ''| · η² is the ramp constant
        let d2 = lam.pieces.derivative().derivative();
        let sup1 = d2.max_abs_on(-0.2, 0.2) * 0.1 * 0.1;
        let lam2 = build_cutoff(0.4, 1000.0).unwrap();
        let sup2 = lam2
            .pieces
            .derivative()
            .derivative()
            .max_abs_on(-0.8, 0.8)
            * 0.4
            * 0.4;
        assert_relative_eq!(sup1, sup2, max_relative = 1e-9);
        assert_relative_eq!(sup1, 10.0 / 3.0f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn cutoff_rejects_small_k() {
        let err = build_cutoff(0.1, 2.0).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("minimal achievable"), "{msg}");
    }

    #[test]
    fn plateau_properties() {
        let h = build_plateau(2.0, 0.1, 0.05).unwrap();
        assert_relative_eq!(h.value(0.0), 2.0, max_relative = 1e-14);
        assert_eq!(h.value(0.2), 0.0);
        let (inf, _) = h.range_on(-0.2, 0.2);
        assert!(inf >= 0.0);
        // integral between 2 C tau and 2 C nu
        let anti = h.extend_coverage(-0.2, 0.2).antiderivative();
        let total = anti.value(0.2);
        assert!(total >= 2.0 * 2.0 * 0.05 && total <= 2.0 * 2.0 * 0.1, "{total}");
    }

    #[test]
    fn profile_example_parameters_certify() {
        // the full-range case: tau at 80% of its bound
        let p = build_profile(2.0, 0.1, 0.2, 0.004).unwrap();
        assert_relative_eq!(p.eval012(0.002).0, 1.0 * 0.002 * 0.002, max_relative = 1e-12);
        assert_eq!(p.eval012(0.5).0, 0.0);
        for c in &p.certificates {
            assert!(c.pass(), "{}: margin {}", c.name, c.margin);
        }
        let sup_c1 = p.phi.max_abs_on(-0.4, 0.4).max(
            p.phi.derivative().max_abs_on(-0.4, 0.4),
        );
        assert!(sup_c1 < 0.1);
    }

    #[test]
    fn profile_negative_c_mirrors() {
        let p = build_profile(-3.0, 0.2, 0.15, 1e-4).unwrap();
        assert!(p.eval012(0.05).0 <= 0.0);
        let d2 = &p.d2phi;
        let (inf, sup) = d2.range_on(-0.3, 0.3);
        assert!(inf >= -3.0 - 1e-9, "{inf}");
        assert!(sup < 0.2, "{sup}");
    }

    #[test]
    fn profile_rejects_bad_tau() {
        let err = build_profile(2.0, 0.1, 0.2, 0.006).unwrap_err();
        assert!(format!("{err}").contains("tau bound violated"));
    }

    #[test]
    fn profile_second_derivative_matches_finite_differences() {
        let p = build_profile(2.0, 0.1, 0.2, 1e-3).unwrap();
        let h = 1e-6;
        for t in [0.0005, 0.003, 0.05, 0.18, 0.25, 0.33] {
            let (v_m, _, _) = p.eval012(t - h);
            let (v0, _, d2) = p.eval012(t);
            let (v_p, _, _) = p.eval012(t + h);
            let fd = (v_p - 2.0 * v0 + v_m) / (h * h);
            assert!(
                (fd - d2).abs() < 1e-6 * (1.0 + d2.abs()),
                "t = {t}: fd {fd} vs exact {d2}"
            );
        }
    }

    #[test]
    fn gluing_inequality_quantitative() {
        // Lemma-scale check: for ‖f - g‖_C1 < δ = eps/(3K), the blend stays
        // eps-close in C1 and the second derivative stays eps-close to the
        // weighted average.
        let eta = 0.2;
        let k = 600.0;
        let lam = build_cutoff(eta, k).unwrap();
        let eps = 0.5;
        let delta = eps / (3.0 * k);
        // f: small cubic spline-ish function, g = 0
        let f = Piecewise {
            knots: vec![-0.6, 0.6],
            polys: vec![Poly {
                c: vec![0.3 * delta, 0.5 * delta, -0.2 * delta, 0.1 * delta],
            }
            .translate(-0.6)],
        };
        let g = Piecewise {
            knots: vec![-0.6, 0.6],
            polys: vec![Poly::constant(0.0)],
        };
        let phi = glue(&lam, &f, &g);
        // C1 closeness of f - phi inside the support of lambda
        let diff = f.add(&phi.scale(-1.0));
        assert!(diff.max_abs_on(-2.0 * eta, 2.0 * eta) < eps);
        assert!(diff.derivative().max_abs_on(-2.0 * eta, 2.0 * eta) < eps);
        // second-derivative deviation from the weighted average
        let avg = lam.pieces.mul(&f.derivative().derivative());
        let dev = phi.derivative().derivative().add(&avg.scale(-1.0));
        assert!(dev.max_abs_on(-2.0 * eta, 2.0 * eta) < eps);
    }
}

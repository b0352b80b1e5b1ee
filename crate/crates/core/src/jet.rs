//! Second-order forward-mode differentiation numbers.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to the chart coordinates it was seeded in. Metric coefficients,
//! scalar fields and projections are all written as closures over jets, so
//! curvature gets two exact derivatives with no finite-difference noise.
//!
//! A jet with an empty gradient is a constant and broadcasts against any
//! dimension; mixing two non-constant jets of different dimensions is a
//! programming error and panics.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Jet {
    pub val: f64,
    /// Length-n gradient, or empty for a constant.
    pub grad: Vec<f64>,
    /// Row-major n*n Hessian, or empty for a constant.
    pub hess: Vec<f64>,
}

impl Jet {
    /// Constant jet (no derivative content).
    pub fn c(val: f64) -> Self {
        Jet {
            val,
            grad: Vec::new(),
            hess: Vec::new(),
        }
    }

    /// Coordinate variable `x_i` of an n-dimensional chart.
    pub fn var(val: f64, i: usize, n: usize) -> Self {
        let mut grad = vec![0.0; n];
        grad[i] = 1.0;
        Jet {
            val,
            grad,
            hess: vec![0.0; n * n],
        }
    }

    /// Seed a full chart point.
    pub fn seed(x: &[f64]) -> Vec<Jet> {
        let n = x.len();
        x.iter()
            .enumerate()
            .map(|(i, &v)| Jet::var(v, i, n))
            .collect()
    }

    /// Constant jets at a chart point (fast value-only evaluation path).
    pub fn consts(x: &[f64]) -> Vec<Jet> {
        x.iter().map(|&v| Jet::c(v)).collect()
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn is_const(&self) -> bool {
        self.grad.is_empty()
    }

    fn grad_at(&self, i: usize) -> f64 {
        if self.is_const() {
            0.0
        } else {
            self.grad[i]
        }
    }

    /// Gradient component, treating constants as zero.
    pub fn grad_get(&self, i: usize) -> f64 {
        self.grad_at(i)
    }

    /// Hessian entry, treating constants as zero. `n` is the seed dimension.
    pub fn hess_get(&self, i: usize, j: usize, n: usize) -> f64 {
        self.hess_at(i, j, n)
    }

    fn hess_at(&self, i: usize, j: usize, n: usize) -> f64 {
        if self.hess.is_empty() {
            0.0
        } else {
            self.hess[i * n + j]
        }
    }

    pub fn gradient(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.grad)
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.hess)
    }

    /// Chain rule for a smooth unary function with derivatives `d1`, `d2` at `self.val`.
    pub fn chain(&self, val: f64, d1: f64, d2: f64) -> Jet {
        if self.is_const() {
            return Jet::c(val);
        }
        let n = self.dim();
        let grad = self.grad.iter().map(|&g| d1 * g).collect::<Vec<_>>();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = d1 * self.hess_at(i, j, n) + d2 * self.grad[i] * self.grad[j];
            }
        }
        Jet { val, grad, hess }
    }

    pub fn exp(&self) -> Jet {
        let e = self.val.exp();
        self.chain(e, e, e)
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.val.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.val.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.val.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn atan(&self) -> Jet {
        let t = self.val;
        let d = 1.0 + t * t;
        self.chain(t.atan(), 1.0 / d, -2.0 * t / (d * d))
    }

    pub fn asin(&self) -> Jet {
        let t = self.val;
        let r = 1.0 - t * t;
        let s = r.sqrt();
        self.chain(t.asin(), 1.0 / s, t / (r * s))
    }

    pub fn acos(&self) -> Jet {
        let t = self.val;
        let r = 1.0 - t * t;
        let s = r.sqrt();
        self.chain(t.acos(), -1.0 / s, -t / (r * s))
    }

    pub fn recip(&self) -> Jet {
        let v = self.val;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn powi(&self, k: i32) -> Jet {
        let v = self.val;
        self.chain(
            v.powi(k),
            k as f64 * v.powi(k - 1),
            (k * (k - 1)) as f64 * v.powi(k - 2),
        )
    }

    pub fn square(&self) -> Jet {
        self.chain(self.val * self.val, 2.0 * self.val, 2.0)
    }

    /// Drops second-order content. Used where only value + gradient are
    /// meaningful (derivative-of-derivative constructions).
    pub fn zero_hess(mut self) -> Jet {
        for h in &mut self.hess {
            *h = 0.0;
        }
        self
    }
}

fn unify_dim(a: &Jet, b: &Jet) -> usize {
    match (a.is_const(), b.is_const()) {
        (true, true) => 0,
        (false, true) => a.dim(),
        (true, false) => b.dim(),
        (false, false) => {
            assert_eq!(a.dim(), b.dim(), "jet dimension mismatch");
            a.dim()
        }
    }
}

fn binary(a: &Jet, b: &Jet, val: f64, fa: f64, fb: f64, faa: f64, fab: f64, fbb: f64) -> Jet {
    let n = unify_dim(a, b);
    if n == 0 {
        return Jet::c(val);
    }
    let mut grad = vec![0.0; n];
    for i in 0..n {
        grad[i] = fa * a.grad_at(i) + fb * b.grad_at(i);
    }
    let mut hess = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (ai, aj) = (a.grad_at(i), a.grad_at(j));
            let (bi, bj) = (b.grad_at(i), b.grad_at(j));
            hess[i * n + j] = fa * a.hess_at(i, j, n)
                + fb * b.hess_at(i, j, n)
                + faa * ai * aj
                + fab * (ai * bj + aj * bi)
                + fbb * bi * bj;
        }
    }
    Jet { val, grad, hess }
}

pub fn jet_add(a: &Jet, b: &Jet) -> Jet {
    binary(a, b, a.val + b.val, 1.0, 1.0, 0.0, 0.0, 0.0)
}

pub fn jet_sub(a: &Jet, b: &Jet) -> Jet {
    binary(a, b, a.val - b.val, 1.0, -1.0, 0.0, 0.0, 0.0)
}

pub fn jet_mul(a: &Jet, b: &Jet) -> Jet {
    binary(a, b, a.val * b.val, b.val, a.val, 0.0, 1.0, 0.0)
}

pub fn jet_div(a: &Jet, b: &Jet) -> Jet {
    let v = b.val;
    binary(
        a,
        b,
        a.val / v,
        1.0 / v,
        -a.val / (v * v),
        0.0,
        -1.0 / (v * v),
        2.0 * a.val / (v * v * v),
    )
}

macro_rules! impl_op {
    ($trait:ident, $method:ident, $func:ident) => {
        impl std::ops::$trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $func(self, rhs)
            }
        }
        impl std::ops::$trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $func(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $func(&self, rhs)
            }
        }
        impl std::ops::$trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $func(self, &rhs)
            }
        }
        impl std::ops::$trait<f64> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                $func(self, &Jet::c(rhs))
            }
        }
        impl std::ops::$trait<f64> for Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                $func(&self, &Jet::c(rhs))
            }
        }
        impl std::ops::$trait<&Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $func(&Jet::c(self), rhs)
            }
        }
        impl std::ops::$trait<Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $func(&Jet::c(self), &rhs)
            }
        }
    };
}

impl_op!(Add, add, jet_add);
impl_op!(Sub, sub, jet_sub);
impl_op!(Mul, mul, jet_mul);
impl_op!(Div, div, jet_div);

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.chain(-self.val, -1.0, 0.0)
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        (&self).neg()
    }
}

/// Sum of squares of a jet slice.
pub fn jet_norm_sq(v: &[Jet]) -> Jet {
    let mut acc = Jet::c(0.0);
    for x in v {
        acc = acc + x.square();
    }
    acc
}

/// Dot product of two jet slices.
pub fn jet_dot(a: &[Jet], b: &[Jet]) -> Jet {
    assert_eq!(a.len(), b.len());
    let mut acc = Jet::c(0.0);
    for (x, y) in a.iter().zip(b) {
        acc = acc + x * y;
    }
    acc
}

/// Solves `A s = rhs` over jets by Gaussian elimination with partial
/// pivoting on values. `a` is row-major k*k. Panics on zero pivot.
pub fn jet_solve(a: &[Jet], rhs: &[Jet], k: usize) -> Vec<Jet> {
    assert_eq!(a.len(), k * k);
    assert_eq!(rhs.len(), k);
    let mut m: Vec<Jet> = a.to_vec();
    let mut b: Vec<Jet> = rhs.to_vec();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&r, &s| {
                m[r * k + col]
                    .val
                    .abs()
                    .partial_cmp(&m[s * k + col].val.abs())
                    .unwrap()
            })
            .unwrap();
        if m[pivot * k + col].val.abs() < 1e-300 {
            panic!("jet_solve: singular system");
        }
        if pivot != col {
            for j in 0..k {
                m.swap(col * k + j, pivot * k + j);
            }
            b.swap(col, pivot);
        }
        for row in (col + 1)..k {
            let factor = jet_div(&m[row * k + col], &m[col * k + col]);
            for j in col..k {
                m[row * k + j] = jet_sub(&m[row * k + j], &jet_mul(&factor, &m[col * k + j]));
            }
            b[row] = jet_sub(&b[row], &jet_mul(&factor, &b[col]));
        }
    }
    let mut x = vec![Jet::c(0.0); k];
    for row in (0..k).rev() {
        let mut acc = b[row].clone();
        for j in (row + 1)..k {
            acc = jet_sub(&acc, &jet_mul(&m[row * k + j], &x[j]));
        }
        x[row] = jet_div(&acc, &m[row * k + row]);
    }
    x
}

/// Evaluates a scalar jet function at `x` and returns value, gradient, Hessian.
pub fn eval_scalar<F>(f: F, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>)
where
    F: Fn(&[Jet]) -> Jet,
{
    let n = x.len();
    let out = f(&Jet::seed(x));
    let grad = if out.is_const() {
        DVector::zeros(n)
    } else {
        out.gradient()
    };
    let hess = if out.hess.is_empty() {
        DMatrix::zeros(n, n)
    } else {
        out.hessian()
    };
    (out.val, grad, hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn f(x: &[Jet]) -> Jet {
        // f = exp(x0) * sin(x1) + x0^2 / (1 + x1^2)
        let a = x[0].exp() * x[1].sin();
        let b = x[0].square() / (1.0 + x[1].square());
        a + b
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let x = [0.37, -0.81];
        let (v, g, h) = eval_scalar(f, &x);
        let fval = |p: &[f64]| f(&Jet::consts(p)).val;
        assert_relative_eq!(v, fval(&x), max_relative = 1e-14);

        let step = 1e-5;
        for i in 0..2 {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += step;
            xm[i] -= step;
            let fd = (fval(&xp) - fval(&xm)) / (2.0 * step);
            assert_relative_eq!(g[i], fd, max_relative = 1e-8);
        }
        for i in 0..2 {
            for j in 0..2 {
                let mut xpp = x.to_vec();
                let mut xpm = x.to_vec();
                let mut xmp = x.to_vec();
                let mut xmm = x.to_vec();
                xpp[i] += step;
                xpp[j] += step;
                xpm[i] += step;
                xpm[j] -= step;
                xmp[i] -= step;
                xmp[j] += step;
                xmm[i] -= step;
                xmm[j] -= step;
                let fd =
                    (fval(&xpp) - fval(&xpm) - fval(&xmp) + fval(&xmm)) / (4.0 * step * step);
                assert_relative_eq!(h[(i, j)], fd, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn constants_broadcast() {
        let x = Jet::var(2.0, 0, 1);
        let y = &x * 3.0 + 1.0;
        assert_eq!(y.val, 7.0);
        assert_eq!(y.grad, vec![3.0]);
    }

    #[test]
    fn asin_acos_derivatives() {
        let x = Jet::var(0.3, 0, 1);
        let a = x.asin();
        let c = x.acos();
        let d = 1.0 / (1.0f64 - 0.09).sqrt();
        assert_relative_eq!(a.grad[0], d, max_relative = 1e-14);
        assert_relative_eq!(c.grad[0], -d, max_relative = 1e-14);
        assert_relative_eq!(a.val + c.val, std::f64::consts::FRAC_PI_2, max_relative = 1e-15);
    }

    #[test]
    fn solve_small_system() {
        // A = [[2, 1], [1, 3]] with constant entries; rhs depends on x.
        let a = [Jet::c(2.0), Jet::c(1.0), Jet::c(1.0), Jet::c(3.0)];
        let x = Jet::var(1.0, 0, 1);
        let rhs = [x.clone(), x.square()];
        let s = jet_solve(&a, &rhs, 2);
        // exact solution: s0 = (3x - x^2)/5, s1 = (2x^2 - x)/5
        assert_relative_eq!(s[0].val, 0.4, max_relative = 1e-14);
        assert_relative_eq!(s[1].val, 0.2, max_relative = 1e-14);
        assert_relative_eq!(s[0].grad[0], (3.0 - 2.0) / 5.0, max_relative = 1e-14);
        assert_relative_eq!(s[1].grad[0], (4.0 - 1.0) / 5.0, max_relative = 1e-14);
    }
}

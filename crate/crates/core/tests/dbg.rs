use ricci_lab::profile::{build_plateau, Piecewise, Poly};

#[test]
fn dbg_tiny_pipeline() {
    let c: f64 = 12.0;
    let eps: f64 = 1.929375e-23;
    let eta: f64 = 3.5e-8;
    let tau: f64 = 8.0e-33;
    let bound = eps * eta / (2.0 * c);
    let nu = (tau * bound).sqrt();
    println!("bound={bound:.3e} nu={nu:.3e}");
    let h = build_plateau(c, nu, tau).unwrap();
    println!("h knots {:?}", h.knots);
    println!("h(0) = {}", h.value(0.0));
    let h_ext = h.extend_coverage(-2.0*eta, 2.0*eta);
    println!("h_ext knots {:?}", h_ext.knots);
    let g = h_ext.antiderivative();
    println!("G(0) = {:.6e}, G(tau)-G(0) = {:.6e} expect {:.6e}", g.value(0.0), g.value(tau)-g.value(0.0), c*tau);
    let fp = g.sub_const(g.value(0.0));
    println!("fp(tau) = {:.6e} expect {:.6e}", fp.value(tau), c*tau);
    let fi = fp.antiderivative();
    let fhat = fi.sub_const(fi.value(0.0));
    println!("fhat(tau) = {:.6e} expect {:.6e}", fhat.value(tau), 0.5*c*tau*tau);
    // check the lambda mul
    let lam = Piecewise { knots: vec![-2.0*eta, -eta, eta, 2.0*eta],
        polys: vec![Poly{c:vec![0.0,0.0,0.0,10.0,-15.0,6.0]}.stretch(eta), Poly::constant(1.0), Poly::constant(1.0).add(&Poly{c:vec![0.0,0.0,0.0,10.0,-15.0,6.0]}.stretch(eta).scale(-1.0))] };
    let phi = lam.mul(&fhat);
    println!("phi(tau) = {:.6e} expect {:.6e}", phi.value(tau), 0.5*c*tau*tau);
}

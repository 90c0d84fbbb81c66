//! Contact Hamiltonian fields, their symplectic lift, the implicit Lagrangian
//! dynamics and explicit second-order right-hand sides for the contact
//! Euler–Lagrange and Herglotz equations.

use nalgebra::{DMatrix, DVector};

use crate::atlas::{AtiyahCoords, ContactCoords, CoverCoords};
use crate::error::Result;
use crate::linalg;
use crate::section::{flatten, ScalarSection, SectionKind};
use crate::triple::{hamiltonian_jet, project_cover, ContactTangent, CoverTangent};

/// ẋ = ∂h/∂p, ṗ = −(∂h/∂x + p ∂h/∂z), ż = p·∂h/∂p − h.
pub fn contact_field(h: &ScalarSection, u: &ContactCoords) -> Result<ContactTangent> {
    let j = hamiltonian_jet(h, u)?;
    let pdot = (0..u.p.len()).map(|k| -(j.zx[k] + u.p[k] * j.zz)).collect();
    let zdot = u.p.iter().zip(&j.zp).map(|(p, d)| p * d).sum::<f64>() - j.value;
    Ok(ContactTangent { base: u.clone(), xdot: j.zp, pdot, zdot })
}

/// Hamiltonian field of the lift `τ h(x, π/τ, z)`; partials of `h` are taken
/// at the projected point.
pub fn lifted_field(h: &ScalarSection, c: &CoverCoords) -> Result<CoverTangent> {
    let u = project_cover(c)?;
    let j = hamiltonian_jet(h, &u)?;
    let zdot = u.p.iter().zip(&j.zp).map(|(p, d)| p * d).sum::<f64>() - j.value;
    Ok(CoverTangent {
        xdot: j.zp,
        taudot: c.tau * j.zz,
        pidot: j.zx.iter().map(|d| -c.tau * d).collect(),
        zdot,
    })
}

/// The point of the implicit dynamics `D_ℓ` over `v`.
pub fn lagrangian_implicit(l: &ScalarSection, v: &AtiyahCoords) -> Result<ContactTangent> {
    l.expect_kind(SectionKind::Lagrangian)?;
    let n = v.x.len();
    let j = l.jet_at(v.chart, &flatten(&v.x, &v.xdot, v.t))?;
    let g = j.grad();
    let (lx, lxd, lt) = (&g[..n], &g[n..2 * n], g[2 * n]);
    Ok(ContactTangent {
        base: ContactCoords { chart: v.chart, x: v.x.clone(), p: lxd.to_vec(), z: lt },
        xdot: v.xdot.clone(),
        pdot: lx.iter().zip(lxd).map(|(a, b)| a - v.t * b).collect(),
        zdot: j.value() - v.t * lt,
    })
}

/// Accelerations `(ẍ, ṫ)` solving the contact Euler–Lagrange equations
///
/// d/ds ∂ℓ/∂ẋ = ∂ℓ/∂x − t ∂ℓ/∂ẋ,   d/ds ∂ℓ/∂t = ℓ − t ∂ℓ/∂t
///
/// along the curve with dx/ds = ẋ.
pub fn euler_lagrange_rhs(l: &ScalarSection, state: &AtiyahCoords) -> Result<(Vec<f64>, f64)> {
    l.expect_kind(SectionKind::Lagrangian)?;
    let n = state.x.len();
    let j = l.jet_at(state.chart, &flatten(&state.x, &state.xdot, state.t))?;
    let t = state.t;
    // fiber variables (ẋ, t) are seeds n..=2n
    let hess = DMatrix::from_fn(n + 1, n + 1, |a, b| j.d2(n + a, n + b));
    let rhs = DVector::from_fn(n + 1, |a, _| {
        let transport: f64 = (0..n).map(|i| j.d2(n + a, i) * state.xdot[i]).sum();
        let force = if a < n { j.d(a) - t * j.d(n + a) } else { j.value() - t * j.d(2 * n) };
        force - transport
    });
    let acc = linalg::solve(hess, rhs)?;
    Ok((acc.as_slice()[..n].to_vec(), acc[n]))
}

/// Herglotz state `(x, ẋ, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzState {
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    pub z: f64,
}

/// `(ẍ, ż)` for the Herglotz equations ż = ℓ̄,
/// d/ds ∂ℓ̄/∂ẋ = ∂ℓ̄/∂x + ∂ℓ̄/∂z ∂ℓ̄/∂ẋ.
pub fn herglotz_rhs(lbar: &ScalarSection, state: &HerglotzState) -> Result<(Vec<f64>, f64)> {
    lbar.expect_kind(SectionKind::Herglotz)?;
    let n = state.x.len();
    let chart = crate::atlas::ChartId(0);
    let j = lbar.jet_at(chart, &flatten(&state.x, &state.xdot, state.z))?;
    let zdot = j.value();
    let lz = j.d(2 * n);
    let hess = DMatrix::from_fn(n, n, |a, b| j.d2(n + a, n + b));
    let rhs = DVector::from_fn(n, |a, _| {
        let transport: f64 = (0..n).map(|i| j.d2(n + a, i) * state.xdot[i]).sum::<f64>() + j.d2(n + a, 2 * n) * zdot;
        j.d(a) + lz * j.d(n + a) - transport
    });
    let acc = linalg::solve(hess, rhs)?;
    Ok((acc.as_slice().to_vec(), zdot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::{BundleAtlas, ChartId};
    use crate::error::Error;
    use crate::expr::{hamiltonian_signature, herglotz_signature, lagrangian_signature, parse};
    use std::sync::Arc;

    fn trivial() -> Arc<BundleAtlas> {
        Arc::new(BundleAtlas::trivial(1))
    }

    fn dsl(kind: SectionKind, src: &str) -> ScalarSection {
        let sig = match kind {
            SectionKind::Hamiltonian => hamiltonian_signature(1),
            SectionKind::Lagrangian => lagrangian_signature(1),
            SectionKind::Herglotz => herglotz_signature(1),
        };
        let sig: Vec<&str> = sig.iter().map(String::as_str).collect();
        ScalarSection::from_expr(kind, trivial(), parse(src, &sig, &[]).unwrap(), vec![]).unwrap()
    }

    #[test]
    fn zero_hamiltonian_has_zero_field() {
        let h = dsl(SectionKind::Hamiltonian, "0");
        let f = contact_field(&h, &ContactCoords::new(ChartId(0), vec![1.0], vec![2.0], 3.0)).unwrap();
        assert_eq!((f.xdot[0], f.pdot[0], f.zdot), (0.0, 0.0, 0.0));
    }

    #[test]
    fn kinetic_hamiltonian_field() {
        let h = dsl(SectionKind::Hamiltonian, "p1^2/2");
        let f = contact_field(&h, &ContactCoords::new(ChartId(0), vec![0.0], vec![2.0], 7.0)).unwrap();
        assert_eq!((f.xdot[0], f.pdot[0], f.zdot), (2.0, 0.0, 2.0));
    }

    #[test]
    fn damped_field() {
        let h = ScalarSection::damped_hamiltonian(trivial(), 1.0, 0.5);
        let f = contact_field(&h, &ContactCoords::new(ChartId(0), vec![0.0], vec![1.0], 0.0)).unwrap();
        assert_eq!((f.xdot[0], f.pdot[0], f.zdot), (1.0, -0.5, 0.5));
    }

    #[test]
    fn lifted_kinetic_field() {
        let h = dsl(SectionKind::Hamiltonian, "p1^2/2");
        let c = CoverCoords::new(ChartId(0), vec![0.0], 2.0, vec![4.0], 7.0).unwrap();
        let f = lifted_field(&h, &c).unwrap();
        assert_eq!((f.xdot[0], f.taudot, f.pidot[0], f.zdot), (2.0, 0.0, 0.0, 2.0));
    }

    #[test]
    fn quadratic_implicit_dynamics() {
        let l = dsl(SectionKind::Lagrangian, "(xd1^2 + t^2)/2");
        let d = lagrangian_implicit(&l, &AtiyahCoords::new(ChartId(0), vec![0.3], vec![3.0], 4.0)).unwrap();
        assert_eq!((d.base.p[0], d.base.z, d.xdot[0], d.pdot[0], d.zdot), (3.0, 4.0, 3.0, -12.0, -3.5));
        let zero = dsl(SectionKind::Lagrangian, "0");
        let d = lagrangian_implicit(&zero, &AtiyahCoords::new(ChartId(0), vec![0.3], vec![3.0], 4.0)).unwrap();
        assert_eq!((d.base.p[0], d.base.z, d.pdot[0], d.zdot), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn quadratic_euler_lagrange() {
        let l = dsl(SectionKind::Lagrangian, "(xd1^2 + t^2)/2");
        let (acc, tdot) = euler_lagrange_rhs(&l, &AtiyahCoords::new(ChartId(0), vec![0.0], vec![1.0], 0.0)).unwrap();
        assert_eq!((acc[0], tdot), (0.0, 0.5));
    }

    #[test]
    fn t_degenerate_lagrangian_is_singular() {
        let l = dsl(SectionKind::Lagrangian, "xd1^2/2");
        let r = euler_lagrange_rhs(&l, &AtiyahCoords::new(ChartId(0), vec![0.0], vec![1.0], 0.0));
        assert!(matches!(r, Err(Error::SingularHessian { .. })));
    }

    #[test]
    fn damped_herglotz_rhs() {
        let l = ScalarSection::damped_herglotz(trivial(), 1.0, 0.5);
        let (acc, zdot) = herglotz_rhs(&l, &HerglotzState { x: vec![0.0], xdot: vec![1.0], z: 0.0 }).unwrap();
        assert_eq!((acc[0], zdot), (-0.5, 0.5));
    }

    #[test]
    fn z_free_herglotz_is_plain_euler_lagrange() {
        // ℓ̄ = ẋ²/2 − cos(x): ẍ = sin(x), ż = ℓ̄
        let l = dsl(SectionKind::Herglotz, "xd1^2/2 - cos(x1)");
        let s = HerglotzState { x: vec![0.4], xdot: vec![1.5], z: 2.0 };
        let (acc, zdot) = herglotz_rhs(&l, &s).unwrap();
        assert!((acc[0] - 0.4f64.sin()).abs() < 1e-15);
        assert!((zdot - (1.125 - 0.4f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn kind_is_checked() {
        let h = ScalarSection::damped_hamiltonian(trivial(), 1.0, 0.5);
        let v = AtiyahCoords::new(ChartId(0), vec![0.0], vec![1.0], 0.0);
        assert!(matches!(lagrangian_implicit(&h, &v), Err(Error::KindMismatch { .. })));
    }
}

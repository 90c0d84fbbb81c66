//! Coordinate form of the contact Tulczyjew triple.
//!
//! Hamiltonian side: a 1-jet of a Hamiltonian section is mapped by [`beta`]
//! to a tangent vector of the phase space; [`beta0`] identifies the tangent
//! data `(x, p, z, ẋ, ṗ, ż, t)` with such jets. Lagrangian side: [`alpha`]
//! and [`alpha0`] do the same for 1-jets of Lagrangians. [`r_iso`] is
//! `β₀ ∘ α₀⁻¹`, and [`anchor`] forgets `t`.
//!
//! The action-slot conventions used here are the ones that make
//! `β = anchor ∘ β₀⁻¹`, `α = anchor ∘ α₀⁻¹` and `R = β₀ ∘ α₀⁻¹` hold
//! simultaneously, together with the implicit Lagrangian dynamics.

use crate::atlas::{AtiyahCoords, ContactCoords, CoverCoords};
use crate::dynamics;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::section::{flatten, ScalarSection, SectionKind};

/// Tolerance for "same base point" checks.
pub const BASE_POINT_TOLERANCE: f64 = 1e-12;

/// First jet of a Hamiltonian section: `Z_x = ∂h/∂x`, `Z_p = ∂h/∂p`,
/// `Z_z = ∂h/∂z`, `Z = h`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianJet {
    pub base: ContactCoords,
    pub zx: Vec<f64>,
    pub zp: Vec<f64>,
    pub zz: f64,
    pub value: f64,
}

/// First jet of a Lagrangian section: `μ_x = ∂ℓ/∂x`, `μ_ẋ = ∂ℓ/∂ẋ`,
/// `μ_t = ∂ℓ/∂t`, `μ = ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianJet {
    pub base: AtiyahCoords,
    pub mux: Vec<f64>,
    pub muxd: Vec<f64>,
    pub mut_: f64,
    pub mu: f64,
}

/// A tangent vector to the contact phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactTangent {
    pub base: ContactCoords,
    pub xdot: Vec<f64>,
    pub pdot: Vec<f64>,
    pub zdot: f64,
}

/// A tangent vector of the phase space together with the extra fiber
/// coordinate `t`; the common source of the two isomorphisms β₀ and α₀.
#[derive(Debug, Clone, PartialEq)]
pub struct AtiyahTangent {
    pub base: ContactCoords,
    pub xdot: Vec<f64>,
    pub pdot: Vec<f64>,
    pub zdot: f64,
    pub t: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Canonical pairing `ẋ·p + t z` between the Atiyah algebroid and the jet
/// bundle, in the chart's trivialization.
pub fn pairing(v: &AtiyahCoords, u: &ContactCoords) -> Result<f64> {
    if v.chart != u.chart {
        return Err(Error::ChartMismatch(v.chart, u.chart));
    }
    let dist = v.x.iter().zip(&u.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if dist > BASE_POINT_TOLERANCE || v.x.len() != u.x.len() {
        return Err(Error::BasePointMismatch(dist));
    }
    Ok(dot(&v.xdot, &u.p) + v.t * u.z)
}

/// The 1-homogeneous function `τ·h(x, π/τ, z)` on the cover.
pub fn lift_hamiltonian(h: &ScalarSection, c: &CoverCoords) -> Result<f64> {
    h.expect_kind(SectionKind::Hamiltonian)?;
    nonzero_tau(c)?;
    let u = project_cover(c)?;
    Ok(c.tau * h.value_contact(&u)?)
}

/// Jet of the lifted Hamiltonian over the cover coordinates
/// `(x₁..xₙ, τ, π₁..πₙ, z)`.
pub fn lift_hamiltonian_jet(h: &ScalarSection, c: &CoverCoords) -> Result<Jet> {
    h.expect_kind(SectionKind::Hamiltonian)?;
    nonzero_tau(c)?;
    let n = c.x.len();
    let mut point = c.x.clone();
    point.push(c.tau);
    point.extend_from_slice(&c.pi);
    point.push(c.z);
    let seeds = Jet::seed(&point);
    let tau = seeds[n].clone();
    let mut args: Vec<Jet> = seeds[..n].to_vec();
    args.extend(seeds[n + 1..2 * n + 1].iter().map(|pi| pi.clone() / tau.clone()));
    args.push(seeds[2 * n + 1].clone());
    let lifted = tau * h.jet(c.chart, &args)?;
    if !lifted.is_finite() {
        return Err(Error::Domain("non-finite lifted Hamiltonian".into()));
    }
    Ok(lifted)
}

fn nonzero_tau(c: &CoverCoords) -> Result<()> {
    if c.tau == 0.0 {
        Err(Error::Domain("tau must be nonzero".into()))
    } else {
        Ok(())
    }
}

/// Principal bundle projection `(x, τ, π, z) ↦ (x, π/τ, z)`.
pub fn project_cover(c: &CoverCoords) -> Result<ContactCoords> {
    nonzero_tau(c)?;
    Ok(ContactCoords { chart: c.chart, x: c.x.clone(), p: c.pi.iter().map(|pi| pi / c.tau).collect(), z: c.z })
}

/// Tangent vector on the cover, components `(ẋ, τ̇, π̇, ż)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverTangent {
    pub xdot: Vec<f64>,
    pub taudot: f64,
    pub pidot: Vec<f64>,
    pub zdot: f64,
}

/// Differential of [`project_cover`]: `ṗ = π̇/τ − π τ̇/τ²`.
pub fn project_cover_tangent(c: &CoverCoords, w: &CoverTangent) -> Result<ContactTangent> {
    let base = project_cover(c)?;
    let pdot = c.pi.iter().zip(&w.pidot).map(|(pi, pid)| pid / c.tau - pi * w.taudot / (c.tau * c.tau)).collect();
    Ok(ContactTangent { base, xdot: w.xdot.clone(), pdot, zdot: w.zdot })
}

/// `j¹h` at `u`.
pub fn hamiltonian_jet(h: &ScalarSection, u: &ContactCoords) -> Result<HamiltonianJet> {
    h.expect_kind(SectionKind::Hamiltonian)?;
    let n = u.x.len();
    let j = h.jet_at(u.chart, &flatten(&u.x, &u.p, u.z))?;
    Ok(HamiltonianJet {
        base: u.clone(),
        zx: j.grad()[..n].to_vec(),
        zp: j.grad()[n..2 * n].to_vec(),
        zz: j.d(2 * n),
        value: j.value(),
    })
}

/// `j¹ℓ` at `v`.
pub fn lagrangian_jet(l: &ScalarSection, v: &AtiyahCoords) -> Result<LagrangianJet> {
    l.expect_kind(SectionKind::Lagrangian)?;
    let n = v.x.len();
    let j = l.jet_at(v.chart, &flatten(&v.x, &v.xdot, v.t))?;
    Ok(LagrangianJet {
        base: v.clone(),
        mux: j.grad()[..n].to_vec(),
        muxd: j.grad()[n..2 * n].to_vec(),
        mut_: j.d(2 * n),
        mu: j.value(),
    })
}

/// ẋ = Z_p, ṗ = −Z_x − Z_z p, ż = p·Z_p − Z.
pub fn beta(j: &HamiltonianJet) -> ContactTangent {
    let p = &j.base.p;
    ContactTangent {
        base: j.base.clone(),
        xdot: j.zp.clone(),
        pdot: j.zx.iter().zip(p).map(|(zx, pl)| -zx - j.zz * pl).collect(),
        zdot: dot(p, &j.zp) - j.value,
    }
}

/// p = μ_ẋ, z = μ_t, ṗ = μ_x − t μ_ẋ, ż = μ − t μ_t.
pub fn alpha(j: &LagrangianJet) -> ContactTangent {
    let t = j.base.t;
    ContactTangent {
        base: ContactCoords { chart: j.base.chart, x: j.base.x.clone(), p: j.muxd.clone(), z: j.mut_ },
        xdot: j.base.xdot.clone(),
        pdot: j.mux.iter().zip(&j.muxd).map(|(mx, mxd)| mx - t * mxd).collect(),
        zdot: j.mu - t * j.mut_,
    }
}

/// Returns the Hamiltonian jet together with the fiber coordinate `t`.
pub fn beta0(a: &AtiyahTangent) -> (HamiltonianJet, f64) {
    let p = &a.base.p;
    let jet = HamiltonianJet {
        base: a.base.clone(),
        zx: a.pdot.iter().zip(p).map(|(pd, pk)| -pd - a.t * pk).collect(),
        zp: a.xdot.clone(),
        zz: a.t,
        value: dot(p, &a.xdot) - a.zdot,
    };
    (jet, a.t)
}

pub fn beta0_inverse(j: &HamiltonianJet, t: f64) -> AtiyahTangent {
    let p = &j.base.p;
    AtiyahTangent {
        base: j.base.clone(),
        xdot: j.zp.clone(),
        pdot: j.zx.iter().zip(p).map(|(zx, pk)| -zx - t * pk).collect(),
        zdot: dot(p, &j.zp) - j.value,
        t,
    }
}

pub fn alpha0(a: &AtiyahTangent) -> LagrangianJet {
    let t = a.t;
    let z = a.base.z;
    #[cfg(not(feature = "alpha0-sign-flip"))]
    let mu = a.zdot + t * z;
    #[cfg(feature = "alpha0-sign-flip")]
    let mu = a.zdot - t * z;
    LagrangianJet {
        base: AtiyahCoords { chart: a.base.chart, x: a.base.x.clone(), xdot: a.xdot.clone(), t },
        mux: a.pdot.iter().zip(&a.base.p).map(|(pd, pk)| pd + t * pk).collect(),
        muxd: a.base.p.clone(),
        mut_: z,
        mu,
    }
}

pub fn alpha0_inverse(j: &LagrangianJet) -> AtiyahTangent {
    let t = j.base.t;
    AtiyahTangent {
        base: ContactCoords { chart: j.base.chart, x: j.base.x.clone(), p: j.muxd.clone(), z: j.mut_ },
        xdot: j.base.xdot.clone(),
        pdot: j.mux.iter().zip(&j.muxd).map(|(mx, mxd)| mx - t * mxd).collect(),
        zdot: j.mu - t * j.mut_,
        t,
    }
}

/// `R = β₀ ∘ α₀⁻¹` in closed form.
pub fn r_iso(j: &LagrangianJet) -> (HamiltonianJet, f64) {
    let v = &j.base;
    let jet = HamiltonianJet {
        base: ContactCoords { chart: v.chart, x: v.x.clone(), p: j.muxd.clone(), z: j.mut_ },
        zx: j.mux.iter().map(|m| -m).collect(),
        zp: v.xdot.clone(),
        zz: v.t,
        value: dot(&j.muxd, &v.xdot) + v.t * j.mut_ - j.mu,
    };
    (jet, v.t)
}

pub fn anchor(a: &AtiyahTangent) -> ContactTangent {
    ContactTangent { base: a.base.clone(), xdot: a.xdot.clone(), pdot: a.pdot.clone(), zdot: a.zdot }
}

/// Max-norm of `i_X ω + dH` on the cover, for ω = dπᵢ∧dxⁱ + dz∧dτ and the
/// lifted Hamiltonian field X of `h`. (With this orientation of ω the
/// Hamiltonian field satisfies `i_X ω = −dH`.)
pub fn symplectic_residual(h: &ScalarSection, c: &CoverCoords) -> Result<f64> {
    let field = dynamics::lifted_field(h, c)?;
    symplectic_residual_of(h, c, &field)
}

/// Same as [`symplectic_residual`] for an arbitrary cover vector.
pub fn symplectic_residual_of(h: &ScalarSection, c: &CoverCoords, field: &CoverTangent) -> Result<f64> {
    let n = c.x.len();
    let dh = lift_hamiltonian_jet(h, c)?;
    // i_X(dπ∧dx) = π̇ dx − ẋ dπ ;  i_X(dz∧dτ) = ż dτ − τ̇ dz
    let mut worst: f64 = 0.0;
    for i in 0..n {
        worst = worst.max((field.pidot[i] + dh.d(i)).abs());
        worst = worst.max((-field.xdot[i] + dh.d(n + 1 + i)).abs());
    }
    worst = worst.max((field.zdot + dh.d(n)).abs());
    worst = worst.max((-field.taudot + dh.d(2 * n + 1)).abs());
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::ChartId;

    fn at(p: f64, z: f64, xd: f64, pd: f64, zd: f64, t: f64) -> AtiyahTangent {
        AtiyahTangent {
            base: ContactCoords::new(ChartId(0), vec![0.0], vec![p], z),
            xdot: vec![xd],
            pdot: vec![pd],
            zdot: zd,
            t,
        }
    }

    #[test]
    fn pairing_example() {
        let v = AtiyahCoords::new(ChartId(0), vec![0.0, 0.0], vec![1.0, 0.0], 2.0);
        let u = ContactCoords::new(ChartId(0), vec![0.0, 0.0], vec![2.0, 3.0], 5.0);
        assert_eq!(pairing(&v, &u).unwrap(), 12.0);
        let v0 = AtiyahCoords::new(ChartId(0), vec![0.0, 0.0], vec![0.0, 0.0], 0.0);
        assert_eq!(pairing(&v0, &u).unwrap(), 0.0);
    }

    #[test]
    fn pairing_rejects_mismatched_arguments() {
        let v = AtiyahCoords::new(ChartId(1), vec![0.0], vec![1.0], 2.0);
        let u = ContactCoords::new(ChartId(0), vec![0.0], vec![2.0], 5.0);
        assert!(matches!(pairing(&v, &u), Err(Error::ChartMismatch(..))));
        let v = AtiyahCoords::new(ChartId(0), vec![0.1], vec![1.0], 2.0);
        assert!(matches!(pairing(&v, &u), Err(Error::BasePointMismatch(_))));
    }

    #[test]
    fn projection_examples() {
        let c = CoverCoords::new(ChartId(0), vec![0.0], 2.0, vec![4.0], 5.0).unwrap();
        assert_eq!(project_cover(&c).unwrap(), ContactCoords::new(ChartId(0), vec![0.0], vec![2.0], 5.0));
        let scaled = CoverCoords::new(ChartId(0), vec![0.0], -14.0, vec![-28.0], 5.0).unwrap();
        assert_eq!(project_cover(&scaled).unwrap(), project_cover(&c).unwrap());
        assert!(CoverCoords::new(ChartId(0), vec![0.0], 0.0, vec![1.0], 0.0).is_err());
    }

    #[test]
    fn beta_example() {
        let j = HamiltonianJet {
            base: ContactCoords::new(ChartId(0), vec![0.0], vec![1.0], 0.0),
            zx: vec![2.0],
            zp: vec![3.0],
            zz: 4.0,
            value: 5.0,
        };
        let b = beta(&j);
        assert_eq!((b.xdot[0], b.pdot[0], b.zdot), (3.0, -6.0, -2.0));
    }

    #[test]
    fn beta0_example_inverts_beta_example() {
        let (j, t) = beta0(&at(1.0, 0.0, 3.0, -6.0, -2.0, 4.0));
        assert_eq!((j.zx[0], j.zp[0], j.zz, j.value, t), (2.0, 3.0, 4.0, 5.0, 4.0));
        let zero = beta0(&at(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)).0;
        assert_eq!((zero.zx[0], zero.zp[0], zero.zz, zero.value), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn alpha_and_alpha0_examples() {
        let j = alpha0(&at(1.0, 2.0, 3.0, 1.0, -2.0, 4.0));
        assert_eq!((j.mux[0], j.muxd[0], j.mut_, j.mu), (5.0, 1.0, 2.0, 6.0));
        let a = alpha(&j);
        assert_eq!((a.base.p[0], a.base.z, a.xdot[0], a.pdot[0], a.zdot), (1.0, 2.0, 3.0, 1.0, -2.0));
    }

    #[test]
    fn r_iso_matches_composition_on_example() {
        let j = alpha0(&at(1.0, 2.0, 3.0, 1.0, -2.0, 4.0));
        let (r, t) = r_iso(&j);
        let (c, tc) = beta0(&alpha0_inverse(&j));
        assert_eq!(r, c);
        assert_eq!(t, tc);
        // Z_x = −μ_x, Z = μ_ẋ ẋ + t μ_t − μ
        assert_eq!((r.zx[0], r.zp[0], r.zz, r.value), (-5.0, 3.0, 4.0, 3.0 + 8.0 - 6.0));
    }

    #[test]
    fn anchor_forgets_t() {
        let a = anchor(&at(1.0, 2.0, 3.0, 1.0, -2.0, 99.0));
        assert_eq!((a.base.p[0], a.base.z, a.xdot[0], a.pdot[0], a.zdot), (1.0, 2.0, 3.0, 1.0, -2.0));
    }
}

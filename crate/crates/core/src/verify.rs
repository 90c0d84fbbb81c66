//! Randomized invariant suites behind the `verify` subcommand.
//!
//! Every suite draws from its own SplitMix64 stream derived from [`SEED`],
//! so reports are reproducible and independent of how suites are scheduled.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::atlas::{
    pushforward_contact_tangent, transition_atiyah, transition_contact, validate_atlas, AtiyahCoords, BundleAtlas,
    ChartId, ContactCoords, ContactVector, CoverCoords,
};
use crate::dynamics::{contact_field, lagrangian_implicit, lifted_field};
use crate::error::{Error, Result};
use crate::expr::{hamiltonian_signature, parse};
use crate::legendre::{
    hamiltonian_from_lagrangian, hyperregularity_probe, lagrangian_from_hamiltonian, legendre_from_hamiltonian,
    legendre_from_lagrangian, Region, Verdict,
};
use crate::rng::SplitMix64;
use crate::section::{MoebiusLagrangian, ScalarSection, SectionKind};
use crate::triple::{
    alpha, alpha0, alpha0_inverse, anchor, beta, beta0, beta0_inverse, hamiltonian_jet, lagrangian_jet,
    lift_hamiltonian, pairing, project_cover, project_cover_tangent, r_iso, symplectic_residual, AtiyahTangent,
    ContactTangent, HamiltonianJet, LagrangianJet,
};

pub const SEED: u64 = 0xC0FFEE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Diagrams,
    Homogeneity,
    Moebius,
    Legendre,
}

impl Suite {
    pub const EACH: [Suite; 4] = [Suite::Diagrams, Suite::Homogeneity, Suite::Moebius, Suite::Legendre];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Diagrams => "diagrams",
            Suite::Homogeneity => "homogeneity",
            Suite::Moebius => "moebius",
            Suite::Legendre => "legendre",
        }
    }

    fn rng(self) -> SplitMix64 {
        let offset = Suite::EACH.iter().position(|s| *s == self).unwrap_or(0) as u64;
        SplitMix64::new(SEED.wrapping_add(offset.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::All, Suite::Diagrams, Suite::Homogeneity, Suite::Moebius, Suite::Legendre]
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::config("suite", format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl Check {
    fn new(suite: &'static str, name: &'static str, max_violation: f64, tolerance: f64) -> Self {
        Check { suite, name, max_violation, tolerance, passed: max_violation <= tolerance, note: None }
    }

    /// A check driven by a fallible sampling loop; an error fails the check.
    fn run(suite: &'static str, name: &'static str, tolerance: f64, body: impl FnOnce() -> Result<f64>) -> Self {
        match body() {
            Ok(v) => Check::new(suite, name, v, tolerance),
            Err(e) => Check {
                suite,
                name,
                max_violation: f64::INFINITY,
                tolerance,
                passed: false,
                note: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        VerifyReport { checks, passed }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(
                f,
                "{} {:<12} {:<44} max {:>10.3e}  tol {:.0e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                c.max_violation,
                c.tolerance
            )?;
            if let Some(note) = &c.note {
                write!(f, "  ({note})")?;
            }
            writeln!(f)?;
        }
        write!(f, "overall: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

/// Runs the selected suites; with [`Suite::All`] the suites run on separate
/// threads over shared immutable sections.
pub fn verify(suite: Suite) -> VerifyReport {
    let checks = match suite {
        Suite::All => std::thread::scope(|scope| {
            let handles: Vec<_> = Suite::EACH.iter().map(|&s| scope.spawn(move || run_suite(s))).collect();
            handles.into_iter().flat_map(|h| h.join().expect("verify suite panicked")).collect()
        }),
        s => run_suite(s),
    };
    VerifyReport::new(checks)
}

fn run_suite(suite: Suite) -> Vec<Check> {
    let mut rng = suite.rng();
    match suite {
        Suite::Diagrams => diagram_checks(&mut rng, alpha0),
        Suite::Homogeneity => homogeneity_checks(&mut rng),
        Suite::Moebius => moebius_checks(&mut rng),
        Suite::Legendre => legendre_checks(&mut rng),
        Suite::All => unreachable!("expanded by verify"),
    }
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Componentwise distance of two tangent vectors, base point included.
pub fn tangent_diff(a: &ContactTangent, b: &ContactTangent) -> f64 {
    if a.base.chart != b.base.chart {
        return f64::INFINITY;
    }
    [
        max_diff(&a.base.x, &b.base.x),
        max_diff(&a.base.p, &b.base.p),
        (a.base.z - b.base.z).abs(),
        max_diff(&a.xdot, &b.xdot),
        max_diff(&a.pdot, &b.pdot),
        (a.zdot - b.zdot).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn atiyah_tangent_diff(a: &AtiyahTangent, b: &AtiyahTangent) -> f64 {
    tangent_diff(&anchor(a), &anchor(b)).max((a.t - b.t).abs())
}

fn hamiltonian_jet_diff(a: &(HamiltonianJet, f64), b: &(HamiltonianJet, f64)) -> f64 {
    let (ja, ta) = a;
    let (jb, tb) = b;
    [
        max_diff(&ja.base.x, &jb.base.x),
        max_diff(&ja.base.p, &jb.base.p),
        (ja.base.z - jb.base.z).abs(),
        max_diff(&ja.zx, &jb.zx),
        max_diff(&ja.zp, &jb.zp),
        (ja.zz - jb.zz).abs(),
        (ja.value - jb.value).abs(),
        (ta - tb).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn lagrangian_jet_diff(a: &LagrangianJet, b: &LagrangianJet) -> f64 {
    [
        max_diff(&a.base.x, &b.base.x),
        max_diff(&a.base.xdot, &b.base.xdot),
        (a.base.t - b.base.t).abs(),
        max_diff(&a.mux, &b.mux),
        max_diff(&a.muxd, &b.muxd),
        (a.mut_ - b.mut_).abs(),
        (a.mu - b.mu).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn random_contact(rng: &mut SplitMix64, chart: ChartId, n: usize) -> ContactCoords {
    ContactCoords::new(chart, rng.vec(n, -2.0, 2.0), rng.vec(n, -2.0, 2.0), rng.uniform(-2.0, 2.0))
}

pub fn random_atiyah(rng: &mut SplitMix64, chart: ChartId, n: usize) -> AtiyahCoords {
    AtiyahCoords::new(chart, rng.vec(n, -2.0, 2.0), rng.vec(n, -2.0, 2.0), rng.uniform(-2.0, 2.0))
}

pub fn random_atiyah_tangent(rng: &mut SplitMix64, n: usize) -> AtiyahTangent {
    AtiyahTangent {
        base: random_contact(rng, ChartId(0), n),
        xdot: rng.vec(n, -2.0, 2.0),
        pdot: rng.vec(n, -2.0, 2.0),
        zdot: rng.uniform(-2.0, 2.0),
        t: rng.uniform(-2.0, 2.0),
    }
}

/// Cover point with `τ ∈ [−5, −0.1] ∪ [0.1, 5]`.
pub fn random_cover(rng: &mut SplitMix64, n: usize) -> CoverCoords {
    let tau = rng.signed(0.1, 5.0);
    CoverCoords::new(ChartId(0), rng.vec(n, -2.0, 2.0), tau, rng.vec(n, -2.0, 2.0), rng.uniform(-2.0, 2.0))
        .expect("tau is nonzero")
}

/// A sum of `terms` random monomials of total degree at most `degree` over
/// `vars`, as DSL text.
pub fn random_polynomial(rng: &mut SplitMix64, vars: &[String], degree: usize, terms: usize) -> String {
    (0..terms)
        .map(|_| {
            let mut term = format!("({:?})", rng.uniform(-1.0, 1.0));
            for _ in 0..rng.below(degree + 1) {
                term.push('*');
                term.push_str(&vars[rng.below(vars.len())]);
            }
            term
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// A random smooth expression over `vars`, finite for all real inputs of
/// moderate size.
pub fn random_expression(rng: &mut SplitMix64, vars: &[String], depth: usize) -> String {
    if depth == 0 || rng.below(4) == 0 {
        return if rng.below(3) == 0 {
            format!("({:?})", (rng.uniform(-2.0, 2.0) * 100.0).round() / 100.0)
        } else {
            vars[rng.below(vars.len())].clone()
        };
    }
    let a = random_expression(rng, vars, depth - 1);
    match rng.below(11) {
        0 => format!("sin({a})"),
        1 => format!("cos({a})"),
        2 => format!("exp(sin({a}))"),
        3 => format!("sqrt(1 + ({a})^2)"),
        4 => format!("log(2 + cos({a}))"),
        5 => format!("({a})^2"),
        6 => format!("-({a})^3/4"),
        7 => format!("({a}) + ({})", random_expression(rng, vars, depth - 1)),
        8 => format!("({a}) - ({})", random_expression(rng, vars, depth - 1)),
        9 => format!("({a}) * ({})", random_expression(rng, vars, depth - 1)),
        _ => format!("({a}) / (1.5 + sin({}))", random_expression(rng, vars, depth - 1)),
    }
}

fn trivial2() -> Arc<BundleAtlas> {
    Arc::new(BundleAtlas::trivial(2))
}

fn test_metric() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])
}

/// Quadratic, damped and a random cubic Hamiltonian on the trivial bundle
/// over ℝ².
pub fn test_hamiltonians(rng: &mut SplitMix64) -> Vec<(&'static str, ScalarSection)> {
    let atlas = trivial2();
    let sig = hamiltonian_signature(2);
    let poly = random_polynomial(rng, &sig, 3, 10);
    let names: Vec<&str> = sig.iter().map(String::as_str).collect();
    let cubic = parse(&poly, &names, &[]).expect("generated polynomial parses");
    vec![
        ("quadratic", ScalarSection::quadratic_hamiltonian(atlas.clone(), &test_metric()).expect("SPD metric")),
        ("damped", ScalarSection::damped_hamiltonian(atlas.clone(), 1.3, 0.7)),
        (
            "cubic",
            ScalarSection::from_expr(SectionKind::Hamiltonian, atlas, cubic, Vec::new()).expect("signature matches"),
        ),
    ]
}

fn test_lagrangians() -> Vec<ScalarSection> {
    let atlas = trivial2();
    let sig = crate::expr::lagrangian_signature(2);
    let names: Vec<&str> = sig.iter().map(String::as_str).collect();
    let src = "sin(x1)*xd2^2 + x2*t*xd1 - exp(t)*x1 + (xd1^2 + t^2)/2";
    vec![
        ScalarSection::quadratic_lagrangian(atlas.clone(), test_metric()),
        ScalarSection::from_expr(SectionKind::Lagrangian, atlas, parse(src, &names, &[]).expect("valid"), Vec::new())
            .expect("signature matches"),
    ]
}

/// Diagram algebra over random inputs. `alpha0` is injected so that a
/// mis-signed variant can be shown to fail.
pub fn diagram_checks(rng: &mut SplitMix64, alpha0: fn(&AtiyahTangent) -> LagrangianJet) -> Vec<Check> {
    const S: &str = "diagrams";
    const N: usize = 1000;
    let mut out = Vec::new();
    let samples: Vec<AtiyahTangent> = (0..N).map(|_| random_atiyah_tangent(rng, 2)).collect();

    out.push(Check::new(
        S,
        "R∘α₀ = β₀",
        samples.iter().map(|a| hamiltonian_jet_diff(&r_iso(&alpha0(a)), &beta0(a))).fold(0.0, f64::max),
        1e-12,
    ));
    out.push(Check::new(
        S,
        "R = β₀∘α₀⁻¹",
        samples
            .iter()
            .map(|a| {
                let j = alpha0(a);
                hamiltonian_jet_diff(&r_iso(&j), &beta0(&alpha0_inverse(&j)))
            })
            .fold(0.0, f64::max),
        1e-12,
    ));
    out.push(Check::new(
        S,
        "α₀⁻¹∘α₀ = id",
        samples.iter().map(|a| atiyah_tangent_diff(&alpha0_inverse(&alpha0(a)), a)).fold(0.0, f64::max),
        1e-12,
    ));
    out.push(Check::new(
        S,
        "α₀∘α₀⁻¹ = id",
        samples
            .iter()
            .map(|a| {
                let j = alpha0(a);
                lagrangian_jet_diff(&alpha0(&alpha0_inverse(&j)), &j)
            })
            .fold(0.0, f64::max),
        1e-12,
    ));
    out.push(Check::new(
        S,
        "β = anchor∘β₀⁻¹",
        samples
            .iter()
            .map(|a| {
                let (j, t) = beta0(a);
                tangent_diff(&beta(&j), &anchor(&beta0_inverse(&j, t)))
            })
            .fold(0.0, f64::max),
        1e-12,
    ));
    out.push(Check::new(
        S,
        "α = anchor∘α₀⁻¹",
        samples.iter().map(|a| tangent_diff(&alpha(&alpha0(a)), &anchor(a))).fold(0.0, f64::max),
        1e-12,
    ));

    let hams = test_hamiltonians(rng);
    let points: Vec<ContactCoords> = (0..N).map(|_| random_contact(rng, ChartId(0), 2)).collect();
    out.push(Check::run(S, "β(j¹h) = contact field", 1e-12, || {
        let mut worst: f64 = 0.0;
        for (_, h) in &hams {
            for u in &points {
                worst = worst.max(tangent_diff(&beta(&hamiltonian_jet(h, u)?), &contact_field(h, u)?));
            }
        }
        Ok(worst)
    }));

    let lags = test_lagrangians();
    let vs: Vec<AtiyahCoords> = (0..N).map(|_| random_atiyah(rng, ChartId(0), 2)).collect();
    out.push(Check::run(S, "α(j¹ℓ) = implicit Lagrangian dynamics", 1e-12, || {
        let mut worst: f64 = 0.0;
        for l in &lags {
            for v in &vs {
                worst = worst.max(tangent_diff(&alpha(&lagrangian_jet(l, v)?), &lagrangian_implicit(l, v)?));
            }
        }
        Ok(worst)
    }));
    out
}

pub fn homogeneity_checks(rng: &mut SplitMix64) -> Vec<Check> {
    const S: &str = "homogeneity";
    const N: usize = 500;
    let hams = test_hamiltonians(rng);
    let covers: Vec<CoverCoords> = (0..N).map(|_| random_cover(rng, 2)).collect();
    let scale = |c: &CoverCoords, s: f64| {
        CoverCoords::new(c.chart, c.x.clone(), s * c.tau, c.pi.iter().map(|p| s * p).collect(), c.z)
            .expect("nonzero scale")
    };
    let scales = [-3.0, 0.5, 7.0];
    vec![
        Check::run(S, "lift is 1-homogeneous", 1e-10, || {
            let mut worst: f64 = 0.0;
            for (_, h) in &hams {
                for c in &covers {
                    let base = lift_hamiltonian(h, c)?;
                    for s in scales {
                        let v = lift_hamiltonian(h, &scale(c, s))?;
                        worst = worst.max((v - s * base).abs() / (1.0 + (s * base).abs()));
                    }
                }
            }
            Ok(worst)
        }),
        Check::run(S, "projection is fiber-invariant", 1e-12, || {
            let mut worst: f64 = 0.0;
            for c in &covers {
                let u = project_cover(c)?;
                for s in scales {
                    let w = project_cover(&scale(c, s))?;
                    worst = worst.max(max_diff(&u.p, &w.p)).max((u.z - w.z).abs());
                }
            }
            Ok(worst)
        }),
        Check::run(S, "lifted field projects to contact field", 1e-10, || {
            let mut worst: f64 = 0.0;
            for (_, h) in &hams {
                for c in &covers {
                    let pushed = project_cover_tangent(c, &lifted_field(h, c)?)?;
                    worst = worst.max(tangent_diff(&pushed, &contact_field(h, &project_cover(c)?)?));
                }
            }
            Ok(worst)
        }),
        Check::run(S, "symplectic residual i_Xω + dH", 1e-10, || {
            let mut worst: f64 = 0.0;
            for (_, h) in &hams {
                for c in &covers {
                    worst = worst.max(symplectic_residual(h, c)?);
                }
            }
            Ok(worst)
        }),
    ]
}

/// A point of chart 0 of the Möbius atlas away from the seam at π/2.
fn moebius_x(rng: &mut SplitMix64) -> f64 {
    loop {
        let x = rng.uniform(0.01, PI - 0.01);
        if (x - PI / 2.0).abs() > 1e-6 {
            return x;
        }
    }
}

pub fn moebius_checks(rng: &mut SplitMix64) -> Vec<Check> {
    const S: &str = "moebius";
    let atlas = Arc::new(BundleAtlas::moebius());
    let l = ScalarSection::moebius_lagrangian(atlas.clone()).expect("moebius atlas");
    let h = ScalarSection::moebius_hamiltonian(atlas.clone()).expect("moebius atlas");
    let report = validate_atlas(&atlas, 200);
    let (c0, c1) = (ChartId(0), ChartId(1));
    let pairs: Vec<(AtiyahCoords, ContactCoords)> = (0..500)
        .map(|_| {
            let x = moebius_x(rng);
            (
                AtiyahCoords::new(c0, vec![x], rng.vec(1, -2.0, 2.0), rng.uniform(-2.0, 2.0)),
                ContactCoords::new(c0, vec![x], rng.vec(1, -2.0, 2.0), rng.uniform(-2.0, 2.0)),
            )
        })
        .collect();
    let xs: Vec<f64> = (0..100).map(|_| moebius_x(rng)).collect();

    vec![
        Check::new(S, "cocycle φ_ij φ_ji = 1", report.max_cocycle_violation, 0.0),
        Check::new(S, "transition inverse", report.max_inverse_violation, 1e-12),
        Check::run(S, "pairing covariance Π′ = φΠ", 1e-12, || {
            let mut worst: f64 = 0.0;
            for (v, u) in &pairs {
                let phi = atlas.transition(c0, c1, &v.x)?.cocycle(&v.x).0;
                let moved = pairing(&transition_atiyah(&atlas, v, c1)?, &transition_contact(&atlas, u, c1)?)?;
                worst = worst.max((moved - phi * pairing(v, u)?).abs());
            }
            Ok(worst)
        }),
        Check::run(S, "Legendre Jacobian orthogonality", 1e-12, || {
            let mut worst: f64 = 0.0;
            for &x in &xs {
                let j = l.jet_at(c0, &[x, 0.3, -0.2])?;
                let jac = DMatrix::from_fn(2, 2, |a, b| j.d2(1 + a, 1 + b));
                let defect = jac.transpose() * &jac - DMatrix::identity(2, 2);
                worst = worst.max(defect.amax());
            }
            Ok(worst)
        }),
        Check::run(S, "λ_ℓ chart compatibility", 1e-10, || {
            let mut worst: f64 = 0.0;
            for (v, _) in &pairs {
                let a = transition_contact(&atlas, &legendre_from_lagrangian(&l, v)?, c1)?;
                let b = legendre_from_lagrangian(&l, &transition_atiyah(&atlas, v, c1)?)?;
                worst = worst.max(max_diff(&a.x, &b.x)).max(max_diff(&a.p, &b.p)).max((a.z - b.z).abs());
            }
            Ok(worst)
        }),
        Check::run(S, "contact field chart equivariance", 1e-10, || {
            let mut worst: f64 = 0.0;
            for (_, u) in &pairs {
                let f = contact_field(&h, u)?;
                let w = ContactVector { xdot: f.xdot, pdot: f.pdot, zdot: f.zdot };
                let pushed = pushforward_contact_tangent(&atlas, u, &w, c1)?;
                let g = contact_field(&h, &transition_contact(&atlas, u, c1)?)?;
                worst = worst
                    .max(max_diff(&pushed.xdot, &g.xdot))
                    .max(max_diff(&pushed.pdot, &g.pdot))
                    .max((pushed.zdot - g.zdot).abs());
            }
            Ok(worst)
        }),
        Check::run(S, "antiperiodicity F(x+π) = −F(x)", 1e-14, || {
            let mut worst: f64 = 0.0;
            for (v, _) in &pairs {
                let (x, xd, t) = (v.x[0], v.xdot[0], v.t);
                let f1 = MoebiusLagrangian::formula(&x, &xd, &t);
                let f2 = l.value(c1, &[x + PI, xd, t])?;
                worst = worst.max((f2 + f1).abs());
            }
            Ok(worst)
        }),
    ]
}

fn moebius_region() -> Region {
    Region::new(ChartId(0), vec![0.1, -2.0, -2.0], vec![PI - 0.1, 2.0, 2.0]).expect("valid box")
}

fn quadratic_region() -> Region {
    Region::new(ChartId(0), vec![-2.0, -2.0, -3.0, -3.0, -3.0], vec![2.0, 2.0, 3.0, 3.0, 3.0]).expect("valid box")
}

pub fn legendre_checks(rng: &mut SplitMix64) -> Vec<Check> {
    const S: &str = "legendre";
    const N: usize = 500;
    let moebius = Arc::new(BundleAtlas::moebius());
    let quadratic_l = ScalarSection::quadratic_lagrangian(trivial2(), test_metric());
    let quadratic_h = ScalarSection::quadratic_hamiltonian(trivial2(), &test_metric()).expect("SPD metric");
    let moebius_l = ScalarSection::moebius_lagrangian(moebius.clone()).expect("moebius atlas");
    let moebius_h = ScalarSection::moebius_hamiltonian(moebius.clone()).expect("moebius atlas");
    let quad_v: Vec<AtiyahCoords> = (0..N).map(|_| random_atiyah(rng, ChartId(0), 2)).collect();
    let moeb_v: Vec<AtiyahCoords> = (0..N)
        .map(|_| AtiyahCoords::new(ChartId(0), vec![moebius_x(rng)], rng.vec(1, -2.0, 2.0), rng.uniform(-2.0, 2.0)))
        .collect();
    let cases = [
        ("quadratic", &quadratic_l, &quadratic_h, &quad_v, quadratic_region()),
        ("moebius", &moebius_l, &moebius_h, &moeb_v, moebius_region()),
    ];

    let mut out = vec![Check::run(S, "λ_h∘λ_ℓ = id", 1e-10, || {
        let mut worst: f64 = 0.0;
        for (_, l, h, vs, _) in &cases {
            for v in vs.iter() {
                let back = legendre_from_hamiltonian(h, &legendre_from_lagrangian(l, v)?)?;
                worst = worst.max(max_diff(&back.xdot, &v.xdot)).max((back.t - v.t).abs());
            }
        }
        Ok(worst)
    })];

    out.push(Check::run(S, "ℓ → h → ℓ′ reconstruction", 1e-9, || {
        let mut worst: f64 = 0.0;
        for (_, l, _, vs, region) in &cases {
            let h = hamiltonian_from_lagrangian(l, region)?;
            let l2 = lagrangian_from_hamiltonian(&h, &legendre_image(l, region)?)?;
            for v in vs.iter() {
                worst = worst.max((l2.value_atiyah(v)? - l.value_atiyah(v)?).abs());
            }
        }
        Ok(worst)
    }));

    out.push(Check::run(S, "transform matches closed form", 1e-10, || {
        let mut worst: f64 = 0.0;
        for (_, l, h_exact, vs, region) in &cases {
            let h = hamiltonian_from_lagrangian(l, region)?;
            for v in vs.iter() {
                let u = legendre_from_lagrangian(l, v)?;
                worst = worst.max((h.value_contact(&u)? - h_exact.value_contact(&u)?).abs());
            }
        }
        Ok(worst)
    }));

    out.push(Check::run(S, "D_h = D_ℓ at matched points", 1e-8, || {
        let mut worst: f64 = 0.0;
        for (_, l, _, vs, region) in &cases {
            let h = hamiltonian_from_lagrangian(l, region)?;
            for v in vs.iter() {
                let d_l = lagrangian_implicit(l, v)?;
                let d_h = contact_field(&h, &d_l.base)?;
                worst = worst.max(tangent_diff(&d_h, &d_l));
            }
        }
        Ok(worst)
    }));

    out.push(Check::run(S, "transform chart covariance", 1e-9, || {
        let h = hamiltonian_from_lagrangian(&moebius_l, &moebius_region())?;
        let mut worst: f64 = 0.0;
        for v in &moeb_v {
            let u = legendre_from_lagrangian(&moebius_l, v)?;
            let phi = moebius.transition(ChartId(0), ChartId(1), &u.x)?.cocycle(&u.x).0;
            let moved = transition_contact(&moebius, &u, ChartId(1))?;
            worst = worst.max((h.value_contact(&moved)? - phi * h.value_contact(&u)?).abs());
        }
        Ok(worst)
    }));

    let damped = ScalarSection::damped_hamiltonian(Arc::new(BundleAtlas::trivial(1)), 1.0, 0.5);
    let damped_region = Region::new(ChartId(0), vec![-1.0, -2.0, -2.0], vec![1.0, 2.0, 2.0]).expect("valid box");
    let diag = hyperregularity_probe(&damped, &damped_region, 729);
    let mut c = Check::new(S, "damped h is degenerate", 0.0, 0.0);
    c.passed = diag.verdict == Verdict::Degenerate
        && matches!(lagrangian_from_hamiltonian(&damped, &damped_region), Err(Error::Degenerate { .. }));
    c.max_violation = if c.passed { 0.0 } else { 1.0 };
    c.note = Some(format!(
        "condition {:.1e}, {} collisions",
        diag.sampled_condition_max, diag.injectivity_violations
    ));
    out.push(c);
    out
}

/// Bounding box of the Legendre image of `region` under `l`, sampled on a
/// coarse grid.
fn legendre_image(l: &ScalarSection, region: &Region) -> Result<Region> {
    let mut lo = vec![f64::INFINITY; region.lo.len()];
    let mut hi = vec![f64::NEG_INFINITY; region.lo.len()];
    let n = l.dim();
    for point in region.grid(4) {
        let v = AtiyahCoords::new(region.chart, point[..n].to_vec(), point[n..2 * n].to_vec(), point[2 * n]);
        let u = legendre_from_lagrangian(l, &v)?;
        for (k, val) in u.x.iter().chain(&u.p).chain(std::iter::once(&u.z)).enumerate() {
            lo[k] = lo[k].min(*val);
            hi[k] = hi[k].max(*val);
        }
    }
    Region::new(region.chart, lo, hi)
}

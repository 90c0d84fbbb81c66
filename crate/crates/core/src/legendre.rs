//! Legendre maps between the Atiyah algebroid and the jet bundle, their
//! Newton inversion, sampled hyperregularity diagnostics, and the Legendre
//! transformation of hyperregular sections.
//!
//! The transformed section is evaluated lazily: each query inverts the
//! source's Legendre map by Newton iteration and then builds the exact 2-jet
//! of the result from the source's 2-jet at the preimage, using
//!
//! ```text
//! ∂h/∂x = −∂ℓ/∂x        ∂h/∂u = w
//! ∂²h/∂u² = A⁻¹         ∂²h/∂u∂x = −A⁻¹B       ∂²h/∂x² = −C + BᵀA⁻¹B
//! ```
//!
//! where `w` is the fiber preimage of `u`, `A = ∂²ℓ/∂w²`, `B = ∂²ℓ/∂w∂x`
//! and `C = ∂²ℓ/∂x²`. The same identities serve both directions.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};

use crate::atlas::{cartesian, AtiyahCoords, ChartId, ContactCoords};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{self, condition_number, SINGULAR_CONDITION};
use crate::section::{flatten, ScalarSection, SectionEval, SectionKind};

pub const NEWTON_TOLERANCE: f64 = 1e-12;
pub const NEWTON_MAX_ITERATIONS: usize = 50;
/// Samples used by the transforms' built-in hyperregularity check.
pub const DEFAULT_PROBE_SAMPLES: usize = 729;

const MEMO_CAPACITY: usize = 1 << 16;

/// `(x, ∂ℓ/∂ẋ, ∂ℓ/∂t)` in the chart of `v`.
pub fn legendre_from_lagrangian(l: &ScalarSection, v: &AtiyahCoords) -> Result<ContactCoords> {
    l.expect_kind(SectionKind::Lagrangian)?;
    let n = v.x.len();
    let j = l.jet_at(v.chart, &flatten(&v.x, &v.xdot, v.t))?;
    Ok(ContactCoords { chart: v.chart, x: v.x.clone(), p: j.grad()[n..2 * n].to_vec(), z: j.d(2 * n) })
}

/// `(x, ∂h/∂p, ∂h/∂z)` in the chart of `u`.
pub fn legendre_from_hamiltonian(h: &ScalarSection, u: &ContactCoords) -> Result<AtiyahCoords> {
    h.expect_kind(SectionKind::Hamiltonian)?;
    let n = u.x.len();
    let j = h.jet_at(u.chart, &flatten(&u.x, &u.p, u.z))?;
    Ok(AtiyahCoords { chart: u.chart, x: u.x.clone(), xdot: j.grad()[n..2 * n].to_vec(), t: j.d(2 * n) })
}

/// Solves `∂s/∂w (x, w) = target` for the fiber variables `w` by Newton's
/// method with the exact fiber Hessian. Returns `w` and the 2-jet of `s` at
/// `(x, w)`.
fn newton_fiber(
    s: &ScalarSection,
    chart: ChartId,
    x: &[f64],
    target: &[f64],
    guess: Vec<f64>,
) -> Result<(Vec<f64>, Jet)> {
    let n = x.len();
    let m = target.len();
    let tol = NEWTON_TOLERANCE * target.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let mut w = guess;
    let mut residual = f64::INFINITY;
    for _ in 0..=NEWTON_MAX_ITERATIONS {
        let mut args = x.to_vec();
        args.extend_from_slice(&w);
        let j = s.jet_at(chart, &args)?;
        let f = DVector::from_fn(m, |a, _| j.d(n + a) - target[a]);
        residual = f.amax();
        if !residual.is_finite() {
            break;
        }
        if residual <= tol {
            return Ok((w, j));
        }
        let hess = DMatrix::from_fn(m, m, |a, b| j.d2(n + a, n + b));
        let step = linalg::solve(hess, -f)?;
        w.iter_mut().zip(step.iter()).for_each(|(wi, d)| *wi += d);
    }
    Err(Error::NoConvergence { residual })
}

/// Inverse of [`legendre_from_lagrangian`] at `u`, starting from `guess`.
pub fn invert_legendre(l: &ScalarSection, u: &ContactCoords, guess: &AtiyahCoords) -> Result<AtiyahCoords> {
    l.expect_kind(SectionKind::Lagrangian)?;
    let mut target = u.p.clone();
    target.push(u.z);
    let mut start = guess.xdot.clone();
    start.push(guess.t);
    let (w, _) = newton_fiber(l, u.chart, &u.x, &target, start)?;
    let n = u.x.len();
    Ok(AtiyahCoords { chart: u.chart, x: u.x.clone(), xdot: w[..n].to_vec(), t: w[n] })
}

/// Inverse of [`legendre_from_hamiltonian`] at `v`, starting from `guess`.
pub fn invert_legendre_hamiltonian(
    h: &ScalarSection,
    v: &AtiyahCoords,
    guess: &ContactCoords,
) -> Result<ContactCoords> {
    h.expect_kind(SectionKind::Hamiltonian)?;
    let mut target = v.xdot.clone();
    target.push(v.t);
    let mut start = guess.p.clone();
    start.push(guess.z);
    let (w, _) = newton_fiber(h, v.chart, &v.x, &target, start)?;
    let n = v.x.len();
    Ok(ContactCoords { chart: v.chart, x: v.x.clone(), p: w[..n].to_vec(), z: w[n] })
}

/// A box over the full argument list `(x, fiber, last)` of a section, in one
/// chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub chart: ChartId,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn new(chart: ChartId, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), actual: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::config("region", "bounds must be finite with lo <= hi"));
        }
        Ok(Region { chart, lo, hi })
    }

    /// Grid with `k` points per axis including the endpoints.
    pub fn grid(&self, k: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| {
                if k <= 1 || lo == hi {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
                }
            })
            .collect();
        cartesian(&axes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    HyperregularOnSamples,
    Degenerate,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::HyperregularOnSamples => "hyperregular-on-samples",
            Verdict::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreDiagnostics {
    pub sampled_condition_max: f64,
    pub injectivity_violations: usize,
    pub samples: usize,
    pub verdict: Verdict,
}

/// Number of fiber variables of a section: `(ẋ, t)` / `(p, z)`, or just `ẋ`
/// for Herglotz Lagrangians.
fn fiber_width(s: &ScalarSection) -> usize {
    match s.kind() {
        SectionKind::Herglotz => s.dim(),
        _ => s.dim() + 1,
    }
}

/// Samples the fiber derivative of `s` on a grid over `region`: records the
/// worst condition number of the fiber Jacobian and counts grid points whose
/// images land in an already occupied cell of size 1e-6·diameter.
pub fn hyperregularity_probe(s: &ScalarSection, region: &Region, samples: usize) -> LegendreDiagnostics {
    let n = s.dim();
    let m = fiber_width(s);
    let d = 2 * n + 1;
    let k = ((samples.max(1) as f64).powf(1.0 / d as f64).ceil() as usize).max(2);
    let mut condition_max: f64 = 0.0;
    let mut images: Vec<Vec<f64>> = Vec::new();
    for point in region.grid(k) {
        match s.jet_at(region.chart, &point) {
            Ok(j) => {
                let hess = DMatrix::from_fn(m, m, |a, b| j.d2(n + a, n + b));
                let c = condition_number(&hess);
                condition_max = condition_max.max(if c.is_nan() { f64::INFINITY } else { c });
                let mut img = point[..n].to_vec();
                img.extend((0..m).map(|a| j.d(n + a)));
                images.push(img);
            }
            Err(_) => condition_max = f64::INFINITY,
        }
    }
    let width = images.first().map_or(0, Vec::len);
    let diameter = (0..width)
        .map(|c| {
            let (lo, hi) = images.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), im| {
                (lo.min(im[c]), hi.max(im[c]))
            });
            hi - lo
        })
        .fold(0.0f64, f64::max);
    let cell = if diameter > 0.0 { 1e-6 * diameter } else { 1e-6 };
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut collisions = 0;
    for img in &images {
        let key: Vec<i64> = img.iter().map(|v| (v / cell).floor() as i64).collect();
        let count = seen.entry(key).or_insert(0);
        if *count > 0 {
            collisions += 1;
        }
        *count += 1;
    }
    let verdict = if condition_max > SINGULAR_CONDITION || collisions > 0 {
        Verdict::Degenerate
    } else {
        Verdict::HyperregularOnSamples
    };
    LegendreDiagnostics {
        sampled_condition_max: condition_max,
        injectivity_violations: collisions,
        samples: images.len(),
        verdict,
    }
}

/// The Legendre transform of a hyperregular section, evaluated on demand.
#[derive(Debug)]
pub struct LegendreTransform {
    source: ScalarSection,
    memo: Mutex<HashMap<(ChartId, Vec<u64>), Vec<f64>>>,
    last: Mutex<Option<Vec<f64>>>,
}

impl LegendreTransform {
    fn new(source: ScalarSection) -> Self {
        LegendreTransform { source, memo: Mutex::new(HashMap::new()), last: Mutex::new(None) }
    }

    pub fn source(&self) -> &ScalarSection {
        &self.source
    }

    fn key(chart: ChartId, point: &[f64]) -> (ChartId, Vec<u64>) {
        let bits = point
            .iter()
            .map(|v| {
                let r = (v * 1e12).round();
                if r == 0.0 { 0.0f64 } else { r }.to_bits()
            })
            .collect();
        (chart, bits)
    }

    /// Fiber preimage `w` of the point `(x, u)` and the source 2-jet there.
    fn preimage(&self, chart: ChartId, point: &[f64]) -> Result<(Vec<f64>, Jet)> {
        let n = self.source.dim();
        let (x, target) = point.split_at(n);
        let key = Self::key(chart, point);
        let cached = self.memo.lock().expect("memo poisoned").get(&key).cloned();
        if let Some(w) = cached {
            let mut args = x.to_vec();
            args.extend_from_slice(&w);
            let j = self.source.jet_at(chart, &args)?;
            return Ok((w, j));
        }
        let warm = self.last.lock().expect("warm start poisoned").clone();
        let cold = vec![0.0; target.len()];
        let solved = match warm {
            Some(w0) if w0.len() == target.len() => newton_fiber(&self.source, chart, x, target, w0)
                .or_else(|_| newton_fiber(&self.source, chart, x, target, cold)),
            _ => newton_fiber(&self.source, chart, x, target, cold),
        }?;
        *self.last.lock().expect("warm start poisoned") = Some(solved.0.clone());
        let mut memo = self.memo.lock().expect("memo poisoned");
        if memo.len() >= MEMO_CAPACITY {
            memo.clear();
        }
        memo.insert(key, solved.0.clone());
        Ok(solved)
    }
}

impl SectionEval for LegendreTransform {
    fn eval_jet(&self, chart: ChartId, args: &[Jet]) -> Result<Jet> {
        let n = self.source.dim();
        let m = args.len() - n;
        let point: Vec<f64> = args.iter().map(Jet::value).collect();
        let (w, j) = self.preimage(chart, &point)?;
        let u = &point[n..];

        let a = DMatrix::from_fn(m, m, |r, c| j.d2(n + r, n + c));
        let condition = condition_number(&a);
        if condition > SINGULAR_CONDITION {
            return Err(Error::SingularHessian { condition });
        }
        let a_inv = a.try_inverse().ok_or(Error::SingularHessian { condition: f64::INFINITY })?;
        let b = DMatrix::from_fn(m, n, |r, c| j.d2(n + r, c));
        let c = DMatrix::from_fn(n, n, |r, s| j.d2(r, s));
        let dw_dx = -(&a_inv * &b);
        let hxx = -c + b.transpose() * &a_inv * &b;

        let value = u.iter().zip(&w).map(|(ui, wi)| ui * wi).sum::<f64>() - j.value();
        let mut grad: Vec<f64> = (0..n).map(|i| -j.d(i)).collect();
        grad.extend_from_slice(&w);
        let hess = DMatrix::from_fn(n + m, n + m, |r, s| match (r < n, s < n) {
            (true, true) => hxx[(r, s)],
            (false, false) => a_inv[(r - n, s - n)],
            (false, true) => dw_dx[(r - n, s)],
            (true, false) => dw_dx[(s - n, r)],
        });
        Ok(Jet::from_parts(value, grad, &hess).compose(&point, args))
    }
}

fn transform(source: &ScalarSection, target: SectionKind, region: &Region) -> Result<ScalarSection> {
    let diag = hyperregularity_probe(source, region, DEFAULT_PROBE_SAMPLES);
    if diag.verdict == Verdict::Degenerate {
        return Err(Error::Degenerate {
            condition_max: diag.sampled_condition_max,
            injectivity_violations: diag.injectivity_violations,
        });
    }
    Ok(ScalarSection::new(
        target,
        source.atlas().clone(),
        std::sync::Arc::new(LegendreTransform::new(source.clone())),
    ))
}

/// `h(u) = Π(u, λ_ℓ⁻¹(u)) − ℓ(λ_ℓ⁻¹(u))`, after checking hyperregularity of
/// `ℓ` on `region`.
pub fn hamiltonian_from_lagrangian(l: &ScalarSection, region: &Region) -> Result<ScalarSection> {
    l.expect_kind(SectionKind::Lagrangian)?;
    transform(l, SectionKind::Hamiltonian, region)
}

/// `ℓ(v) = Π(λ_h⁻¹(v), v) − h(λ_h⁻¹(v))`, after checking hyperregularity of
/// `h` on `region`.
pub fn lagrangian_from_hamiltonian(h: &ScalarSection, region: &Region) -> Result<ScalarSection> {
    h.expect_kind(SectionKind::Hamiltonian)?;
    transform(h, SectionKind::Lagrangian, region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::BundleAtlas;
    use crate::expr::{lagrangian_signature, parse};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn trivial() -> Arc<BundleAtlas> {
        Arc::new(BundleAtlas::trivial(1))
    }

    fn lagrangian(src: &str) -> ScalarSection {
        let sig = lagrangian_signature(1);
        let sig: Vec<&str> = sig.iter().map(String::as_str).collect();
        ScalarSection::from_expr(SectionKind::Lagrangian, trivial(), parse(src, &sig, &["c"]).unwrap(), vec![2.0])
            .unwrap()
    }

    fn quadratic() -> ScalarSection {
        ScalarSection::quadratic_lagrangian(trivial(), DMatrix::identity(1, 1))
    }

    fn unit_region() -> Region {
        Region::new(ChartId(0), vec![-1.0, -2.0, -2.0], vec![1.0, 2.0, 2.0]).unwrap()
    }

    #[test]
    fn quadratic_legendre_map() {
        let u = legendre_from_lagrangian(&quadratic(), &AtiyahCoords::new(ChartId(0), vec![0.5], vec![3.0], 4.0))
            .unwrap();
        assert_eq!((u.p[0], u.z), (3.0, 4.0));
    }

    #[test]
    fn moebius_legendre_map_is_the_rotation_reflection() {
        let l = ScalarSection::moebius_lagrangian(Arc::new(BundleAtlas::moebius())).unwrap();
        let at0 = legendre_from_lagrangian(&l, &AtiyahCoords::new(ChartId(0), vec![0.0], vec![1.3], 0.7)).unwrap();
        assert_eq!((at0.p[0], at0.z), (1.3, -0.7));
        let mid = legendre_from_lagrangian(&l, &AtiyahCoords::new(ChartId(0), vec![PI / 2.0], vec![1.3], 0.7)).unwrap();
        assert!((mid.p[0] - 0.7).abs() < 1e-15 && (mid.z - 1.3).abs() < 1e-15);
        let zero = legendre_from_lagrangian(&l, &AtiyahCoords::new(ChartId(0), vec![1.0], vec![0.0], 0.0)).unwrap();
        assert_eq!((zero.p[0], zero.z), (0.0, 0.0));
    }

    #[test]
    fn hamiltonian_legendre_map() {
        let h = ScalarSection::quadratic_hamiltonian(trivial(), &DMatrix::identity(1, 1)).unwrap();
        let v = legendre_from_hamiltonian(&h, &ContactCoords::new(ChartId(0), vec![0.0], vec![3.0], 4.0)).unwrap();
        assert_eq!((v.xdot[0], v.t), (3.0, 4.0));
        let damped = ScalarSection::damped_hamiltonian(trivial(), 1.0, 0.5);
        for (p, z) in [(0.0, 0.0), (3.0, -1.0), (-2.0, 8.0)] {
            let v = legendre_from_hamiltonian(&damped, &ContactCoords::new(ChartId(0), vec![0.0], vec![p], z)).unwrap();
            assert_eq!(v.t, 0.5);
        }
    }

    #[test]
    fn quartic_inversion() {
        let l = lagrangian("xd1^4 + t^2/2");
        let u = ContactCoords::new(ChartId(0), vec![0.0], vec![32.0], 0.0);
        let v = invert_legendre(&l, &u, &AtiyahCoords::new(ChartId(0), vec![0.0], vec![1.5], 0.0)).unwrap();
        assert!((v.xdot[0] - 2.0).abs() < 1e-12);
        assert!(v.t.abs() < 1e-12);
    }

    #[test]
    fn quadratic_inversion_is_identity() {
        let u = ContactCoords::new(ChartId(0), vec![0.1], vec![-3.0], 7.0);
        let v = invert_legendre(&quadratic(), &u, &AtiyahCoords::new(ChartId(0), vec![0.1], vec![100.0], -5.0))
            .unwrap();
        assert!((v.xdot[0] + 3.0).abs() < 1e-12 && (v.t - 7.0).abs() < 1e-12);
    }

    #[test]
    fn singular_inversion() {
        let l = lagrangian("c*xd1 + t^2/2");
        let u = ContactCoords::new(ChartId(0), vec![0.0], vec![1.0], 0.0);
        let r = invert_legendre(&l, &u, &AtiyahCoords::new(ChartId(0), vec![0.0], vec![0.0], 0.0));
        assert!(matches!(r, Err(Error::SingularHessian { .. })));
    }

    #[test]
    fn quadratic_transform_value() {
        let h = hamiltonian_from_lagrangian(&quadratic(), &unit_region()).unwrap();
        let v = h.value_contact(&ContactCoords::new(ChartId(0), vec![0.0], vec![3.0], 4.0)).unwrap();
        assert!((v - 12.5).abs() < 1e-12);
        let j = h.jet_at(ChartId(0), &[0.2, 3.0, 4.0]).unwrap();
        assert!((j.d(1) - 3.0).abs() < 1e-12 && (j.d(2) - 4.0).abs() < 1e-12);
        assert!((j.d2(1, 1) - 1.0).abs() < 1e-12 && j.d2(1, 2).abs() < 1e-12);
    }

    #[test]
    fn linear_lagrangian_is_degenerate() {
        let l = lagrangian("c*xd1");
        assert!(matches!(hamiltonian_from_lagrangian(&l, &unit_region()), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn probe_verdicts() {
        let d = hyperregularity_probe(&quadratic(), &unit_region(), 200);
        assert_eq!(d.verdict, Verdict::HyperregularOnSamples);
        assert!((d.sampled_condition_max - 1.0).abs() < 1e-12);
        assert_eq!(d.injectivity_violations, 0);

        let damped = ScalarSection::damped_hamiltonian(trivial(), 1.0, 0.5);
        let d = hyperregularity_probe(&damped, &unit_region(), 200);
        assert_eq!(d.verdict, Verdict::Degenerate);
        assert!(d.injectivity_violations > 0);
        assert!(d.sampled_condition_max > 1e12);
    }

    #[test]
    fn damped_hamiltonian_has_no_lagrangian() {
        let damped = ScalarSection::damped_hamiltonian(trivial(), 1.0, 0.5);
        assert!(matches!(lagrangian_from_hamiltonian(&damped, &unit_region()), Err(Error::Degenerate { .. })));
    }
}

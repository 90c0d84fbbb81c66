//! Hamiltonians, Lagrangians and Herglotz Lagrangians as per-chart scalar
//! functions with values in the dual line bundle.
//!
//! Every section is evaluated on a flat argument list `[x₁..xₙ, a₁..aₙ, b]`
//! where `(a, b)` is `(p, z)`, `(ẋ, t)` or `(ẋ, z)` depending on the kind.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::atlas::{AtiyahCoords, AtlasKind, BundleAtlas, ChartId, ContactCoords};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{Jet, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    Hamiltonian,
    Lagrangian,
    Herglotz,
}

impl SectionKind {
    pub fn name(self) -> &'static str {
        match self {
            SectionKind::Hamiltonian => "hamiltonian",
            SectionKind::Lagrangian => "lagrangian",
            SectionKind::Herglotz => "herglotz",
        }
    }
}

/// A per-chart evaluator. Implementations must be pure.
pub trait SectionEval: Send + Sync + fmt::Debug {
    fn eval_jet(&self, chart: ChartId, args: &[Jet]) -> Result<Jet>;

    fn eval_f64(&self, chart: ChartId, args: &[f64]) -> Result<f64> {
        let consts: Vec<Jet> = args.iter().map(|&a| Jet::constant(a)).collect();
        self.eval_jet(chart, &consts).map(|j| j.value())
    }
}

#[derive(Clone)]
pub struct ScalarSection {
    kind: SectionKind,
    atlas: Arc<BundleAtlas>,
    eval: Arc<dyn SectionEval>,
}

impl fmt::Debug for ScalarSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarSection").field("kind", &self.kind).field("eval", &self.eval).finish()
    }
}

impl ScalarSection {
    pub fn new(kind: SectionKind, atlas: Arc<BundleAtlas>, eval: Arc<dyn SectionEval>) -> Self {
        ScalarSection { kind, atlas, eval }
    }

    pub fn kind(&self) -> SectionKind {
        self.kind
    }

    pub fn atlas(&self) -> &Arc<BundleAtlas> {
        &self.atlas
    }

    pub fn dim(&self) -> usize {
        self.atlas.dim()
    }

    pub fn evaluator(&self) -> &Arc<dyn SectionEval> {
        &self.eval
    }

    pub fn expect_kind(&self, kind: SectionKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::KindMismatch { expected: kind.name(), actual: self.kind.name() })
        }
    }

    fn check_args(&self, chart: ChartId, len: usize) -> Result<()> {
        self.atlas.chart(chart)?;
        let expected = 2 * self.dim() + 1;
        if len != expected {
            return Err(Error::DimensionMismatch { expected, actual: len });
        }
        Ok(())
    }

    pub fn value(&self, chart: ChartId, args: &[f64]) -> Result<f64> {
        self.check_args(chart, args.len())?;
        self.eval.eval_f64(chart, args)
    }

    pub fn jet(&self, chart: ChartId, args: &[Jet]) -> Result<Jet> {
        self.check_args(chart, args.len())?;
        self.eval.eval_jet(chart, args)
    }

    /// Full 2-jet with respect to the section's own arguments.
    pub fn jet_at(&self, chart: ChartId, args: &[f64]) -> Result<Jet> {
        let j = self.jet(chart, &Jet::seed(args))?.widened(args.len());
        if !j.is_finite() {
            return Err(Error::Domain("non-finite section derivative".into()));
        }
        Ok(j)
    }

    pub fn value_contact(&self, u: &ContactCoords) -> Result<f64> {
        self.value(u.chart, &flatten(&u.x, &u.p, u.z))
    }

    pub fn value_atiyah(&self, v: &AtiyahCoords) -> Result<f64> {
        self.value(v.chart, &flatten(&v.x, &v.xdot, v.t))
    }
}

pub fn flatten(x: &[f64], a: &[f64], b: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * x.len() + 1);
    out.extend_from_slice(x);
    out.extend_from_slice(a);
    out.push(b);
    out
}

/// Split a flat argument list into `(x, a, b)`.
pub fn split<S: Clone>(args: &[S]) -> (&[S], &[S], &S) {
    let n = (args.len() - 1) / 2;
    (&args[..n], &args[n..2 * n], &args[2 * n])
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::constant(0.0), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn quad_form<S: Scalar>(m: &DMatrix<f64>, v: &[S]) -> S {
    let mut acc = S::constant(0.0);
    for i in 0..v.len() {
        for j in 0..v.len() {
            let c = m[(i, j)];
            if c != 0.0 {
                acc = acc + (v[i].clone() * v[j].clone()).scale(c);
            }
        }
    }
    acc
}

/// ℓ(x, ẋ, t) = (ẋᵀ g ẋ + t²) / 2 for a constant metric g.
#[derive(Debug, Clone)]
pub struct QuadraticLagrangian {
    pub metric: DMatrix<f64>,
}

impl SectionEval for QuadraticLagrangian {
    fn eval_jet(&self, _chart: ChartId, args: &[Jet]) -> Result<Jet> {
        let (_, v, t) = split(args);
        Ok((quad_form(&self.metric, v) + t.powi(2)).scale(0.5))
    }
}

/// h(x, p, z) = (pᵀ g⁻¹ p + z²) / 2, the closed-form transform of
/// [`QuadraticLagrangian`].
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    pub inverse_metric: DMatrix<f64>,
}

impl SectionEval for QuadraticHamiltonian {
    fn eval_jet(&self, _chart: ChartId, args: &[Jet]) -> Result<Jet> {
        let (_, p, z) = split(args);
        Ok((quad_form(&self.inverse_metric, p) + z.powi(2)).scale(0.5))
    }
}

/// Free motion with linear dissipation: h = |p|²/(2m) + λ z.
#[derive(Debug, Clone, Copy)]
pub struct DampedHamiltonian {
    pub mass: f64,
    pub lambda: f64,
}

impl SectionEval for DampedHamiltonian {
    fn eval_jet(&self, _chart: ChartId, args: &[Jet]) -> Result<Jet> {
        let (_, p, z) = split(args);
        Ok(dot(p, p).scale(0.5 / self.mass) + z.scale(self.lambda))
    }
}

/// ℓ̄(x, ẋ, z) = m|ẋ|²/2 − λ z.
#[derive(Debug, Clone, Copy)]
pub struct DampedHerglotz {
    pub mass: f64,
    pub lambda: f64,
}

impl SectionEval for DampedHerglotz {
    fn eval_jet(&self, _chart: ChartId, args: &[Jet]) -> Result<Jet> {
        let (_, v, z) = split(args);
        Ok(dot(v, v).scale(0.5 * self.mass) - z.scale(self.lambda))
    }
}

/// The hyperregular Lagrangian on the Möbius band,
/// F(x, ẋ, t) = cos(x)(ẋ² − t²)/2 + sin(x) t ẋ, with the same formula in
/// both charts. Since F(x + π) = −F(x) the two chart expressions glue into a
/// section of the flipped bundle.
#[derive(Debug, Clone, Copy, Default)]
pub struct MoebiusLagrangian;

impl MoebiusLagrangian {
    pub fn formula<S: Scalar>(x: &S, xdot: &S, t: &S) -> S {
        let (c, s) = (x.cos(), x.sin());
        c * (xdot.powi(2) - t.powi(2)).scale(0.5) + s * t.clone() * xdot.clone()
    }
}

impl SectionEval for MoebiusLagrangian {
    fn eval_jet(&self, _chart: ChartId, args: &[Jet]) -> Result<Jet> {
        Ok(MoebiusLagrangian::formula(&args[0], &args[1], &args[2]))
    }
}

/// Closed-form Legendre transform of [`MoebiusLagrangian`]:
/// h(x, p, z) = cos(x)(p² − z²)/2 + sin(x) p z.
#[derive(Debug, Clone, Copy, Default)]
pub struct MoebiusHamiltonian;

impl SectionEval for MoebiusHamiltonian {
    fn eval_jet(&self, _chart: ChartId, args: &[Jet]) -> Result<Jet> {
        Ok(MoebiusLagrangian::formula(&args[0], &args[1], &args[2]))
    }
}

/// A DSL expression whose signature matches the section's argument list.
#[derive(Debug, Clone)]
pub struct ExprSection {
    pub expr: Expr,
    pub params: Vec<f64>,
}

impl SectionEval for ExprSection {
    fn eval_jet(&self, _chart: ChartId, args: &[Jet]) -> Result<Jet> {
        self.expr.eval_with(args, &self.params)
    }

    fn eval_f64(&self, _chart: ChartId, args: &[f64]) -> Result<f64> {
        self.expr.eval(args, &self.params)
    }
}

impl ScalarSection {
    pub fn quadratic_lagrangian(atlas: Arc<BundleAtlas>, metric: DMatrix<f64>) -> Self {
        ScalarSection::new(SectionKind::Lagrangian, atlas, Arc::new(QuadraticLagrangian { metric }))
    }

    pub fn quadratic_hamiltonian(atlas: Arc<BundleAtlas>, metric: &DMatrix<f64>) -> Result<Self> {
        let inverse_metric = metric
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::config("metric", "metric is not invertible"))?;
        Ok(ScalarSection::new(SectionKind::Hamiltonian, atlas, Arc::new(QuadraticHamiltonian { inverse_metric })))
    }

    pub fn damped_hamiltonian(atlas: Arc<BundleAtlas>, mass: f64, lambda: f64) -> Self {
        ScalarSection::new(SectionKind::Hamiltonian, atlas, Arc::new(DampedHamiltonian { mass, lambda }))
    }

    pub fn damped_herglotz(atlas: Arc<BundleAtlas>, mass: f64, lambda: f64) -> Self {
        ScalarSection::new(SectionKind::Herglotz, atlas, Arc::new(DampedHerglotz { mass, lambda }))
    }

    /// Requires the Möbius atlas.
    pub fn moebius_lagrangian(atlas: Arc<BundleAtlas>) -> Result<Self> {
        require_moebius(&atlas)?;
        Ok(ScalarSection::new(SectionKind::Lagrangian, atlas, Arc::new(MoebiusLagrangian)))
    }

    pub fn moebius_hamiltonian(atlas: Arc<BundleAtlas>) -> Result<Self> {
        require_moebius(&atlas)?;
        Ok(ScalarSection::new(SectionKind::Hamiltonian, atlas, Arc::new(MoebiusHamiltonian)))
    }

    /// DSL-backed section; only meaningful on a trivial bundle.
    pub fn from_expr(kind: SectionKind, atlas: Arc<BundleAtlas>, expr: Expr, params: Vec<f64>) -> Result<Self> {
        if atlas.kind() != AtlasKind::Trivial {
            return Err(Error::config("bundle", "expression sections require the trivial bundle"));
        }
        let n = atlas.dim();
        if expr.variables().len() != 2 * n + 1 {
            return Err(Error::DimensionMismatch { expected: 2 * n + 1, actual: expr.variables().len() });
        }
        Ok(ScalarSection::new(kind, atlas, Arc::new(ExprSection { expr, params })))
    }
}

fn require_moebius(atlas: &BundleAtlas) -> Result<()> {
    if atlas.kind() == AtlasKind::Moebius {
        Ok(())
    } else {
        Err(Error::config("bundle", "the Möbius sections need the Möbius atlas"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::{transition_atiyah, transition_contact};
    use std::f64::consts::PI;

    #[test]
    fn moebius_lagrangian_is_antiperiodic() {
        for &(x, xd, t) in &[(0.3, 1.0, -2.0), (1.2, -0.5, 0.7), (0.01, 3.0, 3.0)] {
            let f1 = MoebiusLagrangian::formula(&x, &xd, &t);
            let f2 = MoebiusLagrangian::formula(&(x + PI), &xd, &t);
            assert!((f2 + f1).abs() < 1e-14);
        }
    }

    #[test]
    fn moebius_sections_are_chart_compatible() {
        let atlas = Arc::new(BundleAtlas::moebius());
        let l = ScalarSection::moebius_lagrangian(atlas.clone()).unwrap();
        let h = ScalarSection::moebius_hamiltonian(atlas.clone()).unwrap();
        for &x in &[0.2, 0.9, 1.8, 2.9] {
            let v = AtiyahCoords::new(ChartId(0), vec![x], vec![0.7], -1.3);
            let v2 = transition_atiyah(&atlas, &v, ChartId(1)).unwrap();
            let phi = if x < PI / 2.0 { -1.0 } else { 1.0 };
            assert!((l.value_atiyah(&v2).unwrap() - phi * l.value_atiyah(&v).unwrap()).abs() < 1e-12);

            let u = ContactCoords::new(ChartId(0), vec![x], vec![0.4], 2.2);
            let u2 = transition_contact(&atlas, &u, ChartId(1)).unwrap();
            assert!((h.value_contact(&u2).unwrap() - phi * h.value_contact(&u).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn moebius_requires_moebius_atlas() {
        assert!(ScalarSection::moebius_lagrangian(Arc::new(BundleAtlas::trivial(1))).is_err());
    }

    #[test]
    fn argument_count_is_checked() {
        let h = ScalarSection::damped_hamiltonian(Arc::new(BundleAtlas::trivial(2)), 1.0, 0.5);
        assert!(matches!(h.value(ChartId(0), &[0.0; 3]), Err(Error::DimensionMismatch { expected: 5, actual: 3 })));
        assert_eq!(h.value(ChartId(0), &[0.0, 0.0, 1.0, 1.0, 2.0]).unwrap(), 2.0);
    }
}

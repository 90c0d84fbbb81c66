//! Base-manifold atlases, line-bundle cocycles and the coordinate transition
//! laws for points of the jet bundle, the Atiyah algebroid and the cotangent
//! cover.
//!
//! Base transitions are translations (the identity on boxes in ℝⁿ or the
//! half-turn shift on the circle), so their Jacobian is the identity and
//! fiber momenta only pick up the cocycle terms.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};

/// Margin used for half-open overlap membership.
pub const OVERLAP_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChartId(pub usize);

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An axis-aligned box; bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn whole(dim: usize) -> Self {
        Domain { lo: vec![f64::NEG_INFINITY; dim], hi: vec![f64::INFINITY; dim] }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Domain { lo: vec![lo], hi: vec![hi] }
    }

    /// Half-open membership `[lo + margin, hi - margin)`.
    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.lo.len()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&lo, &hi))| v >= lo + margin && v < hi - margin)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_margin(x, OVERLAP_MARGIN)
    }

    /// The box shrunk by `fraction` of its length on every finite side.
    pub fn shrunk(&self, fraction: f64) -> Domain {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for i in 0..lo.len() {
            let len = hi[i] - lo[i];
            if len.is_finite() {
                lo[i] += fraction * len;
                hi[i] -= fraction * len;
            }
        }
        Domain { lo, hi }
    }

    /// `k` evenly spaced interior points per axis; infinite sides are clamped
    /// to ±`clamp`.
    pub fn grid(&self, k: usize, clamp: f64) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| {
                let (lo, hi) = (lo.max(-clamp), hi.min(clamp));
                (0..k).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / k as f64).collect()
            })
            .collect();
        cartesian(&axes)
    }
}

pub(crate) fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub name: String,
    pub domain: Domain,
}

/// Trivialization change `z' = φ(x) z` of the dual line bundle.
#[derive(Debug, Clone, PartialEq)]
pub enum Cocycle {
    Constant(f64),
    /// φ(x) = exp(rate · x)
    Exponential { rate: Vec<f64> },
}

impl Cocycle {
    /// φ(x) and its gradient.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> (S, Vec<S>) {
        match self {
            Cocycle::Constant(c) => (S::constant(*c), vec![S::constant(0.0); x.len()]),
            Cocycle::Exponential { rate } => {
                let arg = x
                    .iter()
                    .zip(rate)
                    .fold(S::constant(0.0), |acc, (xi, r)| acc + xi.scale(*r));
                let phi = arg.exp();
                let grad = rate.iter().map(|r| phi.scale(*r)).collect();
                (phi, grad)
            }
        }
    }
}

/// One connected component of the overlap of two charts, described from the
/// `from` side.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapPiece {
    pub from: ChartId,
    pub to: ChartId,
    /// Component of the overlap in `from` coordinates.
    pub region: Domain,
    /// Base transition x' = x + shift.
    pub shift: Vec<f64>,
    pub cocycle: Cocycle,
}

impl OverlapPiece {
    pub fn map_base<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        x.iter().zip(&self.shift).map(|(xi, s)| xi.clone() + S::constant(*s)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtlasKind {
    Trivial,
    Moebius,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleAtlas {
    dim: usize,
    kind: AtlasKind,
    charts: Vec<Chart>,
    pieces: Vec<OverlapPiece>,
}

/// What a transition does to a point: the overlap piece, or nothing when
/// source and target chart coincide.
#[derive(Debug, Clone, Copy)]
pub enum Transition<'a> {
    Identity,
    Piece(&'a OverlapPiece),
}

impl Transition<'_> {
    pub fn map_base<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        match self {
            Transition::Identity => x.to_vec(),
            Transition::Piece(p) => p.map_base(x),
        }
    }

    pub fn cocycle<S: Scalar>(&self, x: &[S]) -> (S, Vec<S>) {
        match self {
            Transition::Identity => (S::constant(1.0), vec![S::constant(0.0); x.len()]),
            Transition::Piece(p) => p.cocycle.eval(x),
        }
    }

    /// (x, p, z) ↦ (x + shift, z ∇φ + φ p, φ z)
    pub fn contact<S: Scalar>(&self, x: &[S], p: &[S], z: S) -> (Vec<S>, Vec<S>, S) {
        let (phi, dphi) = self.cocycle(x);
        let p2 = p.iter().zip(&dphi).map(|(pi, di)| z.clone() * di.clone() + phi.clone() * pi.clone()).collect();
        (self.map_base(x), p2, phi * z)
    }

    /// (x, ẋ, t) ↦ (x + shift, ẋ, t − ∇φ·ẋ / φ)
    pub fn atiyah<S: Scalar>(&self, x: &[S], xdot: &[S], t: S) -> (Vec<S>, Vec<S>, S) {
        let (phi, dphi) = self.cocycle(x);
        let drift = xdot.iter().zip(&dphi).fold(S::constant(0.0), |acc, (v, d)| acc + v.clone() * d.clone());
        (self.map_base(x), xdot.to_vec(), t - drift / phi)
    }
}

impl BundleAtlas {
    /// One chart covering ℝⁿ with the trivial line bundle.
    pub fn trivial(dim: usize) -> Self {
        assert!(dim > 0, "base dimension must be positive");
        BundleAtlas {
            dim,
            kind: AtlasKind::Trivial,
            charts: vec![Chart { name: "R^n".into(), domain: Domain::whole(dim) }],
            pieces: Vec::new(),
        }
    }

    /// The Möbius band over the circle ℝ/πℤ: chart 0 covers ]0, π[, chart 1
    /// covers ]π/2, 3π/2[. The overlap has two components; on ]π/2, π[ the
    /// transition is the identity, while ]0, π/2[ is glued to ]π, 3π/2[ by
    /// x ↦ x + π with the fiber flipped.
    pub fn moebius() -> Self {
        let (c0, c1) = (ChartId(0), ChartId(1));
        let pieces = vec![
            OverlapPiece {
                from: c0,
                to: c1,
                region: Domain::interval(PI / 2.0, PI),
                shift: vec![0.0],
                cocycle: Cocycle::Constant(1.0),
            },
            OverlapPiece {
                from: c0,
                to: c1,
                region: Domain::interval(0.0, PI / 2.0),
                shift: vec![PI],
                cocycle: Cocycle::Constant(-1.0),
            },
            OverlapPiece {
                from: c1,
                to: c0,
                region: Domain::interval(PI / 2.0, PI),
                shift: vec![0.0],
                cocycle: Cocycle::Constant(1.0),
            },
            OverlapPiece {
                from: c1,
                to: c0,
                region: Domain::interval(PI, 1.5 * PI),
                shift: vec![-PI],
                cocycle: Cocycle::Constant(-1.0),
            },
        ];
        BundleAtlas {
            dim: 1,
            kind: AtlasKind::Moebius,
            charts: vec![
                Chart { name: "O1".into(), domain: Domain::interval(0.0, PI) },
                Chart { name: "O2".into(), domain: Domain::interval(PI / 2.0, 1.5 * PI) },
            ],
            pieces,
        }
    }

    /// An arbitrary atlas; no consistency is enforced here, see
    /// [`validate_atlas`].
    pub fn custom(dim: usize, charts: Vec<Chart>, pieces: Vec<OverlapPiece>) -> Self {
        BundleAtlas { dim, kind: AtlasKind::Custom, charts, pieces }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> AtlasKind {
        self.kind
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn pieces(&self) -> &[OverlapPiece] {
        &self.pieces
    }

    pub fn chart(&self, id: ChartId) -> Result<&Chart> {
        self.charts.get(id.0).ok_or(Error::UnknownChart(id))
    }

    pub fn transition(&self, from: ChartId, to: ChartId, x: &[f64]) -> Result<Transition<'_>> {
        self.chart(from)?;
        self.chart(to)?;
        if from == to {
            return Ok(Transition::Identity);
        }
        self.pieces
            .iter()
            .find(|p| p.from == from && p.to == to && p.region.contains(x))
            .map(Transition::Piece)
            .ok_or_else(|| Error::NotInOverlap { from, to, x: x.to_vec() })
    }

    /// Overlap pieces leaving `from` that contain `x`.
    pub fn pieces_at<'a>(&'a self, from: ChartId, x: &'a [f64]) -> impl Iterator<Item = &'a OverlapPiece> + 'a {
        self.pieces.iter().filter(move |p| p.from == from && p.region.contains(x))
    }
}

/// Charted point `(x, p, z)` of the contact phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactCoords {
    pub chart: ChartId,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub z: f64,
}

/// Charted point `(x, ẋ, t)` of the Atiyah algebroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtiyahCoords {
    pub chart: ChartId,
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
    pub t: f64,
}

/// Charted point `(x, τ, π, z)` of the cotangent bundle of the nonzero-vector
/// bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverCoords {
    pub chart: ChartId,
    pub x: Vec<f64>,
    pub tau: f64,
    pub pi: Vec<f64>,
    pub z: f64,
}

impl ContactCoords {
    pub fn new(chart: ChartId, x: Vec<f64>, p: Vec<f64>, z: f64) -> Self {
        debug_assert_eq!(x.len(), p.len());
        ContactCoords { chart, x, p, z }
    }
}

impl AtiyahCoords {
    pub fn new(chart: ChartId, x: Vec<f64>, xdot: Vec<f64>, t: f64) -> Self {
        debug_assert_eq!(x.len(), xdot.len());
        AtiyahCoords { chart, x, xdot, t }
    }
}

impl CoverCoords {
    pub fn new(chart: ChartId, x: Vec<f64>, tau: f64, pi: Vec<f64>, z: f64) -> Result<Self> {
        if tau == 0.0 {
            return Err(Error::Domain("cover coordinate tau must be nonzero".into()));
        }
        Ok(CoverCoords { chart, x, tau, pi, z })
    }
}

pub fn transition_contact(atlas: &BundleAtlas, u: &ContactCoords, target: ChartId) -> Result<ContactCoords> {
    let tr = atlas.transition(u.chart, target, &u.x)?;
    let (x, p, z) = tr.contact(&u.x, &u.p, u.z);
    Ok(ContactCoords { chart: target, x, p, z })
}

pub fn transition_atiyah(atlas: &BundleAtlas, v: &AtiyahCoords, target: ChartId) -> Result<AtiyahCoords> {
    let tr = atlas.transition(v.chart, target, &v.x)?;
    let (x, xdot, t) = tr.atiyah(&v.x, &v.xdot, v.t);
    Ok(AtiyahCoords { chart: target, x, xdot, t })
}

/// Tangent components `(ẋ, ṗ, ż)` at a contact point.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactVector {
    pub xdot: Vec<f64>,
    pub pdot: Vec<f64>,
    pub zdot: f64,
}

/// Differential of [`transition_contact`] applied to `w`, by exact
/// differentiation of the transition law.
pub fn pushforward_contact_tangent(
    atlas: &BundleAtlas,
    u: &ContactCoords,
    w: &ContactVector,
    target: ChartId,
) -> Result<ContactVector> {
    let n = u.x.len();
    let tr = atlas.transition(u.chart, target, &u.x)?;
    let mut point = u.x.clone();
    point.extend_from_slice(&u.p);
    point.push(u.z);
    let seeds = Jet::seed(&point);
    let (x, p, z) = tr.contact(&seeds[..n], &seeds[n..2 * n], seeds[2 * n].clone());
    let mut dir = w.xdot.clone();
    dir.extend_from_slice(&w.pdot);
    dir.push(w.zdot);
    let apply = |j: &Jet| j.grad().iter().zip(&dir).map(|(g, d)| g * d).sum::<f64>();
    Ok(ContactVector {
        xdot: x.iter().map(apply).collect(),
        pdot: p.iter().map(apply).collect(),
        zdot: apply(&z),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtlasReport {
    pub max_cocycle_violation: f64,
    pub max_inverse_violation: f64,
    pub failures: Vec<String>,
    pub passed: bool,
}

pub const ATLAS_TOLERANCE: f64 = 1e-12;

/// Samples every overlap piece and checks φ_ij(x)·φ_ji(ψ_ij(x)) = 1 and
/// ψ_ji(ψ_ij(x)) = x.
pub fn validate_atlas(atlas: &BundleAtlas, samples: usize) -> AtlasReport {
    let mut cocycle_max: f64 = 0.0;
    let mut inverse_max: f64 = 0.0;
    let mut failures = Vec::new();
    let per_axis = ((samples.max(1) as f64).powf(1.0 / atlas.dim as f64).ceil() as usize).max(1);
    for piece in &atlas.pieces {
        for x in piece.region.grid(per_axis, 10.0) {
            let (phi, _) = piece.cocycle.eval(&x);
            let y = piece.map_base(&x);
            let back = match atlas.transition(piece.to, piece.from, &y) {
                Ok(t) => t,
                Err(_) => {
                    failures.push(format!("no inverse transition {} -> {} at {:?}", piece.to, piece.from, y));
                    cocycle_max = f64::INFINITY;
                    continue;
                }
            };
            let (phi_back, _) = back.cocycle(&y);
            let c = (phi * phi_back - 1.0).abs();
            let xb = back.map_base(&y);
            let d = xb.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if c > ATLAS_TOLERANCE && c > cocycle_max {
                failures.push(format!("cocycle violation {c:e} on {} -> {} at {:?}", piece.from, piece.to, x));
            }
            if d > ATLAS_TOLERANCE && d > inverse_max {
                failures.push(format!("inverse violation {d:e} on {} -> {} at {:?}", piece.from, piece.to, x));
            }
            cocycle_max = cocycle_max.max(c);
            inverse_max = inverse_max.max(d);
        }
    }
    let passed = failures.is_empty() && cocycle_max <= ATLAS_TOLERANCE && inverse_max <= ATLAS_TOLERANCE;
    AtlasReport { max_cocycle_violation: cocycle_max, max_inverse_violation: inverse_max, failures, passed }
}

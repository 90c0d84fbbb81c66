//! Fixed-step RK4 and adaptive Dormand–Prince integration of the Hamiltonian,
//! contact Euler–Lagrange and Herglotz flows, with chart switching on
//! non-trivial atlases.
//!
//! States are flat vectors `[x, a, b]` whose meaning depends on the side:
//! `(x, p, z)`, `(x, ẋ, t)` or `(x, ẋ, z)`.

use serde::Serialize;

use crate::atlas::{transition_atiyah, transition_contact, AtiyahCoords, AtlasKind, ChartId, ContactCoords};
use crate::dynamics::{contact_field, euler_lagrange_rhs, herglotz_rhs, HerglotzState};
use crate::error::{Error, Result};
use crate::section::{ScalarSection, SectionKind};

/// Fraction of a chart's length trimmed from each side to form its safe
/// interior.
pub const SAFE_INTERIOR_FRACTION: f64 = 0.1;
pub const MIN_STEP: f64 = 1e-14;
const MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Rk4 { step: f64 },
    Rk45 { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorOptions {
    pub method: Method,
    pub duration: f64,
    /// Disabling this keeps the trajectory in its starting chart; the flow
    /// then stops with an error once it leaves that chart.
    pub switch_charts: bool,
}

impl IntegratorOptions {
    pub fn new(method: Method, duration: f64) -> Self {
        IntegratorOptions { method, duration, switch_charts: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub s: f64,
    pub chart: ChartId,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchEvent {
    pub s: f64,
    pub from: ChartId,
    pub to: ChartId,
    /// State in the old chart just before the switch.
    #[serde(skip)]
    pub before: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: SectionKind,
    pub dim: usize,
    pub samples: Vec<Sample>,
    pub events: Vec<SwitchEvent>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// Column names after `s, chart`.
    pub fn state_columns(&self) -> Vec<String> {
        let n = self.dim;
        let (a, b) = match self.kind {
            SectionKind::Hamiltonian => ("p", "z"),
            SectionKind::Lagrangian => ("xd", "t"),
            SectionKind::Herglotz => ("xd", "z"),
        };
        (1..=n)
            .map(|i| format!("x{i}"))
            .chain((1..=n).map(|i| format!("{a}{i}")))
            .chain(std::iter::once(b.to_string()))
            .collect()
    }
}

fn rhs(section: &ScalarSection, chart: ChartId, y: &[f64]) -> Result<Vec<f64>> {
    let n = section.dim();
    let (x, a, b) = (&y[..n], &y[n..2 * n], y[2 * n]);
    match section.kind() {
        SectionKind::Hamiltonian => {
            let f = contact_field(section, &ContactCoords::new(chart, x.to_vec(), a.to_vec(), b))?;
            let mut out = f.xdot;
            out.extend(f.pdot);
            out.push(f.zdot);
            Ok(out)
        }
        SectionKind::Lagrangian => {
            let (acc, tdot) = euler_lagrange_rhs(section, &AtiyahCoords::new(chart, x.to_vec(), a.to_vec(), b))?;
            let mut out = a.to_vec();
            out.extend(acc);
            out.push(tdot);
            Ok(out)
        }
        SectionKind::Herglotz => {
            let (acc, zdot) = herglotz_rhs(section, &HerglotzState { x: x.to_vec(), xdot: a.to_vec(), z: b })?;
            let mut out = a.to_vec();
            out.extend(acc);
            out.push(zdot);
            Ok(out)
        }
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    (0..y.len()).map(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>()).collect()
}

fn rk4_step(section: &ScalarSection, chart: ChartId, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let k1 = rhs(section, chart, y)?;
    let k2 = rhs(section, chart, &axpy(y, h / 2.0, &[(1.0, &k1)]))?;
    let k3 = rhs(section, chart, &axpy(y, h / 2.0, &[(1.0, &k2)]))?;
    let k4 = rhs(section, chart, &axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(y, h / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]))
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince step: fifth-order solution, error estimate and the
/// final stage derivative (reusable as the next first stage).
fn dopri_step(
    section: &ScalarSection,
    chart: ChartId,
    y: &[f64],
    k1: &[f64],
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut k: Vec<Vec<f64>> = vec![k1.to_vec()];
    for row in &A[..5] {
        let terms: Vec<(f64, &[f64])> = k.iter().zip(row).map(|(ki, &c)| (c, ki.as_slice())).collect();
        k.push(rhs(section, chart, &axpy(y, h, &terms))?);
    }
    let terms: Vec<(f64, &[f64])> = k.iter().zip(&A[5]).map(|(ki, &c)| (c, ki.as_slice())).collect();
    let y_new = axpy(y, h, &terms);
    let k7 = rhs(section, chart, &y_new)?;
    k.push(k7.clone());
    let err = (0..y.len()).map(|i| h * k.iter().zip(&E).map(|(ki, e)| e * ki[i]).sum::<f64>()).collect();
    Ok((y_new, err, k7))
}

struct Walker<'a> {
    section: &'a ScalarSection,
    opts: &'a IntegratorOptions,
    traj: Trajectory,
    chart: ChartId,
}

impl Walker<'_> {
    fn in_chart(&self, y: &[f64]) -> Result<bool> {
        let n = self.section.dim();
        let dom = &self.section.atlas().chart(self.chart)?.domain;
        Ok(dom.contains_with_margin(&y[..n], 0.0))
    }

    /// Records an accepted state, switching chart first if it has left the
    /// active chart's safe interior.
    fn accept(&mut self, s: f64, mut y: Vec<f64>) -> Result<Vec<f64>> {
        let n = self.section.dim();
        let atlas = self.section.atlas().clone();
        let safe = atlas.chart(self.chart)?.domain.shrunk(SAFE_INTERIOR_FRACTION);
        if self.opts.switch_charts && !safe.contains(&y[..n]) {
            if let Some((to, moved)) = self.switch(&y)? {
                self.traj.events.push(SwitchEvent { s, from: self.chart, to, before: y });
                self.chart = to;
                y = moved;
            }
        }
        self.traj.samples.push(Sample { s, chart: self.chart, state: y.clone() });
        Ok(y)
    }

    fn switch(&self, y: &[f64]) -> Result<Option<(ChartId, Vec<f64>)>> {
        let n = self.section.dim();
        let atlas = self.section.atlas();
        let mut fallback = None;
        for piece in atlas.pieces_at(self.chart, &y[..n]) {
            let moved = self.transition(y, piece.to)?;
            let dom = &atlas.chart(piece.to)?.domain;
            if dom.shrunk(SAFE_INTERIOR_FRACTION).contains(&moved[..n]) {
                return Ok(Some((piece.to, moved)));
            }
            if fallback.is_none() && dom.contains(&moved[..n]) {
                fallback = Some((piece.to, moved));
            }
        }
        Ok(fallback)
    }

    fn transition(&self, y: &[f64], to: ChartId) -> Result<Vec<f64>> {
        let n = self.section.dim();
        let atlas = self.section.atlas();
        let (x, a, b) = (y[..n].to_vec(), y[n..2 * n].to_vec(), y[2 * n]);
        Ok(match self.section.kind() {
            SectionKind::Lagrangian => {
                let v = transition_atiyah(atlas, &AtiyahCoords::new(self.chart, x, a, b), to)?;
                [v.x, v.xdot, vec![v.t]].concat()
            }
            _ => {
                let u = transition_contact(atlas, &ContactCoords::new(self.chart, x, a, b), to)?;
                [u.x, u.p, vec![u.z]].concat()
            }
        })
    }

    fn run_rk4(&mut self, mut y: Vec<f64>, step: f64) -> Result<()> {
        let duration = self.opts.duration;
        let steps = (duration / step - 1e-9).ceil().max(1.0) as usize;
        if steps > MAX_STEPS {
            return Err(Error::config("integrator.step", "too many steps for the duration"));
        }
        let mut s = 0.0;
        for k in 1..=steps {
            let next = if k == steps { duration } else { k as f64 * step };
            let y_new = rk4_step(self.section, self.chart, &y, next - s)?;
            if y_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite state at s = {next}")));
            }
            if !self.in_chart(&y_new)? {
                return Err(Error::ChartExhausted { s: next });
            }
            y = self.accept(next, y_new)?;
            s = next;
        }
        Ok(())
    }

    fn run_rk45(&mut self, mut y: Vec<f64>, abs_tol: f64, rel_tol: f64) -> Result<()> {
        const SAFETY: f64 = 0.9;
        const ALPHA: f64 = 0.7 / 5.0;
        const BETA: f64 = 0.4 / 5.0;
        let duration = self.opts.duration;
        let mut s = 0.0;
        let mut h = (0.01 * duration).min(0.1).max(MIN_STEP);
        let mut err_prev: f64 = 1.0;
        let mut k1 = rhs(self.section, self.chart, &y)?;
        let mut count = 0;
        while s < duration {
            count += 1;
            if count > MAX_STEPS {
                return Err(Error::StepUnderflow { s, step: h });
            }
            let last = s + h >= duration;
            let h_try = if last { duration - s } else { h };
            if h_try < MIN_STEP && !last {
                return Err(Error::StepUnderflow { s, step: h_try });
            }
            let (y_new, err, k7) = dopri_step(self.section, self.chart, &y, &k1, h_try)?;
            let norm = err
                .iter()
                .zip(y.iter().zip(&y_new))
                .map(|(e, (a, b))| e.abs() / (abs_tol + rel_tol * a.abs().max(b.abs())))
                .fold(0.0f64, f64::max);
            let inside = self.in_chart(&y_new)?;
            if norm.is_finite() && norm <= 1.0 && inside {
                let s_new = if last { duration } else { s + h_try };
                let factor = if norm == 0.0 {
                    5.0
                } else {
                    (SAFETY * norm.powf(-ALPHA) * err_prev.powf(BETA)).clamp(0.2, 5.0)
                };
                err_prev = norm.max(1e-4);
                let chart_before = self.chart;
                y = self.accept(s_new, y_new)?;
                k1 = if self.chart == chart_before { k7 } else { rhs(self.section, self.chart, &y)? };
                s = s_new;
                h = h_try * factor;
            } else {
                let factor = if norm.is_finite() && inside {
                    (SAFETY * norm.powf(-ALPHA)).clamp(0.2, 1.0)
                } else {
                    0.5
                };
                h = h_try * factor;
                if h < MIN_STEP {
                    return Err(Error::StepUnderflow { s, step: h });
                }
            }
        }
        Ok(())
    }
}

/// Integrates the flow of `section` from `initial` (a flat state in `chart`)
/// over `[0, opts.duration]`.
pub fn integrate(
    section: &ScalarSection,
    chart: ChartId,
    initial: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let n = section.dim();
    if initial.len() != 2 * n + 1 {
        return Err(Error::DimensionMismatch { expected: 2 * n + 1, actual: initial.len() });
    }
    if !(opts.duration > 0.0) || !opts.duration.is_finite() {
        return Err(Error::config("duration", "must be a positive finite number"));
    }
    if section.kind() == SectionKind::Herglotz && section.atlas().kind() != AtlasKind::Trivial {
        return Err(Error::config("bundle", "herglotz scenarios need the trivial bundle"));
    }
    if !section.atlas().chart(chart)?.domain.contains(&initial[..n]) {
        return Err(Error::config("initial", "initial point is outside its chart"));
    }
    let mut walker = Walker {
        section,
        opts,
        traj: Trajectory { kind: section.kind(), dim: n, samples: Vec::new(), events: Vec::new() },
        chart,
    };
    walker.traj.samples.push(Sample { s: 0.0, chart, state: initial.to_vec() });
    match opts.method {
        Method::Rk4 { step } => {
            if !(step > 0.0) || !step.is_finite() {
                return Err(Error::config("integrator.step", "must be a positive finite number"));
            }
            walker.run_rk4(initial.to_vec(), step)?
        }
        Method::Rk45 { abs_tol, rel_tol } => {
            if !(abs_tol > 0.0 || rel_tol > 0.0) || abs_tol < 0.0 || rel_tol < 0.0 {
                return Err(Error::config("integrator.abs_tol", "tolerances must be non-negative, not both zero"));
            }
            walker.run_rk45(initial.to_vec(), abs_tol, rel_tol)?
        }
    }
    Ok(walker.traj)
}

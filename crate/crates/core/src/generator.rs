//! Planar generator: state, field, trajectories and the two integrators
//! (closed form for arcs and exponential spirals, fixed-step RK4 otherwise).

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::profile::AnalyticProfile;
use crate::scalar::Scalar;

/// Number of interior points used when checking that a speed profile stays
/// positive on a span.
pub const SPEED_CHECK_SAMPLES: usize = 256;

/// Below this magnitude of `ln A + i*kappa` the straight-line limit is used.
pub const STRAIGHT_LIMIT: f64 = 1e-12;

pub const DEFAULT_STEP: f64 = 1e-3;

/// Planar generator state `(x, y, theta)` plus the global phase `tau`.
///
/// `theta` is never wrapped, so total turning can be read off directly.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GeneratorState<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
    pub tau: T,
}

impl<T: Scalar> GeneratorState<T> {
    pub fn new(x: T, y: T, theta: T, tau: T) -> Self {
        Self { x, y, theta, tau }
    }

    pub fn position(&self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Point2<T> {
        Point2::from_angle(self.theta)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite() && self.tau.is_finite()
    }
}

/// Which parameter the profiles of a field are evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMode {
    /// Branch-local parameter `s`.
    #[default]
    Local,
    /// Global phase `tau`, carried across branch events.
    Global,
}

/// The planar generator `x' = rho cos(theta)`, `y' = rho sin(theta)`,
/// `theta' = kappa`, `tau' = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GeneratorField<T> {
    pub rho: AnalyticProfile<T>,
    pub kappa: AnalyticProfile<T>,
    #[serde(default)]
    pub phase_mode: PhaseMode,
}

impl<T: Scalar> GeneratorField<T> {
    pub fn new(rho: AnalyticProfile<T>, kappa: AnalyticProfile<T>, phase_mode: PhaseMode) -> Self {
        Self {
            rho,
            kappa,
            phase_mode,
        }
    }

    #[inline]
    pub fn phase(&self, s: T, tau: T) -> T {
        match self.phase_mode {
            PhaseMode::Local => s,
            PhaseMode::Global => tau,
        }
    }

    /// Right-hand side `(dx, dy, dtheta, dtau)` at parameter `s`.
    #[inline]
    pub fn velocity(&self, s: T, state: &[T; 4]) -> [T; 4] {
        let p = self.phase(s, state[3]);
        let rho = self.rho.eval(p);
        let (sin, cos) = state[2].sin_cos();
        [rho * cos, rho * sin, self.kappa.eval(p), T::one()]
    }

    /// Checks `rho > 0` on the phase interval swept by `span` starting at
    /// `tau0`, sampled at [`SPEED_CHECK_SAMPLES`] interior points plus both
    /// ends.
    pub fn check_speed(&self, span: (T, T), tau0: T) -> Result<()> {
        self.rho.validate()?;
        self.kappa.validate()?;
        let (p0, p1) = match self.phase_mode {
            PhaseMode::Local => span,
            PhaseMode::Global => (tau0, tau0 + (span.1 - span.0)),
        };
        let n = SPEED_CHECK_SAMPLES + 1;
        for i in 0..=n {
            let p = p0 + (p1 - p0) * T::lit(i as f64) / T::lit(n as f64);
            let v = self.rho.eval(p);
            if !(v > T::zero()) {
                return Err(Error::InvalidArgument(format!(
                    "speed profile is not positive at phase {p} (value {v})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Sample<T> {
    pub s: T,
    pub state: GeneratorState<T>,
}

/// Integrated branch: ordered samples over `span`, strictly monotone in `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub span: (T, T),
    pub field_used: GeneratorField<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn start(&self) -> &GeneratorState<T> {
        &self.samples[0].state
    }

    pub fn end(&self) -> &GeneratorState<T> {
        &self.samples[self.samples.len() - 1].state
    }

    pub fn chord(&self) -> Point2<T> {
        self.end().position() - self.start().position()
    }

    /// Length of the sampled polyline.
    pub fn polyline_length(&self) -> T {
        self.samples
            .windows(2)
            .map(|w| w[0].state.position().distance(w[1].state.position()))
            .sum()
    }
}

/// Which samples a trajectory keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retention {
    EndpointsOnly,
    /// Every n-th grid point, plus the final one.
    Every(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegratorChoice {
    /// Closed form when the profiles admit it, RK4 otherwise.
    #[default]
    Auto,
    Closed,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions<T> {
    pub method: IntegratorChoice,
    /// Grid spacing in `s`; the RK4 step and the closed-form sample spacing.
    pub step: T,
    pub retention: Retention,
}

impl<T: Scalar> Default for IntegrationOptions<T> {
    fn default() -> Self {
        Self {
            method: IntegratorChoice::Auto,
            step: T::lit(DEFAULT_STEP),
            retention: Retention::Every(1),
        }
    }
}

impl<T: Scalar> IntegrationOptions<T> {
    pub fn endpoints_only(method: IntegratorChoice) -> Self {
        Self {
            method,
            retention: Retention::EndpointsOnly,
            ..Self::default()
        }
    }
}

/// Parameter grid from `span.0` to `span.1` with spacing `step`; the last
/// interval is shortened so the grid lands exactly on `span.1`.
fn grid<T: Scalar>(span: (T, T), step: T) -> Vec<T> {
    let len = (span.1 - span.0).abs();
    if len == T::zero() {
        return vec![span.0];
    }
    let dir = if span.1 > span.0 { T::one() } else { -T::one() };
    let ratio = len / step;
    // absorb a sliver final step into the previous one
    let mut n = (ratio - T::lit(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
    if T::lit(n as f64) > ratio + T::one() {
        n = ratio.ceil().to_usize().unwrap_or(1).max(1);
    }
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        out.push(span.0 + dir * step * T::lit(i as f64));
    }
    out.push(span.1);
    out
}

fn keep(index: usize, last: usize, retention: Retention) -> bool {
    if index == 0 || index == last {
        return true;
    }
    match retention {
        Retention::EndpointsOnly => false,
        Retention::Every(k) => k <= 1 || index.is_multiple_of(k),
    }
}

fn check_finite<T: Scalar>(s: T, st: &GeneratorState<T>) -> Result<()> {
    if st.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteState {
            s: s.to_f64_lossy(),
        })
    }
}

/// `(exp(w*u) - 1) / w`, with a series near `w*u = 0`.
pub(crate) fn expm1_over<T: Scalar>(w: Complex<T>, u: T) -> Complex<T> {
    let wu = w * u;
    if w.norm() < T::lit(STRAIGHT_LIMIT) {
        return Complex::new(u, T::zero());
    }
    if wu.norm() < T::lit(1e-3) {
        // u * sum_{n>=0} (wu)^n / (n+1)!
        let mut term = Complex::new(T::one(), T::zero());
        let mut acc = term;
        for n in 1..10 {
            term = term * wu / T::lit((n + 1) as f64);
            acc = acc + term;
        }
        return acc * u;
    }
    (wu.exp() - Complex::new(T::one(), T::zero())) / w
}

/// Closed-form integration for constant curvature with constant or
/// exponential speed.
///
/// Returns [`Error::Unsupported`] for any other profile combination.
pub fn integrate_closed_form<T: Scalar>(
    field: &GeneratorField<T>,
    init: GeneratorState<T>,
    span: (T, T),
) -> Result<Trajectory<T>> {
    integrate_closed_form_with(field, init, span, T::lit(DEFAULT_STEP), Retention::Every(1))
}

pub fn integrate_closed_form_with<T: Scalar>(
    field: &GeneratorField<T>,
    init: GeneratorState<T>,
    span: (T, T),
    step: T,
    retention: Retention,
) -> Result<Trajectory<T>> {
    let (coef, base) = field.rho.as_exponential().ok_or(Error::Unsupported)?;
    let kappa = field.kappa.as_constant().ok_or(Error::Unsupported)?;
    if !(step > T::zero()) {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    field.check_speed(span, init.tau)?;
    check_finite(span.0, &init)?;

    let p0 = field.phase(span.0, init.tau);
    let speed0 = coef * base.powf(p0);
    let w = Complex::new(base.ln(), kappa);
    let rot = Complex::from_polar(speed0, init.theta);

    let pts = grid(span, step);
    let last = pts.len() - 1;
    let mut samples = Vec::new();
    for (i, &s) in pts.iter().enumerate() {
        if !keep(i, last, retention) {
            continue;
        }
        let state = if i == 0 {
            init
        } else {
            let u = s - span.0;
            let z = rot * expm1_over(w, u);
            GeneratorState {
                x: init.x + z.re,
                y: init.y + z.im,
                theta: init.theta + kappa * u,
                tau: init.tau + u,
            }
        };
        check_finite(s, &state)?;
        samples.push(Sample { s, state });
    }
    Ok(Trajectory {
        samples,
        span,
        field_used: field.clone(),
    })
}

/// Classical fixed-step fourth-order Runge-Kutta over `(x, y, theta, tau)`.
///
/// Spans may run backwards (`span.1 < span.0`); the step sign follows the
/// span.
pub fn integrate_rk4<T: Scalar>(
    field: &GeneratorField<T>,
    init: GeneratorState<T>,
    span: (T, T),
    step: T,
) -> Result<Trajectory<T>> {
    integrate_rk4_with(field, init, span, step, Retention::Every(1))
}

pub fn integrate_rk4_with<T: Scalar>(
    field: &GeneratorField<T>,
    init: GeneratorState<T>,
    span: (T, T),
    step: T,
    retention: Retention,
) -> Result<Trajectory<T>> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let (lo, hi) = if span.0 <= span.1 {
        span
    } else {
        (span.1, span.0)
    };
    let tau_lo = match span.0 <= span.1 {
        true => init.tau,
        false => init.tau - (span.0 - span.1),
    };
    field.check_speed((lo, hi), tau_lo)?;
    check_finite(span.0, &init)?;

    let pts = grid(span, step);
    let last = pts.len() - 1;
    let mut samples = Vec::with_capacity(match retention {
        Retention::EndpointsOnly => 2,
        Retention::Every(k) => last / k.max(1) + 2,
    });
    samples.push(Sample {
        s: span.0,
        state: init,
    });

    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);
    let mut y = [init.x, init.y, init.theta, init.tau];
    for i in 1..pts.len() {
        let s = pts[i - 1];
        let h = pts[i] - s;
        let k1 = field.velocity(s, &y);
        let y2 = add(&y, &k1, h * half);
        let k2 = field.velocity(s + h * half, &y2);
        let y3 = add(&y, &k2, h * half);
        let k3 = field.velocity(s + h * half, &y3);
        let y4 = add(&y, &k3, h);
        let k4 = field.velocity(s + h, &y4);
        for j in 0..4 {
            y[j] += h * sixth * (k1[j] + two * k2[j] + two * k3[j] + k4[j]);
        }
        let state = GeneratorState::new(y[0], y[1], y[2], y[3]);
        check_finite(pts[i], &state)?;
        if keep(i, last, retention) {
            samples.push(Sample { s: pts[i], state });
        }
    }
    Ok(Trajectory {
        samples,
        span,
        field_used: field.clone(),
    })
}

#[inline]
fn add<T: Scalar>(y: &[T; 4], k: &[T; 4], h: T) -> [T; 4] {
    [
        y[0] + h * k[0],
        y[1] + h * k[1],
        y[2] + h * k[2],
        y[3] + h * k[3],
    ]
}

/// Integrates with the method selected in `opts`.
pub fn integrate<T: Scalar>(
    field: &GeneratorField<T>,
    init: GeneratorState<T>,
    span: (T, T),
    opts: &IntegrationOptions<T>,
) -> Result<Trajectory<T>> {
    match opts.method {
        IntegratorChoice::Closed => {
            integrate_closed_form_with(field, init, span, opts.step, opts.retention)
        }
        IntegratorChoice::Rk4 => integrate_rk4_with(field, init, span, opts.step, opts.retention),
        IntegratorChoice::Auto => {
            match integrate_closed_form_with(field, init, span, opts.step, opts.retention) {
                Err(Error::Unsupported) => {
                    integrate_rk4_with(field, init, span, opts.step, opts.retention)
                }
                other => other,
            }
        }
    }
}

/// Projects a trajectory onto the plane, `(x, y, theta, tau) -> (x, y)`.
pub fn realize<T: Scalar>(traj: &Trajectory<T>) -> Vec<Point2<T>> {
    traj.samples.iter().map(|s| s.state.position()).collect()
}

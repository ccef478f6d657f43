//! Thermal occupation and lossy thermal channels.
//!
//! A loss element is a beam splitter of transmissivity `η` mixing the signal
//! with a bath mode of occupation `n_env`. On the affected mode
//!
//! ```text
//! mean -> √η mean
//! V    -> η V + (1 - η)(2 n_env + 1) I
//! ```
//!
//! and correlations with every other mode scale by `√η`. A waveguide is an
//! ordered list of such elements, one per segment of constant temperature
//! and attenuation; its continuous limit is integrated directly.
//!
//! Attenuation in dB/km converts to a power decay rate in nepers/km through
//! `α = ln(10) / 10 · a_dB`, so a segment of length `L` has
//! `η = 10^(-a_dB L / 10) = e^(-α L)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::GaussianState;
use crate::ode;

/// CODATA exact values of the constants entering the occupation formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Planck constant, J·s.
    pub h: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Speed of light in vacuum, m/s.
    pub c: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    h: 6.626_070_15e-34,
    k_b: 1.380_649e-23,
    c: 299_792_458.0,
};

/// `ln(10) / 10`: dB to nepers for power ratios.
pub const DB_TO_NEPER: f64 = std::f64::consts::LN_10 / 10.0;

/// Mean photon number per mode of a thermal field, `1 / (e^{hν/k_B T} - 1)`.
///
/// Zero at `T = 0`. The Bose-Einstein factor is evaluated per mode; no
/// density-of-states prefactor is applied.
pub fn planck_occupation(frequency_hz: f64, temperature_k: f64) -> Result<f64> {
    if !(frequency_hz > 0.0) || !frequency_hz.is_finite() {
        return Err(invalid(format!("frequency must be positive, got {frequency_hz} Hz")));
    }
    if !(temperature_k >= 0.0) || !temperature_k.is_finite() {
        return Err(invalid(format!("temperature must be >= 0, got {temperature_k} K")));
    }
    if temperature_k == 0.0 {
        return Ok(0.0);
    }
    let x = CONSTANTS.h * frequency_hz / (CONSTANTS.k_b * temperature_k);
    Ok(1.0 / x.exp_m1())
}

fn check_transmissivity(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("transmissivity must lie in [0, 1], got {eta}")));
    }
    Ok(())
}

/// Thermal loss on one mode of `state`.
pub fn loss_channel(state: &GaussianState, mode: usize, eta: f64, nbar_env: f64) -> Result<GaussianState> {
    check_transmissivity(eta)?;
    if !(nbar_env >= 0.0) || !nbar_env.is_finite() {
        return Err(invalid(format!("bath occupation must be finite and >= 0, got {nbar_env}")));
    }
    if mode >= state.n_modes() {
        return Err(invalid(format!("mode {mode} out of range for a {}-mode state", state.n_modes())));
    }
    let t = eta.sqrt();
    let noise = (1.0 - eta) * (2.0 * nbar_env + 1.0);
    let (a, b) = (2 * mode, 2 * mode + 1);
    let mut mean = state.mean().clone();
    mean[a] *= t;
    mean[b] *= t;
    let mut cov: DMatrix<f64> = state.cov().clone();
    let dim = cov.nrows();
    for i in [a, b] {
        for j in 0..dim {
            if j != a && j != b {
                cov[(i, j)] *= t;
                cov[(j, i)] *= t;
            }
        }
    }
    for i in [a, b] {
        for j in [a, b] {
            cov[(i, j)] *= eta;
        }
        cov[(i, i)] += noise;
    }
    GaussianState::new(mean, cov)
}

/// A loss element described by its transmissivity and bath variance
/// `μ = 2 n_env + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    pub transmissivity: f64,
    pub bath_variance: f64,
}

impl LossParams {
    pub fn new(transmissivity: f64, bath_variance: f64) -> Result<Self> {
        check_transmissivity(transmissivity)?;
        if !(bath_variance >= 1.0) || !bath_variance.is_finite() {
            return Err(invalid(format!("bath variance must be >= 1, got {bath_variance}")));
        }
        Ok(Self {
            transmissivity,
            bath_variance,
        })
    }

    pub fn from_occupation(transmissivity: f64, nbar_env: f64) -> Result<Self> {
        Self::new(transmissivity, 2.0 * nbar_env + 1.0)
    }

    pub fn bath_photons(&self) -> f64 {
        (self.bath_variance - 1.0) / 2.0
    }

    pub fn loss_db(&self) -> f64 {
        -10.0 * self.transmissivity.log10()
    }

    pub fn apply(&self, state: &GaussianState, mode: usize) -> Result<GaussianState> {
        loss_channel(state, mode, self.transmissivity, self.bath_photons())
    }
}

/// Single element equivalent to `first` followed by `second`.
///
/// `η = η₁η₂`, `μ = [η₂(1 - η₁)μ₁ + (1 - η₂)μ₂] / (1 - η₁η₂)`; a lossless
/// pair has no bath admixture and is assigned `μ = 1`.
pub fn compose_loss(first: LossParams, second: LossParams) -> LossParams {
    let (e1, m1) = (first.transmissivity, first.bath_variance);
    let (e2, m2) = (second.transmissivity, second.bath_variance);
    let eta = e1 * e2;
    let mu = if eta >= 1.0 {
        1.0
    } else {
        (e2 * (1.0 - e1) * m1 + (1.0 - e2) * m2) / (1.0 - eta)
    };
    LossParams {
        transmissivity: eta,
        bath_variance: mu.max(1.0),
    }
}

/// One piece of a transmission line with uniform attenuation and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    pub temperature_k: f64,
}

/// Per-segment channel parameters of a waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentChannel {
    pub transmissivity: f64,
    pub bath_photons: f64,
    pub loss_db: f64,
}

/// Piecewise-constant transmission line at a single carrier frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideProfile {
    segments: Vec<Segment>,
    frequency_hz: f64,
}

impl WaveguideProfile {
    pub fn new(segments: Vec<Segment>, frequency_hz: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(invalid("waveguide needs at least one segment"));
        }
        if !(frequency_hz > 0.0) || !frequency_hz.is_finite() {
            return Err(invalid(format!("frequency must be positive, got {frequency_hz} Hz")));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.length_km > 0.0) || !s.length_km.is_finite() {
                return Err(invalid(format!("segment {i}: length must be > 0 km")));
            }
            if !(s.attenuation_db_per_km >= 0.0) || !s.attenuation_db_per_km.is_finite() {
                return Err(invalid(format!("segment {i}: attenuation must be >= 0 dB/km")));
            }
            if !(s.temperature_k >= 0.0) || !s.temperature_k.is_finite() {
                return Err(invalid(format!("segment {i}: temperature must be >= 0 K")));
            }
        }
        Ok(Self {
            segments,
            frequency_hz,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn length_km(&self) -> f64 {
        self.segments.iter().map(|s| s.length_km).sum()
    }

    pub fn segment_channels(&self) -> Result<Vec<SegmentChannel>> {
        self.segments
            .iter()
            .map(|s| {
                let loss_db = s.attenuation_db_per_km * s.length_km;
                Ok(SegmentChannel {
                    transmissivity: 10f64.powf(-loss_db / 10.0),
                    bath_photons: planck_occupation(self.frequency_hz, s.temperature_k)?,
                    loss_db,
                })
            })
            .collect()
    }

    /// The whole line folded into one loss element.
    pub fn effective_channel(&self) -> Result<LossParams> {
        let mut acc = LossParams::new(1.0, 1.0)?;
        for ch in self.segment_channels()? {
            acc = compose_loss(acc, LossParams::from_occupation(ch.transmissivity, ch.bath_photons)?);
        }
        Ok(acc)
    }
}

/// Propagate one mode through every segment of `profile` in order.
pub fn waveguide_channel(state: &GaussianState, mode: usize, profile: &WaveguideProfile) -> Result<GaussianState> {
    let mut out = state.clone();
    for ch in profile.segment_channels()? {
        out = loss_channel(&out, mode, ch.transmissivity, ch.bath_photons)?;
    }
    Ok(out)
}

/// A line whose attenuation and temperature vary along its length.
///
/// The line is split into intervals inside which both functions are smooth;
/// `position_km` passed to the accessors lies within the given interval.
pub trait LineProfile {
    fn frequency_hz(&self) -> f64;
    /// `(start_km, end_km)` of each smooth interval, in order.
    fn intervals(&self) -> Vec<(f64, f64)>;
    fn attenuation_db_per_km(&self, interval: usize, position_km: f64) -> f64;
    fn temperature_k(&self, interval: usize, position_km: f64) -> f64;
}

impl LineProfile for WaveguideProfile {
    fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    fn intervals(&self) -> Vec<(f64, f64)> {
        let mut start = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let iv = (start, start + s.length_km);
                start += s.length_km;
                iv
            })
            .collect()
    }

    fn attenuation_db_per_km(&self, interval: usize, _position_km: f64) -> f64 {
        self.segments[interval].attenuation_db_per_km
    }

    fn temperature_k(&self, interval: usize, _position_km: f64) -> f64 {
        self.segments[interval].temperature_k
    }
}

/// Uniform-attenuation line whose temperature varies linearly from one end
/// to the other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureRamp {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    pub start_temperature_k: f64,
    pub end_temperature_k: f64,
    pub frequency_hz: f64,
}

impl TemperatureRamp {
    fn temperature_at(&self, position_km: f64) -> f64 {
        let f = (position_km / self.length_km).clamp(0.0, 1.0);
        self.start_temperature_k + f * (self.end_temperature_k - self.start_temperature_k)
    }

    /// `n` equal segments, each at the temperature of its midpoint.
    pub fn discretize(&self, n: usize) -> Result<WaveguideProfile> {
        if n == 0 {
            return Err(invalid("need at least one segment"));
        }
        let dx = self.length_km / n as f64;
        let segments = (0..n)
            .map(|i| Segment {
                length_km: dx,
                attenuation_db_per_km: self.attenuation_db_per_km,
                temperature_k: self.temperature_at((i as f64 + 0.5) * dx),
            })
            .collect();
        WaveguideProfile::new(segments, self.frequency_hz)
    }
}

impl LineProfile for TemperatureRamp {
    fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    fn intervals(&self) -> Vec<(f64, f64)> {
        vec![(0.0, self.length_km)]
    }

    fn attenuation_db_per_km(&self, _interval: usize, _position_km: f64) -> f64 {
        self.attenuation_db_per_km
    }

    fn temperature_k(&self, _interval: usize, position_km: f64) -> f64 {
        self.temperature_at(position_km)
    }
}

/// Integrates the transfer of a line as one loss element.
///
/// With `V(x) = T(x) V₀ + N(x) I`:
///
/// ```text
/// dT/dx = -α(x) T
/// dN/dx = -α(x) (N - μ_env(x))
/// ```
///
/// `T(0) = 1`, `N(0) = 0`, `α` in nepers/km, `μ_env = 2 n(ν, T(x)) + 1`.
pub fn continuous_loss_params(profile: &dyn LineProfile, step_tolerance: f64) -> Result<LossParams> {
    let intervals = profile.intervals();
    if intervals.is_empty() {
        return Err(invalid("line profile has no intervals"));
    }
    let freq = profile.frequency_hz();
    let tol = step_tolerance / intervals.len() as f64;
    let mut y = [1.0, 0.0];
    for (k, &(start, end)) in intervals.iter().enumerate() {
        // occupation errors surface before integration
        planck_occupation(freq, profile.temperature_k(k, start))?;
        planck_occupation(freq, profile.temperature_k(k, end))?;
        let rhs = |x: f64, y: &[f64; 2]| -> [f64; 2] {
            let alpha = DB_TO_NEPER * profile.attenuation_db_per_km(k, x);
            let mu_env = 2.0 * planck_occupation(freq, profile.temperature_k(k, x)).unwrap_or(0.0) + 1.0;
            [-alpha * y[0], -alpha * (y[1] - mu_env)]
        };
        y = ode::integrate(rhs, y, start, end, tol)?;
    }
    let eta = y[0].clamp(0.0, 1.0);
    let mu = if eta >= 1.0 { 1.0 } else { y[1] / (1.0 - eta) };
    if mu < 1.0 - 1e-9 {
        return Err(Error::Unphysical(format!("integrated bath variance {mu} below vacuum")));
    }
    LossParams::new(eta, mu.max(1.0))
}

/// Continuous-limit propagation of one mode through `profile`.
pub fn waveguide_continuous(
    state: &GaussianState,
    mode: usize,
    profile: &dyn LineProfile,
    step_tolerance: f64,
) -> Result<GaussianState> {
    continuous_loss_params(profile, step_tolerance)?.apply(state, mode)
}

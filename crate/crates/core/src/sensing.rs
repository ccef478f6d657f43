//! Quantum illumination and continuous-variable teleportation.
//!
//! Illumination discriminates "target absent" (the signal is replaced by the
//! thermal background) from "target present" (the signal returns through a
//! beam splitter of reflectivity `η` embedded in the same background). The
//! closed-form exponents below are compared against a numeric quantum
//! Chernoff bound evaluated on truncated Fock-basis density matrices.

use log::warn;
use nalgebra::{Complex, DMatrix, Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock;
use crate::gaussian::{single_mode_fidelity, GaussianState};
use crate::thermal::loss_channel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IlluminationProtocol {
    /// Coherent-state transmitter with homodyne-optimal classical receiver.
    Coherent,
    /// Two-mode squeezed vacuum, idler retained for a joint measurement.
    Tmsv,
}

/// Closed form used for the per-mode-pair error exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentModel {
    /// `R_C = ηN_S / (4n_B + 2)`, `R_Q = ηN_S / (n_B + 1)`.
    ///
    /// Finite at `n_B = 0`; the ratio rises monotonically from 2 to 4.
    #[default]
    FiniteBackground,
    /// `R_C = ηN_S / 4n_B`, `R_Q = ηN_S / n_B`, falling back to the finite
    /// forms at `n_B = 0`.
    Asymptotic,
}

/// Above this reflectivity the weak-return exponents lose accuracy.
pub const WEAK_REFLECTIVITY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminationScenario {
    pub reflectivity: f64,
    /// Mean signal photons per mode.
    pub signal_photons: f64,
    /// Mean thermal background photons per mode.
    pub background_photons: f64,
    pub mode_pairs: u64,
    pub model: ExponentModel,
}

impl IlluminationScenario {
    pub fn new(reflectivity: f64, signal_photons: f64, background_photons: f64, mode_pairs: u64) -> Result<Self> {
        let s = Self {
            reflectivity,
            signal_photons,
            background_photons,
            mode_pairs,
            model: ExponentModel::default(),
        };
        s.validate()?;
        if reflectivity > WEAK_REFLECTIVITY {
            warn!("reflectivity {reflectivity} > {WEAK_REFLECTIVITY}: weak-return exponents are inaccurate");
        }
        Ok(s)
    }

    pub fn with_model(mut self, model: ExponentModel) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reflectivity > 0.0 && self.reflectivity < 1.0) {
            return Err(invalid(format!("reflectivity must lie in (0, 1), got {}", self.reflectivity)));
        }
        if !(self.signal_photons >= 0.0) || !self.signal_photons.is_finite() {
            return Err(invalid(format!("signal photons must be >= 0, got {}", self.signal_photons)));
        }
        if !(self.background_photons >= 0.0) || !self.background_photons.is_finite() {
            return Err(invalid(format!(
                "background photons must be >= 0, got {}",
                self.background_photons
            )));
        }
        if self.mode_pairs == 0 {
            return Err(invalid("mode_pairs must be at least 1"));
        }
        Ok(())
    }

    fn denominator(&self, protocol: IlluminationProtocol) -> f64 {
        let nb = self.background_photons;
        let asymptotic = self.model == ExponentModel::Asymptotic && nb > 0.0;
        match (protocol, asymptotic) {
            (IlluminationProtocol::Coherent, true) => 4.0 * nb,
            (IlluminationProtocol::Coherent, false) => 4.0 * nb + 2.0,
            (IlluminationProtocol::Tmsv, true) => nb,
            (IlluminationProtocol::Tmsv, false) => nb + 1.0,
        }
    }
}

/// Error exponent per mode pair.
pub fn qi_error_exponent(protocol: IlluminationProtocol, scenario: &IlluminationScenario) -> Result<f64> {
    scenario.validate()?;
    Ok(scenario.reflectivity * scenario.signal_photons / scenario.denominator(protocol))
}

/// Error-probability bound `½ exp(-M R)` after `M` mode pairs.
pub fn qi_error_bound(protocol: IlluminationProtocol, scenario: &IlluminationScenario) -> Result<f64> {
    let r = qi_error_exponent(protocol, scenario)?;
    Ok(0.5 * (-(scenario.mode_pairs as f64) * r).exp())
}

/// `10 log10(R_Q / R_C)`; defined for zero signal through the ratio of
/// denominators.
pub fn qi_advantage_db(scenario: &IlluminationScenario) -> Result<f64> {
    scenario.validate()?;
    let ratio = scenario.denominator(IlluminationProtocol::Coherent) / scenario.denominator(IlluminationProtocol::Tmsv);
    Ok(10.0 * ratio.log10())
}

/// Gaussian states under the "absent" and "present" hypotheses for one mode
/// (coherent) or one signal-idler pair (TMSV, signal first).
pub fn illumination_hypotheses(
    protocol: IlluminationProtocol,
    scenario: &IlluminationScenario,
) -> Result<(GaussianState, GaussianState)> {
    scenario.validate()?;
    let (eta, ns, nb) = (scenario.reflectivity, scenario.signal_photons, scenario.background_photons);
    // the present-hypothesis bath keeps the background at n_B after mixing
    let bath = nb / (1.0 - eta);
    match protocol {
        IlluminationProtocol::Coherent => {
            let absent = GaussianState::thermal(nb)?;
            let present = GaussianState::displaced_thermal(nb, Complex::new((eta * ns).sqrt(), 0.0))?;
            Ok((absent, present))
        }
        IlluminationProtocol::Tmsv => {
            let source = GaussianState::tmsv(ns.sqrt().asinh())?;
            let absent = loss_channel(&source, 0, 0.0, nb)?;
            let present = loss_channel(&source, 0, eta, bath)?;
            Ok((absent, present))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcbOptions {
    /// Upper bound on the per-mode Fock cutoff.
    pub fock_cutoff: usize,
    /// Largest accepted `1 - Tr ρ` of a truncated state.
    pub max_trace_deficit: f64,
    /// Bracket width at which the search over `s` stops.
    pub s_tolerance: f64,
}

impl Default for QcbOptions {
    fn default() -> Self {
        Self {
            fock_cutoff: 80,
            max_trace_deficit: 1e-6,
            s_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcbResult {
    /// `-ln min_s Tr(ρ₀ˢ ρ₁¹⁻ˢ)`
    pub exponent: f64,
    pub optimal_s: f64,
    /// Traces of the two truncated states before renormalization.
    pub traces: [f64; 2],
    pub cutoffs: Vec<usize>,
}

/// Probability left outside the per-mode cutoff chosen automatically.
const AUTO_TAIL: f64 = 1e-14;
/// Eigenvalues below this are treated as exact zeros.
const EIGEN_FLOOR: f64 = 1e-14;

fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    // the minimum of a convex function may sit on the boundary
    [(x, f(x)), (a, f(a)), (b, f(b))]
        .into_iter()
        .min_by(|l, r| l.1.total_cmp(&r.1))
        .expect("non-empty")
}

fn spectral(rho: DMatrix<Complex<f64>>) -> (Vec<f64>, DMatrix<Complex<f64>>) {
    let eig = SymmetricEigen::new(rho);
    let values = eig
        .eigenvalues
        .iter()
        .map(|&l| if l < EIGEN_FLOOR { 0.0 } else { l })
        .collect();
    (values, eig.eigenvectors)
}

fn power(l: f64, s: f64) -> f64 {
    if l > 0.0 {
        l.powf(s)
    } else {
        0.0
    }
}

/// Quantum Chernoff exponent between two 1- or 2-mode Gaussian states,
/// evaluated in a truncated Fock basis.
///
/// The per-mode cutoff is the smaller of `fock_cutoff` and the level at which
/// a thermal tail with that mode's photon number drops below `1e-14`. Both
/// truncated states are renormalized; a trace deficit above
/// `max_trace_deficit` is an error.
pub fn qcb_exponent_numeric(state0: &GaussianState, state1: &GaussianState, options: &QcbOptions) -> Result<QcbResult> {
    let n = state0.n_modes();
    if n != state1.n_modes() || !(1..=2).contains(&n) {
        return Err(Error::Dimension(format!(
            "Chernoff oracle needs two states with 1 or 2 modes, got {} and {}",
            n,
            state1.n_modes()
        )));
    }
    if options.fock_cutoff == 0 || !(options.s_tolerance > 0.0) || !(options.max_trace_deficit >= 0.0) {
        return Err(invalid("Chernoff options need a positive cutoff and tolerances"));
    }
    let mut cutoffs = Vec::with_capacity(n);
    for mode in 0..n {
        let nbar = state0.mean_photon_number(mode)?.max(state1.mean_photon_number(mode)?);
        cutoffs.push(options.fock_cutoff.min(fock::thermal_cutoff(nbar, AUTO_TAIL) + 2));
    }
    let mut traces = [0.0; 2];
    let mut spectra = Vec::with_capacity(2);
    for (k, state) in [state0, state1].into_iter().enumerate() {
        let rho = fock::density_matrix(state, &cutoffs)?;
        let tr = fock::trace(&rho);
        if 1.0 - tr > options.max_trace_deficit {
            return Err(Error::InsufficientCutoff {
                cutoff: options.fock_cutoff,
                trace: tr,
                max_deficit: options.max_trace_deficit,
            });
        }
        traces[k] = tr;
        spectra.push(spectral(rho / Complex::new(tr, 0.0)));
    }
    let (l0, v0) = &spectra[0];
    let (l1, v1) = &spectra[1];
    let overlap = (v0.adjoint() * v1).map(|z| z.norm_sqr());
    let objective = |s: f64| -> f64 {
        let mut total = 0.0;
        for (i, &a) in l0.iter().enumerate() {
            let pa = power(a, s);
            if pa == 0.0 {
                continue;
            }
            for (j, &b) in l1.iter().enumerate() {
                total += pa * overlap[(i, j)] * power(b, 1.0 - s);
            }
        }
        total
    };
    let (optimal_s, q_min) = golden_section_min(objective, 0.0, 1.0, options.s_tolerance);
    Ok(QcbResult {
        exponent: (-q_min.ln()).max(0.0),
        optimal_s,
        traces,
        cutoffs,
    })
}

const Z: Matrix2<f64> = Matrix2::new(1.0, 0.0, 0.0, -1.0);

/// Two-mode entangled resource for teleportation: mode 0 is the sender's
/// arm, mode 1 the receiver's.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportResource {
    state: GaussianState,
    gain: f64,
}

impl TeleportResource {
    pub fn new(state: GaussianState, gain: f64) -> Result<Self> {
        if state.n_modes() != 2 {
            return Err(Error::Dimension(format!(
                "teleportation resource needs 2 modes, got {}",
                state.n_modes()
            )));
        }
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(invalid(format!("teleportation gain must be > 0, got {gain}")));
        }
        Ok(Self { state, gain })
    }

    pub fn unity_gain(state: GaussianState) -> Result<Self> {
        Self::new(state, 1.0)
    }

    pub fn state(&self) -> &GaussianState {
        &self.state
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }
}

/// Noise added by Braunstein-Kimble teleportation with gain `g`:
/// `N = B + g² Z A Z - g (Cᵀ Z + Z C)` for resource blocks `[[A, C], [Cᵀ, B]]`.
///
/// The receiver's output quadratures are `g x_in + x_B - g x_A` and
/// `g p_in + p_B + g p_A`; `N` is their covariance with the input removed.
pub fn teleport_added_noise(resource: &TeleportResource) -> Matrix2<f64> {
    let cov = resource.state.cov();
    let a: Matrix2<f64> = cov.fixed_view::<2, 2>(0, 0).into();
    let b: Matrix2<f64> = cov.fixed_view::<2, 2>(2, 2).into();
    let c: Matrix2<f64> = cov.fixed_view::<2, 2>(0, 2).into();
    let g = resource.gain;
    let n = b + Z * a * Z * (g * g) - (c.transpose() * Z + Z * c) * g;
    (n + n.transpose()) * 0.5
}

fn check_psd(noise: &Matrix2<f64>) -> Result<()> {
    if (noise - noise.transpose()).amax() > 1e-12 * noise.amax().max(1.0) {
        return Err(Error::Unphysical("teleportation noise is not symmetric".into()));
    }
    let floor = -1e-12 * noise.amax().max(1.0);
    if noise[(0, 0)] < floor || noise[(1, 1)] < floor || noise.determinant() < floor {
        return Err(Error::Unphysical("teleportation noise is not positive semidefinite".into()));
    }
    Ok(())
}

/// Unity-gain fidelity for coherent inputs, `2 / √det(2I + N)`.
pub fn teleport_fidelity_coherent(noise: &Matrix2<f64>) -> Result<f64> {
    check_psd(noise)?;
    let det = (Matrix2::identity() * 2.0 + noise).determinant();
    Ok((2.0 / det.sqrt()).min(1.0))
}

/// State received after teleporting the single-mode `input`.
pub fn teleported_state(resource: &TeleportResource, input: &GaussianState) -> Result<GaussianState> {
    if input.n_modes() != 1 {
        return Err(Error::Dimension("teleportation input must be a single mode".into()));
    }
    let noise = teleport_added_noise(resource);
    check_psd(&noise)?;
    let g = resource.gain;
    let cov = input.cov() * (g * g) + DMatrix::from_iterator(2, 2, noise.iter().copied());
    GaussianState::new(input.mean() * g, cov)
}

/// Fidelity between `input` and its teleported copy, any gain.
pub fn teleport_fidelity(resource: &TeleportResource, input: &GaussianState) -> Result<f64> {
    let out = teleported_state(resource, input)?;
    single_mode_fidelity(&input.mode_cov(0)?, &input.mode_mean(0)?, &out.mode_cov(0)?, &out.mode_mean(0)?)
}

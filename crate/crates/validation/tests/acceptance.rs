//! Acceptance criteria, one line each. Runs as a plain binary so that every
//! criterion is evaluated and printed even when an earlier one fails.

use std::f64::consts::PI;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cryolink::gaussian::{log_negativity, symplectic_form};
use cryolink::link::{self, LinkGeometry};
use cryolink::scenario::{reproduce_table1, run_scenario, ScenarioConfig};
use cryolink::sensing::{
    self, ExponentModel, IlluminationProtocol, IlluminationScenario, QcbOptions, TeleportResource,
};
use cryolink::thermal::{self, compose_loss, planck_occupation, LossParams, TemperatureRamp};
use cryolink::{GaussianState, SymplecticOp};

struct Check {
    ok: bool,
    detail: String,
}

impl Check {
    fn new() -> Self {
        Self { ok: true, detail: String::new() }
    }

    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        let what = what.into();
        if ok {
            self.detail.push_str(&what);
        } else {
            self.ok = false;
            self.detail.push_str(&format!("MISS {what}"));
        }
    }
}

fn c1_occupancy() -> Check {
    let mut c = Check::new();
    let optical = planck_occupation(500e12, 300.0).unwrap();
    c.expect((1.3e-35..=3e-35).contains(&optical), format!("n(500 THz, 300 K) = {optical:.3e}"));
    let warm = planck_occupation(5e9, 300.0).unwrap();
    c.expect((1249.0..=1251.0).contains(&warm), format!("n(5 GHz, 300 K) = {warm:.2}"));
    let cold = planck_occupation(5e9, 0.030).unwrap();
    c.expect((3.0e-4..=3.6e-4).contains(&cold), format!("n(5 GHz, 30 mK) = {cold:.3e}"));
    c
}

fn c2_table1() -> Check {
    let mut c = Check::new();
    let table = reproduce_table1().unwrap();
    c.expect(table.rows.len() == 6, format!("{} rows", table.rows.len()));
    let mut worst_lp: f64 = 0.0;
    let mut worst_la: f64 = 0.0;
    for row in &table.rows {
        // Independent Friis oracle.
        let oracle = 20.0 * (4.0 * PI * row.distance_km * 1e3 / row.wavelength_m).log10();
        c.expect(
            (row.path_loss_db - oracle).abs() < 1e-9,
            format!("{} {} km oracle", row.band, row.distance_km),
        );
        worst_lp = worst_lp.max((row.path_loss_db - row.reference_path_loss_db).abs());
        // Absorption scales linearly with distance from the per-km coefficient.
        let linear = row.attenuation_db_per_km * row.distance_km;
        c.expect((row.absorption_db - linear).abs() < 1e-12, format!("{} {} km linear", row.band, row.distance_km));
        worst_la = worst_la.max((row.absorption_db / row.reference_absorption_db - 1.0).abs());
    }
    c.expect(worst_lp <= 0.5, format!("worst L_P deviation {worst_lp:.2} dB (<= 0.5)"));
    c.expect(worst_la <= 0.05, format!("worst L_A deviation {:.1}% (<= 5%)", 100.0 * worst_la));
    c.expect(table.check().is_ok(), "self-check");
    c
}

fn c3_antenna_gain() -> Check {
    let mut c = Check::new();
    let g = link::antenna_gain_db(810e-9, 1.0).unwrap();
    c.expect((g - 130.0).abs() <= 3.0, format!("G(810 nm, 1 m) = {g:.2} dB (130 +/- 3)"));
    c
}

const SATELLITE: &str = r#"
[source]
kind = "tmsv"
squeezing_nepers = 1.0

[[channel]]
kind = "open_air"
mode = 1
wavelength_m = 8.1e-7
distance_km = 1000.0
tx_aperture_m = 1.0
rx_aperture_m = 1.0
absorption_path_km = 10.0
bath_temperature_k = 300.0

[metric]
kind = "link_loss"
mode = 1
"#;

fn c4_satellite() -> Check {
    let mut c = Check::new();
    let config = ScenarioConfig::from_toml_str(SATELLITE, true).unwrap();
    let report = run_scenario(&config).unwrap();
    let total = report.records[0].get_number("channel0_link_total_db").unwrap();
    c.expect((-5.0..=15.0).contains(&total), format!("total {total:.2} dB in [-5, 15]"));
    let geometry = LinkGeometry::new(810e-9, 1000.0, 1.0, 1.0, None).unwrap();
    let budget = link::link_budget(&geometry).unwrap();
    let absorption = report.records[0].get_number("channel0_absorption_db").unwrap();
    c.expect(
        (budget.total_db + absorption - total).abs() < 1e-9,
        "scenario total = Friis budget + absorption",
    );
    c.expect(report.summary.contains("65-82 dB"), "measured-range note printed");
    c
}

fn c5_illumination() -> Check {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for ns in [1e-2, 1e-3, 1e-4] {
        for nb in [1e2, 1e3, 1e4] {
            for model in [ExponentModel::FiniteBackground, ExponentModel::Asymptotic] {
                let s = IlluminationScenario::new(0.01, ns, nb, 1_000_000).unwrap().with_model(model);
                let adv = sensing::qi_advantage_db(&s).unwrap();
                worst = worst.max((adv - 6.02).abs());
            }
        }
    }
    c.expect(worst <= 0.1, format!("advantage within {worst:.3} dB of 6.02"));

    // Oracle at n_B = 20 with an 80-photon cutoff. The thermal tail beyond 80
    // photons holds about 2% of the weight, so the trace guard is relaxed to
    // let the comparison run at the stated cutoff.
    let scenario = IlluminationScenario::new(0.01, 0.01, 20.0, 1_000_000).unwrap();
    let options = QcbOptions {
        fock_cutoff: 80,
        max_trace_deficit: 0.05,
        ..QcbOptions::default()
    };
    for (name, protocol) in [("coherent", IlluminationProtocol::Coherent), ("tmsv", IlluminationProtocol::Tmsv)] {
        let closed = sensing::qi_error_exponent(protocol, &scenario).unwrap();
        let (h0, h1) = sensing::illumination_hypotheses(protocol, &scenario).unwrap();
        let q = sensing::qcb_exponent_numeric(&h0, &h1, &options).unwrap();
        let dev = (closed - q.exponent).abs() / q.exponent;
        c.expect(
            dev <= 0.10,
            format!(
                "{name} oracle {:.4e} vs closed {closed:.4e}: {:.1}% (<= 10%, traces {:.4}/{:.4})",
                q.exponent,
                100.0 * dev,
                q.traces[0],
                q.traces[1]
            ),
        );
    }
    c
}

/// Smallest eigenvalue of `V + iΩ`, through its real symmetric embedding.
/// Non-negative exactly when every symplectic eigenvalue is at least 1.
fn bona_fide_margin(cov: &DMatrix<f64>) -> f64 {
    let d = cov.nrows();
    let omega = symplectic_form(d / 2);
    let mut h = DMatrix::zeros(2 * d, 2 * d);
    h.view_mut((0, 0), (d, d)).copy_from(cov);
    h.view_mut((d, d), (d, d)).copy_from(cov);
    h.view_mut((0, d), (d, d)).copy_from(&(-&omega));
    h.view_mut((d, 0), (d, d)).copy_from(&omega);
    SymmetricEigen::new(h).eigenvalues.min()
}

/// Random input followed by up to eight Gaussian channels. Accumulated
/// squeezing stays below 3.5 Np: beyond that an `f64` covariance no longer
/// resolves symplectic eigenvalues to 1e-9.
fn random_state(rng: &mut ChaCha8Rng) -> GaussianState {
    let mut squeezing = 0.0;
    let mut state = match rng.random_range(0..3) {
        0 => {
            squeezing = rng.random_range(0.0..2.0);
            GaussianState::tmsv(squeezing).unwrap()
        }
        1 => GaussianState::thermal(rng.random_range(0.0..50.0))
            .unwrap()
            .tensor(&GaussianState::vacuum(1).unwrap()),
        _ => GaussianState::vacuum(2).unwrap(),
    };
    for _ in 0..rng.random_range(1..=8) {
        let mode = rng.random_range(0..2);
        let r: f64 = rng.random_range(-0.75..0.75);
        let kind = rng.random_range(0..5);
        let kind = if (2..=3).contains(&kind) && squeezing + r.abs() > 3.5 { 1 } else { kind };
        state = match kind {
            0 => thermal::loss_channel(&state, mode, rng.random_range(0.0..=1.0), rng.random_range(0.0..1e3)).unwrap(),
            1 => state
                .apply(&SymplecticOp::beam_splitter(rng.random_range(0.0..=1.0)).unwrap(), &[0, 1])
                .unwrap(),
            2 => {
                squeezing += r.abs();
                state.apply(&SymplecticOp::two_mode_squeezer(r.abs()).unwrap(), &[0, 1]).unwrap()
            }
            3 => {
                squeezing += r.abs();
                state.apply(&SymplecticOp::squeezer(r).unwrap(), &[mode]).unwrap()
            }
            _ => state.apply(&SymplecticOp::rotation(rng.random_range(0.0..2.0 * PI)), &[mode]).unwrap(),
        };
    }
    state
}

fn c6_properties() -> Check {
    let mut c = Check::new();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut min_nu = f64::INFINITY;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..10_000 {
        let state = random_state(&mut rng);
        min_nu = state.symplectic_eigenvalues().into_iter().fold(min_nu, f64::min);
        worst_margin = worst_margin.min(bona_fide_margin(state.cov()) / state.cov().amax());
    }
    c.expect(min_nu >= 1.0 - 1e-9, format!("1e4 compositions, min symplectic eigenvalue {min_nu:.12}"));
    c.expect(worst_margin >= -1e-12, format!("V + iΩ >= 0 up to {worst_margin:.1e} relative"));

    // Two segments against the explicit output covariance.
    let mut worst: f64 = 0.0;
    let input = GaussianState::tmsv(0.9).unwrap();
    for (e1, n1, e2, n2) in [(0.9, 0.0, 0.5, 3.0), (0.3, 1249.7, 0.95, 3e-4), (0.999, 16.2, 0.01, 0.2)] {
        let composed = compose_loss(
            LossParams::from_occupation(e1, n1).unwrap(),
            LossParams::from_occupation(e2, n2).unwrap(),
        );
        let out = composed.apply(&input, 1).unwrap();
        let v = input.cov();
        let mut expected = v.clone();
        let mu = e2 * (1.0 - e1) * (2.0 * n1 + 1.0) + (1.0 - e2) * (2.0 * n2 + 1.0);
        for i in 0..4 {
            for j in 0..4 {
                let (a, b) = (i >= 2, j >= 2);
                expected[(i, j)] = match (a, b) {
                    (true, true) => e1 * e2 * v[(i, j)] + if i == j { mu } else { 0.0 },
                    (false, false) => v[(i, j)],
                    _ => (e1 * e2).sqrt() * v[(i, j)],
                };
            }
        }
        worst = worst.max((out.cov() - expected).amax());
    }
    c.expect(worst <= 1e-10, format!("two-segment composition error {worst:.1e}"));

    let ramp = TemperatureRamp {
        length_km: 0.01,
        attenuation_db_per_km: 300.0,
        start_temperature_k: 0.01,
        end_temperature_k: 300.0,
        frequency_hz: 5e9,
    };
    let limit = thermal::continuous_loss_params(&ramp, 1e-12).unwrap();
    let errors: Vec<f64> = [1, 2, 4, 8, 16, 32, 64, 128]
        .iter()
        .map(|&n| {
            let p = ramp.discretize(n).unwrap().effective_channel().unwrap();
            (p.bath_variance - limit.bath_variance).abs() + (p.transmissivity - limit.transmissivity).abs()
        })
        .collect();
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    c.expect(
        decreasing && errors[7] < errors[0] * 1e-3,
        format!("ramp error {:.1e} -> {:.1e} over N = 1..128", errors[0], errors[7]),
    );

    let fidelity = |r: f64| {
        let res = TeleportResource::unity_gain(GaussianState::tmsv(r).unwrap()).unwrap();
        sensing::teleport_fidelity_coherent(&sensing::teleport_added_noise(&res)).unwrap()
    };
    let f0 = fidelity(0.0);
    c.expect((f0 - 0.5).abs() <= 1e-9, format!("F(r = 0) = {f0:.12}"));
    let grid: Vec<f64> = (0..=60).map(|i| fidelity(i as f64 * 0.05)).collect();
    c.expect(grid.windows(2).all(|w| w[1] > w[0]), "F strictly increasing on r in [0, 3]");

    // One arm of a squeezed pair through thermal loss turns separable exactly
    // at the entanglement-breaking bath n* = eta / (1 - eta), whatever r is.
    let eta = 0.5;
    let threshold = eta / (1.0 - eta);
    for r in [0.3, 1.0, 2.0] {
        let ln = |n: f64| log_negativity(&thermal::loss_channel(&GaussianState::tmsv(r).unwrap(), 1, eta, n).unwrap()).unwrap();
        let baths: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let below = baths.iter().filter(|&&n| n < threshold - 1e-6).all(|&n| ln(n) > 0.0);
        let above = baths.iter().filter(|&&n| n > threshold + 1e-6).all(|&n| ln(n) == 0.0);
        c.expect(
            below && above,
            format!("r = {r}: log-negativity positive below and exactly 0 above bath {threshold} photons"),
        );
    }
    c
}

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples")
}

fn c7_determinism() -> Check {
    let mut c = Check::new();
    let mut configs: Vec<PathBuf> = fs::read_dir(examples_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    configs.sort();
    c.expect(!configs.is_empty(), format!("{} example configs", configs.len()));
    for path in configs {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let golden = examples_dir().join("golden");
        let config = ScenarioConfig::load(&path, true).unwrap();
        let same = (0..3).all(|_| {
            let report = run_scenario(&config).unwrap();
            fs::read_to_string(golden.join(format!("{name}.csv"))).ok() == Some(report.to_csv().unwrap())
                && fs::read_to_string(golden.join(format!("{name}.summary.txt"))).ok() == Some(report.summary)
        });
        c.expect(same, format!("{name} matches golden"));
    }
    c
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 7] = [
        ("occupancy", c1_occupancy),
        ("table 1 reproduction", c2_table1),
        ("antenna gain", c3_antenna_gain),
        ("satellite-like link", c4_satellite),
        ("illumination advantage and oracle", c5_illumination),
        ("property suite", c6_properties),
        ("golden determinism", c7_determinism),
    ];
    // Panics become FAIL lines; keep the default hook's backtraces out of them.
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let check = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Check {
                ok: false,
                detail: format!("panicked: {msg}"),
            }
        });
        let tag = if check.ok { "PASS" } else { "FAIL" };
        if !check.ok {
            failed += 1;
        }
        println!(
            "[{tag}] criterion {} {name} ({:.2} s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            check.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

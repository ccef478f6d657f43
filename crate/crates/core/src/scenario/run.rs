//! Executes a scenario: source, channel chain, metric, for every sweep point.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::Complex;
use rayon::prelude::*;

use super::config::{
    ChannelConfig, MetricConfig, ScenarioConfig, SourceConfig, WaveguideModel, ATMOSPHERE_BUNDLED, ATMOSPHERE_NONE,
};
use super::report::{format_field, Field, Record, Report};
use crate::atmosphere::AtmosphereTable;
use crate::error::{Error, Result};
use crate::gaussian::{log_negativity, GaussianState};
use crate::link::{self, LinkGeometry};
use crate::sensing::{self, IlluminationProtocol, IlluminationScenario, TeleportResource};
use crate::thermal::{self, planck_occupation, LossParams, WaveguideProfile};

/// Context printed with every open-air channel.
pub const OPEN_AIR_NOTE: &str = "open-air losses are idealized (perfect apertures, no pointing, turbulence or \
coupling losses); measured ground-to-satellite optical links have shown 65-82 dB total loss";
/// Printed when a link budget predicts net gain.
pub const NET_GAIN_NOTE: &str = "a link budget below 0 dB is outside far-field validity; transmissivity capped at 1";

/// A channel reduced to one loss element plus its report fields.
struct Stage {
    mode: usize,
    params: LossParams,
    fields: Vec<(String, f64)>,
    notes: Vec<&'static str>,
}

fn load_atmospheres(config: &ScenarioConfig) -> Result<BTreeMap<String, Arc<AtmosphereTable>>> {
    let mut tables = BTreeMap::new();
    for ch in &config.channels {
        if let ChannelConfig::OpenAir(c) = ch {
            if c.atmosphere == ATMOSPHERE_NONE || tables.contains_key(&c.atmosphere) {
                continue;
            }
            let table = if c.atmosphere == ATMOSPHERE_BUNDLED {
                AtmosphereTable::resolve()?
            } else {
                AtmosphereTable::from_path(&c.atmosphere)
                    .map_err(|e| Error::Config(format!("atmosphere table {}: {e}", c.atmosphere)))?
            };
            tables.insert(c.atmosphere.clone(), Arc::new(table));
        }
    }
    Ok(tables)
}

fn build_stage(index: usize, channel: &ChannelConfig, tables: &BTreeMap<String, Arc<AtmosphereTable>>) -> Result<Stage> {
    let key = |name: &str| format!("channel{index}_{name}");
    let mut fields = Vec::new();
    let mut notes = Vec::new();
    let params = match channel {
        ChannelConfig::Loss(c) => {
            let eta = link::loss_to_transmissivity(c.loss_db)?;
            let nbar = match (c.bath_photons, c.bath_temperature_k, c.frequency_hz) {
                (Some(n), _, _) => n,
                (None, Some(t), Some(f)) => planck_occupation(f, t)?,
                _ => return Err(Error::Config(format!("channel[{index}]: bath not specified"))),
            };
            LossParams::from_occupation(eta, nbar)?
        }
        ChannelConfig::Waveguide(c) => {
            let profile = WaveguideProfile::new(c.segments.clone(), c.frequency_hz)?;
            for (j, seg) in profile.segment_channels()?.iter().enumerate() {
                fields.push((key(&format!("segment{j}_transmissivity_ratio")), seg.transmissivity));
                fields.push((key(&format!("segment{j}_bath_photons")), seg.bath_photons));
                fields.push((key(&format!("segment{j}_loss_db")), seg.loss_db));
            }
            match c.model {
                WaveguideModel::Segmented => profile.effective_channel()?,
                WaveguideModel::Continuous => thermal::continuous_loss_params(&profile, c.step_tolerance)?,
            }
        }
        ChannelConfig::OpenAir(c) => {
            let atmosphere = tables.get(&c.atmosphere).cloned();
            let mut geometry = LinkGeometry::new(c.wavelength_m, c.distance_km, c.tx_aperture_m, c.rx_aperture_m, atmosphere)?
                .with_antenna_efficiency(c.antenna_efficiency_ratio)?;
            if let Some(path) = c.absorption_path_km {
                geometry = geometry.with_absorption_path(path)?;
            }
            let budget = link::link_budget(&geometry)?;
            fields.push((key("path_loss_db"), budget.path_loss_db));
            fields.push((key("absorption_db"), budget.absorption_db));
            fields.push((key("tx_gain_db"), budget.tx_gain_db));
            fields.push((key("rx_gain_db"), budget.rx_gain_db));
            let mut total = budget.total_db;
            if let Some(z) = c.impedance {
                let m = link::impedance_reflection(z.source_ohm, z.load_ohm)?;
                fields.push((key("reflection_ratio"), m.gamma));
                fields.push((key("mismatch_loss_db"), m.mismatch_loss_db));
                total += m.mismatch_loss_db;
            }
            fields.push((key("link_total_db"), total));
            notes.push(OPEN_AIR_NOTE);
            if total < 0.0 {
                notes.push(NET_GAIN_NOTE);
            }
            let eta = link::loss_to_transmissivity(total.max(0.0))?;
            LossParams::from_occupation(eta, planck_occupation(geometry.frequency_hz(), c.bath_temperature_k)?)?
        }
    };
    fields.push((key("transmissivity_ratio"), params.transmissivity));
    fields.push((key("bath_photons"), params.bath_photons()));
    fields.push((key("loss_db"), params.loss_db()));
    Ok(Stage {
        mode: channel.mode(),
        params,
        fields,
        notes,
    })
}

fn source_state(source: &SourceConfig) -> Result<GaussianState> {
    match source {
        SourceConfig::Vacuum { modes } => GaussianState::vacuum(*modes),
        SourceConfig::Thermal { mean_photons } => GaussianState::thermal(*mean_photons),
        SourceConfig::Tmsv { squeezing_nepers } => GaussianState::tmsv(*squeezing_nepers),
    }
}

fn metric_fields(metric: &MetricConfig, state: &GaussianState, stages: &[Stage]) -> Result<Vec<(String, f64)>> {
    Ok(match metric {
        MetricConfig::Occupation { mode } => vec![("occupation_photons".into(), state.mean_photon_number(*mode)?)],
        MetricConfig::LogNegativity => vec![("log_negativity_ebit".into(), log_negativity(state)?)],
        MetricConfig::TeleportFidelity { gain_ratio } => {
            let resource = TeleportResource::new(state.clone(), *gain_ratio)?;
            let fidelity = if *gain_ratio == 1.0 {
                sensing::teleport_fidelity_coherent(&sensing::teleport_added_noise(&resource))?
            } else {
                // non-unity gain: fidelity for the vacuum input
                sensing::teleport_fidelity(&resource, &GaussianState::coherent(Complex::new(0.0, 0.0))?)?
            };
            vec![("teleport_fidelity_ratio".into(), fidelity)]
        }
        MetricConfig::QiAdvantage {
            reflectivity_ratio,
            signal_photons,
            background_photons,
            mode_pairs,
            model,
        } => {
            let s = IlluminationScenario::new(*reflectivity_ratio, *signal_photons, *background_photons, *mode_pairs)?
                .with_model(*model);
            let mut out = vec![("qi_advantage_db".to_string(), sensing::qi_advantage_db(&s)?)];
            for (name, p) in [("coherent", IlluminationProtocol::Coherent), ("tmsv", IlluminationProtocol::Tmsv)] {
                out.push((format!("qi_{name}_exponent_nats"), sensing::qi_error_exponent(p, &s)?));
                out.push((format!("qi_{name}_error_prob"), sensing::qi_error_bound(p, &s)?));
            }
            out
        }
        MetricConfig::LinkLoss { mode } => {
            let eta: f64 = stages.iter().filter(|s| s.mode == *mode).map(|s| s.params.transmissivity).product();
            vec![
                ("link_transmissivity_ratio".into(), eta),
                ("link_loss_db".into(), -10.0 * eta.log10()),
            ]
        }
    })
}

struct PointOutcome {
    record: Record,
    metric: Vec<(String, f64)>,
    notes: Vec<&'static str>,
}

fn evaluate_point(
    index: usize,
    sweep: Option<(&str, f64)>,
    config: &ScenarioConfig,
    tables: &BTreeMap<String, Arc<AtmosphereTable>>,
) -> Result<PointOutcome> {
    let mut record = Record::new();
    record.integer("point_index", index as u64);
    if let Some((name, value)) = sweep {
        record.number(format!("sweep_{name}"), value);
    }
    let mut state = source_state(&config.source)?;
    for m in 0..state.n_modes() {
        record.number(format!("mode{m}_input_photons"), state.mean_photon_number(m)?);
    }
    let stages = config
        .channels
        .iter()
        .enumerate()
        .map(|(i, c)| build_stage(i, c, tables))
        .collect::<Result<Vec<_>>>()?;
    let mut notes = Vec::new();
    for stage in &stages {
        state = stage.params.apply(&state, stage.mode)?;
        for (k, v) in &stage.fields {
            record.number(k.clone(), *v);
        }
        for n in &stage.notes {
            if !notes.contains(n) {
                notes.push(*n);
            }
        }
    }
    for m in 0..state.n_modes() {
        record.number(format!("mode{m}_output_photons"), state.mean_photon_number(m)?);
    }
    let metric = metric_fields(&config.metric, &state, &stages)?;
    for (k, v) in &metric {
        if !v.is_finite() {
            return Err(Error::Unphysical(format!("metric {k} is not finite at point {index}")));
        }
        record.number(k.clone(), *v);
    }
    Ok(PointOutcome { record, metric, notes })
}

fn describe_source(source: &SourceConfig) -> String {
    match source {
        SourceConfig::Vacuum { modes } => format!("vacuum, {modes} mode(s)"),
        SourceConfig::Thermal { mean_photons } => format!("thermal, {mean_photons} photons"),
        SourceConfig::Tmsv { squeezing_nepers } => format!("two-mode squeezed vacuum, r = {squeezing_nepers} Np"),
    }
}

fn describe_channel(channel: &ChannelConfig) -> String {
    match channel {
        ChannelConfig::Loss(c) => format!("loss {} dB on mode {}", c.loss_db, c.mode),
        ChannelConfig::Waveguide(c) => format!(
            "waveguide on mode {}, {} segment(s), {} model",
            c.mode,
            c.segments.len(),
            match c.model {
                WaveguideModel::Segmented => "segmented",
                WaveguideModel::Continuous => "continuous",
            }
        ),
        ChannelConfig::OpenAir(c) => format!(
            "open air on mode {}, {} m wavelength over {} km, apertures {} m / {} m",
            c.mode, c.wavelength_m, c.distance_km, c.tx_aperture_m, c.rx_aperture_m
        ),
    }
}

/// Runs every sweep point (in parallel) and assembles the report in sweep
/// order. Output is a pure function of the config.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Report> {
    config.validate()?;
    let tables = load_atmospheres(config)?;
    let points = config.sweep_points()?;
    let sweep_name = config.sweep.as_ref().map(|s| s.field_name().to_string());
    let outcomes = points
        .par_iter()
        .enumerate()
        .map(|(i, (value, point))| {
            let sweep = sweep_name.as_deref().zip(*value);
            evaluate_point(i, sweep, point, &tables)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = String::new();
    let _ = writeln!(summary, "scenario: {}", config.title.as_deref().unwrap_or("untitled"));
    let _ = writeln!(summary, "source: {}", describe_source(&config.source));
    if config.channels.is_empty() {
        let _ = writeln!(summary, "channels: none");
    } else {
        let _ = writeln!(summary, "channels:");
        for (i, ch) in config.channels.iter().enumerate() {
            let _ = writeln!(summary, "  [{i}] {}", describe_channel(ch));
        }
    }
    let _ = writeln!(summary, "metric: {}", config.metric.kind());
    if let Some(s) = &config.sweep {
        let _ = writeln!(summary, "sweep: {} from {} to {} in {} step(s)", s.parameter, s.start, s.stop, s.steps);
    }
    let _ = writeln!(summary, "results:");
    for (i, o) in outcomes.iter().enumerate() {
        let mut line = format!("  point {i}");
        if let (Some(name), Some(v)) = (&sweep_name, points[i].0) {
            let key = format!("sweep_{name}");
            let _ = write!(line, ", {name} = {}", format_field(&key, &Field::Number(v))?);
        }
        for (k, v) in &o.metric {
            let _ = write!(line, ", {k} = {}", format_field(k, &Field::Number(*v))?);
        }
        let _ = writeln!(summary, "{line}");
    }
    let mut notes: Vec<&str> = Vec::new();
    for o in &outcomes {
        for n in &o.notes {
            if !notes.contains(n) {
                notes.push(n);
            }
        }
    }
    if !notes.is_empty() {
        let _ = writeln!(summary, "notes:");
        for n in notes {
            let _ = writeln!(summary, "  - {n}");
        }
    }
    let report = Report::new(outcomes.into_iter().map(|o| o.record).collect(), summary);
    report.lint()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> Report {
        run_scenario(&ScenarioConfig::from_toml_str(text, true).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_without_channels_has_zero_occupation() {
        let r = run("[source]\nkind = \"vacuum\"\n[metric]\nkind = \"occupation\"\nmode = 0\n");
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].get_number("occupation_photons"), Some(0.0));
        assert!(r.summary.contains("channels: none"));
    }

    #[test]
    fn open_air_loss_kills_entanglement() {
        let text = r#"
[source]
kind = "tmsv"
squeezing_nepers = 1.0

[[channel]]
kind = "loss"
mode = 1
loss_db = 106.0
bath_photons = 0.0

[metric]
kind = "log_negativity"
"#;
        let r = run(text);
        // pure loss only shrinks entanglement towards zero
        let ln = r.records[0].get_number("log_negativity_ebit").unwrap();
        assert!(ln > 0.0 && ln < 1e-9, "{ln}");
        let eta = r.records[0].get_number("channel0_transmissivity_ratio").unwrap();
        assert!((eta / 2.512e-11 - 1.0).abs() < 1e-3);
        // a room-temperature bath removes it entirely
        let hot = text.replace("bath_photons = 0.0", "bath_temperature_k = 300.0\nfrequency_hz = 5e9");
        assert_eq!(run(&hot).records[0].get_number("log_negativity_ebit"), Some(0.0));
    }

    #[test]
    fn open_air_channel_reports_budget_and_note() {
        let text = r#"
[source]
kind = "tmsv"
squeezing_nepers = 0.5

[[channel]]
kind = "open_air"
mode = 1
wavelength_m = 0.06
distance_km = 1.0
tx_aperture_m = 1.0
rx_aperture_m = 1.0
bath_temperature_k = 300.0
impedance = { source_ohm = 50.0, load_ohm = 377.0 }

[metric]
kind = "link_loss"
mode = 1
"#;
        let r = run(text);
        let rec = &r.records[0];
        let total = rec.get_number("channel0_link_total_db").unwrap();
        let parts = rec.get_number("channel0_path_loss_db").unwrap() + rec.get_number("channel0_absorption_db").unwrap()
            - rec.get_number("channel0_tx_gain_db").unwrap()
            - rec.get_number("channel0_rx_gain_db").unwrap()
            + rec.get_number("channel0_mismatch_loss_db").unwrap();
        assert!((total - parts).abs() < 1e-9);
        assert!((rec.get_number("link_loss_db").unwrap() - total).abs() < 1e-9);
        assert!(r.summary.contains("65-82 dB"));
        assert!(rec.get_number("channel0_bath_photons").unwrap() > 1000.0);
    }

    #[test]
    fn sweep_is_ordered_and_deterministic() {
        let text = r#"
[source]
kind = "tmsv"
squeezing_nepers = 1.0

[[channel]]
kind = "loss"
mode = 1
loss_db = 0.0
bath_photons = 0.5

[metric]
kind = "teleport_fidelity"

[sweep]
parameter = "channel.0.loss_db"
start = 0.0
stop = 20.0
steps = 21
"#;
        let a = run(text);
        let b = run(text);
        assert_eq!(a, b);
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        let f: Vec<f64> = a.records.iter().map(|r| r.get_number("teleport_fidelity_ratio").unwrap()).collect();
        assert!(f.windows(2).all(|w| w[1] <= w[0]));
        for (i, r) in a.records.iter().enumerate() {
            assert_eq!(r.get_number("point_index"), Some(i as f64));
        }
    }

    #[test]
    fn physics_errors_propagate() {
        let text = r#"
[source]
kind = "tmsv"
squeezing_nepers = 1.0

[[channel]]
kind = "open_air"
mode = 1
wavelength_m = 1e-9
distance_km = 1.0
tx_aperture_m = 1.0
rx_aperture_m = 1.0
bath_temperature_k = 300.0

[metric]
kind = "log_negativity"
"#;
        // 300 PHz lies outside the bundled table
        let err = run_scenario(&ScenarioConfig::from_toml_str(text, true).unwrap()).unwrap_err();
        assert!(matches!(err, Error::OutOfTableRange { .. }), "{err}");
        assert_eq!(err.exit_code(), 3);
    }
}

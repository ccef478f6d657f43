use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use cryolink::atmosphere::AtmosphereTable;
use cryolink::error::{Error, Result};
use cryolink::gaussian::log_negativity;
use cryolink::link::{self, LinkGeometry};
use cryolink::scenario::run::{NET_GAIN_NOTE, OPEN_AIR_NOTE};
use cryolink::scenario::{Record, Report};
use cryolink::sensing::{
    self, ExponentModel, IlluminationProtocol, IlluminationScenario, QcbOptions, TeleportResource,
};
use cryolink::thermal::{self, planck_occupation, Segment, WaveguideProfile};
use cryolink::GaussianState;

use crate::{AtmosphereArg, IlluminateArgs, LinkArgs, OccupancyArgs, TeleportArgs, WaveguideArgs};

fn finish(records: Vec<Record>, summary: String) -> Result<Report> {
    let report = Report::new(records, summary);
    report.lint()?;
    Ok(report)
}

pub fn occupancy(args: &OccupancyArgs) -> Result<Report> {
    let mut records = Vec::new();
    let mut summary = String::from("thermal occupation\n");
    for &f in &args.frequency_hz {
        for &t in &args.temperature_k {
            let n = planck_occupation(f, t)?;
            let mut rec = Record::new();
            rec.number("frequency_hz", f).number("temperature_k", t).number("occupation_photons", n);
            let _ = writeln!(summary, "  {f:e} Hz at {t} K: {n:.6e} photons");
            records.push(rec);
        }
    }
    finish(records, summary)
}

pub fn load_atmosphere(arg: &AtmosphereArg) -> Result<Option<Arc<AtmosphereTable>>> {
    Ok(match arg {
        AtmosphereArg::None => None,
        AtmosphereArg::Bundled => Some(Arc::new(AtmosphereTable::resolve()?)),
        AtmosphereArg::Path(p) => Some(Arc::new(AtmosphereTable::from_path(p)?)),
    })
}

pub fn link_budget(args: &LinkArgs) -> Result<Report> {
    let atmosphere = load_atmosphere(&args.atmosphere)?;
    let mut geometry = LinkGeometry::new(
        args.wavelength_m,
        args.distance_km,
        args.tx_aperture_m,
        args.rx_aperture_m,
        atmosphere,
    )?
    .with_antenna_efficiency(args.efficiency_ratio)?;
    if let Some(p) = args.absorption_path_km {
        geometry = geometry.with_absorption_path(p)?;
    }
    let budget = link::link_budget(&geometry)?;
    let mut rec = Record::new();
    rec.number("wavelength_m", args.wavelength_m)
        .number("frequency_hz", geometry.frequency_hz())
        .number("distance_km", args.distance_km)
        .number("absorption_path_km", geometry.absorption_path_km)
        .number("path_loss_db", budget.path_loss_db)
        .number("absorption_db", budget.absorption_db)
        .number("tx_gain_db", budget.tx_gain_db)
        .number("rx_gain_db", budget.rx_gain_db);
    let mut total = budget.total_db;
    if let (Some(zs), Some(zl)) = (args.source_ohm, args.load_ohm) {
        let m = link::impedance_reflection(zs, zl)?;
        rec.number("source_ohm", zs)
            .number("load_ohm", zl)
            .number("reflection_ratio", m.gamma)
            .number("mismatch_loss_db", m.mismatch_loss_db);
        total += m.mismatch_loss_db;
    }
    let eta = link::loss_to_transmissivity(total.max(0.0))?;
    rec.number("total_loss_db", total).number("transmissivity_ratio", eta);
    let mut summary = String::from("link budget\n");
    let _ = writeln!(summary, "  path loss   {:>9.2} dB", budget.path_loss_db);
    let _ = writeln!(summary, "  absorption  {:>9.2} dB", budget.absorption_db);
    let _ = writeln!(summary, "  tx gain     {:>9.2} dB", budget.tx_gain_db);
    let _ = writeln!(summary, "  rx gain     {:>9.2} dB", budget.rx_gain_db);
    let _ = writeln!(summary, "  total       {:>9.2} dB", total);
    let _ = writeln!(summary, "notes:\n  - {OPEN_AIR_NOTE}");
    if total < 0.0 {
        let _ = writeln!(summary, "  - {NET_GAIN_NOTE}");
    }
    finish(vec![rec], summary)
}

pub fn parse_segment(text: &str) -> std::result::Result<Segment, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected LENGTH_KM:DB_PER_KM:TEMPERATURE_K, got `{text}`"));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    Ok(Segment {
        length_km: num(parts[0])?,
        attenuation_db_per_km: num(parts[1])?,
        temperature_k: num(parts[2])?,
    })
}

pub fn waveguide(args: &WaveguideArgs) -> Result<Report> {
    let profile = WaveguideProfile::new(args.segment.clone(), args.frequency_hz)?;
    let mut rec = Record::new();
    rec.number("frequency_hz", args.frequency_hz).number("length_km", profile.length_km());
    let mut summary = String::from("waveguide\n");
    for (j, ch) in profile.segment_channels()?.iter().enumerate() {
        let seg = &profile.segments()[j];
        rec.number(format!("segment{j}_length_km"), seg.length_km)
            .number(format!("segment{j}_temperature_k"), seg.temperature_k)
            .number(format!("segment{j}_transmissivity_ratio"), ch.transmissivity)
            .number(format!("segment{j}_bath_photons"), ch.bath_photons)
            .number(format!("segment{j}_loss_db"), ch.loss_db);
        let _ = writeln!(
            summary,
            "  segment {j}: {} km at {} K, {:.2} dB, bath {:.4e} photons",
            seg.length_km, seg.temperature_k, ch.loss_db, ch.bath_photons
        );
    }
    let params = if args.continuous {
        thermal::continuous_loss_params(&profile, args.step_tolerance)?
    } else {
        profile.effective_channel()?
    };
    let source = GaussianState::tmsv(args.squeezing_nepers)?;
    let out = params.apply(&source, 1)?;
    let ln = log_negativity(&out)?;
    let fidelity = sensing::teleport_fidelity_coherent(&sensing::teleport_added_noise(&TeleportResource::unity_gain(
        out.clone(),
    )?))?;
    rec.number("transmissivity_ratio", params.transmissivity)
        .number("bath_photons", params.bath_photons())
        .number("loss_db", params.loss_db())
        .number("squeezing_nepers", args.squeezing_nepers)
        .number("output_photons", out.mean_photon_number(1)?)
        .number("log_negativity_ebit", ln)
        .number("teleport_fidelity_ratio", fidelity);
    let _ = writeln!(
        summary,
        "  effective ({}): {:.2} dB, bath {:.4e} photons",
        if args.continuous { "continuous" } else { "segmented" },
        params.loss_db(),
        params.bath_photons()
    );
    let _ = writeln!(
        summary,
        "  two-mode squeezed vacuum r = {} Np, one arm through the line: {ln:.6} ebit, teleportation fidelity {fidelity:.6}",
        args.squeezing_nepers
    );
    finish(vec![rec], summary)
}

pub fn illuminate(args: &IlluminateArgs) -> Result<Report> {
    let model = match args.model.as_str() {
        "finite_background" => ExponentModel::FiniteBackground,
        "asymptotic" => ExponentModel::Asymptotic,
        other => return Err(Error::Config(format!("unknown exponent model `{other}`"))),
    };
    let scenario =
        IlluminationScenario::new(args.reflectivity_ratio, args.signal_photons, args.background_photons, args.mode_pairs)?
            .with_model(model);
    let mut rec = Record::new();
    rec.number("reflectivity_ratio", args.reflectivity_ratio)
        .number("signal_photons", args.signal_photons)
        .number("background_photons", args.background_photons)
        .integer("mode_pairs_count", args.mode_pairs)
        .number("qi_advantage_db", sensing::qi_advantage_db(&scenario)?);
    let mut summary = String::from("quantum illumination\n");
    for (name, p) in [("coherent", IlluminationProtocol::Coherent), ("tmsv", IlluminationProtocol::Tmsv)] {
        let exponent = sensing::qi_error_exponent(p, &scenario)?;
        let bound = sensing::qi_error_bound(p, &scenario)?;
        rec.number(format!("{name}_exponent_nats"), exponent).number(format!("{name}_error_prob"), bound);
        let _ = writeln!(summary, "  {name:<8} exponent {exponent:.6e} per pair, error bound {bound:.6e}");
        if args.oracle {
            let (h0, h1) = sensing::illumination_hypotheses(p, &scenario)?;
            let options = QcbOptions {
                fock_cutoff: args.fock_cutoff,
                max_trace_deficit: args.max_trace_deficit,
                ..QcbOptions::default()
            };
            let q = sensing::qcb_exponent_numeric(&h0, &h1, &options)?;
            rec.number(format!("{name}_oracle_exponent_nats"), q.exponent)
                .number(format!("{name}_oracle_deviation_ratio"), exponent / q.exponent - 1.0);
            let _ = writeln!(
                summary,
                "  {name:<8} Fock oracle {:.6e} (cutoffs {:?}, s = {:.4}), closed form deviates {:+.2}%",
                q.exponent,
                q.cutoffs,
                q.optimal_s,
                100.0 * (exponent / q.exponent - 1.0)
            );
        }
    }
    let _ = writeln!(summary, "  advantage {:.2} dB", sensing::qi_advantage_db(&scenario)?);
    finish(vec![rec], summary)
}

pub fn teleport(args: &TeleportArgs) -> Result<Report> {
    let mut state = GaussianState::tmsv(args.squeezing_nepers)?;
    if args.loss_db > 0.0 || args.bath_photons > 0.0 {
        let eta = link::loss_to_transmissivity(args.loss_db)?;
        state = thermal::loss_channel(&state, args.arm.mode(), eta, args.bath_photons)?;
    }
    let resource = TeleportResource::new(state, args.gain_ratio)?;
    let noise = sensing::teleport_added_noise(&resource);
    let vacuum = GaussianState::vacuum(1)?;
    let fidelity = if args.gain_ratio == 1.0 {
        sensing::teleport_fidelity_coherent(&noise)?
    } else {
        sensing::teleport_fidelity(&resource, &vacuum)?
    };
    let mut rec = Record::new();
    rec.number("squeezing_nepers", args.squeezing_nepers)
        .number("loss_db", args.loss_db)
        .number("bath_photons", args.bath_photons)
        .number("gain_ratio", args.gain_ratio)
        .number("noise_xx_ratio", noise[(0, 0)])
        .number("noise_xp_ratio", noise[(0, 1)])
        .number("noise_pp_ratio", noise[(1, 1)])
        .number("teleport_fidelity_ratio", fidelity);
    let summary = format!(
        "teleportation\n  added noise [[{:.6}, {:.6}], [{:.6}, {:.6}]] (vacuum units)\n  fidelity {fidelity:.6}{} (classical limit 0.5)\n",
        noise[(0, 0)],
        noise[(0, 1)],
        noise[(1, 0)],
        noise[(1, 1)],
        if args.gain_ratio == 1.0 { "" } else { " for a vacuum input" }
    );
    finish(vec![rec], summary)
}

pub fn attenuation(path: &Path, min_ghz: Option<f64>, max_ghz: Option<f64>) -> Result<Report> {
    let table = AtmosphereTable::from_path(path).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot read {}: {io}", path.display())),
        other => other,
    })?;
    let (lo, hi) = table.range_ghz();
    cryolink::scenario::emit_attenuation_curve(&table, min_ghz.unwrap_or(lo), max_ghz.unwrap_or(hi))
}

//! Reference tables regenerated from the library, with their own tolerance
//! checks.

use std::fmt::Write as _;

use super::report::{Record, Report};
use crate::atmosphere::AtmosphereTable;
use crate::error::{Error, Result};
use crate::link;

/// Path-loss cells may deviate by this much from the reference.
pub const PATH_LOSS_TOLERANCE_DB: f64 = 0.5;
/// Relative tolerance on absorption cells.
pub const ABSORPTION_TOLERANCE_RATIO: f64 = 0.05;

struct Band {
    label: &'static str,
    wavelength_m: f64,
    frequency_hz: f64,
    /// `(distance_km, path loss dB, absorption dB)`
    reference: [(f64, f64, f64); 3],
}

const BANDS: [Band; 2] = [
    Band {
        label: "optics",
        wavelength_m: 810e-9,
        frequency_hz: 370e12,
        reference: [(1.0, 204.0, 3e-2), (100.0, 244.0, 3.0), (1000.0, 264.0, 30.0)],
    },
    Band {
        label: "microwave",
        wavelength_m: 60e-3,
        frequency_hz: 5e9,
        reference: [(1.0, 106.0, 9e-3), (100.0, 146.0, 0.9), (1000.0, 166.0, 9.0)],
    },
];

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub band: &'static str,
    pub wavelength_m: f64,
    pub frequency_hz: f64,
    pub distance_km: f64,
    pub path_loss_db: f64,
    pub reference_path_loss_db: f64,
    pub attenuation_db_per_km: f64,
    pub absorption_db: f64,
    pub reference_absorption_db: f64,
}

impl Table1Row {
    pub fn path_loss_ok(&self) -> bool {
        (self.path_loss_db - self.reference_path_loss_db).abs() <= PATH_LOSS_TOLERANCE_DB
    }

    pub fn absorption_ok(&self) -> bool {
        (self.absorption_db / self.reference_absorption_db - 1.0).abs() <= ABSORPTION_TOLERANCE_RATIO
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
}

/// Isotropic path loss and absorption over 1, 100 and 1000 km for an optical
/// and a microwave carrier, absorbing over the full distance.
pub fn reproduce_table1_with(table: &AtmosphereTable) -> Result<Table1> {
    let mut rows = Vec::with_capacity(6);
    for band in &BANDS {
        let per_km = table.attenuation_db_per_km(band.frequency_hz / 1e9)?;
        for &(distance_km, ref_lp, ref_la) in &band.reference {
            rows.push(Table1Row {
                band: band.label,
                wavelength_m: band.wavelength_m,
                frequency_hz: band.frequency_hz,
                distance_km,
                path_loss_db: link::free_space_path_loss_db(band.wavelength_m, distance_km)?,
                reference_path_loss_db: ref_lp,
                attenuation_db_per_km: per_km,
                absorption_db: link::absorption_db(band.frequency_hz, distance_km, table)?,
                reference_absorption_db: ref_la,
            });
        }
    }
    Ok(Table1 { rows })
}

/// [`reproduce_table1_with`] on the active atmosphere table.
pub fn reproduce_table1() -> Result<Table1> {
    reproduce_table1_with(&AtmosphereTable::resolve()?)
}

impl Table1 {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.path_loss_ok() && r.absorption_ok())
    }

    /// `Error::Tolerance` naming every failing cell.
    pub fn check(&self) -> Result<()> {
        let failures: Vec<String> = self
            .rows
            .iter()
            .flat_map(|r| {
                let mut out = Vec::new();
                if !r.path_loss_ok() {
                    out.push(format!(
                        "{} {} km path loss {:.2} dB vs {} dB",
                        r.band, r.distance_km, r.path_loss_db, r.reference_path_loss_db
                    ));
                }
                if !r.absorption_ok() {
                    out.push(format!(
                        "{} {} km absorption {:.4} dB vs {} dB",
                        r.band, r.distance_km, r.absorption_db, r.reference_absorption_db
                    ));
                }
                out
            })
            .collect();
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::Tolerance(failures.join("; ")))
        }
    }

    pub fn to_report(&self) -> Report {
        let records = self
            .rows
            .iter()
            .map(|r| {
                let mut rec = Record::new();
                rec.text("band_label", r.band)
                    .number("wavelength_m", r.wavelength_m)
                    .number("frequency_hz", r.frequency_hz)
                    .number("distance_km", r.distance_km)
                    .number("path_loss_db", r.path_loss_db)
                    .number("reference_path_loss_db", r.reference_path_loss_db)
                    .integer("path_loss_ok_count", r.path_loss_ok() as u64)
                    .number("attenuation_db_per_km", r.attenuation_db_per_km)
                    .number("absorption_db", r.absorption_db)
                    .number("reference_absorption_db", r.reference_absorption_db)
                    .integer("absorption_ok_count", r.absorption_ok() as u64);
                rec
            })
            .collect();
        let mut summary = String::from("isotropic path loss and absorption\n");
        let _ = writeln!(
            summary,
            "{:<10} {:>9} {:>12} {:>9} {:>14} {:>9}",
            "band", "d (km)", "L_P (dB)", "ref", "L_A (dB)", "ref"
        );
        for r in &self.rows {
            let _ = writeln!(
                summary,
                "{:<10} {:>9} {:>12.2} {:>9} {:>14.4} {:>9}",
                r.band, r.distance_km, r.path_loss_db, r.reference_path_loss_db, r.absorption_db, r.reference_absorption_db
            );
        }
        let _ = writeln!(
            summary,
            "tolerance: path loss +/-{PATH_LOSS_TOLERANCE_DB} dB, absorption +/-{}%: {}",
            ABSORPTION_TOLERANCE_RATIO * 100.0,
            if self.passed() { "PASS" } else { "FAIL" }
        );
        Report::new(records, summary)
    }
}

/// Two-column `(frequency, dB/km)` data for the rows of `table` inside
/// `[min_ghz, max_ghz]`, in table order.
pub fn emit_attenuation_curve(table: &AtmosphereTable, min_ghz: f64, max_ghz: f64) -> Result<Report> {
    let rows = table.band(min_ghz, max_ghz)?;
    let records = rows
        .iter()
        .map(|r| {
            let mut rec = Record::new();
            rec.number("frequency_ghz", r.frequency_ghz)
                .number("attenuation_db_per_km", r.attenuation_db_per_km);
            rec
        })
        .collect();
    let mut summary = format!("atmospheric attenuation, {} point(s) in [{min_ghz}, {max_ghz}] GHz\n", rows.len());
    for line in table.metadata() {
        let _ = writeln!(summary, "# {line}");
    }
    Ok(Report::new(records, summary))
}

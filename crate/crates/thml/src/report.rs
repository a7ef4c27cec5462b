//! Result envelopes, CSV serialization and plot-ready data files.
//!
//! Reals are serialized with 17 significant digits so a double round-trips
//! exactly; integer fields are emitted verbatim.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::gcd_energy::{EnergyReport, FrontierRow, QuadrupleFit};
use crate::mollifier::{CancellationRow, CensusScanRow, MomentReport};
use crate::sieve::BrunRatioRow;
use crate::theta::ThetaValue;
use crate::CODE_VERSION;

pub const ENVELOPE_SCHEMA: u32 = 1;

/// 17 significant digits, enough to reconstruct the exact double.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Serialize)]
pub struct ResultEnvelope {
    pub schema: u32,
    pub version: String,
    pub timestamp_unix: u64,
    pub command: String,
    pub config: serde_json::Value,
    pub wall_time_ms: u64,
    pub payload: serde_json::Value,
}

impl ResultEnvelope {
    pub fn new<P: Serialize>(
        command: &str,
        config: serde_json::Value,
        payload: &P,
        wall_time_ms: u64,
    ) -> Result<ResultEnvelope> {
        Ok(ResultEnvelope {
            schema: ENVELOPE_SCHEMA,
            version: CODE_VERSION.to_string(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            command: command.to_string(),
            config,
            wall_time_ms,
            payload: serde_json::to_value(payload)?,
        })
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Tabular view of a payload for CSV output: header plus formatted rows.
pub trait CsvTable {
    fn csv_header() -> &'static str;
    fn csv_rows(&self) -> Vec<String>;

    fn to_csv(&self) -> String {
        let mut out = String::from(Self::csv_header());
        out.push('\n');
        for row in self.csv_rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }
}

impl CsvTable for MomentReport {
    fn csv_header() -> &'static str {
        "p,x,parity,m1,m2,s2,s4,nonvanishing,undecided,cs_lower_bound"
    }

    fn csv_rows(&self) -> Vec<String> {
        vec![format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.p,
            fmt_real(self.x),
            self.parity,
            fmt_real(self.m1),
            fmt_real(self.m2),
            fmt_real(self.s2k.get(&1).copied().unwrap_or(f64::NAN)),
            fmt_real(self.s2k.get(&2).copied().unwrap_or(f64::NAN)),
            self.nonvanishing,
            self.undecided,
            fmt_real(self.cs_lower_bound),
        )]
    }
}

impl CsvTable for Vec<CensusScanRow> {
    fn csv_header() -> &'static str {
        "p,count,undecided,cs_lower_bound,p_over_sqrt_log_p,count_sqrt_log_p_over_p"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{}",
                    r.p,
                    r.count,
                    r.undecided,
                    fmt_real(r.cs_lower_bound),
                    fmt_real(r.scale),
                    fmt_real(r.normalized),
                )
            })
            .collect()
    }
}

impl CsvTable for Vec<BrunRatioRow> {
    fn csv_header() -> &'static str {
        "y,phi,zeta1y,ratio,in_regime"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{}",
                    fmt_real(r.y),
                    r.phi,
                    fmt_real(r.zeta1y),
                    fmt_real(r.ratio),
                    r.in_regime,
                )
            })
            .collect()
    }
}

impl CsvTable for Vec<FrontierRow> {
    fn csv_header() -> &'static str {
        "family,size,density,e_cross,e_cross_norm,s,s_per_element,r,r_norm"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{},{}",
                    r.label,
                    r.size,
                    fmt_real(r.density),
                    r.e_cross,
                    fmt_real(r.e_cross_norm),
                    fmt_real(r.s),
                    fmt_real(r.s_per_element),
                    fmt_real(r.r),
                    fmt_real(r.r_norm),
                )
            })
            .collect()
    }
}

impl CsvTable for EnergyReport {
    fn csv_header() -> &'static str {
        "set,n_max,size,density,s,r,e_cross,e_self"
    }

    fn csv_rows(&self) -> Vec<String> {
        vec![format!(
            "{},{},{},{},{},{},{},{}",
            self.set,
            self.n_max,
            self.size,
            fmt_real(self.density),
            fmt_real(self.s),
            fmt_real(self.r),
            self.e_cross,
            self.e_self.map_or_else(|| "NA".into(), |v| v.to_string()),
        )]
    }
}

impl CsvTable for Vec<ThetaValue> {
    fn csv_header() -> &'static str {
        "j,parity,x,re,im,abs,error_radius,truncation_n"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.iter()
            .map(|t| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    t.j.0,
                    t.parity,
                    fmt_real(t.x),
                    fmt_real(t.value.re),
                    fmt_real(t.value.im),
                    fmt_real(t.value.norm()),
                    fmt_real(t.error_radius),
                    t.truncation_n,
                )
            })
            .collect()
    }
}

impl CsvTable for QuadrupleFit {
    fn csv_header() -> &'static str {
        "x,count,a,b"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.samples
            .iter()
            .map(|&(x, c)| {
                format!(
                    "{},{},{},{}",
                    fmt_real(x),
                    c,
                    fmt_real(self.a),
                    fmt_real(self.b)
                )
            })
            .collect()
    }
}

impl CsvTable for Vec<CancellationRow> {
    fn csv_header() -> &'static str {
        "n,mean_abs,ratio_to_sqrt_n"
    }

    fn csv_rows(&self) -> Vec<String> {
        self.iter()
            .map(|r| {
                format!(
                    "{},{},{}",
                    r.n,
                    fmt_real(r.mean_abs),
                    fmt_real(r.ratio_to_sqrt_n)
                )
            })
            .collect()
    }
}

/// Whitespace-delimited numeric columns with "#"-prefixed headers, consumable
/// by any plotting tool.
pub fn emit_plot_data(
    path: &Path,
    comment: &str,
    columns: &[&str],
    rows: &[Vec<f64>],
) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "# {comment}")?;
    writeln!(f, "# {}", columns.join(" "))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_real(v)).collect();
        writeln!(f, "{}", cells.join(" "))?;
    }
    Ok(())
}

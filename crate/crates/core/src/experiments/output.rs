use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::gaussian::SqueezeParam;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Sweep result: one row per abscissa point.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `# key=value` lines written after the provenance block.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Flag(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // Shortest round-trip representation, so output is stable.
            Cell::Num(v) => format!("{v:e}"),
            Cell::Flag(b) => if *b { "1" } else { "0" }.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        self.rows.iter().map(|r| r[i].as_num()).collect()
    }
}

pub fn provenance_lines(cfg: &ExperimentConfig) -> Result<Vec<String>> {
    let c = &cfg.caps;
    let r: Vec<String> = cfg
        .squeezing_db
        .iter()
        .map(|db| SqueezeParam::from_db(*db).map(|r| format!("{:e}", r.r())))
        .collect::<Result<_>>()?;
    let db: Vec<String> = cfg.squeezing_db.iter().map(|v| format!("{v:e}")).collect();
    Ok(vec![
        format!("tool=gausslink version={TOOL_VERSION}"),
        format!("experiment={}", cfg.experiment.name()),
        format!("preset={}", cfg.preset.as_deref().unwrap_or("none")),
        format!(
            "d_a={:e} d_b={:e} tau_a={:e} tau_b={:e} n_th={:e} kappa_a={:e} kappa_b={:e} gamma_m={:e}",
            c.d_a, c.d_b, c.tau_a, c.tau_b, c.n_th, c.rates.kappa_a, c.rates.kappa_b, c.rates.gamma_m
        ),
        format!("squeezing_db={} r={}", db.join(";"), r.join(";")),
        format!("seed={}", cfg.seed),
        format!("config={}", serde_json::to_string(cfg)?),
    ])
}

/// CSV text with a `#`-prefixed provenance header.
pub fn render_csv(cfg: &ExperimentConfig, table: &Table) -> Result<String> {
    let mut out = String::new();
    for line in provenance_lines(cfg)?.iter().chain(&table.notes) {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

pub fn render_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

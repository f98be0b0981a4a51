use rayon::prelude::*;
use serde::Serialize;

use super::config::{db_to_transmissivity, ExperimentConfig};
use super::output::{Cell, Table, TOOL_VERSION};
use crate::error::{Error, Result};
use crate::gaussian::SqueezeParam;
use crate::network::{Cooperativities, LossSite, LossSplit, Topology};
use crate::sources::MoKind;
use crate::thresholds::{numeric_threshold, optimize_cooperativities, optimize_loss_split, Scenario, SplitOptimum};
use crate::transducer::DeviceCaps;

/// Runs `f` over `items` on a pool of `jobs` threads, keeping input order.
pub fn par_map<T, U, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

fn coops_cell(c: Option<Cooperativities>) -> Cell {
    match c {
        Some(c) => Cell::Text(c.to_array().iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(";")),
        None => Cell::Text(String::new()),
    }
}

fn split_text(s: &LossSplit) -> String {
    [s.link[0], s.link[1], s.arm[0], s.arm[1]].iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(";")
}

/// Value, argmax and flag columns for each named series, values first.
fn series_columns(names: &[String]) -> Vec<String> {
    let mut cols: Vec<String> = names.to_vec();
    cols.extend(names.iter().map(|n| format!("{n} argmax")));
    cols.extend(names.iter().map(|n| format!("{n} ok")));
    cols
}

struct Point {
    value: f64,
    argmax: Cell,
    ok: bool,
}

fn series_cells(points: Vec<Point>) -> Vec<Cell> {
    let mut vals = Vec::with_capacity(points.len() * 3);
    let mut args = Vec::with_capacity(points.len());
    let mut flags = Vec::with_capacity(points.len());
    for p in points {
        vals.push(Cell::Num(p.value));
        args.push(p.argmax);
        flags.push(Cell::Flag(p.ok));
    }
    vals.extend(args);
    vals.extend(flags);
    vals
}

fn threshold_points(caps: &DeviceCaps, r: SqueezeParam) -> Result<Vec<Point>> {
    Topology::symmetric()
        .iter()
        .map(|t| {
            let res = numeric_threshold(t, caps, r)?;
            Ok(Point { value: res.n_th_max, argmax: coops_cell(res.argmax), ok: res.entangling })
        })
        .collect()
}

fn symmetric_labels() -> Vec<String> {
    Topology::symmetric().iter().map(|t| t.label()).collect()
}

/// Thresholds of the symmetric topologies against `D_a`, for each squeezing
/// value and each `D_b`.
pub fn threshold_vs_da(cfg: &ExperimentConfig) -> Result<Table> {
    let mut grid = Vec::new();
    for &sq in &cfg.squeezing_db {
        for &d_b in &cfg.d_b_values {
            for d_a in cfg.d_a_grid() {
                grid.push((sq, d_b, d_a));
            }
        }
    }
    let rows = par_map(cfg.jobs, &grid, |&(sq, d_b, d_a)| {
        let caps = DeviceCaps { d_a, d_b, ..cfg.caps };
        let mut row = vec![Cell::Num(sq), Cell::Num(d_b), Cell::Num(d_a)];
        row.extend(series_cells(threshold_points(&caps, SqueezeParam::from_db(sq)?)?));
        Ok(row)
    })?;
    let mut columns = vec!["squeezing_db".to_string(), "d_b".into(), "d_a".into()];
    columns.extend(series_columns(&symmetric_labels()));
    Ok(Table { columns, rows, notes: Vec::new() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub squeezing_db: f64,
    pub topology: String,
    /// `None` when the threshold vanishes somewhere in the window.
    pub slope: Option<f64>,
    pub points: usize,
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() || y.iter().any(|v| *v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of threshold against `τ_a` over the last decade of loss in the table.
pub fn fit_loss_slopes(table: &Table) -> Result<Vec<SlopeFit>> {
    let missing = |c: &str| Error::Config(format!("table has no column {c}"));
    let sq = table.values("squeezing_db").ok_or_else(|| missing("squeezing_db"))?;
    let loss = table.values("loss_db").ok_or_else(|| missing("loss_db"))?;
    let tau = table.values("tau_a").ok_or_else(|| missing("tau_a"))?;
    let mut blocks: Vec<f64> = Vec::new();
    for v in &sq {
        if !blocks.contains(v) {
            blocks.push(*v);
        }
    }
    let mut fits = Vec::new();
    for b in blocks {
        let idx: Vec<usize> = (0..sq.len()).filter(|&i| sq[i] == b).collect();
        let top = idx.iter().map(|&i| loss[i]).fold(f64::NEG_INFINITY, f64::max);
        let window: Vec<usize> = idx.into_iter().filter(|&i| loss[i] >= top - 10.0 - 1e-9).collect();
        for label in symmetric_labels() {
            let ys = table.values(&label).ok_or_else(|| missing(&label))?;
            let x: Vec<f64> = window.iter().map(|&i| tau[i]).collect();
            let y: Vec<f64> = window.iter().map(|&i| ys[i]).collect();
            fits.push(SlopeFit { squeezing_db: b, topology: label, slope: log_log_slope(&x, &y), points: x.len() });
        }
    }
    Ok(fits)
}

/// Thresholds against optical loss `1 − τ_a`, given in dB on top of the
/// configured `τ_a`. Slopes over the high-loss decade go into the notes.
pub fn threshold_vs_loss(cfg: &ExperimentConfig) -> Result<Table> {
    let mut grid = Vec::new();
    for &sq in &cfg.squeezing_db {
        for l in cfg.loss_db_grid() {
            grid.push((sq, l));
        }
    }
    let rows = par_map(cfg.jobs, &grid, |&(sq, l)| {
        let caps = cfg.caps.with_optical_factor(db_to_transmissivity(l));
        let mut row = vec![Cell::Num(sq), Cell::Num(l), Cell::Num(caps.tau_a)];
        row.extend(series_cells(threshold_points(&caps, SqueezeParam::from_db(sq)?)?));
        Ok(row)
    })?;
    let mut columns = vec!["squeezing_db".to_string(), "loss_db".into(), "tau_a".into()];
    columns.extend(series_columns(&symmetric_labels()));
    let mut table = Table { columns, rows, notes: Vec::new() };
    table.notes = fit_loss_slopes(&table)?
        .iter()
        .map(|f| match f.slope {
            Some(s) => format!("slope squeezing_db={:e} {}={:e} points={}", f.squeezing_db, f.topology, s, f.points),
            None => format!("slope squeezing_db={:e} {}=none points={}", f.squeezing_db, f.topology, f.points),
        })
        .collect();
    Ok(table)
}

/// One curve of the device run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceSeries {
    pub topology: Topology,
    /// `None` for sources that ignore squeezing.
    pub squeezing_db: Option<f64>,
    /// Fixed placement of all external loss, instead of the optimal split.
    pub fixed_site: Option<LossSite>,
}

impl DeviceSeries {
    pub fn label(&self) -> String {
        match self.squeezing_db {
            Some(db) => format!("{}@{}dB", self.topology, db),
            None => self.topology.label(),
        }
    }

    pub fn evaluate(&self, caps: &DeviceCaps, tau_e: f64) -> Result<SplitOptimum> {
        let r = SqueezeParam::from_db(self.squeezing_db.unwrap_or(0.0))?;
        match self.fixed_site {
            None => optimize_loss_split(&self.topology, caps, r, tau_e),
            Some(site) => {
                let split = LossSplit::all_on(&self.topology, site, tau_e)?;
                let optimum = optimize_cooperativities(&self.topology, &Scenario::with_loss(*caps, r, tau_e, split))?;
                Ok(SplitOptimum { split, optimum })
            }
        }
    }
}

/// Curves of the device run: squeezed topologies once per squeezing value,
/// including the EO+IM swap with all loss on the EO arm, then the
/// intrinsic ones.
pub fn device_series(squeezing_db: &[f64]) -> Vec<DeviceSeries> {
    let mut out = Vec::new();
    for &db in squeezing_db {
        for t in Topology::symmetric().into_iter().filter(|t| t.uses_squeezing()) {
            out.push(DeviceSeries { topology: t, squeezing_db: Some(db), fixed_site: None });
        }
        let asym = Topology::SwapAsym(MoKind::Eo, MoKind::Im);
        out.push(DeviceSeries { topology: asym, squeezing_db: Some(db), fixed_site: Some(LossSite::Arm(1)) });
    }
    for t in Topology::symmetric().into_iter().filter(|t| !t.uses_squeezing()) {
        out.push(DeviceSeries { topology: t, squeezing_db: None, fixed_site: None });
    }
    out
}

/// Log-negativity against external optical loss for the device caps.
pub fn device_run(cfg: &ExperimentConfig) -> Result<Table> {
    let series = device_series(&cfg.squeezing_db);
    let grid = cfg.loss_db_grid();
    let rows = par_map(cfg.jobs, &grid, |&l| {
        let tau_e = db_to_transmissivity(l);
        let points = series
            .iter()
            .map(|s| {
                let o = s.evaluate(&cfg.caps, tau_e)?;
                let argmax = match coops_cell(Some(o.optimum.coops)) {
                    Cell::Text(c) => Cell::Text(format!("{c}|{}", split_text(&o.split))),
                    other => other,
                };
                Ok(Point { value: o.optimum.log_negativity, argmax, ok: o.optimum.log_negativity > 0.0 })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut row = vec![Cell::Num(l), Cell::Num(tau_e)];
        row.extend(series_cells(points));
        Ok(row)
    })?;
    let labels: Vec<String> = series.iter().map(DeviceSeries::label).collect();
    let mut columns = vec!["loss_db".to_string(), "tau_e".into()];
    columns.extend(series_columns(&labels));
    Ok(Table {
        columns,
        rows,
        notes: vec!["argmax=c_a1;c_b1;c_a2;c_b2|link1;link2;arm1;arm2".into()],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EbitReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub topology: String,
    pub caps: DeviceCaps,
    pub fiber_km: f64,
    pub loss_db_per_km: f64,
    pub loss_db: f64,
    pub tau_e: f64,
    pub bandwidth_hz: f64,
    pub log_negativity: f64,
    pub ebits_per_second: f64,
    pub coops: [f64; 4],
}

/// E-bit rate of intrinsic microwave downconversion over a fibre link.
pub fn ebit_rate(cfg: &ExperimentConfig) -> Result<EbitReport> {
    let t = Topology::Down(MoKind::Im);
    let loss_db = cfg.fiber_km * cfg.loss_db_per_km;
    let tau_e = db_to_transmissivity(loss_db);
    let o = optimize_cooperativities(&t, &Scenario::with_loss(cfg.caps, SqueezeParam::new(0.0)?, tau_e, LossSplit::equal(&t, tau_e)))?;
    Ok(EbitReport {
        tool: "gausslink",
        version: TOOL_VERSION,
        topology: t.label(),
        caps: cfg.caps,
        fiber_km: cfg.fiber_km,
        loss_db_per_km: cfg.loss_db_per_km,
        loss_db,
        tau_e,
        bandwidth_hz: cfg.bandwidth_hz,
        log_negativity: o.log_negativity,
        ebits_per_second: o.log_negativity * cfg.bandwidth_hz,
        coops: o.coops.to_array(),
    })
}

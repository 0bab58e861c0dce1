//! Parameter sweeps over a grid of one or two axes.
//!
//! Every `(cell, seed_index)` job runs independently from the seed
//! `derive_seed(&[master_seed, cell, seed_index])`, so results do not depend
//! on scheduling. Cells are numbered row-major over the axes in the order
//! given.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use bigen_core::analytics::{self, fit_distribution_shape};
use bigen_core::{GeneratorParams, Modality, RunState};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::{derive_seed, metrics};

/// Number of growth samples per run.
pub const GROWTH_SAMPLES: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Alpha,
    Beta,
    B,
    U,
    V,
    /// `u` and `v` set together.
    Uv,
    P,
    T,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Alpha => "alpha",
            Axis::Beta => "beta",
            Axis::B => "b",
            Axis::U => "u",
            Axis::V => "v",
            Axis::Uv => "uv",
            Axis::P => "p",
            Axis::T => "T",
        }
    }

    fn integral(self) -> bool {
        matches!(self, Axis::U | Axis::V | Axis::Uv | Axis::T)
    }

    fn apply(self, params: &mut GeneratorParams, x: f64) {
        match self {
            Axis::Alpha => params.alpha = x,
            Axis::Beta => params.beta = x,
            Axis::B => params.b = x,
            Axis::P => params.p = x,
            Axis::U => params.u = x as usize,
            Axis::V => params.v = x as usize,
            Axis::Uv => {
                params.u = x as usize;
                params.v = x as usize;
            }
            Axis::T => params.iterations = x as u64,
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "alpha" => Axis::Alpha,
            "beta" => Axis::Beta,
            "b" | "bounce" => Axis::B,
            "u" => Axis::U,
            "v" => Axis::V,
            "uv" | "u=v" => Axis::Uv,
            "p" => Axis::P,
            "T" | "iters" => Axis::T,
            other => return Err(Error::Sweep(format!("unknown axis '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl FromStr for AxisSpec {
    type Err = Error;

    /// `name=v1,v2,...`; the joint axis is written `u=v=3,6,12`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, list) = match s.strip_prefix("u=v=") {
            Some(rest) => ("uv", rest),
            None => s.split_once('=').ok_or_else(|| Error::Sweep(format!("axis '{s}' is not name=values")))?,
        };
        let axis: Axis = name.trim().parse()?;
        let values = list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Sweep(format!("bad value '{v}' on axis {name}"))))
            .collect::<Result<Vec<_>>>()?;
        let spec = AxisSpec { axis, values };
        spec.validate()?;
        Ok(spec)
    }
}

impl AxisSpec {
    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Sweep(format!("axis {} has no values", self.axis.name())));
        }
        for &x in &self.values {
            if !x.is_finite() || (self.axis.integral() && (x < 0.0 || x.fract() != 0.0)) {
                return Err(Error::Sweep(format!("value {x} is not valid on axis {}", self.axis.name())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    DegreeFit,
    BlccMean,
    SimilarUsers,
    NeighborItems,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::DegreeFit, Measure::BlccMean, Measure::SimilarUsers, Measure::NeighborItems];

    pub fn name(self) -> &'static str {
        match self {
            Measure::DegreeFit => "degree_fit",
            Measure::BlccMean => "blcc_mean",
            Measure::SimilarUsers => "similar_users",
            Measure::NeighborItems => "neighbor_items",
        }
    }

    /// Output columns contributed by the measure.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Measure::DegreeFit => &[
                "user_exponent",
                "user_powerlaw_r2",
                "user_exp_rate",
                "user_exp_r2",
                "item_exponent",
                "item_powerlaw_r2",
                "item_exp_rate",
                "item_exp_r2",
            ],
            Measure::BlccMean => &["blcc_user", "blcc_item"],
            Measure::SimilarUsers => &["similar_users"],
            Measure::NeighborItems => &["neighbor_items"],
        }
    }

    fn grows(self) -> bool {
        matches!(self, Measure::SimilarUsers | Measure::NeighborItems)
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Sweep(format!("unknown measure '{s}'")))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: GeneratorParams,
    pub axes: Vec<AxisSpec>,
    pub seeds_per_cell: usize,
    pub measures: Vec<Measure>,
    pub master_seed: u64,
    /// Also record similar-users and neighbor-items every `T/20` iterations.
    pub growth: bool,
}

impl SweepSpec {
    pub fn new(base: GeneratorParams, axes: Vec<AxisSpec>) -> Self {
        SweepSpec { base, axes, seeds_per_cell: 10, measures: vec![Measure::BlccMean], master_seed: 0, growth: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Sweep("one or two axes are required".into()));
        }
        if self.axes.len() == 2 && self.axes[0].axis == self.axes[1].axis {
            return Err(Error::Sweep("axes must differ".into()));
        }
        if self.seeds_per_cell == 0 {
            return Err(Error::Sweep("seeds per cell must be positive".into()));
        }
        if self.measures.is_empty() {
            return Err(Error::Sweep("no measures selected".into()));
        }
        for a in &self.axes {
            a.validate()?;
        }
        for (i, cell) in self.cells().iter().enumerate() {
            cell.params.validate().map_err(|e| Error::Sweep(format!("cell {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = vec![Cell { coords: Vec::new(), params: self.base }];
        for a in &self.axes {
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    a.values.iter().map(move |&x| {
                        let mut next = c.clone();
                        a.axis.apply(&mut next.params, x);
                        next.coords.push(x);
                        next
                    })
                })
                .collect();
        }
        cells
    }

    pub fn seed(&self, cell: usize, seed_index: usize) -> u64 {
        derive_seed(&[self.master_seed, cell as u64, seed_index as u64])
    }

    pub fn columns(&self) -> Vec<&'static str> {
        let mut cols = Vec::new();
        for m in &self.measures {
            for c in m.columns() {
                if !cols.contains(c) {
                    cols.push(*c);
                }
            }
        }
        cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub coords: Vec<f64>,
    pub params: GeneratorParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Run,
    Growth,
    Mean,
    Std,
}

impl RowKind {
    pub fn name(self) -> &'static str {
        match self {
            RowKind::Run => "run",
            RowKind::Growth => "growth",
            RowKind::Mean => "mean",
            RowKind::Std => "std",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kind: RowKind,
    pub cell: usize,
    pub seed_index: Option<usize>,
    pub seed: Option<u64>,
    pub t: u64,
    pub coords: Vec<f64>,
    /// Aligned with [`SweepResult::columns`]; `None` where a value is
    /// undefined or not measured in this row.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|&c| c == name)
    }

    /// Per-cell mean of `column`, in cell order.
    pub fn cell_means(&self, column: &str) -> Vec<Option<f64>> {
        let Some(j) = self.column(column) else { return Vec::new() };
        self.rows.iter().filter(|r| r.kind == RowKind::Mean).map(|r| r.values[j]).collect()
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let mut header = vec!["kind", "cell", "seed_index", "seed", "t"];
        header.extend(self.axes.iter().map(|a| a.name()));
        header.extend(self.columns.iter().copied());
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![
                r.kind.name().to_string(),
                r.cell.to_string(),
                r.seed_index.map(|s| s.to_string()).unwrap_or_default(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                r.t.to_string(),
            ];
            rec.extend(r.coords.iter().map(|x| x.to_string()));
            rec.extend(r.values.iter().map(|&v| opt(v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct RunOutput {
    t: u64,
    values: Vec<Option<f64>>,
    growth: Vec<(u64, Vec<Option<f64>>)>,
}

fn measure(g: &bigen_core::Bigraph, measures: &[Measure], columns: &[&str], only_growth: bool) -> Vec<Option<f64>> {
    let mut values = vec![None; columns.len()];
    let mut set = |name: &str, v: Option<f64>| {
        if let Some(j) = columns.iter().position(|&c| c == name) {
            values[j] = v;
        }
    };
    let hood = measures
        .iter()
        .any(|m| m.grows())
        .then(|| metrics::neighborhood_sum(g).means());
    for m in measures {
        if only_growth && !m.grows() {
            continue;
        }
        match m {
            Measure::DegreeFit => {
                for (prefix, modality) in [("user", Modality::User), ("item", Modality::Item)] {
                    let fit = fit_distribution_shape(&analytics::degree_histogram(g, modality)).ok();
                    set(&format!("{prefix}_exponent"), fit.map(|f| f.power_law_exponent));
                    set(&format!("{prefix}_powerlaw_r2"), fit.map(|f| f.power_law_r2));
                    set(&format!("{prefix}_exp_rate"), fit.map(|f| f.exponential_rate));
                    set(&format!("{prefix}_exp_r2"), fit.map(|f| f.exponential_r2));
                }
            }
            Measure::BlccMean => {
                set("blcc_user", metrics::blcc_sum(g, Modality::User).mean());
                set("blcc_item", metrics::blcc_sum(g, Modality::Item).mean());
            }
            Measure::SimilarUsers => set("similar_users", hood.map(|h| h.0)),
            Measure::NeighborItems => set("neighbor_items", hood.map(|h| h.1)),
        }
    }
    values
}

fn run_job(spec: &SweepSpec, columns: &[&str], params: GeneratorParams, seed: u64) -> RunOutput {
    let mut state = RunState::new(params, seed).expect("cells are validated");
    let mut growth = Vec::new();
    if spec.growth && spec.measures.iter().any(|m| m.grows()) {
        let every = (params.iterations / GROWTH_SAMPLES).max(1);
        while !state.is_finished() {
            state.advance(every);
            growth.push((state.t(), measure(state.graph(), &spec.measures, columns, true)));
        }
    } else {
        state.run_to_end();
    }
    RunOutput { t: state.t(), values: measure(state.graph(), &spec.measures, columns, false), growth }
}

fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        Some((xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
    } else {
        None
    };
    (Some(mean), std)
}

/// Runs every `(cell, seed)` job in parallel and returns, per cell, the run
/// rows (with growth rows, if requested) followed by the mean and sample
/// standard deviation over runs of each column.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let cells = spec.cells();
    let columns = spec.columns();
    let jobs: Vec<(usize, usize)> =
        (0..cells.len()).flat_map(|c| (0..spec.seeds_per_cell).map(move |s| (c, s))).collect();
    let outputs: Vec<RunOutput> = jobs
        .par_iter()
        .map(|&(c, s)| run_job(spec, &columns, cells[c].params, spec.seed(c, s)))
        .collect();

    let mut rows = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        let runs = &outputs[c * spec.seeds_per_cell..(c + 1) * spec.seeds_per_cell];
        for (s, out) in runs.iter().enumerate() {
            let seed = Some(spec.seed(c, s));
            for (t, values) in &out.growth {
                rows.push(SweepRow {
                    kind: RowKind::Growth,
                    cell: c,
                    seed_index: Some(s),
                    seed,
                    t: *t,
                    coords: cell.coords.clone(),
                    values: values.clone(),
                });
            }
            rows.push(SweepRow {
                kind: RowKind::Run,
                cell: c,
                seed_index: Some(s),
                seed,
                t: out.t,
                coords: cell.coords.clone(),
                values: out.values.clone(),
            });
        }
        let stats: Vec<_> = (0..columns.len())
            .map(|j| mean_std(&runs.iter().filter_map(|r| r.values[j]).collect::<Vec<_>>()))
            .collect();
        for (kind, pick) in [(RowKind::Mean, 0), (RowKind::Std, 1)] {
            rows.push(SweepRow {
                kind,
                cell: c,
                seed_index: None,
                seed: None,
                t: cell.params.iterations,
                coords: cell.coords.clone(),
                values: stats.iter().map(|&(m, s)| if pick == 0 { m } else { s }).collect(),
            });
        }
    }
    Ok(SweepResult { axes: spec.axes.iter().map(|a| a.axis).collect(), columns, rows })
}

//! JSON reports and the second-neighbor statistics table.

use std::io::Write;

use bigen_core::analytics::{self, fit_distribution_shape, BlccSum, DegreeHistogram, ShapeFit};
use bigen_core::{Bigraph, GeneratorParams, Modality};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics;

pub const REPORT_FORMAT: &str = "bigen-report/1";
pub const STATS_HEADER: [&str; 7] = ["name", "users", "items", "edges", "real_n2", "theoretic_n2", "ratio"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub users: usize,
    pub items: usize,
    pub edges: usize,
}

impl Counts {
    pub fn of(g: &Bigraph) -> Self {
        Counts { users: g.user_count(), items: g.item_count(), edges: g.edge_count() }
    }
}

/// Nodes with a degree above the last listed bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBucket {
    pub from_degree: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramJson {
    /// `[degree, count]` pairs in ascending degree order.
    pub degrees: Vec<(usize, usize)>,
    pub node_count: usize,
    pub mean: f64,
    pub mean_sq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailBucket>,
}

impl HistogramJson {
    pub fn full(h: &DegreeHistogram) -> Self {
        HistogramJson {
            degrees: h.counts.iter().map(|(&k, &c)| (k, c)).collect(),
            node_count: h.node_count,
            mean: h.mean,
            mean_sq: h.mean_sq,
            tail: None,
        }
    }

    /// Keeps the `bins` lowest degrees and folds the rest into a tail bucket.
    pub fn truncated(h: &DegreeHistogram, bins: usize) -> Self {
        let mut out = Self::full(h);
        if out.degrees.len() > bins {
            let rest = out.degrees.split_off(bins);
            out.tail = Some(TailBucket { from_degree: rest[0].0, count: rest.iter().map(|&(_, c)| c).sum() });
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histograms {
    pub user: HistogramJson,
    pub item: HistogramJson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlccSummary {
    /// Mean over nodes with a defined value.
    pub mean: Option<f64>,
    pub defined: usize,
    pub undefined: usize,
}

impl From<BlccSum> for BlccSummary {
    fn from(s: BlccSum) -> Self {
        BlccSummary { mean: s.mean(), defined: s.defined, undefined: s.undefined }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlccJson {
    pub user: BlccSummary,
    pub item: BlccSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodJson {
    pub mean_similar_users: f64,
    pub mean_neighbor_items: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitJson {
    pub user: Option<ShapeFit>,
    pub item: Option<ShapeFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerNode {
    pub user_blcc: Vec<Option<f64>>,
    pub item_blcc: Vec<Option<f64>>,
    pub similar_users: Vec<usize>,
    pub neighbor_items: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: String,
    pub params: Option<GeneratorParams>,
    pub t: Option<u64>,
    pub counts: Counts,
    pub histograms: Histograms,
    pub blcc: BlccJson,
    pub neighborhood: NeighborhoodJson,
    pub second_neighbors: DatasetRow,
    pub fit: FitJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_node: Option<PerNode>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub name: String,
    pub modality: Modality,
    pub per_node: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { name: "graph".into(), modality: Modality::User, per_node: false }
    }
}

/// Exact report of a graph. `params` and `t` are recorded when the graph
/// came from the generator.
pub fn analyze(g: &Bigraph, params: Option<GeneratorParams>, t: Option<u64>, opts: &AnalyzeOptions) -> Result<Report> {
    let hu = analytics::degree_histogram(g, Modality::User);
    let hi = analytics::degree_histogram(g, Modality::Item);
    let (similar, items) = metrics::neighborhood_sum(g).means();
    let per_node = if opts.per_node {
        let blcc = analytics::blcc_report(g);
        let hood = analytics::neighborhood_report(g, true).per_user.unwrap_or_default();
        Some(PerNode {
            user_blcc: blcc.users,
            item_blcc: blcc.items,
            similar_users: hood.iter().map(|n| n.similar_users).collect(),
            neighbor_items: hood.iter().map(|n| n.neighbor_items).collect(),
        })
    } else {
        None
    };
    Ok(Report {
        format_version: REPORT_FORMAT.into(),
        params,
        t,
        counts: Counts::of(g),
        blcc: BlccJson {
            user: metrics::blcc_sum(g, Modality::User).into(),
            item: metrics::blcc_sum(g, Modality::Item).into(),
        },
        neighborhood: NeighborhoodJson { mean_similar_users: similar, mean_neighbor_items: items },
        second_neighbors: dataset_stats(g, &opts.name, opts.modality)?,
        fit: FitJson { user: fit_distribution_shape(&hu).ok(), item: fit_distribution_shape(&hi).ok() },
        histograms: Histograms { user: HistogramJson::full(&hu), item: HistogramJson::full(&hi) },
        per_node,
    })
}

/// One row of the second-neighbor table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub name: String,
    pub modality: Modality,
    pub users: usize,
    pub items: usize,
    pub edges: usize,
    pub real_second_neighbors: f64,
    pub theoretic_second_neighbors: f64,
    /// `None` when the theoretic value is zero.
    pub ratio: Option<f64>,
}

pub fn dataset_stats(g: &Bigraph, name: &str, modality: Modality) -> Result<DatasetRow> {
    if g.edge_count() == 0 {
        return Err(Error::Model(bigen_core::Error::EmptyGraph));
    }
    let s = analytics::second_neighbor_stats(g, modality)?;
    Ok(DatasetRow {
        name: name.to_owned(),
        modality,
        users: g.user_count(),
        items: g.item_count(),
        edges: g.edge_count(),
        real_second_neighbors: s.real_mean,
        theoretic_second_neighbors: s.theoretic_mean,
        ratio: s.ratio,
    })
}

/// Writes rows under the header `name,users,items,edges,real_n2,theoretic_n2,ratio`.
/// An undefined ratio is an empty field.
pub fn write_stats_csv<W: Write>(rows: &[DatasetRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(STATS_HEADER)?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.users.to_string(),
            r.items.to_string(),
            r.edges.to_string(),
            r.real_second_neighbors.to_string(),
            r.theoretic_second_neighbors.to_string(),
            r.ratio.map(|x| x.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use normclust::metrics::{load_explicit_json, load_graph, load_points_csv, TriangleCheck};
use normclust::norms::NormSpec;
use normclust::{MetricSpace, NormObjective, Request};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TriangleArg {
    Auto,
    Full,
    Skip,
}

impl From<TriangleArg> for TriangleCheck {
    fn from(t: TriangleArg) -> Self {
        match t {
            TriangleArg::Auto => TriangleCheck::Auto,
            TriangleArg::Full => TriangleCheck::Full,
            TriangleArg::Skip => TriangleCheck::Skip,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpaceArgs {
    /// Points CSV, one row of coordinates per point.
    #[arg(long, group = "source")]
    pub points: Option<PathBuf>,

    /// Graph edge list with `u v w` lines.
    #[arg(long, group = "source", requires = "graph_points")]
    pub graph: Option<PathBuf>,

    /// Point ids of the graph, one per line.
    #[arg(long)]
    pub graph_points: Option<PathBuf>,

    /// Explicit metric JSON.
    #[arg(long, visible_alias = "metric", group = "source")]
    pub matrix: Option<PathBuf>,

    /// Center coordinates CSV (with --points) or center ids (with --graph).
    #[arg(long)]
    pub centers: Option<PathBuf>,

    /// Centers range over all of R^d (with --points).
    #[arg(long, conflicts_with = "centers")]
    pub continuous: bool,

    /// Triangle-inequality check for explicit matrices.
    #[arg(long, value_enum, default_value = "auto")]
    pub triangle_check: TriangleArg,
}

impl SpaceArgs {
    pub fn load(&self) -> Result<MetricSpace> {
        if let Some(points) = &self.points {
            let coords = load_points_csv(points)?;
            if self.continuous {
                return Ok(MetricSpace::euclidean_continuous(coords)?);
            }
            let centers = self.centers.as_deref().map(load_points_csv).transpose()?;
            return Ok(MetricSpace::euclidean(coords, centers)?);
        }
        if self.continuous {
            bail!("--continuous requires --points");
        }
        if let Some(graph) = &self.graph {
            let ids = self.graph_points.as_deref().expect("clap enforces --graph-points");
            return Ok(load_graph(graph, ids, self.centers.as_deref())?);
        }
        if let Some(matrix) = &self.matrix {
            if self.centers.is_some() {
                bail!("--centers is not used with --matrix; list centers in the JSON file");
            }
            return Ok(load_explicit_json(matrix, self.triangle_check.into())?);
        }
        bail!("one of --points, --graph or --matrix is required")
    }

    pub fn given(&self) -> bool {
        self.points.is_some() || self.graph.is_some() || self.matrix.is_some()
    }
}

pub fn read_norm_spec(path: &Path) -> Result<NormSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    NormSpec::from_json(&text).with_context(|| format!("norm spec {}", path.display()))
}

pub fn load_norm(path: &Path, n: usize) -> Result<NormObjective> {
    let spec = read_norm_spec(path)?;
    spec.build(n)
        .with_context(|| format!("norm spec {}", path.display()))
}

/// CSV rows `point_id,radius`; a non-numeric radius in the first row marks a
/// header.
pub fn load_requests(path: &Path, space: &MetricSpace) -> Result<Vec<Request>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        if record.len() != 2 {
            bail!("{}: row {}: expected `point_id,radius`", path.display(), i + 1);
        }
        let radius: f64 = match record[1].parse() {
            Ok(r) => r,
            Err(_) if i == 0 => continue,
            Err(e) => bail!("{}: row {}: radius: {e}", path.display(), i + 1),
        };
        let point = space
            .point_by_label(&record[0])
            .with_context(|| format!("{}: row {}: unknown point {:?}", path.display(), i + 1, &record[0]))?;
        out.push(Request::new(point, radius)?);
    }
    Ok(out)
}

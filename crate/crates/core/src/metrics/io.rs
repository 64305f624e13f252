use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use super::{MetricError, MetricSpace, TriangleCheck};

fn read(path: &Path) -> Result<String, MetricError> {
    fs::read_to_string(path).map_err(|e| MetricError::Io(format!("{}: {e}", path.display())))
}

fn parse_err(path: &Path, message: impl Into<String>) -> MetricError {
    MetricError::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Rows of float coordinates. A first row that does not parse as numbers is
/// treated as a header.
pub fn load_points_csv(path: &Path) -> Result<Vec<Vec<f64>>, MetricError> {
    let text = read(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(parse_err(path, format!("row {}: {e}", i + 1))),
        }
    }
    if rows.is_empty() {
        return Err(parse_err(path, "no coordinate rows"));
    }
    Ok(rows)
}

fn read_id_list(path: &Path) -> Result<Vec<String>, MetricError> {
    Ok(read(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// Graph given as `u v w` lines, plus files listing the point ids and
/// (optionally) the center ids, one per line. Without a center file `F = P`.
pub fn load_graph(
    edges: &Path,
    points: &Path,
    centers: Option<&Path>,
) -> Result<MetricSpace, MetricError> {
    let text = read(edges)?;
    let mut list = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [u, v, w] = fields.as_slice() else {
            return Err(parse_err(
                edges,
                format!("line {}: expected `u v w`, got {line:?}", i + 1),
            ));
        };
        let w: f64 = w
            .parse()
            .map_err(|e| parse_err(edges, format!("line {}: weight: {e}", i + 1)))?;
        list.push((u.to_string(), v.to_string(), w));
    }
    let point_ids = read_id_list(points)?;
    let center_ids = match centers {
        Some(path) => read_id_list(path)?,
        None => point_ids.clone(),
    };
    MetricSpace::graph(list, point_ids, center_ids)
}

/// `{"ids": [...], "points": [...], "centers": [...], "matrix": [[...], ...]}`.
/// `points` and `centers` default to all ids.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitMetricFile {
    pub ids: Vec<Value>,
    #[serde(default)]
    pub points: Option<Vec<Value>>,
    #[serde(default)]
    pub centers: Option<Vec<Value>>,
    pub matrix: Vec<Vec<f64>>,
}

fn id_string(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(format!("ids must be strings or numbers, got {other}")),
    }
}

impl ExplicitMetricFile {
    pub fn into_space(self, check: TriangleCheck) -> Result<MetricSpace, MetricError> {
        let convert = |vals: &[Value]| -> Result<Vec<String>, MetricError> {
            vals.iter()
                .map(|v| id_string(v).map_err(MetricError::NotAMetric))
                .collect()
        };
        let ids = convert(&self.ids)?;
        let points = match &self.points {
            Some(p) => convert(p)?,
            None => ids.clone(),
        };
        let centers = match &self.centers {
            Some(c) => convert(c)?,
            None => ids.clone(),
        };
        MetricSpace::explicit(ids, self.matrix, points, centers, check)
    }
}

pub fn load_explicit_json(path: &Path, check: TriangleCheck) -> Result<MetricSpace, MetricError> {
    let file: ExplicitMetricFile =
        serde_json::from_str(&read(path)?).map_err(|e| parse_err(path, e.to_string()))?;
    file.into_space(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp(name: &str, contents: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("normclust-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn points_csv_with_and_without_header() {
        let a = temp("a.csv", "x,y\n0,0\n3,4\n");
        let b = temp("b.csv", "0, 0\n3, 4\n\n");
        assert_eq!(load_points_csv(&a).unwrap(), load_points_csv(&b).unwrap());
        let bad = temp("c.csv", "0,0\n1,zz\n");
        assert!(matches!(load_points_csv(&bad), Err(MetricError::Parse { .. })));
    }

    #[test]
    fn graph_files() {
        let g = temp("g.txt", "# path\na b 1\nb c 2.5\n");
        let p = temp("p.txt", "a\nc\n");
        let space = load_graph(&g, &p, None).unwrap();
        assert_eq!(space.point_to_point(0, 1), 3.5);
        let broken = temp("g2.txt", "a b\n");
        assert!(matches!(load_graph(&broken, &p, None), Err(MetricError::Parse { .. })));
    }

    #[test]
    fn explicit_json() {
        let m = temp(
            "m.json",
            r#"{"ids":["a","b",3],"points":["a",3],"centers":["b"],
                "matrix":[[0,1,2],[1,0,1],[2,1,0]]}"#,
        );
        let space = load_explicit_json(&m, TriangleCheck::Auto).unwrap();
        assert_eq!(space.n_points(), 2);
        assert_eq!(space.n_centers(), Some(1));
        assert_eq!(space.point_label(1), "3");
    }
}

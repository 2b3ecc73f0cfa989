//! CSV artifacts. Reals are written with 17 significant digits in
//! scientific notation, which reads back bit-exactly.

use std::fs;
use std::path::Path;

use noncollapse_core::{
    Backend, DiscreteHypersurface, DistanceSeries, ResidualReport, SeriesRecord,
    SphereCurvatureField, Topology,
};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SERIES_HEADER: [&str; 7] = [
    "t",
    "sup_ratio",
    "inf_ratio",
    "min_F",
    "max_F",
    "defect_sup",
    "defect_inf",
];
pub const FIELD_HEADER: [&str; 8] = [
    "i",
    "Zbar",
    "Zlow",
    "kappa_max",
    "kappa_min",
    "F",
    "witness_bar",
    "witness_low",
];
pub const DISTANCE_HEADER: [&str; 7] = ["t", "d_min", "ax", "ar_or_y", "bx", "br_or_y", "defect"];
pub const INDEX_HEADER: [&str; 5] = ["t", "file", "min_F", "max_F", "max_kappa"];
pub const REPORT_HEADER: [&str; 5] = ["N", "dt", "residual", "label", "speed"];
pub const ORDER_HEADER: [&str; 4] = ["label", "speed", "p", "fit_residual"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV file held as strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn strings(&self, name: &str) -> CliResult<Vec<&str>> {
        let c = self
            .column(name)
            .ok_or_else(|| CliError::Parse(format!("missing column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[c].as_str()).collect())
    }

    pub fn f64s(&self, name: &str) -> CliResult<Vec<f64>> {
        self.strings(name)?
            .into_iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| CliError::Parse(format!("bad number `{s}` in column `{name}`")))
            })
            .collect()
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(|e| CliError::io(path, e))?;
        w.write_record(&self.header)
            .map_err(|e| CliError::io(path, e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
        let header = r
            .headers()
            .map_err(|e| CliError::io(path, e))?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            rows.push(rec.iter().map(|s| s.trim().to_string()).collect());
        }
        Ok(Table { header, rows })
    }
}

pub fn series_table(record: &SeriesRecord) -> Table {
    let mut t = Table::new(&SERIES_HEADER);
    for r in &record.rows {
        t.push(
            [
                r.t,
                r.sup_ratio,
                r.inf_ratio,
                r.min_f,
                r.max_f,
                r.defect_sup,
                r.defect_inf,
            ]
            .map(fmt_f64)
            .to_vec(),
        );
    }
    t
}

pub fn field_table(field: &SphereCurvatureField, speeds: &[f64]) -> Table {
    let mut t = Table::new(&FIELD_HEADER);
    for (i, f) in speeds.iter().enumerate().take(field.len()) {
        let mut row = vec![i.to_string()];
        row.extend(
            [
                field.zbar[i],
                field.zlow[i],
                field.kappa_max[i],
                field.kappa_min[i],
                *f,
            ]
            .map(fmt_f64),
        );
        row.push(field.witness_bar[i].to_string());
        row.push(field.witness_low[i].to_string());
        t.push(row);
    }
    t
}

pub fn distance_table(series: &DistanceSeries) -> Table {
    let mut t = Table::new(&DISTANCE_HEADER);
    for r in &series.rows {
        let c = &r.closest;
        t.push(
            [
                r.t,
                c.distance,
                c.a_position[0],
                c.a_position[1],
                c.b_position[0],
                c.b_position[1],
                r.defect,
            ]
            .map(fmt_f64)
            .to_vec(),
        );
    }
    t
}

pub fn report_tables(reports: &[ResidualReport]) -> (Table, Table) {
    let mut rows = Table::new(&REPORT_HEADER);
    let mut orders = Table::new(&ORDER_HEADER);
    for rep in reports {
        let (label, speed) = (rep.label.to_string(), rep.speed.to_string());
        for r in &rep.rows {
            rows.push(vec![
                r.n.to_string(),
                fmt_f64(r.dt),
                fmt_f64(r.residual),
                label.clone(),
                speed.clone(),
            ]);
        }
        orders.push(vec![
            label,
            speed,
            fmt_f64(rep.order),
            fmt_f64(rep.fit_residual),
        ]);
    }
    (rows, orders)
}

pub fn geometry_table(h: &DiscreteHypersurface) -> Table {
    let header = match h.backend() {
        Backend::Curve => ["x", "y"],
        Backend::Axisymmetric(_) => ["x", "r"],
    };
    let mut t = Table::new(&header);
    for p in h.nodes() {
        t.push(vec![fmt_f64(p[0]), fmt_f64(p[1])]);
    }
    t
}

/// Resolves backend and topology names. An axisymmetric profile without a
/// topology is sphere-like when both ends lie on the axis.
pub fn parse_backend(
    backend: &str,
    topology: Option<&str>,
    nodes: &[[f64; 2]],
) -> Result<Backend, (String, String)> {
    match backend {
        "curve" => Ok(Backend::Curve),
        "axisym" => match topology {
            Some("sphere") => Ok(Backend::Axisymmetric(Topology::SphereLike)),
            Some("torus") => Ok(Backend::Axisymmetric(Topology::TorusLike)),
            Some(other) => Err(("topology".into(), format!("unknown topology `{other}`"))),
            None => {
                let on_axis = |p: Option<&[f64; 2]>| p.is_some_and(|p| p[1] == 0.0);
                Ok(Backend::Axisymmetric(
                    if on_axis(nodes.first()) && on_axis(nodes.last()) {
                        Topology::SphereLike
                    } else {
                        Topology::TorusLike
                    },
                ))
            }
        },
        other => Err(("backend".into(), format!("unknown backend `{other}`"))),
    }
}

/// Reads a geometry CSV and its optional JSON sidecar (same stem, `.json`).
/// `backend` and `topology` override the sidecar.
pub fn read_geometry(
    path: &Path,
    backend: Option<&str>,
    topology: Option<&str>,
) -> CliResult<(DiscreteHypersurface, String)> {
    let table = Table::read(path)?;
    let sidecar_path = path.with_extension("json");
    let sidecar: Value = if sidecar_path.is_file() {
        let text = fs::read_to_string(&sidecar_path).map_err(|e| CliError::io(&sidecar_path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", sidecar_path.display())))?
    } else {
        Value::Null
    };
    let header: Vec<&str> = table.header.iter().map(String::as_str).collect();
    let default_backend = match header.as_slice() {
        ["x", "y"] => "curve",
        ["x", "r"] => "axisym",
        _ => {
            return Err(CliError::Parse(format!(
                "{}: header must be `x,y` or `x,r`",
                path.display()
            )))
        }
    };
    let backend = backend
        .or_else(|| sidecar.get("backend").and_then(Value::as_str))
        .unwrap_or(default_backend);
    let topology = topology.or_else(|| sidecar.get("topology").and_then(Value::as_str));
    let (a, b) = (table.f64s(header[0])?, table.f64s(header[1])?);
    let nodes: Vec<[f64; 2]> = a.into_iter().zip(b).map(|(x, y)| [x, y]).collect();
    let backend = parse_backend(backend, topology, &nodes)
        .map_err(|(key, msg)| CliError::validation(format!("geometry.{key}"), msg))?;
    let h = DiscreteHypersurface::from_nodes(backend, nodes)
        .map_err(|e| CliError::validation("geometry.file", e.to_string()))?;
    Ok((h, path.display().to_string()))
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.1), "-1.0000000000000001e-1");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -2.5e-300, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}

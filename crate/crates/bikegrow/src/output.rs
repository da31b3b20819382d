//! Result files: snapshot GeoJSON, run manifests, metric tables.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use bikegrow_core::growth::{GrowthRun, GrowthSnapshot, Prepared};
use bikegrow_core::metrics::{MetricsRow, TradeoffResult, TradeoffWarning};
use bikegrow_core::EdgeId;
use serde_json::{json, Value};

use crate::formats::FormatError;

/// Shortest decimal form, used in file names.
pub fn label(v: f64) -> String {
    v.to_string()
}

pub fn snapshot_file_name(d_km: f64) -> String {
    format!("snapshot_D{}km.geojson", label(d_km))
}

pub fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

fn ids(edges: &[EdgeId]) -> Value {
    edges.iter().map(|e| e.0).collect()
}

/// One LineString feature per selected link, in selection order.
pub fn snapshot_geojson(prepared: &Prepared, run: &GrowthRun, snapshot: &GrowthSnapshot) -> Value {
    let features: Vec<Value> = run
        .ranking
        .iter()
        .take(snapshot.selected.len())
        .enumerate()
        .map(|(k, r)| {
            let link = &run.links[r.link];
            let coords: Vec<Value> = link
                .geometry
                .points()
                .iter()
                .map(|p| json!([p.x, p.y]))
                .collect();
            let seeds = match link.source {
                bikegrow_core::growth::LinkSource::Candidate { seeds } => {
                    json!([
                        prepared.seeds.seeds[seeds.0].id.0,
                        prepared.seeds.seeds[seeds.1].id.0
                    ])
                }
                bikegrow_core::growth::LinkSource::Existing { .. } => Value::Null,
            };
            json!({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {
                    "rank": k + 1,
                    "link_id": link.id,
                    "seed_nodes": seeds,
                    "betweenness": link.betweenness,
                    "d_W": link.d_w,
                    "n_trip": link.n_trip,
                    "n_crash": link.n_crash,
                    "routed_length_m": link.routed_length,
                    "edge_ids": ids(&link.route.edges),
                    "charged_edge_ids": ids(&r.charged_edges),
                    "charged_km": r.charged_km,
                    "cumulative_km": r.cumulative_km,
                },
            })
        })
        .collect();
    json!({
        "type": "FeatureCollection",
        "D_km": snapshot.d_km,
        "alpha": snapshot.alpha,
        "cumulative_km": snapshot.cumulative_km,
        "exhausted": snapshot.exhausted,
        "features": features,
    })
}

/// Rebuilds the selection of a snapshot file written by [`snapshot_geojson`].
pub fn parse_snapshot(text: &str, path: &Path) -> Result<GrowthSnapshot, FormatError> {
    let fail = |message: &str| FormatError::File {
        path: path.to_owned(),
        message: message.to_owned(),
    };
    let doc: Value = serde_json::from_str(text).map_err(|e| fail(&e.to_string()))?;
    let num = |key: &str| {
        doc.get(key)
            .and_then(Value::as_f64)
            .ok_or_else(|| fail(&format!("missing {key}")))
    };
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| fail("missing features"))?;
    let mut selected = Vec::new();
    let mut charged = Vec::new();
    for f in features {
        let props = f
            .get("properties")
            .ok_or_else(|| fail("feature without properties"))?;
        let id = props
            .get("link_id")
            .and_then(Value::as_u64)
            .ok_or_else(|| fail("feature without link_id"))?;
        selected.push(id as usize);
        let edges = props
            .get("charged_edge_ids")
            .and_then(Value::as_array)
            .ok_or_else(|| fail("feature without charged_edge_ids"))?;
        for e in edges {
            charged.push(EdgeId(e.as_u64().ok_or_else(|| fail("bad edge id"))?));
        }
    }
    Ok(GrowthSnapshot {
        d_km: num("D_km")?,
        alpha: num("alpha")?,
        selected,
        charged_edges: charged,
        cumulative_km: num("cumulative_km")?,
        exhausted: doc
            .get("exhausted")
            .and_then(Value::as_bool)
            .unwrap_or(false),
    })
}

/// Column name for a detour factor: `trip_cov_d0`, `trip_cov_d25`, ...
pub fn trip_column(detour: f64) -> String {
    let pct = detour * 100.0;
    let pct = if (pct - pct.round()).abs() < 1e-9 {
        pct.round()
    } else {
        pct
    };
    format!("trip_cov_d{}", label(pct))
}

pub fn metrics_csv(rows: &[MetricsRow], detours: &[f64]) -> String {
    let mut s = String::from("D_km,crash_cov");
    for d in detours {
        s.push(',');
        s.push_str(&trip_column(*d));
    }
    s.push_str(",components\n");
    for r in rows {
        let _ = write!(s, "{},{:.6}", label(r.d_km), r.crash_coverage);
        for t in &r.trip_coverage {
            let _ = write!(s, ",{t:.6}");
        }
        let _ = writeln!(s, ",{}", r.components);
    }
    s
}

/// A numeric CSV table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub fn parse_table(text: &str, path: &Path) -> Result<Table, FormatError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let columns: Vec<String> = rdr
        .headers()
        .map_err(|e| FormatError::File {
            path: path.to_owned(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| FormatError::File {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FormatError::Row {
                path: path.to_owned(),
                line,
                message: e.to_string(),
            })?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

pub fn tradeoff_json(result: &TradeoffResult) -> Value {
    let warnings: Vec<&str> = result
        .warnings
        .iter()
        .map(|w| match w {
            TradeoffWarning::TripNotIncreasing => "trip improvement decreases with alpha",
            TradeoffWarning::CrashNotDecreasing => "crash improvement increases with alpha",
        })
        .collect();
    json!({
        "D_km": result.d_km,
        "alpha_star": result.alpha_star,
        "improvement": result.improvement,
        "crossing": result.crossing,
        "warnings": warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_header_and_format() {
        let rows = vec![MetricsRow {
            d_km: 0.0,
            crash_coverage: 0.382,
            trip_coverage: vec![0.068, 0.1],
            components: 102,
        }];
        let csv = metrics_csv(&rows, &[0.0, 0.25]);
        assert_eq!(
            csv,
            "D_km,crash_cov,trip_cov_d0,trip_cov_d25,components\n0,0.382000,0.068000,0.100000,102\n"
        );
        let t = parse_table(&csv, Path::new("m.csv")).unwrap();
        assert_eq!(t.column("trip_cov_d25"), Some(3));
        assert_eq!(t.rows[0][4], 102.0);
    }

    #[test]
    fn file_names() {
        assert_eq!(snapshot_file_name(5.0), "snapshot_D5km.geojson");
        assert_eq!(snapshot_file_name(2.5), "snapshot_D2.5km.geojson");
        assert_eq!(trip_column(0.25), "trip_cov_d25");
    }
}

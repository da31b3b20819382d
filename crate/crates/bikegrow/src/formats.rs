//! CSV and GeoJSON readers and writers for the input files.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use bikegrow_core::geometry::check_projected;
use bikegrow_core::graph::EdgeSpec;
use bikegrow_core::ingest::{CrashPoint, OdRecord, VehicleSnapshot, Zone};
use bikegrow_core::{EdgeId, EdgeKind, NodeId, Point, Polygon, Polyline, SpatialNetwork};
use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: line {line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        source: bikegrow_core::Error,
    },
}

/// A rejected row of a leniently parsed file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    pub line: u64,
    pub message: String,
}

fn open(path: &Path) -> Result<File, FormatError> {
    File::open(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Rows with their line numbers, plus rejected rows.
type Parsed<T> = (Vec<(u64, T)>, Vec<RowIssue>);

/// Parses rows of `T`, collecting per-row failures instead of stopping.
fn read_rows<T, R>(reader: R, path: &Path, columns: &[&str]) -> Result<Parsed<T>, FormatError>
where
    T: DeserializeOwned,
    R: Read,
{
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let file_err = |message: String| FormatError::File {
        path: path.to_owned(),
        message,
    };
    let headers = rdr.headers().map_err(|e| file_err(e.to_string()))?.clone();
    if headers.is_empty() {
        // An empty file has no header row and no records.
        return Ok((Vec::new(), Vec::new()));
    }
    let missing: Vec<&str> = columns
        .iter()
        .copied()
        .filter(|c| !headers.iter().any(|h| h == *c))
        .collect();
    if !missing.is_empty() {
        return Err(file_err(format!(
            "missing column(s): {}",
            missing.join(", ")
        )));
    }
    let mut rows = Vec::new();
    let mut issues = Vec::new();
    for rec in rdr.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                issues.push(RowIssue {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = rec.position().map_or(0, |p| p.line());
        match rec.deserialize::<T>(Some(&headers)) {
            Ok(row) => rows.push((line, row)),
            Err(e) => issues.push(RowIssue {
                line,
                message: match e.kind() {
                    csv::ErrorKind::Deserialize { err, .. } => {
                        let field = err
                            .field()
                            .and_then(|f| headers.get(f as usize))
                            .unwrap_or("?");
                        format!("column {field}: {err}")
                    }
                    _ => e.to_string(),
                },
            }),
        }
    }
    Ok((rows, issues))
}

fn strict<T>(path: &Path, parsed: Parsed<T>) -> Result<Vec<(u64, T)>, FormatError> {
    match parsed.1.into_iter().next() {
        Some(issue) => Err(FormatError::Row {
            path: path.to_owned(),
            line: issue.line,
            message: issue.message,
        }),
        None => Ok(parsed.0),
    }
}

fn row_err(path: &Path, line: u64, message: impl Into<String>) -> FormatError {
    FormatError::Row {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}

fn finite_point(path: &Path, line: u64, x: f64, y: f64) -> Result<Point, FormatError> {
    if x.is_finite() && y.is_finite() {
        Ok(Point::new(x, y))
    } else {
        Err(row_err(path, line, "non-finite coordinate"))
    }
}

#[derive(Deserialize)]
struct NodeRow {
    node_id: u64,
    x: f64,
    y: f64,
}

#[derive(Deserialize)]
struct EdgeRow {
    edge_id: u64,
    u: u64,
    v: u64,
    kind: String,
    #[serde(default)]
    length_m: Option<f64>,
    #[serde(default)]
    geometry: Option<String>,
}

#[derive(Deserialize)]
struct CrashRow {
    crash_id: u64,
    x: f64,
    y: f64,
    year: i32,
}

#[derive(Deserialize)]
struct SnapshotRow {
    vehicle_id: String,
    timestamp_unix: i64,
    x: f64,
    y: f64,
    battery_pct: f64,
}

#[derive(Deserialize)]
struct OdRow {
    ox: f64,
    oy: f64,
    dx: f64,
    dy: f64,
    t_start: i64,
    t_end: i64,
}

pub fn parse_nodes(reader: impl Read, path: &Path) -> Result<Vec<(NodeId, Point)>, FormatError> {
    let rows = strict(
        path,
        read_rows::<NodeRow, _>(reader, path, &["node_id", "x", "y"])?,
    )?;
    rows.into_iter()
        .map(|(line, r)| Ok((NodeId(r.node_id), finite_point(path, line, r.x, r.y)?)))
        .collect()
}

fn parse_geometry(text: &str) -> Result<Polyline, String> {
    let mut pts = Vec::new();
    for pair in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let mut it = pair.split_whitespace();
        let (Some(x), Some(y), None) = (it.next(), it.next(), it.next()) else {
            return Err(format!("bad vertex '{pair}'"));
        };
        let x: f64 = x.parse().map_err(|_| format!("bad x in '{pair}'"))?;
        let y: f64 = y.parse().map_err(|_| format!("bad y in '{pair}'"))?;
        pts.push(Point::new(x, y));
    }
    Polyline::new(pts).map_err(|e| e.to_string())
}

pub fn parse_edges(reader: impl Read, path: &Path) -> Result<Vec<EdgeSpec>, FormatError> {
    let cols = ["edge_id", "u", "v", "kind"];
    let rows = strict(path, read_rows::<EdgeRow, _>(reader, path, &cols)?)?;
    rows.into_iter()
        .map(|(line, r)| {
            let kind = match r.kind.as_str() {
                "street" => EdgeKind::Street,
                "bike" => EdgeKind::Bike,
                other => return Err(row_err(path, line, format!("unknown kind '{other}'"))),
            };
            if r.length_m.is_some_and(|l| !(l.is_finite() && l >= 0.0)) {
                return Err(row_err(
                    path,
                    line,
                    "length_m must be a non-negative number",
                ));
            }
            let geometry = match r.geometry.as_deref().map(str::trim) {
                None | Some("") => None,
                Some(text) => Some(parse_geometry(text).map_err(|m| row_err(path, line, m))?),
            };
            Ok(EdgeSpec {
                id: EdgeId(r.edge_id),
                u: NodeId(r.u),
                v: NodeId(r.v),
                kind,
                geometry,
            })
        })
        .collect()
}

pub fn parse_crashes(reader: impl Read, path: &Path) -> Result<Vec<CrashPoint>, FormatError> {
    let rows = strict(
        path,
        read_rows::<CrashRow, _>(reader, path, &["crash_id", "x", "y", "year"])?,
    )?;
    rows.into_iter()
        .map(|(line, r)| {
            Ok(CrashPoint {
                id: r.crash_id,
                location: finite_point(path, line, r.x, r.y)?,
                year: r.year,
            })
        })
        .collect()
}

pub fn parse_od(reader: impl Read, path: &Path) -> Result<Vec<OdRecord>, FormatError> {
    let cols = ["ox", "oy", "dx", "dy", "t_start", "t_end"];
    let rows = strict(path, read_rows::<OdRow, _>(reader, path, &cols)?)?;
    rows.into_iter()
        .map(|(line, r)| {
            Ok(OdRecord {
                origin: finite_point(path, line, r.ox, r.oy)?,
                destination: finite_point(path, line, r.dx, r.dy)?,
                start: r.t_start,
                end: r.t_end,
            })
        })
        .collect()
}

/// Snapshot log rows; malformed rows are skipped and reported.
pub fn parse_snapshot_log(
    reader: impl Read,
    path: &Path,
) -> Result<(Vec<VehicleSnapshot>, Vec<RowIssue>), FormatError> {
    let cols = ["vehicle_id", "timestamp_unix", "x", "y", "battery_pct"];
    let (rows, mut issues) = read_rows::<SnapshotRow, _>(reader, path, &cols)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        if !(r.x.is_finite() && r.y.is_finite()) {
            issues.push(RowIssue {
                line,
                message: "non-finite coordinate".into(),
            });
        } else if !(0.0..=100.0).contains(&r.battery_pct) {
            issues.push(RowIssue {
                line,
                message: "battery_pct outside [0, 100]".into(),
            });
        } else if r.vehicle_id.is_empty() {
            issues.push(RowIssue {
                line,
                message: "empty vehicle_id".into(),
            });
        } else {
            out.push(VehicleSnapshot {
                vehicle: r.vehicle_id,
                timestamp: r.timestamp_unix,
                location: Point::new(r.x, r.y),
                battery: r.battery_pct,
            });
        }
    }
    issues.sort_by_key(|i| i.line);
    Ok((out, issues))
}

/// Nodes and edges into a validated network. Lengths come from geometry.
pub fn build_network(
    nodes: Vec<(NodeId, Point)>,
    edges: Vec<EdgeSpec>,
    path: &Path,
) -> Result<SpatialNetwork, FormatError> {
    let invalid = |source| FormatError::Invalid {
        path: path.to_owned(),
        source,
    };
    let vertices = nodes.iter().map(|(_, p)| p).chain(
        edges
            .iter()
            .filter_map(|e| e.geometry.as_ref())
            .flat_map(|g| g.points()),
    );
    check_projected(vertices).map_err(invalid)?;
    SpatialNetwork::new(nodes, edges).map_err(invalid)
}

pub fn load_network(nodes: &Path, edges: &Path) -> Result<SpatialNetwork, FormatError> {
    let n = parse_nodes(open(nodes)?, nodes)?;
    let e = parse_edges(open(edges)?, edges)?;
    build_network(n, e, edges)
}

pub fn load_crashes(path: &Path) -> Result<Vec<CrashPoint>, FormatError> {
    let crashes = parse_crashes(open(path)?, path)?;
    check_projected(crashes.iter().map(|c| &c.location)).map_err(|source| {
        FormatError::Invalid {
            path: path.to_owned(),
            source,
        }
    })?;
    Ok(crashes)
}

pub fn load_od(path: &Path) -> Result<Vec<OdRecord>, FormatError> {
    let od = parse_od(open(path)?, path)?;
    check_projected(od.iter().flat_map(|r| [&r.origin, &r.destination])).map_err(|source| {
        FormatError::Invalid {
            path: path.to_owned(),
            source,
        }
    })?;
    Ok(od)
}

pub fn load_snapshot_log(
    path: &Path,
) -> Result<(Vec<VehicleSnapshot>, Vec<RowIssue>), FormatError> {
    parse_snapshot_log(open(path)?, path)
}

fn ring(value: &serde_json::Value) -> Option<Vec<Point>> {
    value
        .as_array()?
        .iter()
        .map(|c| {
            let c = c.as_array()?;
            Some(Point::new(c.first()?.as_f64()?, c.get(1)?.as_f64()?))
        })
        .collect()
}

fn polygon(rings: &serde_json::Value) -> Result<Polygon, String> {
    let rings = rings
        .as_array()
        .ok_or("polygon coordinates must be an array of rings")?;
    let mut rings = rings.iter().map(|r| ring(r).ok_or("bad ring coordinates"));
    let exterior = rings.next().ok_or("polygon without rings")??;
    let holes = rings.collect::<Result<Vec<_>, _>>()?;
    Polygon::new(exterior, holes).map_err(|e| e.to_string())
}

/// Zones from a GeoJSON FeatureCollection of Polygon or MultiPolygon
/// features with `density` and `is_park` properties.
pub fn parse_zones(text: &str, path: &Path) -> Result<Vec<Zone>, FormatError> {
    let file_err = |message: String| FormatError::File {
        path: path.to_owned(),
        message,
    };
    let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| file_err(e.to_string()))?;
    if doc.get("type").and_then(|t| t.as_str()) != Some("FeatureCollection") {
        return Err(file_err("expected a FeatureCollection".into()));
    }
    let features = doc
        .get("features")
        .and_then(|f| f.as_array())
        .ok_or_else(|| file_err("missing features array".into()))?;
    let mut zones = Vec::with_capacity(features.len());
    for (k, f) in features.iter().enumerate() {
        let fail = |m: &str| file_err(format!("feature {k}: {m}"));
        let props = f
            .get("properties")
            .ok_or_else(|| fail("missing properties"))?;
        let density = props
            .get("density")
            .and_then(|d| d.as_f64())
            .filter(|d| d.is_finite() && *d >= 0.0)
            .ok_or_else(|| fail("density must be a non-negative number"))?;
        let is_park = match props.get("is_park") {
            None | Some(serde_json::Value::Null) => false,
            Some(v) => v
                .as_bool()
                .ok_or_else(|| fail("is_park must be a boolean"))?,
        };
        let geom = f.get("geometry").ok_or_else(|| fail("missing geometry"))?;
        let coords = geom
            .get("coordinates")
            .ok_or_else(|| fail("missing coordinates"))?;
        let polygons = match geom.get("type").and_then(|t| t.as_str()) {
            Some("Polygon") => vec![polygon(coords).map_err(|m| fail(&m))?],
            Some("MultiPolygon") => coords
                .as_array()
                .ok_or_else(|| fail("bad MultiPolygon coordinates"))?
                .iter()
                .map(|p| polygon(p).map_err(|m| fail(&m)))
                .collect::<Result<_, _>>()?,
            _ => return Err(fail("geometry must be Polygon or MultiPolygon")),
        };
        zones.push(Zone {
            polygons,
            density,
            is_park,
        });
    }
    let vertices: Vec<Point> = zones
        .iter()
        .flat_map(|z| z.polygons.iter().flat_map(|p| p.exterior().iter().copied()))
        .collect();
    check_projected(&vertices).map_err(|source| FormatError::Invalid {
        path: path.to_owned(),
        source,
    })?;
    Ok(zones)
}

pub fn load_zones(path: &Path) -> Result<Vec<Zone>, FormatError> {
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|source| FormatError::Io {
            path: path.to_owned(),
            source,
        })?;
    parse_zones(&text, path)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn io_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_nodes<W: Write>(w: W, net: &SpatialNetwork) -> io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["node_id", "x", "y"]).map_err(io_err)?;
    for (id, p) in net.nodes() {
        out.write_record([id.0.to_string(), p.x.to_string(), p.y.to_string()])
            .map_err(io_err)?;
    }
    out.flush()
}

pub fn format_geometry(line: &Polyline) -> String {
    let mut s = String::new();
    for (k, p) in line.points().iter().enumerate() {
        if k > 0 {
            s.push(';');
        }
        let _ = write!(s, "{} {}", p.x, p.y);
    }
    s
}

pub fn write_edges<W: Write>(w: W, net: &SpatialNetwork) -> io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["edge_id", "u", "v", "kind", "length_m", "geometry"])
        .map_err(io_err)?;
    for e in net.edges() {
        out.write_record([
            e.id.0.to_string(),
            e.u.0.to_string(),
            e.v.0.to_string(),
            e.kind.as_str().to_string(),
            e.length().to_string(),
            format_geometry(&e.geometry),
        ])
        .map_err(io_err)?;
    }
    out.flush()
}

pub fn write_crashes<W: Write>(w: W, crashes: &[CrashPoint]) -> io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["crash_id", "x", "y", "year"])
        .map_err(io_err)?;
    for c in crashes {
        out.write_record([
            c.id.to_string(),
            c.location.x.to_string(),
            c.location.y.to_string(),
            c.year.to_string(),
        ])
        .map_err(io_err)?;
    }
    out.flush()
}

pub fn write_od<W: Write>(w: W, od: &[OdRecord]) -> io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["ox", "oy", "dx", "dy", "t_start", "t_end"])
        .map_err(io_err)?;
    for r in od {
        out.write_record([
            r.origin.x.to_string(),
            r.origin.y.to_string(),
            r.destination.x.to_string(),
            r.destination.y.to_string(),
            r.start.to_string(),
            r.end.to_string(),
        ])
        .map_err(io_err)?;
    }
    out.flush()
}

pub fn write_snapshot_log<W: Write>(w: W, log: &[VehicleSnapshot]) -> io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["vehicle_id", "timestamp_unix", "x", "y", "battery_pct"])
        .map_err(io_err)?;
    for s in log {
        out.write_record([
            s.vehicle.clone(),
            s.timestamp.to_string(),
            s.location.x.to_string(),
            s.location.y.to_string(),
            s.battery.to_string(),
        ])
        .map_err(io_err)?;
    }
    out.flush()
}

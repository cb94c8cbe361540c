//! Network CSV files: `nodes.csv`, `edges.csv` and `schedules.csv`.
//!
//! ```text
//! nodes.csv      id,lat,lon
//! edges.csv      id,from,to,mode,length_m,speed_mps,schedule_id[,capacity_vph]
//! schedules.csv  schedule_id,ride_time_s,departures
//! ```
//!
//! An edge gives either a speed or a schedule. Walk and cycle edges may
//! leave both empty and take the default speed for their mode. Departures
//! are semicolon-separated seconds since midnight. `schedules.csv` may be
//! omitted when no edge is timetabled.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use copter_core::mode::ModeLabel;
use copter_core::netgraph::{default_speed, Edge, GraphError, Node, Schedule, Seconds, Traversal, TransportGraph};
use csv::{ReaderBuilder, StringRecord, Trim};

use crate::FileError;

pub const GRAPH_FORMAT_VERSION: u32 = 1;

pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const SCHEDULES_FILE: &str = "schedules.csv";

fn parse_err(line: usize, reason: impl Into<String>) -> GraphError {
    GraphError::Parse { line, reason: reason.into() }
}

fn csv_err(e: csv::Error) -> GraphError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    parse_err(line, e.to_string())
}

/// Header-indexed rows of a CSV source.
struct Table {
    columns: HashMap<String, usize>,
    rows: Vec<(usize, StringRecord)>,
}

impl Table {
    fn read<R: Read>(src: R, required: &[&str], optional: &[&str]) -> Result<Table, GraphError> {
        let mut rdr = ReaderBuilder::new().trim(Trim::All).comment(Some(b'#')).from_reader(src);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        let mut columns = HashMap::new();
        for (i, h) in headers.iter().enumerate() {
            if !required.contains(&h) && !optional.contains(&h) {
                return Err(parse_err(1, format!("unknown column `{h}`")));
            }
            if columns.insert(h.to_string(), i).is_some() {
                return Err(parse_err(1, format!("duplicate column `{h}`")));
            }
        }
        if let Some(missing) = required.iter().find(|c| !columns.contains_key(**c)) {
            return Err(parse_err(1, format!("missing column `{missing}`")));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            rows.push((line, rec));
        }
        Ok(Table { columns, rows })
    }

    fn get<'r>(&self, rec: &'r StringRecord, column: &str) -> &'r str {
        self.columns.get(column).and_then(|&i| rec.get(i)).unwrap_or("")
    }
}

fn number<T: std::str::FromStr>(line: usize, column: &str, text: &str) -> Result<T, GraphError> {
    text.parse().map_err(|_| parse_err(line, format!("`{column}` is not a valid number: `{text}`")))
}

pub fn parse_nodes<R: Read>(src: R) -> Result<Vec<Node>, GraphError> {
    let t = Table::read(src, &["id", "lat", "lon"], &[])?;
    t.rows
        .iter()
        .map(|(line, r)| {
            let id = t.get(r, "id");
            if id.is_empty() {
                return Err(parse_err(*line, "empty node id"));
            }
            Ok(Node {
                id: id.to_string(),
                lat: number(*line, "lat", t.get(r, "lat"))?,
                lon: number(*line, "lon", t.get(r, "lon"))?,
            })
        })
        .collect()
}

pub fn parse_edges<R: Read>(src: R) -> Result<Vec<Edge>, GraphError> {
    let t = Table::read(
        src,
        &["id", "from", "to", "mode", "length_m", "speed_mps", "schedule_id"],
        &["capacity_vph"],
    )?;
    t.rows
        .iter()
        .map(|(line, r)| {
            let line = *line;
            let mode: ModeLabel = t.get(r, "mode").parse().map_err(|e| parse_err(line, format!("{e}")))?;
            let speed = t.get(r, "speed_mps");
            let schedule = t.get(r, "schedule_id");
            let traversal = match (speed.is_empty(), schedule.is_empty()) {
                (false, true) => Traversal::FixedSpeed { speed_mps: number(line, "speed_mps", speed)? },
                (true, false) => Traversal::Scheduled { schedule_id: schedule.to_string() },
                (true, true) => match default_speed(mode) {
                    Some(v) => Traversal::FixedSpeed { speed_mps: v },
                    None => return Err(parse_err(line, "edge needs a speed or a schedule")),
                },
                (false, false) => return Err(parse_err(line, "edge has both a speed and a schedule")),
            };
            let capacity = t.get(r, "capacity_vph");
            let capacity_vph =
                if capacity.is_empty() { None } else { Some(number(line, "capacity_vph", capacity)?) };
            let id = t.get(r, "id");
            if id.is_empty() {
                return Err(parse_err(line, "empty edge id"));
            }
            Ok(Edge {
                id: id.to_string(),
                from: t.get(r, "from").to_string(),
                to: t.get(r, "to").to_string(),
                mode,
                length_m: number(line, "length_m", t.get(r, "length_m"))?,
                traversal,
                capacity_vph,
            })
        })
        .collect()
}

pub fn parse_schedules<R: Read>(src: R) -> Result<Vec<Schedule>, GraphError> {
    let t = Table::read(src, &["schedule_id", "ride_time_s", "departures"], &[])?;
    t.rows
        .iter()
        .map(|(line, r)| {
            let line = *line;
            let departures = t
                .get(r, "departures")
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| number::<Seconds>(line, "departures", s))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Schedule {
                id: t.get(r, "schedule_id").to_string(),
                departures,
                ride_time: number(line, "ride_time_s", t.get(r, "ride_time_s"))?,
            })
        })
        .collect()
}

/// Parses and validates a network from its three sources.
pub fn load_graph<N: Read, E: Read, S: Read>(nodes: N, edges: E, schedules: S) -> Result<TransportGraph, GraphError> {
    TransportGraph::new(parse_nodes(nodes)?, parse_edges(edges)?, parse_schedules(schedules)?)
}

/// Loads `nodes.csv`, `edges.csv` and (if present) `schedules.csv` from `dir`.
pub fn load_graph_dir(dir: &Path) -> Result<TransportGraph, FileError> {
    let at = |file: &str| dir.join(file);
    let wrap = |file: &str, e: GraphError| match e {
        GraphError::Parse { line, reason } => FileError::Parse { path: at(file), line, reason },
        other => FileError::invalid(&at(file), other),
    };
    let nodes = parse_nodes(crate::open(&at(NODES_FILE))?).map_err(|e| wrap(NODES_FILE, e))?;
    let edges = parse_edges(crate::open(&at(EDGES_FILE))?).map_err(|e| wrap(EDGES_FILE, e))?;
    let schedules = if at(SCHEDULES_FILE).exists() {
        parse_schedules(crate::open(&at(SCHEDULES_FILE))?).map_err(|e| wrap(SCHEDULES_FILE, e))?
    } else {
        Vec::new()
    };
    TransportGraph::new(nodes, edges, schedules).map_err(|e| FileError::invalid(dir, e))
}

pub fn write_nodes<W: Write>(graph: &TransportGraph, dst: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(dst);
    w.write_record(["id", "lat", "lon"])?;
    for n in graph.nodes() {
        w.write_record([n.id.clone(), n.lat.to_string(), n.lon.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_edges<W: Write>(graph: &TransportGraph, dst: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(dst);
    w.write_record(["id", "from", "to", "mode", "length_m", "speed_mps", "schedule_id", "capacity_vph"])?;
    for e in graph.edges() {
        let (speed, schedule) = match &e.traversal {
            Traversal::FixedSpeed { speed_mps } => (speed_mps.to_string(), String::new()),
            Traversal::Scheduled { schedule_id } => (String::new(), schedule_id.clone()),
        };
        w.write_record([
            e.id.clone(),
            e.from.clone(),
            e.to.clone(),
            e.mode.symbol().to_string(),
            e.length_m.to_string(),
            speed,
            schedule,
            e.capacity_vph.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_schedules<W: Write>(graph: &TransportGraph, dst: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(dst);
    w.write_record(["schedule_id", "ride_time_s", "departures"])?;
    for s in graph.schedules() {
        let deps: Vec<String> = s.departures.iter().map(|d| d.to_string()).collect();
        w.write_record([s.id.clone(), s.ride_time.to_string(), deps.join(";")])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the three network files into `dir`, creating it if needed.
pub fn write_graph_dir(graph: &TransportGraph, dir: &Path) -> Result<(), FileError> {
    std::fs::create_dir_all(dir).map_err(|e| FileError::io(dir, e))?;
    let put = |file: &str, buf: Vec<u8>, res: csv::Result<()>| {
        res.map_err(|e| FileError::invalid(&dir.join(file), e))?;
        crate::write_file(&dir.join(file), &buf)
    };
    let mut buf = Vec::new();
    let res = write_nodes(graph, &mut buf);
    put(NODES_FILE, buf, res)?;
    let mut buf = Vec::new();
    let res = write_edges(graph, &mut buf);
    put(EDGES_FILE, buf, res)?;
    let mut buf = Vec::new();
    let res = write_schedules(graph, &mut buf);
    put(SCHEDULES_FILE, buf, res)?;
    Ok(())
}

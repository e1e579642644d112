//! Readers and writers for the four CSV schemas.
//!
//! Every file starts with a header row. Errors carry the 1-based line number of
//! the offending row.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use crate::domain::{Billboard, BillboardId, GeoPoint, TagId, TagRecord, TimeInterval, TrajectoryTuple, UserId};
use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: [&str; 5] = ["user_ids", "lat", "lon", "t_start", "t_end"];
pub const BILLBOARD_HEADER: [&str; 5] = ["billboard_id", "lat", "lon", "panel_size", "cost"];
pub const TAG_HEADER: [&str; 3] = ["tag_id", "cost", "weight"];
pub const PROB_HEADER: [&str; 4] = ["user_id", "billboard_id", "tag_id", "prob"];

/// Trajectory tuples plus the table mapping dense user ids back to file ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryData {
    pub users: Vec<String>,
    pub tuples: Vec<TrajectoryTuple>,
}

impl TrajectoryData {
    pub fn user_index(&self) -> HashMap<&str, UserId> {
        self.users
            .iter()
            .enumerate()
            .map(|(i, name)| (name.as_str(), UserId(i as u32)))
            .collect()
    }
}

/// A row of the explicit probability file, still keyed by file ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitProb {
    pub user: String,
    pub billboard: String,
    pub tag: String,
    pub prob: f64,
}

struct Rows {
    source: String,
    reader: csv::Reader<Box<dyn Read>>,
}

impl Rows {
    fn open(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Ok(Self::new(Box::new(file), path.display().to_string()))
    }

    fn new(reader: Box<dyn Read>, source: String) -> Self {
        let reader = ReaderBuilder::new()
            .has_headers(true)
            .trim(Trim::All)
            .flexible(true)
            .from_reader(reader);
        Rows { source, reader }
    }

    fn err(&self, line: u64, message: impl Into<String>) -> Error {
        Error::parse(&self.source, line, message)
    }

    /// Checks the header and returns its column count.
    fn header(&mut self, expected: &[&str], optional_tail: usize) -> Result<usize> {
        let header = self.reader.headers()?.clone();
        let got: Vec<&str> = header.iter().collect();
        let required = expected.len() - optional_tail;
        let ok = got.len() >= required
            && got.len() <= expected.len()
            && got.iter().zip(expected).all(|(a, b)| a == b);
        if !ok {
            return Err(self.err(
                1,
                format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
            ));
        }
        Ok(got.len())
    }

    fn next(&mut self, width: usize) -> Option<Result<(u64, StringRecord)>> {
        let mut record = StringRecord::new();
        match self.reader.read_record(&mut record) {
            Ok(false) => None,
            Err(e) => Some(Err(e.into())),
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                if record.len() != width {
                    return Some(Err(self.err(
                        line,
                        format!("expected {width} fields, found {}", record.len()),
                    )));
                }
                Some(Ok((line, record)))
            }
        }
    }

    fn float(&self, line: u64, record: &StringRecord, i: usize, name: &str) -> Result<f64> {
        let raw = &record[i];
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(line, format!("{name} `{raw}` is not a finite number"))),
        }
    }

    fn uint(&self, line: u64, record: &StringRecord, i: usize, name: &str) -> Result<u64> {
        let raw = &record[i];
        raw.parse::<u64>()
            .map_err(|_| self.err(line, format!("{name} `{raw}` is not a non-negative integer")))
    }

    fn point(&self, line: u64, record: &StringRecord) -> Result<GeoPoint> {
        let lat = self.float(line, record, 1, "lat")?;
        let lon = self.float(line, record, 2, "lon")?;
        GeoPoint::new(lat, lon).map_err(|e| self.err(line, e.to_string()))
    }
}

pub fn load_trajectories(path: impl AsRef<Path>) -> Result<TrajectoryData> {
    parse_trajectories(Rows::open(path.as_ref())?)
}

pub fn read_trajectories<R: Read + 'static>(reader: R, source: &str) -> Result<TrajectoryData> {
    parse_trajectories(Rows::new(Box::new(reader), source.to_string()))
}

fn parse_trajectories(mut rows: Rows) -> Result<TrajectoryData> {
    let width = rows.header(&TRAJECTORY_HEADER, 0)?;
    let mut data = TrajectoryData::default();
    let mut ids: HashMap<String, UserId> = HashMap::new();
    while let Some(row) = rows.next(width) {
        let (line, record) = row?;
        let mut users = Vec::new();
        for name in record[0].split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let next = UserId(ids.len() as u32);
            let id = *ids.entry(name.to_string()).or_insert_with(|| {
                data.users.push(name.to_string());
                next
            });
            if users.contains(&id) {
                return Err(rows.err(line, format!("user `{name}` listed twice")));
            }
            users.push(id);
        }
        if users.is_empty() {
            return Err(rows.err(line, "empty user list"));
        }
        let loc = rows.point(line, &record)?;
        let start = rows.uint(line, &record, 3, "t_start")?;
        let end = rows.uint(line, &record, 4, "t_end")?;
        let interval = TimeInterval::new(start, end).map_err(|e| rows.err(line, e.to_string()))?;
        data.tuples.push(TrajectoryTuple {
            users,
            loc,
            interval,
        });
    }
    Ok(data)
}

pub fn load_billboards(path: impl AsRef<Path>) -> Result<Vec<Billboard>> {
    parse_billboards(Rows::open(path.as_ref())?)
}

pub fn read_billboards<R: Read + 'static>(reader: R, source: &str) -> Result<Vec<Billboard>> {
    parse_billboards(Rows::new(Box::new(reader), source.to_string()))
}

fn parse_billboards(mut rows: Rows) -> Result<Vec<Billboard>> {
    let width = rows.header(&BILLBOARD_HEADER, 0)?;
    let mut out: Vec<Billboard> = Vec::new();
    let mut seen = HashMap::new();
    while let Some(row) = rows.next(width) {
        let (line, record) = row?;
        let name = record[0].to_string();
        if name.is_empty() {
            return Err(rows.err(line, "empty billboard id"));
        }
        if seen.insert(name.clone(), ()).is_some() {
            return Err(rows.err(line, format!("billboard `{name}` listed twice")));
        }
        let loc = rows.point(line, &record)?;
        let panel_size = rows.float(line, &record, 3, "panel_size")?;
        if panel_size <= 0.0 {
            return Err(rows.err(line, format!("panel_size {panel_size} must be positive")));
        }
        let cost = rows.float(line, &record, 4, "cost")?;
        if cost < 0.0 {
            return Err(rows.err(line, format!("cost {cost} is negative")));
        }
        out.push(Billboard {
            id: BillboardId(out.len() as u32),
            name,
            loc,
            panel_size,
            cost,
        });
    }
    Ok(out)
}

pub fn load_tags(path: impl AsRef<Path>) -> Result<Vec<TagRecord>> {
    parse_tags(Rows::open(path.as_ref())?)
}

pub fn read_tags<R: Read + 'static>(reader: R, source: &str) -> Result<Vec<TagRecord>> {
    parse_tags(Rows::new(Box::new(reader), source.to_string()))
}

fn parse_tags(mut rows: Rows) -> Result<Vec<TagRecord>> {
    let width = rows.header(&TAG_HEADER, 1)?;
    let mut out: Vec<TagRecord> = Vec::new();
    let mut seen = HashMap::new();
    while let Some(row) = rows.next(width) {
        let (line, record) = row?;
        let name = record[0].to_string();
        if name.is_empty() {
            return Err(rows.err(line, "empty tag id"));
        }
        if seen.insert(name.clone(), ()).is_some() {
            return Err(rows.err(line, format!("tag `{name}` listed twice")));
        }
        let cost = rows.float(line, &record, 1, "cost")?;
        if cost < 0.0 {
            return Err(rows.err(line, format!("cost {cost} is negative")));
        }
        let weight = if width == 3 {
            rows.float(line, &record, 2, "weight")?
        } else {
            1.0
        };
        if weight < 0.0 {
            return Err(rows.err(line, format!("weight {weight} is negative")));
        }
        out.push(TagRecord {
            id: TagId(out.len() as u32),
            name,
            cost,
            weight,
        });
    }
    Ok(out)
}

pub fn load_probabilities(path: impl AsRef<Path>) -> Result<Vec<ExplicitProb>> {
    parse_probabilities(Rows::open(path.as_ref())?)
}

pub fn read_probabilities<R: Read + 'static>(reader: R, source: &str) -> Result<Vec<ExplicitProb>> {
    parse_probabilities(Rows::new(Box::new(reader), source.to_string()))
}

fn parse_probabilities(mut rows: Rows) -> Result<Vec<ExplicitProb>> {
    let width = rows.header(&PROB_HEADER, 0)?;
    let mut out = Vec::new();
    while let Some(row) = rows.next(width) {
        let (line, record) = row?;
        let prob = rows.float(line, &record, 3, "prob")?;
        if !(0.0..=1.0).contains(&prob) {
            return Err(rows.err(line, format!("probability {prob} outside [0, 1]")));
        }
        out.push(ExplicitProb {
            user: record[0].to_string(),
            billboard: record[1].to_string(),
            tag: record[2].to_string(),
            prob,
        });
    }
    Ok(out)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    WriterBuilder::new().has_headers(false).from_writer(w)
}

pub fn write_trajectories<W: Write>(w: W, data: &TrajectoryData) -> Result<()> {
    let mut out = writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for t in &data.tuples {
        let users: Vec<&str> = t.users.iter().map(|u| data.users[u.index()].as_str()).collect();
        out.write_record([
            users.join(";"),
            t.loc.lat.to_string(),
            t.loc.lon.to_string(),
            t.interval.start.to_string(),
            t.interval.end.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_billboards<W: Write>(w: W, billboards: &[Billboard]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(BILLBOARD_HEADER)?;
    for b in billboards {
        out.write_record([
            b.name.clone(),
            b.loc.lat.to_string(),
            b.loc.lon.to_string(),
            b.panel_size.to_string(),
            b.cost.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_tags<W: Write>(w: W, tags: &[TagRecord]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(TAG_HEADER)?;
    for t in tags {
        out.write_record([t.name.clone(), t.cost.to_string(), t.weight.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_probabilities<W: Write>(w: W, rows: &[ExplicitProb]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(PROB_HEADER)?;
    for r in rows {
        out.write_record([
            r.user.as_str(),
            r.billboard.as_str(),
            r.tag.as_str(),
            &r.prob.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

//! Turning raw records into an [`InfluenceInstance`].
//!
//! The pipeline is: load tuples, billboards and tags; enumerate slots on the Δ grid;
//! build the λ-visibility index; attach tag-specific probabilities; derive the
//! virtual default tables.

mod csv_io;
pub mod json;
mod spatial;
mod synthetic;

use std::collections::HashMap;

pub use csv_io::{
    load_billboards, load_probabilities, load_tags, load_trajectories, read_billboards,
    read_probabilities, read_tags, read_trajectories, write_billboards, write_probabilities,
    write_tags, write_trajectories, ExplicitProb, TrajectoryData, BILLBOARD_HEADER, PROB_HEADER,
    TAG_HEADER, TRAJECTORY_HEADER,
};
pub use json::{instance_digest, instance_from_json, instance_to_json, load_instance, save_instance};
pub use spatial::{build_visibility, enumerate_slots, windows_in, BillboardIndex};
pub use synthetic::{generate_raw, generate_synthetic, GeoBox, SyntheticSpec};

use crate::domain::{
    Billboard, InfluenceInstance, InstanceMeta, InstanceParts, ProbEntry, SlotId, TagId,
    TagRecord, TimeInterval, TrajectoryTuple, UserId, VirtualDefaults,
};
use crate::error::{Error, Result};

/// How tag-specific probabilities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbMode {
    /// `Pr(u, s | c) = base(billboard(s)) * weight(c)` for every visible pair.
    PanelSizeBase,
    /// Sparse rows from a probability file, broadcast to every visible slot of the billboard.
    ExplicitFile,
    /// Generated data; probabilities follow the panel-size model.
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub horizon: TimeInterval,
    pub slot_duration: u64,
    pub lambda_m: f64,
    pub prob_mode: ProbMode,
}

impl IngestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.slot_duration == 0 {
            return Err(Error::InvalidParameter("slot duration must be at least 1".into()));
        }
        if self.horizon.start > self.horizon.end {
            return Err(Error::InvalidParameter("horizon start is after its end".into()));
        }
        if !(self.lambda_m.is_finite() && self.lambda_m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda {} must be positive",
                self.lambda_m
            )));
        }
        Ok(())
    }
}

/// Everything loaded from the source files, before indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub users: Vec<String>,
    pub tuples: Vec<TrajectoryTuple>,
    pub billboards: Vec<Billboard>,
    pub tags: Vec<TagRecord>,
}

impl RawDataset {
    pub fn from_parts(trajectories: TrajectoryData, billboards: Vec<Billboard>, tags: Vec<TagRecord>) -> Self {
        RawDataset {
            users: trajectories.users,
            tuples: trajectories.tuples,
            billboards,
            tags,
        }
    }

    /// Copy keeping only the first `n` tuples. The user table is left whole so ids stay stable.
    pub fn with_tuple_prefix(&self, n: usize) -> RawDataset {
        RawDataset {
            users: self.users.clone(),
            tuples: self.tuples[..n.min(self.tuples.len())].to_vec(),
            billboards: self.billboards.clone(),
            tags: self.tags.clone(),
        }
    }

    pub fn trajectory_data(&self) -> TrajectoryData {
        TrajectoryData {
            users: self.users.clone(),
            tuples: self.tuples.clone(),
        }
    }
}

/// Panel size over the largest panel size, per billboard.
pub fn derive_base_probabilities(billboards: &[Billboard]) -> Result<Vec<f64>> {
    let max = billboards
        .iter()
        .map(|b| b.panel_size)
        .fold(f64::NAN, f64::max);
    if billboards.is_empty() {
        return Err(Error::InvalidParameter("no billboards".into()));
    }
    if let Some(b) = billboards.iter().find(|b| !(b.panel_size > 0.0 && b.panel_size.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "billboard `{}` has non-positive panel size {}",
            b.name, b.panel_size
        )));
    }
    Ok(billboards.iter().map(|b| b.panel_size / max).collect())
}

pub fn assemble_instance(
    raw: &RawDataset,
    config: &IngestConfig,
    explicit: Option<&[ExplicitProb]>,
) -> Result<InfluenceInstance> {
    config.validate()?;
    for (i, b) in raw.billboards.iter().enumerate() {
        if b.id.index() != i {
            return Err(Error::InvalidParameter(format!(
                "billboard `{}` has id {} at position {i}",
                b.name, b.id
            )));
        }
    }
    let base = derive_base_probabilities(&raw.billboards)?;
    let slots = enumerate_slots(&raw.billboards, config.horizon, config.slot_duration)?;
    let visibility = build_visibility(&raw.tuples, &slots, &raw.billboards, config.lambda_m);
    let n_tags = raw.tags.len();

    let mut probs = Vec::new();
    let default_slot_by_tag = match config.prob_mode {
        ProbMode::PanelSizeBase | ProbMode::Synthetic => {
            for (s, users) in visibility.iter().enumerate() {
                let b = base[slots[s].billboard.index()];
                for &user in users {
                    for tag in &raw.tags {
                        let prob = b * tag.weight;
                        if !(0.0..=1.0).contains(&prob) {
                            return Err(Error::InvalidParameter(format!(
                                "probability {prob} for tag `{}` outside [0, 1]; tag weights must not exceed 1",
                                tag.name
                            )));
                        }
                        if prob != 0.0 {
                            probs.push(ProbEntry {
                                user,
                                slot: SlotId(s as u32),
                                tag: tag.id,
                                prob,
                            });
                        }
                    }
                }
            }
            let mean_base = base.iter().sum::<f64>() / base.len() as f64;
            raw.tags
                .iter()
                .map(|t| (mean_base * t.weight).clamp(0.0, 1.0))
                .collect()
        }
        ProbMode::ExplicitFile => {
            let rows = explicit.unwrap_or(&[]);
            explicit_probabilities(raw, &slots, &visibility, rows, &mut probs)?;
            // mean explicit probability over visible pairs, per tag
            let n_pairs: usize = visibility.iter().map(Vec::len).sum();
            let mut sums = vec![0.0; n_tags];
            for e in &probs {
                sums[e.tag.index()] += e.prob;
            }
            sums.into_iter()
                .map(|s| if n_pairs == 0 { 0.0 } else { (s / n_pairs as f64).clamp(0.0, 1.0) })
                .collect()
        }
    };

    let parts = InstanceParts {
        meta: InstanceMeta {
            t1: config.horizon.start,
            t2: config.horizon.end,
            delta: config.slot_duration,
            lambda_m: config.lambda_m,
        },
        defaults: VirtualDefaults {
            default_tag_by_slot: slots.iter().map(|s| base[s.billboard.index()]).collect(),
            default_slot_by_tag,
            default_pair: base.iter().sum::<f64>() / base.len() as f64,
        },
        slots,
        billboard_names: raw.billboards.iter().map(|b| b.name.clone()).collect(),
        tags: raw.tags.clone(),
        users: raw.users.clone(),
        visibility,
        probs,
    };
    InfluenceInstance::from_parts(parts)
}

fn explicit_probabilities(
    raw: &RawDataset,
    slots: &[crate::domain::Slot],
    visibility: &[Vec<UserId>],
    rows: &[ExplicitProb],
    out: &mut Vec<ProbEntry>,
) -> Result<()> {
    let users: HashMap<&str, UserId> = raw
        .users
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), UserId(i as u32)))
        .collect();
    let billboards: HashMap<&str, usize> = raw
        .billboards
        .iter()
        .enumerate()
        .map(|(i, b)| (b.name.as_str(), i))
        .collect();
    let tags: HashMap<&str, TagId> = raw.tags.iter().map(|t| (t.name.as_str(), t.id)).collect();

    let mut inverse: Vec<Vec<SlotId>> = vec![Vec::new(); raw.users.len()];
    for (s, seen) in visibility.iter().enumerate() {
        for u in seen {
            inverse[u.index()].push(SlotId(s as u32));
        }
    }

    let unknown = |kind: &'static str, name: &str| Error::UnknownName {
        kind,
        name: name.to_string(),
    };
    // later rows for the same (user, billboard, tag) replace earlier ones
    let mut chosen: HashMap<(UserId, SlotId, TagId), f64> = HashMap::new();
    for row in rows {
        let user = *users.get(row.user.as_str()).ok_or_else(|| unknown("user", &row.user))?;
        let b = *billboards
            .get(row.billboard.as_str())
            .ok_or_else(|| unknown("billboard", &row.billboard))?;
        let tag = *tags.get(row.tag.as_str()).ok_or_else(|| unknown("tag", &row.tag))?;
        if !(0.0..=1.0).contains(&row.prob) {
            return Err(Error::InvalidParameter(format!(
                "probability {} outside [0, 1]",
                row.prob
            )));
        }
        let mut hit = false;
        for &s in &inverse[user.index()] {
            if slots[s.index()].billboard.index() == b {
                chosen.insert((user, s, tag), row.prob);
                hit = true;
            }
        }
        if !hit {
            return Err(Error::InvalidParameter(format!(
                "user `{}` never sees billboard `{}`",
                row.user, row.billboard
            )));
        }
    }
    let mut entries: Vec<ProbEntry> = chosen
        .into_iter()
        .filter(|&(_, p)| p != 0.0)
        .map(|((user, slot, tag), prob)| ProbEntry { user, slot, tag, prob })
        .collect();
    entries.sort_by_key(|e| (e.slot, e.user, e.tag));
    out.extend(entries);
    Ok(())
}

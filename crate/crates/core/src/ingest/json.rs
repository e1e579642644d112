//! Single-document JSON form of an [`InfluenceInstance`].
//!
//! Top-level fields are `meta`, `slots`, `tags`, `users`, `visibility` and
//! `probs`. Probabilities are sparse `[user, slot, tag, prob]` rows; pairs that
//! appear in `visibility` but not in `probs` have probability 0 for that tag.
//! The virtual defaults ride along inside the existing objects: `meta.default_pair`,
//! `slots[].base` and `tags[].default_slot_prob`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{
    BillboardId, InfluenceInstance, InstanceMeta, InstanceParts, ProbEntry, Slot, SlotId, TagId,
    TagRecord, TimeInterval, UserId, VirtualDefaults,
};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct MetaDoc {
    t1: u64,
    t2: u64,
    delta: u64,
    lambda_m: f64,
    default_pair: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SlotDoc {
    id: u32,
    billboard: u32,
    billboard_name: String,
    start: u64,
    end: u64,
    base: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TagDoc {
    id: u32,
    name: String,
    cost: f64,
    weight: f64,
    default_slot_prob: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    meta: MetaDoc,
    slots: Vec<SlotDoc>,
    tags: Vec<TagDoc>,
    users: Vec<String>,
    visibility: BTreeMap<u32, Vec<u32>>,
    probs: Vec<(u32, u32, u32, f64)>,
}

fn to_doc(instance: &InfluenceInstance) -> InstanceDoc {
    let parts = instance.to_parts();
    let d = &parts.defaults;
    InstanceDoc {
        meta: MetaDoc {
            t1: parts.meta.t1,
            t2: parts.meta.t2,
            delta: parts.meta.delta,
            lambda_m: parts.meta.lambda_m,
            default_pair: d.default_pair,
        },
        slots: parts
            .slots
            .iter()
            .map(|s| SlotDoc {
                id: s.id.0,
                billboard: s.billboard.0,
                billboard_name: parts.billboard_names[s.billboard.index()].clone(),
                start: s.window.start,
                end: s.window.end,
                base: d.default_tag_by_slot[s.id.index()],
            })
            .collect(),
        tags: parts
            .tags
            .iter()
            .map(|t| TagDoc {
                id: t.id.0,
                name: t.name.clone(),
                cost: t.cost,
                weight: t.weight,
                default_slot_prob: d.default_slot_by_tag[t.id.index()],
            })
            .collect(),
        users: parts.users,
        visibility: parts
            .visibility
            .iter()
            .enumerate()
            .map(|(s, users)| (s as u32, users.iter().map(|u| u.0).collect()))
            .collect(),
        probs: parts
            .probs
            .iter()
            .map(|e| (e.user.0, e.slot.0, e.tag.0, e.prob))
            .collect(),
    }
}

fn from_doc(doc: InstanceDoc) -> Result<InfluenceInstance> {
    let n_slots = doc.slots.len();
    let mut billboard_names: Vec<Option<String>> = Vec::new();
    for s in &doc.slots {
        let b = s.billboard as usize;
        if billboard_names.len() <= b {
            billboard_names.resize(b + 1, None);
        }
        match &billboard_names[b] {
            Some(name) if *name != s.billboard_name => {
                return Err(Error::InvalidInstance(format!(
                    "billboard {b} has two names: `{name}` and `{}`",
                    s.billboard_name
                )))
            }
            _ => billboard_names[b] = Some(s.billboard_name.clone()),
        }
    }
    let mut visibility = vec![Vec::new(); n_slots];
    for (s, users) in doc.visibility {
        let slot = visibility
            .get_mut(s as usize)
            .ok_or(Error::UnknownSlot(s))?;
        *slot = users.into_iter().map(UserId).collect();
    }
    let parts = InstanceParts {
        meta: InstanceMeta {
            t1: doc.meta.t1,
            t2: doc.meta.t2,
            delta: doc.meta.delta,
            lambda_m: doc.meta.lambda_m,
        },
        slots: doc
            .slots
            .iter()
            .map(|s| Slot {
                id: SlotId(s.id),
                billboard: BillboardId(s.billboard),
                window: TimeInterval {
                    start: s.start,
                    end: s.end,
                },
            })
            .collect(),
        billboard_names: billboard_names
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.unwrap_or_else(|| format!("#{i}")))
            .collect(),
        tags: doc
            .tags
            .iter()
            .map(|t| TagRecord {
                id: TagId(t.id),
                name: t.name.clone(),
                cost: t.cost,
                weight: t.weight,
            })
            .collect(),
        users: doc.users,
        visibility,
        probs: doc
            .probs
            .into_iter()
            .map(|(u, s, c, p)| ProbEntry {
                user: UserId(u),
                slot: SlotId(s),
                tag: TagId(c),
                prob: p,
            })
            .collect(),
        defaults: VirtualDefaults {
            default_tag_by_slot: doc.slots.iter().map(|s| s.base).collect(),
            default_slot_by_tag: doc.tags.iter().map(|t| t.default_slot_prob).collect(),
            default_pair: doc.meta.default_pair,
        },
    };
    InfluenceInstance::from_parts(parts)
}

pub fn instance_to_json(instance: &InfluenceInstance) -> Result<String> {
    Ok(serde_json::to_string(&to_doc(instance))?)
}

pub fn instance_from_json(text: &str) -> Result<InfluenceInstance> {
    from_doc(serde_json::from_str(text)?)
}

pub fn save_instance(instance: &InfluenceInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, instance_to_json(instance)?)?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<InfluenceInstance> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

/// Hex SHA-256 of the instance's JSON serialization.
pub fn instance_digest(instance: &InfluenceInstance) -> Result<String> {
    Ok(digest_bytes(instance_to_json(instance)?.as_bytes()))
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

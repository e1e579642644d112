//! Problem-instance types shared by every other module.
//!
//! Users, slots, tags and billboards are addressed by dense integer ids assigned at
//! load time; the original string identifiers live in side tables on the instance.
//!
//! Tag-dependent probabilities are stored per visible (slot, user) pair in a
//! compressed slot-major layout: `pair_start[s]..pair_start[s + 1]` indexes the
//! users that can see slot `s`, and each pair owns a contiguous row of one
//! probability per tag. A lookup for a pair that is not visible returns 0.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius used by every distance computation, in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

dense_id!(UserId);
dense_id!(BillboardId);
dense_id!(
    /// Ground-set element of the slot orthant.
    SlotId
);
dense_id!(
    /// Ground-set element of the tag orthant.
    TagId
);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        let p = GeoPoint { lat, lon };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(Error::InvalidParameter(format!(
                "coordinates ({lat}, {lon}) out of range"
            )))
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }

    /// Great-circle distance in meters.
    pub fn haversine_m(&self, other: &GeoPoint) -> f64 {
        let (lat1, lat2) = (self.lat.to_radians(), other.lat.to_radians());
        let dlat = lat2 - lat1;
        let dlon = (other.lon - self.lon).to_radians();
        let a = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
    }
}

/// Closed interval of integer time units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeInterval {
    pub start: u64,
    pub end: u64,
}

impl TimeInterval {
    pub fn new(start: u64, end: u64) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidParameter(format!(
                "interval start {start} is after end {end}"
            )));
        }
        Ok(TimeInterval { start, end })
    }

    /// Number of time units covered.
    pub fn units(&self) -> u64 {
        self.end - self.start + 1
    }

    /// True when the two closed intervals share at least one time unit.
    pub fn overlaps(&self, other: &TimeInterval) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn contains_interval(&self, other: &TimeInterval) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// A set of people observed at one location during one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTuple {
    pub users: Vec<UserId>,
    pub loc: GeoPoint,
    pub interval: TimeInterval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Billboard {
    pub id: BillboardId,
    pub name: String,
    pub loc: GeoPoint,
    pub panel_size: f64,
    pub cost: f64,
}

/// A billboard rented for one window of the horizon. The window is a closed
/// interval of exactly `delta` time units: `[start, start + delta - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub id: SlotId,
    pub billboard: BillboardId,
    pub window: TimeInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagRecord {
    pub id: TagId,
    pub name: String,
    pub cost: f64,
    /// Relative strength of the tag; scales the base probability in the panel-size model.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub t1: u64,
    pub t2: u64,
    pub delta: u64,
    pub lambda_m: f64,
}

impl InstanceMeta {
    pub fn horizon(&self) -> TimeInterval {
        TimeInterval {
            start: self.t1,
            end: self.t2,
        }
    }
}

/// Probability tables for the virtual default slot `s'` and default tag `h'`.
///
/// `h'` behaves like the tag-free model: it influences every user who sees slot `s`
/// with that slot's base probability. `s'` is visible to every user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualDefaults {
    /// `Pr(u, s | h')` for users visible to slot `s`, indexed by slot.
    pub default_tag_by_slot: Vec<f64>,
    /// `Pr(u, s' | c)` for every user, indexed by tag.
    pub default_slot_by_tag: Vec<f64>,
    /// `Pr(u, s' | h')`.
    pub default_pair: f64,
}

/// Which virtual defaults participate in an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Virtuals {
    pub default_slot: bool,
    pub default_tag: bool,
}

impl Virtuals {
    pub const NONE: Virtuals = Virtuals {
        default_slot: false,
        default_tag: false,
    };
    pub const BOTH: Virtuals = Virtuals {
        default_slot: true,
        default_tag: true,
    };
    pub const TAG: Virtuals = Virtuals {
        default_slot: false,
        default_tag: true,
    };
    pub const SLOT: Virtuals = Virtuals {
        default_slot: true,
        default_tag: false,
    };
}

/// One sparse probability entry `Pr(user, slot | tag)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbEntry {
    pub user: UserId,
    pub slot: SlotId,
    pub tag: TagId,
    pub prob: f64,
}

/// Plain, unvalidated description of an instance. Converted into the indexed
/// [`InfluenceInstance`] with [`InfluenceInstance::from_parts`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParts {
    pub meta: InstanceMeta,
    pub slots: Vec<Slot>,
    pub billboard_names: Vec<String>,
    pub tags: Vec<TagRecord>,
    pub users: Vec<String>,
    /// Users that can see each slot, indexed by slot.
    pub visibility: Vec<Vec<UserId>>,
    pub probs: Vec<ProbEntry>,
    pub defaults: VirtualDefaults,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceInstance {
    meta: InstanceMeta,
    slots: Vec<Slot>,
    billboard_names: Vec<String>,
    tags: Vec<TagRecord>,
    users: Vec<String>,
    visibility: Vec<Vec<UserId>>,
    inverse: Vec<Vec<SlotId>>,
    pair_start: Vec<usize>,
    pair_user: Vec<UserId>,
    pair_probs: Vec<f64>,
    /// Entries naming a (user, slot) pair outside the visibility index. They never
    /// contribute to influence; kept so validation can report them.
    stray: Vec<ProbEntry>,
    defaults: VirtualDefaults,
}

impl InfluenceInstance {
    /// Indexes `parts`. Ids that do not exist are an error; semantic problems
    /// (ranges, consistency) are left for [`validate_instance`].
    pub fn from_parts(parts: InstanceParts) -> Result<Self> {
        let InstanceParts {
            meta,
            slots,
            billboard_names,
            tags,
            users,
            mut visibility,
            probs,
            defaults,
        } = parts;
        let n_slots = slots.len();
        let n_tags = tags.len();
        let n_users = users.len();

        if visibility.len() != n_slots {
            return Err(Error::InvalidInstance(format!(
                "visibility has {} entries for {} slots",
                visibility.len(),
                n_slots
            )));
        }
        if defaults.default_tag_by_slot.len() != n_slots
            || defaults.default_slot_by_tag.len() != n_tags
        {
            return Err(Error::InvalidInstance(
                "default probability tables do not match slot/tag counts".into(),
            ));
        }
        for slot in &slots {
            if slot.billboard.index() >= billboard_names.len() {
                return Err(Error::InvalidInstance(format!(
                    "slot {} references unknown billboard {}",
                    slot.id, slot.billboard
                )));
            }
        }

        let mut inverse = vec![Vec::new(); n_users];
        let mut pair_start = Vec::with_capacity(n_slots + 1);
        let mut pair_user = Vec::new();
        pair_start.push(0);
        for (s, seen) in visibility.iter_mut().enumerate() {
            seen.sort_unstable();
            seen.dedup();
            for &u in seen.iter() {
                if u.index() >= n_users {
                    return Err(Error::UnknownUser(u.0));
                }
                inverse[u.index()].push(SlotId(s as u32));
                pair_user.push(u);
            }
            pair_start.push(pair_user.len());
        }

        let mut instance = InfluenceInstance {
            meta,
            slots,
            billboard_names,
            tags,
            users,
            visibility,
            inverse,
            pair_start,
            pair_probs: vec![0.0; pair_user.len() * n_tags],
            pair_user,
            stray: Vec::new(),
            defaults,
        };

        for entry in probs {
            if entry.slot.index() >= n_slots {
                return Err(Error::UnknownSlot(entry.slot.0));
            }
            if entry.tag.index() >= n_tags {
                return Err(Error::UnknownTag(entry.tag.0));
            }
            if entry.user.index() >= n_users {
                return Err(Error::UnknownUser(entry.user.0));
            }
            match instance.pair_index(entry.slot, entry.user) {
                Some(p) => instance.pair_probs[p * n_tags + entry.tag.index()] = entry.prob,
                None => instance.stray.push(entry),
            }
        }
        Ok(instance)
    }

    pub fn to_parts(&self) -> InstanceParts {
        InstanceParts {
            meta: self.meta,
            slots: self.slots.clone(),
            billboard_names: self.billboard_names.clone(),
            tags: self.tags.clone(),
            users: self.users.clone(),
            visibility: self.visibility.clone(),
            probs: self.prob_entries(),
            defaults: self.defaults.clone(),
        }
    }

    /// Every non-zero probability entry, ordered by (slot, user, tag).
    pub fn prob_entries(&self) -> Vec<ProbEntry> {
        let mut out = Vec::new();
        for s in 0..self.slots.len() {
            let slot = SlotId(s as u32);
            for p in self.slot_pairs(slot) {
                for (c, &prob) in self.pair_row(p).iter().enumerate() {
                    if prob != 0.0 {
                        out.push(ProbEntry {
                            user: self.pair_user[p],
                            slot,
                            tag: TagId(c as u32),
                            prob,
                        });
                    }
                }
            }
        }
        out.extend(self.stray.iter().copied());
        out
    }

    pub fn meta(&self) -> &InstanceMeta {
        &self.meta
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn tags(&self) -> &[TagRecord] {
        &self.tags
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn billboard_names(&self) -> &[String] {
        &self.billboard_names
    }

    pub fn defaults(&self) -> &VirtualDefaults {
        &self.defaults
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn n_tags(&self) -> usize {
        self.tags.len()
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn slot_ids(&self) -> impl Iterator<Item = SlotId> + '_ {
        (0..self.slots.len() as u32).map(SlotId)
    }

    pub fn tag_ids(&self) -> impl Iterator<Item = TagId> + '_ {
        (0..self.tags.len() as u32).map(TagId)
    }

    /// Users that can see `slot`, sorted by id.
    pub fn visibility(&self, slot: SlotId) -> &[UserId] {
        &self.visibility[slot.index()]
    }

    /// Slots visible to `user`, sorted by id.
    pub fn inverse_visibility(&self, user: UserId) -> &[SlotId] {
        &self.inverse[user.index()]
    }

    pub fn has_slot(&self, slot: SlotId) -> bool {
        slot.index() < self.slots.len()
    }

    pub fn has_tag(&self, tag: TagId) -> bool {
        tag.index() < self.tags.len()
    }

    pub fn has_user(&self, user: UserId) -> bool {
        user.index() < self.users.len()
    }

    /// Range of pair indices belonging to `slot`.
    #[inline]
    pub fn slot_pairs(&self, slot: SlotId) -> Range<usize> {
        self.pair_start[slot.index()]..self.pair_start[slot.index() + 1]
    }

    #[inline]
    pub fn pair_user(&self, pair: usize) -> UserId {
        self.pair_user[pair]
    }

    /// Per-tag probabilities of one visible (slot, user) pair.
    #[inline]
    pub fn pair_row(&self, pair: usize) -> &[f64] {
        let t = self.tags.len();
        &self.pair_probs[pair * t..(pair + 1) * t]
    }

    pub fn n_pairs(&self) -> usize {
        self.pair_user.len()
    }

    pub fn pair_index(&self, slot: SlotId, user: UserId) -> Option<usize> {
        let range = self.slot_pairs(slot);
        let start = range.start;
        self.pair_user[range]
            .binary_search(&user)
            .ok()
            .map(|i| start + i)
    }

    /// `Pr(user, slot | tag)`; zero for pairs outside the visibility index.
    pub fn prob(&self, user: UserId, slot: SlotId, tag: TagId) -> f64 {
        match self.pair_index(slot, user) {
            Some(p) => self.pair_probs[p * self.tags.len() + tag.index()],
            None => 0.0,
        }
    }

    /// `Pr(user, slot | h')`; zero for pairs outside the visibility index.
    pub fn default_tag_prob(&self, user: UserId, slot: SlotId) -> f64 {
        match self.pair_index(slot, user) {
            Some(_) => self.defaults.default_tag_by_slot[slot.index()],
            None => 0.0,
        }
    }
}

/// An ordered choice of slots and tags. Order records the pick sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub slots: Vec<SlotId>,
    pub tags: Vec<TagId>,
}

impl Selection {
    pub fn new(slots: Vec<SlotId>, tags: Vec<TagId>) -> Self {
        Selection { slots, tags }
    }

    /// Checks ids exist and appear at most once.
    pub fn check(&self, instance: &InfluenceInstance) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &s in &self.slots {
            if !instance.has_slot(s) {
                return Err(Error::UnknownSlot(s.0));
            }
            if !seen.insert(s) {
                return Err(Error::DuplicateSlot(s.0));
            }
        }
        let mut seen = BTreeSet::new();
        for &c in &self.tags {
            if !instance.has_tag(c) {
                return Err(Error::UnknownTag(c.0));
            }
            if !seen.insert(c) {
                return Err(Error::DuplicateTag(c.0));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BadMeta(String),
    SlotIdOutOfOrder { position: usize, id: SlotId },
    SlotWindow { slot: SlotId, reason: String },
    TagIdOutOfOrder { position: usize, id: TagId },
    TagField { tag: TagId, reason: String },
    ProbabilityRange { user: UserId, slot: SlotId, tag: TagId, prob: f64 },
    InvisiblePair { user: UserId, slot: SlotId, tag: TagId, prob: f64 },
    InverseMismatch { user: UserId, slot: SlotId },
    DefaultRange { what: String, prob: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadMeta(m) => write!(f, "meta: {m}"),
            Violation::SlotIdOutOfOrder { position, id } => {
                write!(f, "slot at position {position} has id {id}")
            }
            Violation::SlotWindow { slot, reason } => write!(f, "slot {slot}: {reason}"),
            Violation::TagIdOutOfOrder { position, id } => {
                write!(f, "tag at position {position} has id {id}")
            }
            Violation::TagField { tag, reason } => write!(f, "tag {tag}: {reason}"),
            Violation::ProbabilityRange {
                user,
                slot,
                tag,
                prob,
            } => write!(
                f,
                "probability ({user}, {slot}, {tag}) = {prob} outside [0, 1]"
            ),
            Violation::InvisiblePair {
                user,
                slot,
                tag,
                prob,
            } => write!(
                f,
                "probability ({user}, {slot}, {tag}) = {prob} but user {user} cannot see slot {slot}"
            ),
            Violation::InverseMismatch { user, slot } => write!(
                f,
                "visibility of slot {slot} and inverse visibility of user {user} disagree"
            ),
            Violation::DefaultRange { what, prob } => {
                write!(f, "default probability {what} = {prob} outside [0, 1]")
            }
        }
    }
}

fn in_unit(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

/// Lists every invariant violation in `instance`. Empty means valid.
pub fn validate_instance(instance: &InfluenceInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let meta = instance.meta;
    if meta.delta == 0 {
        out.push(Violation::BadMeta("slot duration is zero".into()));
    }
    if meta.t1 > meta.t2 {
        out.push(Violation::BadMeta(format!(
            "horizon start {} after end {}",
            meta.t1, meta.t2
        )));
    }
    if !(meta.lambda_m.is_finite() && meta.lambda_m > 0.0) {
        out.push(Violation::BadMeta(format!(
            "visibility radius {} is not positive",
            meta.lambda_m
        )));
    }

    let horizon = meta.horizon();
    for (i, slot) in instance.slots.iter().enumerate() {
        if slot.id.index() != i {
            out.push(Violation::SlotIdOutOfOrder {
                position: i,
                id: slot.id,
            });
        }
        let w = slot.window;
        if w.start > w.end {
            out.push(Violation::SlotWindow {
                slot: slot.id,
                reason: format!("window [{}, {}] is reversed", w.start, w.end),
            });
        } else if w.units() != meta.delta {
            out.push(Violation::SlotWindow {
                slot: slot.id,
                reason: format!("window covers {} units, expected {}", w.units(), meta.delta),
            });
        }
        if !horizon.contains_interval(&w) {
            out.push(Violation::SlotWindow {
                slot: slot.id,
                reason: format!("window [{}, {}] leaves the horizon", w.start, w.end),
            });
        }
    }

    for (i, tag) in instance.tags.iter().enumerate() {
        if tag.id.index() != i {
            out.push(Violation::TagIdOutOfOrder {
                position: i,
                id: tag.id,
            });
        }
        if !(tag.cost.is_finite() && tag.cost >= 0.0) {
            out.push(Violation::TagField {
                tag: tag.id,
                reason: format!("cost {} is negative", tag.cost),
            });
        }
        if !(tag.weight.is_finite() && tag.weight >= 0.0) {
            out.push(Violation::TagField {
                tag: tag.id,
                reason: format!("weight {} is negative", tag.weight),
            });
        }
    }

    for s in instance.slot_ids() {
        for p in instance.slot_pairs(s) {
            let user = instance.pair_user[p];
            for (c, &prob) in instance.pair_row(p).iter().enumerate() {
                if !in_unit(prob) {
                    out.push(Violation::ProbabilityRange {
                        user,
                        slot: s,
                        tag: TagId(c as u32),
                        prob,
                    });
                }
            }
        }
    }
    for e in &instance.stray {
        if !in_unit(e.prob) {
            out.push(Violation::ProbabilityRange {
                user: e.user,
                slot: e.slot,
                tag: e.tag,
                prob: e.prob,
            });
        }
        if e.prob != 0.0 {
            out.push(Violation::InvisiblePair {
                user: e.user,
                slot: e.slot,
                tag: e.tag,
                prob: e.prob,
            });
        }
    }

    for (s, seen) in instance.visibility.iter().enumerate() {
        let slot = SlotId(s as u32);
        for &u in seen {
            if instance.inverse[u.index()].binary_search(&slot).is_err() {
                out.push(Violation::InverseMismatch { user: u, slot });
            }
        }
    }
    for (u, slots) in instance.inverse.iter().enumerate() {
        let user = UserId(u as u32);
        for &s in slots {
            if instance.visibility[s.index()].binary_search(&user).is_err() {
                out.push(Violation::InverseMismatch { user, slot: s });
            }
        }
    }

    let d = &instance.defaults;
    for (s, &p) in d.default_tag_by_slot.iter().enumerate() {
        if !in_unit(p) {
            out.push(Violation::DefaultRange {
                what: format!("Pr(u, slot {s} | h')"),
                prob: p,
            });
        }
    }
    for (c, &p) in d.default_slot_by_tag.iter().enumerate() {
        if !in_unit(p) {
            out.push(Violation::DefaultRange {
                what: format!("Pr(u, s' | tag {c})"),
                prob: p,
            });
        }
    }
    if !in_unit(d.default_pair) {
        out.push(Violation::DefaultRange {
            what: "Pr(u, s' | h')".into(),
            prob: d.default_pair,
        });
    }
    out
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// 2 slots on 2 billboards, 2 tags, 3 users.
    ///
    /// slot 0 is seen by users 0 and 1, slot 1 by users 1 and 2.
    pub fn small_parts() -> InstanceParts {
        let probs = [
            (0, 0, 0, 0.5),
            (0, 0, 1, 0.2),
            (1, 0, 0, 0.4),
            (1, 0, 1, 0.1),
            (1, 1, 0, 0.3),
            (1, 1, 1, 0.6),
            (2, 1, 0, 0.25),
            (2, 1, 1, 0.5),
        ]
        .into_iter()
        .map(|(u, s, c, p)| ProbEntry {
            user: UserId(u),
            slot: SlotId(s),
            tag: TagId(c),
            prob: p,
        })
        .collect();
        InstanceParts {
            meta: InstanceMeta {
                t1: 0,
                t2: 9,
                delta: 10,
                lambda_m: 100.0,
            },
            slots: vec![
                Slot {
                    id: SlotId(0),
                    billboard: BillboardId(0),
                    window: TimeInterval { start: 0, end: 9 },
                },
                Slot {
                    id: SlotId(1),
                    billboard: BillboardId(1),
                    window: TimeInterval { start: 0, end: 9 },
                },
            ],
            billboard_names: vec!["B0".into(), "B1".into()],
            tags: vec![
                TagRecord {
                    id: TagId(0),
                    name: "t0".into(),
                    cost: 1.0,
                    weight: 1.0,
                },
                TagRecord {
                    id: TagId(1),
                    name: "t1".into(),
                    cost: 2.0,
                    weight: 1.0,
                },
            ],
            users: vec!["a".into(), "b".into(), "c".into()],
            visibility: vec![vec![UserId(0), UserId(1)], vec![UserId(1), UserId(2)]],
            probs,
            defaults: VirtualDefaults {
                default_tag_by_slot: vec![1.0, 0.5],
                default_slot_by_tag: vec![0.3, 0.2],
                default_pair: 0.75,
            },
        }
    }

    pub fn small_instance() -> InfluenceInstance {
        InfluenceInstance::from_parts(small_parts()).unwrap()
    }
}

//! Ranking and random heuristics used as comparison points for the greedy family.
//!
//! Random draws are uniform without replacement. Slots and tags come from two
//! separate ChaCha8 streams of the same seed, and each draw is a partial
//! Fisher-Yates shuffle, so the first `k` picks for a seed are a prefix of the
//! first `k + 1`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{InfluenceInstance, Selection, SlotId, TagId, Virtuals};
use crate::error::{Error, Result};
use crate::exec;
use crate::influence::{aggregated_influence, aggregated_influence_with};
use crate::solvers::{check_budgets, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaselineKind {
    /// Random slots, random tags.
    Rsrt,
    /// Random slots, most frequent tags.
    Rshft,
    /// Highest-coverage slots, random tags.
    Maxsrt,
    /// Top slots and top tags by singleton influence.
    Tstt,
    /// Top slots by singleton influence, random tags.
    Tsrt,
    /// Random slots, top tags by singleton influence.
    Rstt,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 6] = [
        BaselineKind::Rsrt,
        BaselineKind::Rshft,
        BaselineKind::Maxsrt,
        BaselineKind::Tstt,
        BaselineKind::Tsrt,
        BaselineKind::Rstt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Rsrt => "RSRT",
            BaselineKind::Rshft => "RSHFT",
            BaselineKind::Maxsrt => "MAXSRT",
            BaselineKind::Tstt => "TSTT",
            BaselineKind::Tsrt => "TSRT",
            BaselineKind::Rstt => "RSTT",
        }
    }

    /// Whether the result depends on the seed.
    pub fn is_randomized(self) -> bool {
        self != BaselineKind::Tstt
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown baseline `{s}`")))
    }
}

/// Number of distinct users who can see `slot`.
pub fn slot_coverage(instance: &InfluenceInstance, slot: SlotId) -> Result<usize> {
    if !instance.has_slot(slot) {
        return Err(Error::UnknownSlot(slot.0));
    }
    Ok(instance.visibility(slot).len())
}

/// Number of distinct users with a positive probability for `tag` at some slot.
pub fn tag_frequency(instance: &InfluenceInstance, tag: TagId) -> Result<usize> {
    if !instance.has_tag(tag) {
        return Err(Error::UnknownTag(tag.0));
    }
    let mut seen = vec![false; instance.n_users()];
    for p in 0..instance.n_pairs() {
        if instance.pair_row(p)[tag.index()] > 0.0 {
            seen[instance.pair_user(p).index()] = true;
        }
    }
    Ok(seen.into_iter().filter(|&x| x).count())
}

/// Ids sorted by descending score, lowest id first among equal scores.
fn rank_desc<T: Copy>(ids: Vec<T>, scores: &[f64], index: impl Fn(T) -> usize) -> Vec<T> {
    let mut ids = ids;
    ids.sort_by(|&a, &b| {
        scores[index(b)]
            .total_cmp(&scores[index(a)])
            .then(index(a).cmp(&index(b)))
    });
    ids
}

fn slot_singletons(instance: &InfluenceInstance) -> Vec<f64> {
    let ids: Vec<SlotId> = instance.slot_ids().collect();
    exec::map(&ids, |&s| {
        let sel = Selection::new(vec![s], Vec::new());
        aggregated_influence_with(instance, &sel, Virtuals::TAG).expect("slot id from the instance")
    })
}

fn tag_singletons(instance: &InfluenceInstance) -> Vec<f64> {
    let ids: Vec<TagId> = instance.tag_ids().collect();
    exec::map(&ids, |&c| {
        let sel = Selection::new(Vec::new(), vec![c]);
        aggregated_influence_with(instance, &sel, Virtuals::SLOT).expect("tag id from the instance")
    })
}

/// Slots ranked by `Φ({s}, {h'})` and tags ranked by `Φ({s'}, {c})`, both descending.
pub fn singleton_influence_rankings(instance: &InfluenceInstance) -> (Vec<SlotId>, Vec<TagId>) {
    let slots = rank_desc(instance.slot_ids().collect(), &slot_singletons(instance), SlotId::index);
    let tags = rank_desc(instance.tag_ids().collect(), &tag_singletons(instance), TagId::index);
    (slots, tags)
}

fn slots_by_coverage(instance: &InfluenceInstance) -> Vec<SlotId> {
    let cover: Vec<f64> = instance
        .slot_ids()
        .map(|s| instance.visibility(s).len() as f64)
        .collect();
    rank_desc(instance.slot_ids().collect(), &cover, SlotId::index)
}

fn tags_by_frequency(instance: &InfluenceInstance) -> Vec<TagId> {
    let freq: Vec<f64> = instance
        .tag_ids()
        .map(|c| tag_frequency(instance, c).expect("tag id from the instance") as f64)
        .collect();
    rank_desc(instance.tag_ids().collect(), &freq, TagId::index)
}

/// First `k` entries of a partial Fisher-Yates shuffle of `0..n`.
fn random_prefix(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut items: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        items.swap(i, j);
    }
    items.truncate(k);
    items
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn random_slots(instance: &InfluenceInstance, k: usize, seed: u64) -> Vec<SlotId> {
    random_prefix(&mut stream(seed, 1), instance.n_slots(), k)
        .into_iter()
        .map(|i| SlotId(i as u32))
        .collect()
}

fn random_tags(instance: &InfluenceInstance, l: usize, seed: u64) -> Vec<TagId> {
    random_prefix(&mut stream(seed, 2), instance.n_tags(), l)
        .into_iter()
        .map(|i| TagId(i as u32))
        .collect()
}

/// Runs one baseline. `eval_count` counts the singleton influence evaluations
/// spent on rankings; coverage and frequency counts are not influence evaluations.
pub fn run_baseline(
    instance: &InfluenceInstance,
    kind: BaselineKind,
    k: usize,
    l: usize,
    seed: u64,
) -> Result<SolveResult> {
    check_budgets(instance, k, l)?;
    let started = Instant::now();
    let top_slots = |k: usize| {
        let scores = slot_singletons(instance);
        let mut ranked = rank_desc(instance.slot_ids().collect(), &scores, SlotId::index);
        ranked.truncate(k);
        ranked
    };
    let top_tags = |l: usize| {
        let scores = tag_singletons(instance);
        let mut ranked = rank_desc(instance.tag_ids().collect(), &scores, TagId::index);
        ranked.truncate(l);
        ranked
    };
    let n_slots = instance.n_slots() as u64;
    let n_tags = instance.n_tags() as u64;

    let (slots, tags, evals) = match kind {
        BaselineKind::Rsrt => (random_slots(instance, k, seed), random_tags(instance, l, seed), 0),
        BaselineKind::Rshft => {
            let mut tags = tags_by_frequency(instance);
            tags.truncate(l);
            (random_slots(instance, k, seed), tags, 0)
        }
        BaselineKind::Maxsrt => {
            let mut slots = slots_by_coverage(instance);
            slots.truncate(k);
            (slots, random_tags(instance, l, seed), 0)
        }
        BaselineKind::Tstt => (top_slots(k), top_tags(l), n_slots + n_tags),
        BaselineKind::Tsrt => (top_slots(k), random_tags(instance, l, seed), n_slots),
        BaselineKind::Rstt => (random_slots(instance, k, seed), top_tags(l), n_tags),
    };

    let selection = Selection::new(slots, tags);
    Ok(SolveResult {
        value: aggregated_influence(instance, &selection)?,
        selection,
        eval_count: evals,
        wall_time_ms: started.elapsed().as_millis() as u64,
        pick_trace: Vec::new(),
        branch: None,
    })
}

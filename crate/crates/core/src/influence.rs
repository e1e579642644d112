//! Closed-form influence evaluation and incremental marginal gains.
//!
//! A selected tag is shown in every selected slot, so a user's probability of
//! staying uninfluenced is the product of `1 - Pr(u, s | c)` over every selected
//! slot `s` the user can see and every selected tag `c`. [`SurvivalState`] keeps
//! that product per user, which makes a marginal gain cost proportional to the
//! users the candidate touches instead of a full re-evaluation.

use crate::domain::{InfluenceInstance, Selection, SlotId, TagId, UserId, Virtuals};
use crate::error::{Error, Result};

/// Survival values below this are flushed to zero.
pub const SURVIVAL_FLOOR: f64 = 1e-300;

#[inline]
fn keep(p: f64) -> f64 {
    (1.0 - p).clamp(0.0, 1.0)
}

#[inline]
fn flush(x: f64) -> f64 {
    if x < SURVIVAL_FLOOR {
        0.0
    } else {
        x.min(1.0)
    }
}

/// `Pr(u, S | H)` for one user, walking that user's visible slots.
pub fn user_probability(
    instance: &InfluenceInstance,
    user: UserId,
    selection: &Selection,
) -> Result<f64> {
    user_probability_with(instance, user, selection, Virtuals::NONE)
}

pub fn user_probability_with(
    instance: &InfluenceInstance,
    user: UserId,
    selection: &Selection,
    virtuals: Virtuals,
) -> Result<f64> {
    if !instance.has_user(user) {
        return Err(Error::UnknownUser(user.0));
    }
    selection.check(instance)?;
    let d = instance.defaults();
    let mut survive = 1.0;
    for &s in &selection.slots {
        if let Some(p) = instance.pair_index(s, user) {
            let row = instance.pair_row(p);
            for &c in &selection.tags {
                survive *= keep(row[c.index()]);
            }
            if virtuals.default_tag {
                survive *= keep(d.default_tag_by_slot[s.index()]);
            }
        }
    }
    if virtuals.default_slot {
        for &c in &selection.tags {
            survive *= keep(d.default_slot_by_tag[c.index()]);
        }
        if virtuals.default_tag {
            survive *= keep(d.default_pair);
        }
    }
    Ok(1.0 - flush(survive))
}

/// `Φ(S, H)`: expected number of influenced users.
pub fn aggregated_influence(instance: &InfluenceInstance, selection: &Selection) -> Result<f64> {
    aggregated_influence_with(instance, selection, Virtuals::NONE)
}

/// `Φ` with the virtual default slot and/or default tag added to the selection.
pub fn aggregated_influence_with(
    instance: &InfluenceInstance,
    selection: &Selection,
    virtuals: Virtuals,
) -> Result<f64> {
    Ok(SurvivalState::with_virtuals(instance, selection, virtuals)?.value())
}

/// Tag-free influence of a slot set: every visible pair uses its base probability.
pub fn base_slot_influence(instance: &InfluenceInstance, slots: &[SlotId]) -> Result<f64> {
    let selection = Selection::new(slots.to_vec(), Vec::new());
    selection.check(instance)?;
    let d = instance.defaults();
    let mut survival = vec![1.0f64; instance.n_users()];
    for &s in slots {
        let q = keep(d.default_tag_by_slot[s.index()]);
        for p in instance.slot_pairs(s) {
            survival[instance.pair_user(p).index()] *= q;
        }
    }
    Ok(survival.iter().map(|&x| 1.0 - flush(x)).sum())
}

/// Per-user survival products for a selection, updated commit by commit.
#[derive(Debug, Clone)]
pub struct SurvivalState<'a> {
    instance: &'a InfluenceInstance,
    selection: Selection,
    virtuals: Virtuals,
    survival: Vec<f64>,
    value: f64,
    /// Pair indices of selected slots visible to each user.
    exposure: Vec<Vec<u32>>,
    /// Users with at least one entry in `exposure`, in first-exposure order.
    covered: Vec<UserId>,
    slot_taken: Vec<bool>,
    tag_taken: Vec<bool>,
}

impl<'a> SurvivalState<'a> {
    pub fn new(instance: &'a InfluenceInstance, initial: &Selection) -> Result<Self> {
        Self::with_virtuals(instance, initial, Virtuals::NONE)
    }

    /// State for `initial` with the given virtual defaults committed.
    pub fn with_virtuals(
        instance: &'a InfluenceInstance,
        initial: &Selection,
        virtuals: Virtuals,
    ) -> Result<Self> {
        initial.check(instance)?;
        let mut state = SurvivalState {
            instance,
            selection: Selection::default(),
            virtuals: Virtuals::NONE,
            survival: vec![1.0; instance.n_users()],
            value: 0.0,
            exposure: vec![Vec::new(); instance.n_users()],
            covered: Vec::new(),
            slot_taken: vec![false; instance.n_slots()],
            tag_taken: vec![false; instance.n_tags()],
        };
        if virtuals.default_tag {
            state.commit_default_tag();
        }
        if virtuals.default_slot {
            state.commit_default_slot();
        }
        for &s in &initial.slots {
            state.commit_slot_unchecked(s);
        }
        for &c in &initial.tags {
            state.commit_tag_unchecked(c);
        }
        state.value = state.recomputed_value();
        Ok(state)
    }

    pub fn instance(&self) -> &'a InfluenceInstance {
        self.instance
    }

    pub fn selection(&self) -> &Selection {
        &self.selection
    }

    pub fn virtuals(&self) -> Virtuals {
        self.virtuals
    }

    /// Cached `Φ` of the committed selection, virtual defaults included.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    pub fn is_slot_selected(&self, slot: SlotId) -> bool {
        self.slot_taken.get(slot.index()).copied().unwrap_or(false)
    }

    pub fn is_tag_selected(&self, tag: TagId) -> bool {
        self.tag_taken.get(tag.index()).copied().unwrap_or(false)
    }

    /// `Σ_u (1 - survival[u])`, summed afresh.
    pub fn recomputed_value(&self) -> f64 {
        self.survival.iter().map(|&x| 1.0 - x).sum()
    }

    /// Survival multiplier slot `s` applies to the user of pair `p` under the current tags.
    #[inline]
    fn slot_factor(&self, s: SlotId, p: usize) -> f64 {
        let row = self.instance.pair_row(p);
        let mut q = 1.0;
        for &c in &self.selection.tags {
            q *= keep(row[c.index()]);
        }
        if self.virtuals.default_tag {
            q *= keep(self.instance.defaults().default_tag_by_slot[s.index()]);
        }
        q
    }

    /// Survival multiplier tag `c` applies to `user` under the current slots.
    #[inline]
    fn tag_factor(&self, c: TagId, user: UserId, base: f64) -> f64 {
        let mut q = base;
        for &p in &self.exposure[user.index()] {
            q *= keep(self.instance.pair_row(p as usize)[c.index()]);
        }
        q
    }

    fn check_slot(&self, slot: SlotId) -> Result<()> {
        if !self.instance.has_slot(slot) {
            return Err(Error::UnknownSlot(slot.0));
        }
        if self.slot_taken[slot.index()] {
            return Err(Error::DuplicateSlot(slot.0));
        }
        Ok(())
    }

    fn check_tag(&self, tag: TagId) -> Result<()> {
        if !self.instance.has_tag(tag) {
            return Err(Error::UnknownTag(tag.0));
        }
        if self.tag_taken[tag.index()] {
            return Err(Error::DuplicateTag(tag.0));
        }
        Ok(())
    }

    /// `Φ(S ∪ {s}, H) - Φ(S, H)`. Does not modify the state.
    pub fn marginal_gain_slot(&self, slot: SlotId) -> Result<f64> {
        self.check_slot(slot)?;
        Ok(self.slot_gain_unchecked(slot))
    }

    /// `Φ(S, H ∪ {c}) - Φ(S, H)`. Does not modify the state.
    pub fn marginal_gain_tag(&self, tag: TagId) -> Result<f64> {
        self.check_tag(tag)?;
        Ok(self.tag_gain_unchecked(tag))
    }

    pub(crate) fn slot_gain_unchecked(&self, slot: SlotId) -> f64 {
        let mut gain = 0.0;
        for p in self.instance.slot_pairs(slot) {
            let u = self.instance.pair_user(p).index();
            gain += self.survival[u] * (1.0 - self.slot_factor(slot, p));
        }
        gain
    }

    pub(crate) fn tag_gain_unchecked(&self, tag: TagId) -> f64 {
        let mut gain = 0.0;
        if self.virtuals.default_slot {
            let base = keep(self.instance.defaults().default_slot_by_tag[tag.index()]);
            for (u, &surv) in self.survival.iter().enumerate() {
                gain += surv * (1.0 - self.tag_factor(tag, UserId(u as u32), base));
            }
        } else {
            for &u in &self.covered {
                gain += self.survival[u.index()] * (1.0 - self.tag_factor(tag, u, 1.0));
            }
        }
        gain
    }

    /// Adds `slot` and returns the realized gain.
    pub fn commit_slot(&mut self, slot: SlotId) -> Result<f64> {
        self.check_slot(slot)?;
        Ok(self.commit_slot_unchecked(slot))
    }

    /// Adds `tag` and returns the realized gain.
    pub fn commit_tag(&mut self, tag: TagId) -> Result<f64> {
        self.check_tag(tag)?;
        Ok(self.commit_tag_unchecked(tag))
    }

    pub(crate) fn commit_slot_unchecked(&mut self, slot: SlotId) -> f64 {
        let mut gain = 0.0;
        for p in self.instance.slot_pairs(slot) {
            let u = self.instance.pair_user(p).index();
            let q = self.slot_factor(slot, p);
            let before = self.survival[u];
            let after = flush(before * q);
            gain += before - after;
            self.survival[u] = after;
            if self.exposure[u].is_empty() {
                self.covered.push(UserId(u as u32));
            }
            self.exposure[u].push(p as u32);
        }
        self.slot_taken[slot.index()] = true;
        self.selection.slots.push(slot);
        self.value += gain;
        gain
    }

    pub(crate) fn commit_tag_unchecked(&mut self, tag: TagId) -> f64 {
        let mut gain = 0.0;
        if self.virtuals.default_slot {
            let base = keep(self.instance.defaults().default_slot_by_tag[tag.index()]);
            for u in 0..self.survival.len() {
                let q = self.tag_factor(tag, UserId(u as u32), base);
                gain += self.apply(u, q);
            }
        } else {
            for i in 0..self.covered.len() {
                let u = self.covered[i];
                let q = self.tag_factor(tag, u, 1.0);
                gain += self.apply(u.index(), q);
            }
        }
        self.tag_taken[tag.index()] = true;
        self.selection.tags.push(tag);
        self.value += gain;
        gain
    }

    #[inline]
    fn apply(&mut self, u: usize, q: f64) -> f64 {
        let before = self.survival[u];
        let after = flush(before * q);
        self.survival[u] = after;
        before - after
    }

    fn commit_default_tag(&mut self) {
        let inst = self.instance;
        let d = inst.defaults();
        for i in 0..self.selection.slots.len() {
            let s = self.selection.slots[i];
            let q = keep(d.default_tag_by_slot[s.index()]);
            for p in inst.slot_pairs(s) {
                self.value += self.apply(inst.pair_user(p).index(), q);
            }
        }
        if self.virtuals.default_slot {
            let q = keep(d.default_pair);
            for u in 0..self.survival.len() {
                self.value += self.apply(u, q);
            }
        }
        self.virtuals.default_tag = true;
    }

    fn commit_default_slot(&mut self) {
        let inst = self.instance;
        let d = inst.defaults();
        let mut q: f64 = self
            .selection
            .tags
            .iter()
            .map(|c| keep(d.default_slot_by_tag[c.index()]))
            .product();
        if self.virtuals.default_tag {
            q *= keep(d.default_pair);
        }
        for u in 0..self.survival.len() {
            self.value += self.apply(u, q);
        }
        self.virtuals.default_slot = true;
    }
}

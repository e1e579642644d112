//! Exhaustive search and the orthant-wise greedy family.
//!
//! Every greedy variant runs two branches and keeps the better one:
//!
//! * slots first: with tags fixed to `{h'}` pick `k` slots, then with slots fixed to
//!   `S' ∪ {s'}` pick `ℓ` tags;
//! * tags first: with slots fixed to `{s'}` pick `ℓ` tags, then with tags fixed to
//!   `H'' ∪ {h'}` pick `k` slots.
//!
//! Both branches run on a [`SurvivalState`] that has the virtual defaults `s'` and
//! `h'` committed from the start. The branches are compared on `Φ` without the
//! defaults, and the slots-first branch wins ties.
//!
//! Gains inside one round are computed with [`exec::map`] and reduced in id order,
//! so the parallel schedule picks exactly what the sequential one picks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{InfluenceInstance, Selection, SlotId, TagId, Virtuals};
use crate::error::{Error, Result};
use crate::exec;
use crate::influence::{aggregated_influence, SurvivalState};

/// Default bound on the number of (slot set, tag set) pairs exhaustive search may visit.
pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 10_000_000;

/// Each marginal gain is worth two evaluations of the influence function.
pub const EVALS_PER_GAIN: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GreedyMode {
    /// Re-evaluate every remaining candidate each round.
    Incremental,
    /// Keep stale gains in a max-heap and refresh only the top.
    Lazy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Element {
    Slot(SlotId),
    Tag(TagId),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pick {
    pub element: Element,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    SlotsFirst,
    TagsFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub selection: Selection,
    /// `Φ(selection)` recomputed from scratch, without virtual defaults.
    pub value: f64,
    pub eval_count: u64,
    pub wall_time_ms: u64,
    pub pick_trace: Vec<Pick>,
    /// Which orthant order produced the selection; `None` for non-greedy solvers.
    pub branch: Option<Branch>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticParams {
    pub epsilon: f64,
    pub seed: u64,
    /// Slot ground-set size `a`; defaults to the number of slots.
    pub slot_ground: Option<usize>,
    /// Tag ground-set size `b`; defaults to the number of tags.
    pub tag_ground: Option<usize>,
}

impl StochasticParams {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        StochasticParams {
            epsilon,
            seed,
            slot_ground: None,
            tag_ground: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon {} must lie in (0, 1)",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Per-round sample size `(ground / budget) · ln(1/ε)`, rounded to the nearest
/// integer and never below 1.
pub fn sample_size(ground: usize, budget: usize, epsilon: f64) -> usize {
    let exact = ground as f64 / budget.max(1) as f64 * (1.0 / epsilon).ln();
    (exact.round() as usize).max(1)
}

/// Upper bound on the instrumented evaluation count of [`stochastic_greedy`]:
/// `4(a + b)·ln(1/ε) + 2(k + ℓ)`.
///
/// Holds whenever `ε ≤ e^{-1/2}`. For larger `ε` a round can need fewer than half
/// a candidate, the sample is floored at one, and the count can exceed the bound.
pub fn stochastic_eval_bound(a: usize, b: usize, k: usize, l: usize, epsilon: f64) -> f64 {
    4.0 * (a + b) as f64 * (1.0 / epsilon).ln() + 2.0 * (k + l) as f64
}

pub(crate) fn check_budgets(instance: &InfluenceInstance, k: usize, l: usize) -> Result<()> {
    if k == 0 || k > instance.n_slots() {
        return Err(Error::InfeasibleBudget {
            what: "slots",
            requested: k,
            available: instance.n_slots(),
        });
    }
    if l == 0 || l > instance.n_tags() {
        return Err(Error::InfeasibleBudget {
            what: "tags",
            requested: l,
            available: instance.n_tags(),
        });
    }
    Ok(())
}

/// One orthant of the bi-set function, seen from a greedy loop.
trait Orthant {
    type Id: Copy + Ord + Send + Sync;
    const WHAT: &'static str;
    const IS_SLOT: bool;

    fn exists(instance: &InfluenceInstance, id: Self::Id) -> bool;
    fn taken(state: &SurvivalState<'_>, id: Self::Id) -> bool;
    fn gain(state: &SurvivalState<'_>, id: Self::Id) -> f64;
    fn commit(state: &mut SurvivalState<'_>, id: Self::Id) -> f64;
    fn unknown(id: Self::Id) -> Error;
    fn duplicate(id: Self::Id) -> Error;
}

struct Slots;
struct Tags;

impl Orthant for Slots {
    type Id = SlotId;
    const WHAT: &'static str = "slots";
    const IS_SLOT: bool = true;

    fn exists(instance: &InfluenceInstance, id: SlotId) -> bool {
        instance.has_slot(id)
    }
    fn taken(state: &SurvivalState<'_>, id: SlotId) -> bool {
        state.is_slot_selected(id)
    }
    fn gain(state: &SurvivalState<'_>, id: SlotId) -> f64 {
        state.slot_gain_unchecked(id)
    }
    fn commit(state: &mut SurvivalState<'_>, id: SlotId) -> f64 {
        state.commit_slot_unchecked(id)
    }
    fn unknown(id: SlotId) -> Error {
        Error::UnknownSlot(id.0)
    }
    fn duplicate(id: SlotId) -> Error {
        Error::DuplicateSlot(id.0)
    }
}

impl Orthant for Tags {
    type Id = TagId;
    const WHAT: &'static str = "tags";
    const IS_SLOT: bool = false;

    fn exists(instance: &InfluenceInstance, id: TagId) -> bool {
        instance.has_tag(id)
    }
    fn taken(state: &SurvivalState<'_>, id: TagId) -> bool {
        state.is_tag_selected(id)
    }
    fn gain(state: &SurvivalState<'_>, id: TagId) -> f64 {
        state.tag_gain_unchecked(id)
    }
    fn commit(state: &mut SurvivalState<'_>, id: TagId) -> f64 {
        state.commit_tag_unchecked(id)
    }
    fn unknown(id: TagId) -> Error {
        Error::UnknownTag(id.0)
    }
    fn duplicate(id: TagId) -> Error {
        Error::DuplicateTag(id.0)
    }
}

/// Outcome of one greedy loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopOutcome<Id> {
    /// Committed elements with the gain each had when picked.
    pub picks: Vec<(Id, f64)>,
    /// Marginal-gain computations performed.
    pub gain_evaluations: u64,
}

/// How candidates are scored in each round.
enum Scheme {
    Full(GreedyMode),
    Sampled {
        seed: u64,
        slot_size: usize,
        tag_size: usize,
    },
}

/// Index of the largest gain; the earliest index wins ties.
fn argmax_first(gains: &[f64]) -> usize {
    let mut best = 0;
    for (i, &g) in gains.iter().enumerate().skip(1) {
        if g > gains[best] {
            best = i;
        }
    }
    best
}

fn prepare_pool<O: Orthant>(state: &SurvivalState<'_>, budget: usize, pool: &[O::Id]) -> Result<Vec<O::Id>> {
    let mut remaining = pool.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    for &id in &remaining {
        if !O::exists(state.instance(), id) {
            return Err(O::unknown(id));
        }
        if O::taken(state, id) {
            return Err(O::duplicate(id));
        }
    }
    if remaining.len() < budget {
        return Err(Error::InfeasibleBudget {
            what: O::WHAT,
            requested: budget,
            available: remaining.len(),
        });
    }
    Ok(remaining)
}

struct HeapEntry<Id> {
    bound: f64,
    id: Id,
    round: usize,
}

impl<Id: Ord> PartialEq for HeapEntry<Id> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<Id: Ord> Eq for HeapEntry<Id> {}

impl<Id: Ord> PartialOrd for HeapEntry<Id> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<Id: Ord> Ord for HeapEntry<Id> {
    // larger bound first, then smaller id
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn greedy_loop<O: Orthant>(
    state: &mut SurvivalState<'_>,
    budget: usize,
    pool: &[O::Id],
    scheme: &Scheme,
    stream: u64,
) -> Result<LoopOutcome<O::Id>> {
    let mut remaining = prepare_pool::<O>(state, budget, pool)?;
    let mut picks = Vec::with_capacity(budget);
    let mut evaluations = 0u64;

    match scheme {
        Scheme::Full(GreedyMode::Incremental) => {
            for _ in 0..budget {
                let snapshot = &*state;
                let gains = exec::map(&remaining, |&id| O::gain(snapshot, id));
                evaluations += gains.len() as u64;
                let best = argmax_first(&gains);
                let id = remaining.remove(best);
                O::commit(state, id);
                picks.push((id, gains[best]));
            }
        }
        Scheme::Full(GreedyMode::Lazy) => {
            let snapshot = &*state;
            let gains = exec::map(&remaining, |&id| O::gain(snapshot, id));
            evaluations += gains.len() as u64;
            let mut heap: BinaryHeap<HeapEntry<O::Id>> = remaining
                .iter()
                .zip(gains)
                .map(|(&id, bound)| HeapEntry { bound, id, round: 0 })
                .collect();
            for round in 0..budget {
                loop {
                    let top = heap.pop().expect("pool holds at least `budget` elements");
                    if top.round == round {
                        O::commit(state, top.id);
                        picks.push((top.id, top.bound));
                        break;
                    }
                    let bound = O::gain(state, top.id);
                    evaluations += 1;
                    heap.push(HeapEntry {
                        bound,
                        id: top.id,
                        round,
                    });
                }
            }
        }
        Scheme::Sampled {
            seed,
            slot_size,
            tag_size,
        } => {
            // every loop draws from its own stream, so changing one budget leaves
            // the samples of the other orthant untouched
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rng.set_stream(stream);
            let size = if O::IS_SLOT { *slot_size } else { *tag_size };
            for _ in 0..budget {
                let m = size.min(remaining.len());
                let mut idx = sample(&mut rng, remaining.len(), m).into_vec();
                idx.sort_unstable();
                let candidates: Vec<O::Id> = idx.iter().map(|&i| remaining[i]).collect();
                let snapshot = &*state;
                let gains = exec::map(&candidates, |&id| O::gain(snapshot, id));
                evaluations += gains.len() as u64;
                let best = argmax_first(&gains);
                let id = remaining.remove(idx[best]);
                O::commit(state, id);
                picks.push((id, gains[best]));
            }
        }
    }

    Ok(LoopOutcome {
        picks,
        gain_evaluations: evaluations,
    })
}

/// Greedily commits `k` slots from `pool`, holding the state's tags fixed.
pub fn greedy_select_slots(
    state: &mut SurvivalState<'_>,
    k: usize,
    pool: &[SlotId],
    mode: GreedyMode,
) -> Result<LoopOutcome<SlotId>> {
    greedy_loop::<Slots>(state, k, pool, &Scheme::Full(mode), 0)
}

/// Greedily commits `ℓ` tags from `pool`, holding the state's slots fixed.
pub fn greedy_select_tags(
    state: &mut SurvivalState<'_>,
    l: usize,
    pool: &[TagId],
    mode: GreedyMode,
) -> Result<LoopOutcome<TagId>> {
    greedy_loop::<Tags>(state, l, pool, &Scheme::Full(mode), 0)
}

struct BranchRun {
    selection: Selection,
    value: f64,
    trace: Vec<Pick>,
}

fn trace_of<Id: Copy>(out: &LoopOutcome<Id>, element: fn(Id) -> Element) -> impl Iterator<Item = Pick> + '_ {
    out.picks.iter().map(move |&(id, gain)| Pick {
        element: element(id),
        gain,
    })
}

fn branch_run(
    state: &SurvivalState<'_>,
    trace: impl Iterator<Item = Pick>,
) -> Result<BranchRun> {
    Ok(BranchRun {
        value: aggregated_influence(state.instance(), state.selection())?,
        selection: state.selection().clone(),
        trace: trace.collect(),
    })
}

fn two_branches(instance: &InfluenceInstance, k: usize, l: usize, scheme: &Scheme) -> Result<SolveResult> {
    check_budgets(instance, k, l)?;
    let started = Instant::now();
    let slots: Vec<SlotId> = instance.slot_ids().collect();
    let tags: Vec<TagId> = instance.tag_ids().collect();

    let mut a = SurvivalState::with_virtuals(instance, &Selection::default(), Virtuals::BOTH)?;
    let a_slots = greedy_loop::<Slots>(&mut a, k, &slots, scheme, 0)?;
    let a_tags = greedy_loop::<Tags>(&mut a, l, &tags, scheme, 1)?;
    let first = branch_run(
        &a,
        trace_of(&a_slots, Element::Slot).chain(trace_of(&a_tags, Element::Tag)),
    )?;

    let mut b = SurvivalState::with_virtuals(instance, &Selection::default(), Virtuals::BOTH)?;
    let b_tags = greedy_loop::<Tags>(&mut b, l, &tags, scheme, 2)?;
    let b_slots = greedy_loop::<Slots>(&mut b, k, &slots, scheme, 3)?;
    let second = branch_run(
        &b,
        trace_of(&b_tags, Element::Tag).chain(trace_of(&b_slots, Element::Slot)),
    )?;

    let gains = a_slots.gain_evaluations
        + a_tags.gain_evaluations
        + b_tags.gain_evaluations
        + b_slots.gain_evaluations;
    let (winner, branch) = if first.value >= second.value {
        (first, Branch::SlotsFirst)
    } else {
        (second, Branch::TagsFirst)
    };
    Ok(SolveResult {
        selection: winner.selection,
        value: winner.value,
        eval_count: EVALS_PER_GAIN * gains,
        wall_time_ms: started.elapsed().as_millis() as u64,
        pick_trace: winner.trace,
        branch: Some(branch),
    })
}

/// Orthant-wise greedy with every candidate scored each round (or lazily).
pub fn orthant_greedy(instance: &InfluenceInstance, k: usize, l: usize, mode: GreedyMode) -> Result<SolveResult> {
    two_branches(instance, k, l, &Scheme::Full(mode))
}

/// Orthant-wise greedy that scores a random sample of the remaining candidates
/// each round. Samples are drawn without replacement from ChaCha8 seeded with
/// `params.seed`, one stream per greedy loop; ties go to the lowest id.
pub fn stochastic_greedy(
    instance: &InfluenceInstance,
    k: usize,
    l: usize,
    params: &StochasticParams,
) -> Result<SolveResult> {
    params.validate()?;
    check_budgets(instance, k, l)?;
    let a = params.slot_ground.unwrap_or(instance.n_slots());
    let b = params.tag_ground.unwrap_or(instance.n_tags());
    let scheme = Scheme::Sampled {
        seed: params.seed,
        slot_size: sample_size(a, k, params.epsilon),
        tag_size: sample_size(b, l, params.epsilon),
    };
    two_branches(instance, k, l, &scheme)
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of candidate pairs exhaustive search would visit.
pub fn exhaustive_candidates(n_slots: usize, k: usize, n_tags: usize, l: usize) -> u128 {
    binomial(n_slots, k).saturating_mul(binomial(n_tags, l))
}

/// The `rank`-th `k`-combination of `0..n` in lexicographic order.
fn unrank(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut c = 0;
    for i in 0..k {
        loop {
            let count = binomial(n - c - 1, k - i - 1);
            if rank < count {
                break;
            }
            rank -= count;
            c += 1;
        }
        out.push(c);
        c += 1;
    }
    out
}

/// Advances `comb` to the next `k`-combination of `0..n`; false after the last.
fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

const COMBOS_PER_CHUNK: u128 = 512;

struct ChunkBest {
    value: f64,
    slots: Vec<usize>,
    tags: Vec<usize>,
}

/// Exact optimum over all `C(n, k)·C(m, ℓ)` pairs, refusing more than
/// [`DEFAULT_EXHAUSTIVE_CAP`] of them.
pub fn exhaustive_search(instance: &InfluenceInstance, k: usize, l: usize) -> Result<SolveResult> {
    exhaustive_search_capped(instance, k, l, DEFAULT_EXHAUSTIVE_CAP)
}

/// Exhaustive search with an explicit cap. Ties resolve to the lexicographically
/// smallest slot set, then tag set.
pub fn exhaustive_search_capped(instance: &InfluenceInstance, k: usize, l: usize, cap: u128) -> Result<SolveResult> {
    check_budgets(instance, k, l)?;
    let n = instance.n_slots();
    let m = instance.n_tags();
    let candidates = exhaustive_candidates(n, k, m, l);
    if candidates > cap {
        return Err(Error::CapExceeded { candidates, cap });
    }
    let started = Instant::now();
    let slot_combos = binomial(n, k);
    let n_chunks = slot_combos.div_ceil(COMBOS_PER_CHUNK) as usize;
    let n_users = instance.n_users();

    let chunk_bests = exec::map_range(n_chunks, |chunk| {
        let first = chunk as u128 * COMBOS_PER_CHUNK;
        let count = (slot_combos - first).min(COMBOS_PER_CHUNK);
        // q[u·m + c]: survival of user u under the chunk's current slots and tag c alone
        let mut q = vec![1.0f64; n_users * m];
        let mut touched: Vec<usize> = Vec::new();
        let mut marked = vec![false; n_users];
        let mut slots = unrank(n, k, first);
        let mut best: Option<ChunkBest> = None;
        for step in 0..count {
            if step > 0 {
                next_combination(&mut slots, n);
            }
            for &u in &touched {
                q[u * m..(u + 1) * m].fill(1.0);
                marked[u] = false;
            }
            touched.clear();
            for &s in &slots {
                for p in instance.slot_pairs(SlotId(s as u32)) {
                    let u = instance.pair_user(p).index();
                    if !marked[u] {
                        marked[u] = true;
                        touched.push(u);
                    }
                    let row = instance.pair_row(p);
                    let qu = &mut q[u * m..(u + 1) * m];
                    for (qc, &pr) in qu.iter_mut().zip(row) {
                        *qc *= (1.0 - pr).clamp(0.0, 1.0);
                    }
                }
            }
            touched.sort_unstable();
            let mut tags: Vec<usize> = (0..l).collect();
            loop {
                let mut value = 0.0;
                for &u in &touched {
                    let qu = &q[u * m..(u + 1) * m];
                    let survive: f64 = tags.iter().map(|&c| qu[c]).product();
                    value += 1.0 - survive;
                }
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(ChunkBest {
                        value,
                        slots: slots.clone(),
                        tags: tags.clone(),
                    });
                }
                if !next_combination(&mut tags, m) {
                    break;
                }
            }
        }
        best.expect("every chunk holds at least one combination")
    });

    let mut best: Option<ChunkBest> = None;
    for c in chunk_bests {
        if best.as_ref().is_none_or(|b| c.value > b.value) {
            best = Some(c);
        }
    }
    let best = best.expect("at least one slot combination");
    let selection = Selection::new(
        best.slots.iter().map(|&s| SlotId(s as u32)).collect(),
        best.tags.iter().map(|&c| TagId(c as u32)).collect(),
    );
    Ok(SolveResult {
        value: aggregated_influence(instance, &selection)?,
        selection,
        eval_count: candidates.min(u64::MAX as u128) as u64,
        wall_time_ms: started.elapsed().as_millis() as u64,
        pick_trace: Vec::new(),
        branch: None,
    })
}

//! Random instances and a brute-force reference evaluator shared by the
//! integration tests. The reference works on dense arrays and spells out the
//! product formula directly, so it shares no code with the library's evaluator.

#![allow(dead_code)]

use billboard_core::domain::{
    BillboardId, InstanceMeta, InstanceParts, ProbEntry, Slot, TagRecord, TimeInterval, VirtualDefaults,
};
use billboard_core::{InfluenceInstance, SlotId, TagId, UserId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense copy of an instance: `prob[(u * n_slots + s) * n_tags + c]`, zero when `u`
/// cannot see `s`.
#[derive(Debug, Clone)]
pub struct Dense {
    pub n_slots: usize,
    pub n_tags: usize,
    pub n_users: usize,
    pub prob: Vec<f64>,
}

impl Dense {
    pub fn p(&self, u: usize, s: usize, c: usize) -> f64 {
        self.prob[(u * self.n_slots + s) * self.n_tags + c]
    }

    pub fn from_instance(inst: &InfluenceInstance) -> Dense {
        let (n_slots, n_tags, n_users) = (inst.n_slots(), inst.n_tags(), inst.n_users());
        let mut prob = vec![0.0; n_users * n_slots * n_tags];
        for s in 0..n_slots {
            for &u in inst.visibility(SlotId(s as u32)) {
                for c in 0..n_tags {
                    prob[(u.index() * n_slots + s) * n_tags + c] =
                        inst.prob(u, SlotId(s as u32), TagId(c as u32));
                }
            }
        }
        Dense {
            n_slots,
            n_tags,
            n_users,
            prob,
        }
    }

    /// `Σ_u 1 - Π_{s∈S} Π_{c∈H} (1 - p(u, s, c))`.
    pub fn phi(&self, slots: &[usize], tags: &[usize]) -> f64 {
        let mut total = 0.0;
        for u in 0..self.n_users {
            let mut survive = 1.0;
            for &s in slots {
                for &c in tags {
                    survive *= 1.0 - self.p(u, s, c);
                }
            }
            total += 1.0 - survive;
        }
        total
    }

    /// Best value over all `k`-subsets of slots and `ℓ`-subsets of tags, with
    /// every maximizing pair (within `tol`).
    pub fn optimum(&self, k: usize, l: usize, tol: f64) -> (f64, Vec<(Vec<usize>, Vec<usize>)>) {
        let slot_sets = subsets(self.n_slots, k);
        let tag_sets = subsets(self.n_tags, l);
        let mut scored = Vec::new();
        for s in &slot_sets {
            for h in &tag_sets {
                scored.push((self.phi(s, h), s.clone(), h.clone()));
            }
        }
        let best = scored.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
        let argmax = scored
            .into_iter()
            .filter(|x| x.0 >= best - tol)
            .map(|x| (x.1, x.2))
            .collect();
        (best, argmax)
    }
}

/// All `k`-subsets of `0..n` by recursion on membership of the last element.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut with_last: Vec<Vec<usize>> = subsets(n - 1, k - 1)
        .into_iter()
        .map(|mut s| {
            s.push(n - 1);
            s
        })
        .collect();
    let mut out = subsets(n - 1, k);
    out.append(&mut with_last);
    out
}

/// Random instance with the given counts. Each (user, slot) pair is visible with
/// probability `density`; visible pairs draw per-tag probabilities in `[0, pmax]`.
pub fn random_instance(seed: u64, n_slots: usize, n_tags: usize, n_users: usize, density: f64, pmax: f64) -> InfluenceInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_billboards = n_slots.div_ceil(2).max(1);
    let slots = (0..n_slots)
        .map(|s| Slot {
            id: SlotId(s as u32),
            billboard: BillboardId((s / 2) as u32),
            window: TimeInterval {
                start: (s % 2) as u64 * 10,
                end: (s % 2) as u64 * 10 + 9,
            },
        })
        .collect();
    let tags = (0..n_tags)
        .map(|c| TagRecord {
            id: TagId(c as u32),
            name: format!("h{c}"),
            cost: 1.0,
            weight: rng.gen_range(0.0..=1.0),
        })
        .collect();
    let mut visibility = vec![Vec::new(); n_slots];
    let mut probs = Vec::new();
    for (s, seen) in visibility.iter_mut().enumerate() {
        for u in 0..n_users {
            if rng.gen_bool(density) {
                seen.push(UserId(u as u32));
                for c in 0..n_tags {
                    probs.push(ProbEntry {
                        user: UserId(u as u32),
                        slot: SlotId(s as u32),
                        tag: TagId(c as u32),
                        prob: rng.gen_range(0.0..=pmax),
                    });
                }
            }
        }
    }
    let defaults = VirtualDefaults {
        default_tag_by_slot: (0..n_slots).map(|_| rng.gen_range(0.0..=pmax)).collect(),
        default_slot_by_tag: (0..n_tags).map(|_| rng.gen_range(0.0..=pmax)).collect(),
        default_pair: rng.gen_range(0.0..=pmax),
    };
    InfluenceInstance::from_parts(InstanceParts {
        meta: InstanceMeta {
            t1: 0,
            t2: 19,
            delta: 10,
            lambda_m: 100.0,
        },
        slots,
        billboard_names: (0..n_billboards).map(|b| format!("B{b}")).collect(),
        tags,
        users: (0..n_users).map(|u| format!("u{u}")).collect(),
        visibility,
        probs,
        defaults,
    })
    .expect("generated ids are in range")
}

/// Same as [`random_instance`] with sizes drawn from the seed.
pub fn random_small_instance(seed: u64, max_slots: usize, max_tags: usize, max_users: usize) -> InfluenceInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n_slots = rng.gen_range(1..=max_slots);
    let n_tags = rng.gen_range(1..=max_tags);
    let n_users = rng.gen_range(1..=max_users);
    let density = rng.gen_range(0.1..=0.9);
    random_instance(seed, n_slots, n_tags, n_users, density, 0.9)
}

pub fn slot_ids(v: &[usize]) -> Vec<SlotId> {
    v.iter().map(|&s| SlotId(s as u32)).collect()
}

pub fn tag_ids(v: &[usize]) -> Vec<TagId> {
    v.iter().map(|&c| TagId(c as u32)).collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

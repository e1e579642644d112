//! Slot enumeration and the λ-visibility index.

use crate::domain::{Billboard, BillboardId, GeoPoint, Slot, SlotId, TimeInterval, TrajectoryTuple, UserId, EARTH_RADIUS_M};
use crate::error::{Error, Result};
use crate::exec;

/// Number of whole windows of length `delta` inside `horizon`. A trailing partial
/// window is dropped.
pub fn windows_in(horizon: TimeInterval, delta: u64) -> u64 {
    if delta == 0 {
        0
    } else {
        horizon.units() / delta
    }
}

/// One slot per (billboard, window), billboard-major. Windows are the closed
/// intervals `[t1 + jΔ, t1 + (j+1)Δ - 1]`.
pub fn enumerate_slots(billboards: &[Billboard], horizon: TimeInterval, delta: u64) -> Result<Vec<Slot>> {
    if delta == 0 {
        return Err(Error::InvalidParameter("slot duration must be at least 1".into()));
    }
    let windows = windows_in(horizon, delta);
    let mut slots = Vec::with_capacity(billboards.len() * windows as usize);
    for b in billboards {
        for j in 0..windows {
            let start = horizon.start + j * delta;
            slots.push(Slot {
                id: SlotId(slots.len() as u32),
                billboard: b.id,
                window: TimeInterval {
                    start,
                    end: start + delta - 1,
                },
            });
        }
    }
    Ok(slots)
}

/// Billboards sorted by latitude. A radius query only scans the latitude band
/// `±λ/R`, which bounds the great-circle distance from below.
pub struct BillboardIndex {
    by_lat: Vec<(f64, u32)>,
    locs: Vec<GeoPoint>,
}

impl BillboardIndex {
    pub fn new(billboards: &[Billboard]) -> Self {
        let mut by_lat: Vec<(f64, u32)> = billboards
            .iter()
            .enumerate()
            .map(|(i, b)| (b.loc.lat, i as u32))
            .collect();
        by_lat.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        BillboardIndex {
            by_lat,
            locs: billboards.iter().map(|b| b.loc).collect(),
        }
    }

    /// Positions (in the slice given to `new`) of billboards within `radius_m` of `p`.
    pub fn within(&self, p: &GeoPoint, radius_m: f64) -> Vec<u32> {
        let band = (radius_m / EARTH_RADIUS_M).to_degrees() * (1.0 + 1e-9) + 1e-12;
        let lo = self.by_lat.partition_point(|&(lat, _)| lat < p.lat - band);
        let hi = self.by_lat.partition_point(|&(lat, _)| lat <= p.lat + band);
        let mut out: Vec<u32> = self.by_lat[lo..hi]
            .iter()
            .filter(|&&(_, i)| p.haversine_m(&self.locs[i as usize]) <= radius_m)
            .map(|&(_, i)| i)
            .collect();
        out.sort_unstable();
        out
    }
}

/// `visibility[s]` lists the users of every tuple within `lambda_m` of slot `s`'s
/// billboard whose interval shares at least one time unit with the slot window.
pub fn build_visibility(
    tuples: &[TrajectoryTuple],
    slots: &[Slot],
    billboards: &[Billboard],
    lambda_m: f64,
) -> Vec<Vec<UserId>> {
    let position: std::collections::HashMap<BillboardId, usize> =
        billboards.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
    let mut by_billboard: Vec<Vec<SlotId>> = vec![Vec::new(); billboards.len()];
    for slot in slots {
        if let Some(&i) = position.get(&slot.billboard) {
            by_billboard[i].push(slot.id);
        }
    }
    for list in by_billboard.iter_mut() {
        list.sort_by_key(|s| (slots[s.index()].window.start, s.0));
    }
    let index = BillboardIndex::new(billboards);

    let per_tuple: Vec<Vec<(u32, u32)>> = exec::map(tuples, |t| {
        let mut pairs = Vec::new();
        for b in index.within(&t.loc, lambda_m) {
            let list = &by_billboard[b as usize];
            // windows of one billboard are disjoint and sorted by start
            let first = list.partition_point(|s| slots[s.index()].window.end < t.interval.start);
            for s in &list[first..] {
                let w = slots[s.index()].window;
                if w.start > t.interval.end {
                    break;
                }
                if w.overlaps(&t.interval) {
                    pairs.extend(t.users.iter().map(|u| (s.0, u.0)));
                }
            }
        }
        pairs
    });

    let mut pairs: Vec<(u32, u32)> = per_tuple.into_iter().flatten().collect();
    pairs.sort_unstable();
    pairs.dedup();
    let mut visibility = vec![Vec::new(); slots.len()];
    for (s, u) in pairs {
        visibility[s as usize].push(UserId(u));
    }
    visibility
}

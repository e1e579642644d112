//! Seeded synthetic datasets with the shape of the real trajectory/billboard data.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{assemble_instance, IngestConfig, ProbMode, RawDataset};
use crate::domain::{Billboard, BillboardId, GeoPoint, InfluenceInstance, TagId, TagRecord, TimeInterval, TrajectoryTuple, UserId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl GeoBox {
    /// Roughly 1 km x 1 km in midtown Manhattan.
    pub const MIDTOWN: GeoBox = GeoBox {
        min_lat: 40.750,
        max_lat: 40.759,
        min_lon: -73.990,
        max_lon: -73.978,
    };

    fn sample(&self, rng: &mut ChaCha8Rng) -> GeoPoint {
        GeoPoint {
            lat: rng.gen_range(self.min_lat..=self.max_lat),
            lon: rng.gen_range(self.min_lon..=self.max_lon),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_users: usize,
    pub n_billboards: usize,
    pub n_tags: usize,
    pub n_tuples: usize,
    pub seed: u64,
    pub geo_box: GeoBox,
    /// Tag weights are `U^tag_skew` for uniform `U`; larger values leave a few dominant tags.
    pub tag_skew: f64,
    pub horizon: TimeInterval,
    pub slot_duration: u64,
    pub lambda_m: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_users: 100,
            n_billboards: 10,
            n_tags: 5,
            n_tuples: 300,
            seed: 0,
            geo_box: GeoBox::MIDTOWN,
            tag_skew: 2.0,
            horizon: TimeInterval { start: 0, end: 99 },
            slot_duration: 25,
            lambda_m: 100.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.n_users == 0 || self.n_billboards == 0 || self.n_tags == 0 || self.n_tuples == 0 {
            return bad("synthetic counts must all be at least 1");
        }
        let g = &self.geo_box;
        let ordered = g.min_lat <= g.max_lat && g.min_lon <= g.max_lon;
        let inside = GeoPoint { lat: g.min_lat, lon: g.min_lon }.is_valid()
            && GeoPoint { lat: g.max_lat, lon: g.max_lon }.is_valid();
        if !(ordered && inside) {
            return bad("geo box is not well ordered");
        }
        if !(self.tag_skew.is_finite() && self.tag_skew > 0.0) {
            return bad("tag skew must be positive");
        }
        if self.slot_duration == 0 || self.horizon.start > self.horizon.end {
            return bad("horizon and slot duration must be non-empty");
        }
        if !(self.lambda_m.is_finite() && self.lambda_m > 0.0) {
            return bad("lambda must be positive");
        }
        Ok(())
    }

    pub fn ingest_config(&self) -> IngestConfig {
        IngestConfig {
            horizon: self.horizon,
            slot_duration: self.slot_duration,
            lambda_m: self.lambda_m,
            prob_mode: ProbMode::Synthetic,
        }
    }
}

/// Raw records for `spec`. Identical seeds give identical datasets.
pub fn generate_raw(spec: &SyntheticSpec) -> Result<RawDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let billboards = (0..spec.n_billboards)
        .map(|i| Billboard {
            id: BillboardId(i as u32),
            name: format!("B{i}"),
            loc: spec.geo_box.sample(&mut rng),
            panel_size: rng.gen_range(50.0..=500.0),
            cost: rng.gen_range(10.0..=100.0),
        })
        .collect();

    let users = (0..spec.n_users).map(|i| format!("u{i}")).collect();
    let h = spec.horizon;
    let max_group = spec.n_users.min(5);
    let tuples = (0..spec.n_tuples)
        .map(|_| {
            let size = rng.gen_range(1..=max_group);
            let mut members: Vec<UserId> = sample(&mut rng, spec.n_users, size)
                .into_iter()
                .map(|u| UserId(u as u32))
                .collect();
            members.sort_unstable();
            let loc = spec.geo_box.sample(&mut rng);
            let start = rng.gen_range(h.start..=h.end);
            let len = rng.gen_range(0..spec.slot_duration);
            TrajectoryTuple {
                users: members,
                loc,
                interval: TimeInterval {
                    start,
                    end: (start + len).min(h.end),
                },
            }
        })
        .collect();

    let tags = (0..spec.n_tags)
        .map(|i| {
            let u: f64 = 1.0 - rng.gen::<f64>();
            TagRecord {
                id: TagId(i as u32),
                name: format!("h{i}"),
                cost: rng.gen_range(1.0..=10.0),
                weight: u.powf(spec.tag_skew),
            }
        })
        .collect();

    Ok(RawDataset {
        users,
        tuples,
        billboards,
        tags,
    })
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<InfluenceInstance> {
    let raw = generate_raw(spec)?;
    assemble_instance(&raw, &spec.ingest_config(), None)
}

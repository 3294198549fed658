//! Per-chain and pooled summaries shared by `run` and `summarize`.
//!
//! The pooled block merges chain moments weighted by chain duration and is
//! computed by the same code whether the inputs come from freshly simulated
//! skeletons or from parsed CSVs; deterministic ordering everywhere keeps
//! the serialized JSON byte-stable.

use std::collections::BTreeMap;

use pdmp::sampler::{path_moments, EventCounts, TrajectorySkeleton};
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EventTotals {
    pub bounce: u64,
    pub refresh: u64,
    pub boundary: u64,
}

impl From<EventCounts> for EventTotals {
    fn from(counts: EventCounts) -> Self {
        EventTotals {
            bounce: counts.bounce,
            refresh: counts.refresh,
            boundary: counts.boundary,
        }
    }
}

impl EventTotals {
    pub fn total(&self) -> u64 {
        self.bounce + self.refresh + self.boundary
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainSummary {
    pub chain: u64,
    pub total_time: f64,
    pub events: EventTotals,
    pub boundary_hits_per_time: f64,
    pub mean: Vec<f64>,
    pub second_moment: Vec<Vec<f64>>,
    pub occupancy: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetweenChainSpread {
    pub mean_std: Vec<f64>,
    pub occupancy_std: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PooledSummary {
    pub total_time: f64,
    pub mean: Vec<f64>,
    pub second_moment: Vec<Vec<f64>>,
    pub occupancy: BTreeMap<String, f64>,
    pub events: EventTotals,
    /// Events per unit of *process* time; wall-clock throughput goes to
    /// stderr, keeping the file deterministic.
    pub events_per_sec: f64,
    pub boundary_hits_per_time: f64,
    pub between_chain: BetweenChainSpread,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub per_chain: Vec<ChainSummary>,
    pub pooled: PooledSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummarizeOutput {
    pub inputs: Vec<String>,
    pub per_chain: Vec<ChainSummary>,
    pub pooled: PooledSummary,
}

pub fn chain_summary(
    chain: u64,
    skeleton: &TrajectorySkeleton,
    region_labels: &[String],
) -> ChainSummary {
    let moments = path_moments(skeleton, region_labels.len());
    let occupancy: BTreeMap<String, f64> = region_labels
        .iter()
        .cloned()
        .zip(moments.occupancy.iter().copied())
        .collect();
    ChainSummary {
        chain,
        total_time: moments.total_time,
        events: skeleton.event_counts.into(),
        boundary_hits_per_time: skeleton.event_counts.boundary as f64 / moments.total_time,
        mean: moments.mean,
        second_moment: moments.second_moment,
        occupancy,
    }
}

pub fn pooled_summary(chains: &[ChainSummary]) -> PooledSummary {
    assert!(!chains.is_empty());
    let dim = chains[0].mean.len();
    let total_time: f64 = chains.iter().map(|c| c.total_time).sum();
    let mut mean = vec![0.0; dim];
    let mut second = vec![vec![0.0; dim]; dim];
    let mut occupancy: BTreeMap<String, f64> = chains[0]
        .occupancy
        .keys()
        .map(|k| (k.clone(), 0.0))
        .collect();
    let mut events = EventTotals {
        bounce: 0,
        refresh: 0,
        boundary: 0,
    };
    for chain in chains {
        let w = chain.total_time / total_time;
        for i in 0..dim {
            mean[i] += w * chain.mean[i];
            for j in 0..dim {
                second[i][j] += w * chain.second_moment[i][j];
            }
        }
        for (label, value) in &chain.occupancy {
            *occupancy.get_mut(label).expect("consistent region labels") += w * value;
        }
        events.bounce += chain.events.bounce;
        events.refresh += chain.events.refresh;
        events.boundary += chain.events.boundary;
    }

    let n = chains.len() as f64;
    let spread = |values: Vec<f64>| -> f64 {
        if chains.len() < 2 {
            return 0.0;
        }
        let avg = values.iter().sum::<f64>() / n;
        (values.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let mean_std: Vec<f64> = (0..dim)
        .map(|i| spread(chains.iter().map(|c| c.mean[i]).collect()))
        .collect();
    let occupancy_std: BTreeMap<String, f64> = occupancy
        .keys()
        .map(|label| {
            (
                label.clone(),
                spread(chains.iter().map(|c| c.occupancy[label]).collect()),
            )
        })
        .collect();

    PooledSummary {
        total_time,
        mean,
        second_moment: second,
        occupancy,
        events,
        events_per_sec: events.total() as f64 / total_time,
        boundary_hits_per_time: events.boundary as f64 / total_time,
        between_chain: BetweenChainSpread {
            mean_std,
            occupancy_std,
        },
    }
}

//! Prototype library generation by iterated matching and merging.
//!
//! Each round warps every pair of current items in both directions, scores
//! the pair by the gradient-weighted spread of `r` plus the spread of `s`,
//! pairs items by maximum-weight matching on reciprocal distances, and
//! merges matched pairs whose warp stays within the amplitude and shift
//! thresholds. Items carry the number of records merged into them.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lead::{ClassLabel, LeadId};
use crate::matching::{max_weight_matching, AffinityMatrix};
use crate::preprocess::MeanBeat;
use crate::stats::{moving_average, std, weighted_std};
use crate::warp::{merge_pair, warp, WarpConfig, WarpResult};
use crate::BEAT_LEN;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrototypeConfig {
    /// The `r` spread threshold is this factor times the pair's joint
    /// amplitude range in mV.
    pub r_threshold_factor: f64,
    /// Threshold on the standard deviation of `s`, in samples.
    pub s_threshold: f64,
    /// Moving-average width used to smooth the gradient weights.
    pub smoothing_window: usize,
    pub max_rounds: usize,
    /// Distance floor when converting distances to matching weights.
    pub zero_distance_eps: f64,
    /// Normal records kept after seeded subsampling; 0 keeps all.
    pub normal_pool: usize,
    /// LVH records kept after seeded subsampling; 0 keeps all.
    pub lvh_pool: usize,
}

impl Default for PrototypeConfig {
    fn default() -> Self {
        Self {
            r_threshold_factor: 0.015,
            s_threshold: 20.0,
            smoothing_window: 25,
            max_rounds: 20,
            zero_distance_eps: 1e-9,
            normal_pool: 256,
            lvh_pool: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    pub samples: Vec<f64>,
    pub occurrence: usize,
    /// Records merged into this prototype.
    #[serde(default)]
    pub lineage: Vec<String>,
}

impl Prototype {
    pub fn from_beat(beat: &MeanBeat) -> Self {
        Self {
            samples: beat.samples.clone(),
            occurrence: 1,
            lineage: vec![beat.record_id.clone()],
        }
    }
}

/// Spread statistics of one pairwise warp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affinity {
    /// Gradient-weighted standard deviation of `r`.
    pub r_wstd: f64,
    /// Standard deviation of `s`, in samples.
    pub s_std: f64,
}

impl Affinity {
    pub fn distance(&self) -> f64 {
        self.r_wstd + self.s_std
    }
}

fn abs_slope(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|t| if t + 1 < n { (x[t + 1] - x[t]).abs() } else { (x[t] - x[t - 1]).abs() })
        .collect()
}

/// Weights that emphasize steep regions (the QRS): the moving average of
/// `|f'| + |g'|`, normalized to sum to one.
pub fn gradient_weights(f: &[f64], g: &[f64], window: usize) -> Vec<f64> {
    let raw: Vec<f64> = abs_slope(f).iter().zip(abs_slope(g)).map(|(a, b)| a + b).collect();
    let smooth = moving_average(&raw, window);
    let total: f64 = smooth.iter().sum();
    if total > 0.0 {
        smooth.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / f.len() as f64; f.len()]
    }
}

fn directional(weights: &[f64], res: &WarpResult) -> Affinity {
    Affinity {
        r_wstd: weighted_std(&res.r, weights),
        s_std: std(&res.s),
    }
}

/// Symmetric affinity of two beats: both warp directions are scored and
/// averaged. Also returns the `f → g` warp.
pub fn affinity_parts(f: &[f64], g: &[f64], cfg: &WarpConfig, window: usize) -> Result<(Affinity, WarpResult)> {
    let weights = gradient_weights(f, g, window);
    let fwd = warp(f, g, cfg)?;
    let bwd = warp(g, f, cfg)?;
    let a = directional(&weights, &fwd);
    let b = directional(&weights, &bwd);
    Ok((
        Affinity {
            r_wstd: 0.5 * (a.r_wstd + b.r_wstd),
            s_std: 0.5 * (a.s_std + b.s_std),
        },
        fwd,
    ))
}

pub fn affinity(f: &[f64], g: &[f64], cfg: &WarpConfig, window: usize) -> Result<f64> {
    Ok(affinity_parts(f, g, cfg, window)?.0.distance())
}

/// `max - min` over the samples of both beats, in mV.
pub fn joint_range(f: &[f64], g: &[f64]) -> f64 {
    let lo = f.iter().chain(g).cloned().fold(f64::INFINITY, f64::min);
    let hi = f.iter().chain(g).cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Whether a matched pair may merge under the amplitude and shift thresholds.
pub fn passes_thresholds(a: &Affinity, f: &[f64], g: &[f64], cfg: &PrototypeConfig) -> bool {
    let amp = joint_range(f, g);
    a.r_wstd <= cfg.r_threshold_factor * amp && a.s_std <= cfg.s_threshold
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: usize,
    pub items_before: usize,
    pub merges: usize,
    pub items_after: usize,
    pub occurrence_total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LibraryBuild {
    /// Sorted by descending occurrence.
    pub prototypes: Vec<Prototype>,
    pub rounds: Vec<RoundStats>,
}

/// Runs one matching-and-merging round; returns the next items and the
/// number of merges.
pub fn merge_round(
    items: &[Prototype],
    warp_cfg: &WarpConfig,
    cfg: &PrototypeConfig,
) -> Result<(Vec<Prototype>, usize)> {
    let n = items.len();
    if n < 2 {
        return Ok((items.to_vec(), 0));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let scored = pairs
        .par_iter()
        .map(|&(i, j)| {
            affinity_parts(&items[i].samples, &items[j].samples, warp_cfg, cfg.smoothing_window).map(|(a, _)| a)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = AffinityMatrix::new(n);
    let mut parts = BTreeMap::new();
    for (&(i, j), a) in pairs.iter().zip(scored) {
        matrix.set(i, j, a.distance());
        parts.insert((i, j), a);
    }
    let matching = max_weight_matching(&matrix, cfg.zero_distance_eps)?;

    let merged = matching
        .pairs
        .par_iter()
        .map(|&(i, j)| {
            let (f, g) = (&items[i], &items[j]);
            if !passes_thresholds(&parts[&(i, j)], &f.samples, &g.samples, cfg) {
                return Ok(None);
            }
            let res = warp(&f.samples, &g.samples, warp_cfg)?;
            let samples = merge_pair(&f.samples, &g.samples, &res)?;
            let mut lineage = f.lineage.clone();
            lineage.extend(g.lineage.iter().cloned());
            Ok(Some(Prototype {
                samples,
                occurrence: f.occurrence + g.occurrence,
                lineage,
            }))
        })
        .collect::<Result<Vec<_>>>()?;

    // Merged items take the slot of their lower index; everything else keeps
    // its place.
    let mut slots: Vec<Option<Prototype>> = items.iter().cloned().map(Some).collect();
    let mut merges = 0;
    for (&(i, j), m) in matching.pairs.iter().zip(merged) {
        if let Some(p) = m {
            slots[i] = Some(p);
            slots[j] = None;
            merges += 1;
        }
    }
    Ok((slots.into_iter().flatten().collect(), merges))
}

/// Builds the prototype library of one lead and class from candidate mean
/// beats.
pub fn build_library(candidates: &[MeanBeat], warp_cfg: &WarpConfig, cfg: &PrototypeConfig) -> Result<LibraryBuild> {
    if candidates.is_empty() {
        return Err(Error::EmptyClassPool("build_library".into()));
    }
    if let Some(b) = candidates.iter().find(|b| b.samples.len() != BEAT_LEN) {
        return Err(Error::CurveLength {
            expected: BEAT_LEN,
            found: b.samples.len(),
        });
    }
    let mut items: Vec<Prototype> = candidates.iter().map(Prototype::from_beat).collect();
    let mut rounds = Vec::new();
    for round in 1..=cfg.max_rounds {
        if items.len() < 2 {
            break;
        }
        let before = items.len();
        let (next, merges) = merge_round(&items, warp_cfg, cfg)?;
        items = next;
        rounds.push(RoundStats {
            round,
            items_before: before,
            merges,
            items_after: items.len(),
            occurrence_total: items.iter().map(|p| p.occurrence).sum(),
        });
        if merges == 0 {
            break;
        }
    }
    items.sort_by(|a, b| b.occurrence.cmp(&a.occurrence));
    Ok(LibraryBuild { prototypes: items, rounds })
}

/// Prototypes of one lead and class.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeLibrary {
    pub lead: LeadId,
    pub class_label: ClassLabel,
    pub beat_length: usize,
    pub prototypes: Vec<Prototype>,
}

impl PrototypeLibrary {
    pub fn total_occurrence(&self) -> usize {
        self.prototypes.iter().map(|p| p.occurrence).sum()
    }
}

/// All libraries of a build, keyed by class then lead.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LibrarySet {
    pub libraries: BTreeMap<(ClassLabel, LeadId), PrototypeLibrary>,
}

impl LibrarySet {
    pub fn insert(&mut self, lib: PrototypeLibrary) {
        self.libraries.insert((lib.class_label, lib.lead), lib);
    }

    pub fn get(&self, class: ClassLabel, lead: LeadId) -> Option<&PrototypeLibrary> {
        self.libraries.get(&(class, lead))
    }

    pub fn len(&self) -> usize {
        self.libraries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.libraries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PrototypeLibrary> {
        self.libraries.values()
    }
}

/// The mean beats of one record, one per lead in canonical order.
pub type RecordMeanBeats = Vec<MeanBeat>;

/// Builds all 24 (class, lead) libraries from per-class record pools.
pub fn build_all_libraries(
    pools: &BTreeMap<ClassLabel, Vec<RecordMeanBeats>>,
    warp_cfg: &WarpConfig,
    cfg: &PrototypeConfig,
) -> Result<LibrarySet> {
    let mut jobs = Vec::new();
    for class in ClassLabel::ALL {
        let pool = pools.get(&class).map(Vec::as_slice).unwrap_or_default();
        if pool.is_empty() {
            return Err(Error::EmptyClassPool(class.to_string()));
        }
        for lead in LeadId::ALL {
            let beats = pool
                .iter()
                .map(|rec| {
                    rec.iter()
                        .find(|b| b.lead == lead)
                        .cloned()
                        .ok_or(Error::MissingLead(lead))
                })
                .collect::<Result<Vec<_>>>()?;
            jobs.push((class, lead, beats));
        }
    }
    let built = jobs
        .par_iter()
        .map(|(class, lead, beats)| {
            build_library(beats, warp_cfg, cfg).map(|b| PrototypeLibrary {
                lead: *lead,
                class_label: *class,
                beat_length: BEAT_LEN,
                prototypes: b.prototypes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = LibrarySet::default();
    for lib in built {
        set.insert(lib);
    }
    Ok(set)
}

/// Seeded subsample of `ids` (sorted first, so input order does not matter).
/// `keep == 0` or `keep >= len` returns everything, sorted.
pub fn subsample(ids: &[String], keep: usize, seed: u64) -> Vec<String> {
    let mut sorted = ids.to_vec();
    sorted.sort();
    if keep == 0 || keep >= sorted.len() {
        return sorted;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sorted.shuffle(&mut rng);
    sorted.truncate(keep);
    sorted.sort();
    sorted
}

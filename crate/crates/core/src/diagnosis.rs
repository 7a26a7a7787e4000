//! Prototype-matching diagnosis and the voltage-criteria baselines.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lead::{ClassLabel, Label, LeadId};
use crate::preprocess::MeanBeat;
use crate::prototype::{LibrarySet, PrototypeLibrary};
use crate::stats::std;
use crate::warp::{warp, WarpConfig, WarpResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosisConfig {
    /// Weight on the `r` deviation terms of the prototype distance.
    pub r_weight: f64,
    /// Divisor of the `s` terms (samples per beat).
    pub s_divisor: f64,
    /// Nearest prototypes summed per lead and class.
    pub nearest_k: usize,
    /// Half-width in samples of the R/S landmark windows.
    pub landmark_window: usize,
    pub sokolow_threshold_mv: f64,
    pub cornell_threshold_mv: f64,
}

impl Default for DiagnosisConfig {
    fn default() -> Self {
        Self {
            r_weight: 10.0,
            s_divisor: 500.0,
            nearest_k: 2,
            landmark_window: 60,
            sokolow_threshold_mv: 3.5,
            cornell_threshold_mv: 1.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Normal,
    #[serde(rename = "LVH")]
    Lvh,
}

impl Decision {
    fn from_flag(lvh: bool) -> Self {
        if lvh {
            Decision::Lvh
        } else {
            Decision::Normal
        }
    }
}

/// `r_weight (‖r - 1‖∞ + σ(r)) + (‖s‖∞ + σ(s)) / s_divisor`.
pub fn prototype_distance(result: &WarpResult, cfg: &DiagnosisConfig) -> f64 {
    let r_dev = result.r.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    let s_dev = result.s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    cfg.r_weight * (r_dev + std(&result.r)) + (s_dev + std(&result.s)) / cfg.s_divisor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestPrototype {
    pub class_label: ClassLabel,
    /// Index into the library's prototype list.
    pub index: usize,
    pub occurrence: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadMatch {
    pub lead: LeadId,
    /// The `nearest_k` smallest distances to Normal prototypes.
    pub normal_d2: Vec<f64>,
    pub lvh_d2: Vec<f64>,
    pub nearest: Vec<NearestPrototype>,
}

impl LeadMatch {
    pub fn normal_sum(&self) -> f64 {
        self.normal_d2.iter().sum()
    }

    pub fn lvh_sum(&self) -> f64 {
        self.lvh_d2.iter().sum()
    }
}

/// Distances from `beat` to every prototype, closest first. Prototypes with
/// identical samples count once.
fn ranked_distances(
    beat: &[f64],
    lib: &PrototypeLibrary,
    warp_cfg: &WarpConfig,
    cfg: &DiagnosisConfig,
) -> Result<Vec<NearestPrototype>> {
    let mut distinct: Vec<usize> = Vec::new();
    for (i, p) in lib.prototypes.iter().enumerate() {
        if !distinct.iter().any(|&j| lib.prototypes[j].samples == p.samples) {
            distinct.push(i);
        }
    }
    let mut out = distinct
        .par_iter()
        .map(|&i| {
            let p = &lib.prototypes[i];
            let res = warp(beat, &p.samples, warp_cfg)?;
            Ok(NearestPrototype {
                class_label: lib.class_label,
                index: i,
                occurrence: p.occurrence,
                distance: prototype_distance(&res, cfg),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
    Ok(out)
}

/// The `k` smallest distances, repeating the last one when the library has
/// fewer than `k` distinct prototypes.
fn k_smallest(ranked: &[NearestPrototype], k: usize) -> Vec<f64> {
    (0..k).map(|i| ranked[i.min(ranked.len() - 1)].distance).collect()
}

fn library<'a>(libs: &'a LibrarySet, class: ClassLabel, lead: LeadId) -> Result<&'a PrototypeLibrary> {
    match libs.get(class, lead) {
        Some(l) if !l.prototypes.is_empty() => Ok(l),
        _ => Err(Error::EmptyLibrary(format!("{class} {lead}"))),
    }
}

pub fn find_beat(beats: &[MeanBeat], lead: LeadId) -> Result<&MeanBeat> {
    beats.iter().find(|b| b.lead == lead).ok_or(Error::MissingLead(lead))
}

/// Matches one lead against both class libraries.
pub fn match_lead(
    beat: &MeanBeat,
    libs: &LibrarySet,
    warp_cfg: &WarpConfig,
    cfg: &DiagnosisConfig,
) -> Result<LeadMatch> {
    let normal = ranked_distances(&beat.samples, library(libs, ClassLabel::Normal, beat.lead)?, warp_cfg, cfg)?;
    let lvh = ranked_distances(&beat.samples, library(libs, ClassLabel::Lvh, beat.lead)?, warp_cfg, cfg)?;
    let k = cfg.nearest_k.max(1);
    let nearest = normal.iter().take(k).chain(lvh.iter().take(k)).cloned().collect();
    Ok(LeadMatch {
        lead: beat.lead,
        normal_d2: k_smallest(&normal, k),
        lvh_d2: k_smallest(&lvh, k),
        nearest,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BswOutcome {
    pub per_lead: Vec<LeadMatch>,
    pub total_normal: f64,
    pub total_lvh: f64,
    pub decision: Decision,
}

/// Nearest-prototype decision: LVH iff the summed V1/V5/V6 distances to the
/// Normal libraries exceed those to the LVH libraries. Other leads are
/// matched for the report whenever both libraries exist.
pub fn classify_bsw(
    beats: &[MeanBeat],
    libs: &LibrarySet,
    warp_cfg: &WarpConfig,
    cfg: &DiagnosisConfig,
) -> Result<BswOutcome> {
    for lead in LeadId::DECISION {
        find_beat(beats, lead)?;
        library(libs, ClassLabel::Normal, lead)?;
        library(libs, ClassLabel::Lvh, lead)?;
    }
    let mut per_lead = Vec::new();
    for lead in LeadId::ALL {
        let Ok(beat) = find_beat(beats, lead) else { continue };
        let has_both = ClassLabel::ALL.iter().all(|&c| library(libs, c, lead).is_ok());
        if has_both {
            per_lead.push(match_lead(beat, libs, warp_cfg, cfg)?);
        }
    }
    let decision_leads = || per_lead.iter().filter(|m| LeadId::DECISION.contains(&m.lead));
    let total_normal: f64 = decision_leads().map(LeadMatch::normal_sum).sum();
    let total_lvh: f64 = decision_leads().map(LeadMatch::lvh_sum).sum();
    Ok(BswOutcome {
        decision: Decision::from_flag(total_normal > total_lvh),
        per_lead,
        total_normal,
        total_lvh,
    })
}

/// R height and S depth of a mean beat, in mV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deflections {
    pub r: f64,
    pub s: f64,
}

/// Locates the dominant deflection (largest `|x|`) and measures R as the
/// maximum within `±window` of it and S as the depth of the minimum within
/// `window` samples after it. Both are clamped at zero.
pub fn deflections(beat: &[f64], window: usize) -> Deflections {
    if beat.is_empty() {
        return Deflections { r: 0.0, s: 0.0 };
    }
    let landmark = (0..beat.len())
        .max_by(|&a, &b| beat[a].abs().total_cmp(&beat[b].abs()).then(b.cmp(&a)))
        .unwrap();
    let lo = landmark.saturating_sub(window);
    let hi = (landmark + window + 1).min(beat.len());
    let r = beat[lo..hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s_min = beat[landmark..hi].iter().cloned().fold(f64::INFINITY, f64::min);
    Deflections {
        r: r.max(0.0),
        s: (-s_min).max(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoltageMeasurements {
    pub s_v1: f64,
    pub r_v5: f64,
    pub r_v6: f64,
    pub r_avl: f64,
}

pub fn measure(beats: &[MeanBeat], cfg: &DiagnosisConfig) -> Result<VoltageMeasurements> {
    let d = |lead| find_beat(beats, lead).map(|b| deflections(&b.samples, cfg.landmark_window));
    Ok(VoltageMeasurements {
        s_v1: d(LeadId::V1)?.s,
        r_v5: d(LeadId::V5)?.r,
        r_v6: d(LeadId::V6)?.r,
        r_avl: d(LeadId::AVL)?.r,
    })
}

/// `S(V1) + max(R(V5), R(V6)) > threshold` ⇒ LVH. Returns the decision and
/// the voltage sum.
pub fn sokolow_lyon(m: &VoltageMeasurements, cfg: &DiagnosisConfig) -> (Decision, f64) {
    let sum = m.s_v1 + m.r_v5.max(m.r_v6);
    (Decision::from_flag(sum > cfg.sokolow_threshold_mv), sum)
}

/// `R(aVL) > threshold` ⇒ LVH.
pub fn modified_cornell(m: &VoltageMeasurements, cfg: &DiagnosisConfig) -> (Decision, f64) {
    (Decision::from_flag(m.r_avl > cfg.cornell_threshold_mv), m.r_avl)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub record_id: String,
    pub true_label: Label,
    pub per_lead: Vec<LeadMatch>,
    pub total_normal: f64,
    pub total_lvh: f64,
    pub bsw_decision: Decision,
    pub sokolow_lyon: Decision,
    pub cornell: Decision,
    pub measured: VoltageMeasurements,
}

/// Runs all three methods on one record's mean beats.
pub fn diagnose(
    record_id: &str,
    true_label: Label,
    beats: &[MeanBeat],
    libs: &LibrarySet,
    warp_cfg: &WarpConfig,
    cfg: &DiagnosisConfig,
) -> Result<DiagnosisReport> {
    let bsw = classify_bsw(beats, libs, warp_cfg, cfg)?;
    let measured = measure(beats, cfg)?;
    Ok(DiagnosisReport {
        record_id: record_id.to_string(),
        true_label,
        per_lead: bsw.per_lead,
        total_normal: bsw.total_normal,
        total_lvh: bsw.total_lvh,
        bsw_decision: bsw.decision,
        sokolow_lyon: sokolow_lyon(&measured, cfg).0,
        cornell: modified_cornell(&measured, cfg).0,
        measured,
    })
}

/// Binary confusion matrix with LVH as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    /// Tallies labelled predictions; records with unknown truth are skipped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Decision)>) -> Self {
        let mut m = Self::default();
        for (truth, pred) in pairs {
            match (truth, pred) {
                (Label::Lvh, Decision::Lvh) => m.tp += 1,
                (Label::Lvh, Decision::Normal) => m.fn_ += 1,
                (Label::Normal, Decision::Lvh) => m.fp += 1,
                (Label::Normal, Decision::Normal) => m.tn += 1,
                (Label::Unknown, _) => {}
            }
        }
        m
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    fn ratio(num: usize, den: usize) -> f64 {
        if den == 0 {
            f64::NAN
        } else {
            num as f64 / den as f64
        }
    }

    pub fn sensitivity(&self) -> f64 {
        Self::ratio(self.tp, self.tp + self.fn_)
    }

    pub fn specificity(&self) -> f64 {
        Self::ratio(self.tn, self.tn + self.fp)
    }

    /// Row-normalized matrix, rows = true class (Normal, LVH), columns =
    /// predicted class (Normal, LVH).
    pub fn normalized(&self) -> [[f64; 2]; 2] {
        let n = (self.tn + self.fp).max(1) as f64;
        let p = (self.tp + self.fn_).max(1) as f64;
        [
            [self.tn as f64 / n, self.fp as f64 / n],
            [self.fn_ as f64 / p, self.tp as f64 / p],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub bsw: ConfusionMatrix,
    pub sokolow_lyon: ConfusionMatrix,
    pub cornell: ConfusionMatrix,
}

impl Evaluation {
    pub fn from_reports(reports: &[DiagnosisReport]) -> Self {
        let pick = |f: fn(&DiagnosisReport) -> Decision| {
            ConfusionMatrix::from_pairs(reports.iter().map(|r| (r.true_label, f(r))))
        };
        Self {
            bsw: pick(|r| r.bsw_decision),
            sokolow_lyon: pick(|r| r.sokolow_lyon),
            cornell: pick(|r| r.cornell),
        }
    }

    pub fn methods(&self) -> [(&'static str, &ConfusionMatrix); 3] {
        [
            ("bsw", &self.bsw),
            ("sokolow_lyon", &self.sokolow_lyon),
            ("modified_cornell", &self.cornell),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "method,tp,fp,tn,fn,sensitivity,specificity,norm_tn,norm_fp,norm_fn,norm_tp\n",
        );
        for (name, m) in self.methods() {
            let n = m.normalized();
            let _ = writeln!(
                out,
                "{name},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                m.tp,
                m.fp,
                m.tn,
                m.fn_,
                m.sensitivity(),
                m.specificity(),
                n[0][0],
                n[0][1],
                n[1][0],
                n[1][1]
            );
        }
        out
    }
}

mod common;

use bsw_core::diagnosis::{
    measure, modified_cornell, prototype_distance, sokolow_lyon, ConfusionMatrix, Decision, DiagnosisConfig,
};
use bsw_core::io::library::{library_from_json, library_to_json};
use bsw_core::matching::{max_weight_matching, AffinityMatrix};
use bsw_core::preprocess::filter::highpass_baseline;
use bsw_core::preprocess::rpeak::{detect_r_peaks, DetectorConfig};
use bsw_core::preprocess::{mean_beat as average_beats, segment_beats};
use bsw_core::screening::vh;
use bsw_core::warp::{loss, loss_terms, WarpConfig, WarpResult};
use bsw_core::{BeatSet, ClassLabel, Label, LeadId, LibrarySet, MeanBeat, Prototype, PrototypeLibrary};
use common::*;
use proptest::prelude::*;

fn signal(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, len)
}

fn beats(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(signal(T), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn highpass_is_linear(x in signal(1200), y in signal(1200), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let hx = highpass_baseline(&x, 500.0, 0.5, 4).unwrap();
        let hy = highpass_baseline(&y, 500.0, 0.5, 4).unwrap();
        let hm = highpass_baseline(&mix, 500.0, 0.5, 4).unwrap();
        for i in 0..mix.len() {
            prop_assert!((hm[i] - (a * hx[i] + b * hy[i])).abs() <= 1e-9);
        }
    }

    #[test]
    fn peaks_respect_refractory(x in signal(2000), spikes in prop::collection::vec(0usize..2000, 3..20)) {
        let mut x = x.iter().map(|v| v * 0.05).collect::<Vec<_>>();
        for s in spikes { x[s] += 4.0; }
        if let Ok(p) = detect_r_peaks(&x, 500.0, &DetectorConfig::default()) {
            prop_assert!(p.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] >= 150));
        }
    }

    #[test]
    fn segment_count_is_peaks_minus_two(gaps in prop::collection::vec(150usize..600, 2..12)) {
        let mut peaks = vec![100usize];
        for g in gaps { let last = *peaks.last().unwrap(); peaks.push(last + g); }
        let sig: Vec<f64> = (0..peaks.last().unwrap() + 100).map(|t| (t as f64 * 0.01).sin()).collect();
        let set = segment_beats(LeadId::II, &sig, &peaks).unwrap();
        prop_assert_eq!(set.len(), peaks.len() - 2);
        prop_assert!(set.beats().iter().all(|b| b.len() == T));
    }

    #[test]
    fn mean_beat_commutes_with_scaling(hs in beats(3), alpha in -4.0f64..4.0) {
        let set = BeatSet::new(LeadId::V2, hs).unwrap();
        let m = average_beats("x", &set).unwrap();
        let ms = average_beats("x", &set.scaled(alpha)).unwrap();
        for (a, b) in m.samples.iter().zip(&ms.samples) {
            prop_assert!((alpha * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn vh_ignores_scale_and_offset(hs in beats(3), alpha in 0.1f64..10.0, c in -5.0f64..5.0) {
        let set = BeatSet::new(LeadId::V3, hs.clone()).unwrap();
        let base = vh(&set).unwrap();
        let scaled = vh(&set.scaled(alpha)).unwrap();
        let shifted = BeatSet::new(LeadId::V3, hs.iter().map(|b| b.iter().map(|v| v + c).collect()).collect()).unwrap();
        prop_assert!(((scaled - base) / base).abs() <= 1e-12);
        prop_assert!(((vh(&shifted).unwrap() - base) / base).abs() <= 1e-12);
    }

    #[test]
    fn matching_partitions_indices(n in 2usize..12, seed in 0u64..1000) {
        let mut r = rng(seed);
        let d = random_affinity(n, &mut r);
        let m = max_weight_matching(&d, 1e-9).unwrap();
        let mut seen: Vec<usize> = m.pairs.iter().flat_map(|&(i, j)| [i, j]).chain(m.unmatched.iter().copied()).collect();
        seen.sort();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        prop_assert!(m.pairs.iter().all(|&(i, j)| i < j));
        prop_assert_eq!(m.unmatched.len(), n % 2);
    }

    #[test]
    fn matching_matches_brute_force_with_zero_distances(seed in 0u64..500) {
        let mut r = rng(seed);
        let mut d = random_affinity(6, &mut r);
        d.set(0, 3, 0.0);
        let w = |i: usize, j: usize| d.weight(i, j, 1e-9);
        let m = max_weight_matching(&d, 1e-9).unwrap();
        prop_assert_eq!(m.total_weight(w), brute_force_best(6, &w).0);
    }

    #[test]
    fn library_round_trips(
        protos in prop::collection::vec((signal(T), 1usize..40), 1..4),
        lead_idx in 0usize..12,
        lvh in any::<bool>(),
    ) {
        let mut set = LibrarySet::default();
        set.insert(PrototypeLibrary {
            lead: LeadId::ALL[lead_idx],
            class_label: if lvh { ClassLabel::Lvh } else { ClassLabel::Normal },
            beat_length: T,
            prototypes: protos
                .into_iter()
                .map(|(samples, occ)| Prototype { samples, occurrence: occ, lineage: (0..occ).map(|i| format!("r{i}")).collect() })
                .collect(),
        });
        prop_assert_eq!(library_from_json(&library_to_json(&set).unwrap()).unwrap(), set);
    }

    #[test]
    fn distance_is_zero_only_at_identity(r in prop::collection::vec(0.5f64..1.5, T), s in prop::collection::vec(-20.0f64..20.0, T)) {
        let cfg = DiagnosisConfig::default();
        let res = WarpResult { r, s, loss: 0.0, converged: true, iters: 0 };
        let d = prototype_distance(&res, &cfg);
        let identity = res.r.iter().all(|&v| v == 1.0) && res.s.iter().all(|&v| v == 0.0);
        prop_assert_eq!(d == 0.0, identity);
        prop_assert!(d >= 0.0);
    }

    #[test]
    fn loss_terms_sum_to_loss(f in signal(T), g in signal(T), r in prop::collection::vec(0.2f64..2.0, T), s in prop::collection::vec(-150.0f64..150.0, T)) {
        let cfg = WarpConfig::default();
        let terms = loss_terms(&f, &g, &r, &s, &cfg).unwrap();
        let total = loss(&f, &g, &r, &s, &cfg).unwrap();
        prop_assert!((terms.total(&cfg) - total).abs() <= 1e-9 * total.abs().max(1e-300));
        let inside: Vec<f64> = s.iter().map(|v| v.clamp(-100.0, 100.0)).collect();
        prop_assert_eq!(loss_terms(&f, &g, &r, &inside, &cfg).unwrap().bound_penalty, 0.0);
    }

    #[test]
    fn voltage_criteria_are_monotone(amps in prop::collection::vec(-3.0f64..3.0, 12), alpha in 1.0f64..4.0) {
        let cfg = DiagnosisConfig::default();
        let beats: Vec<MeanBeat> = LeadId::ALL
            .iter()
            .zip(&amps)
            .map(|(&l, &a)| mean_beat("m", l, gaussian_beat(&[(250.0, 8.0, a), (272.0, 7.0, -a.abs() * 0.8)])))
            .collect();
        let scaled: Vec<MeanBeat> = beats.iter().map(|b| MeanBeat { samples: b.samples.iter().map(|v| v * alpha).collect(), ..b.clone() }).collect();
        let (m, ms) = (measure(&beats, &cfg).unwrap(), measure(&scaled, &cfg).unwrap());
        if sokolow_lyon(&m, &cfg).0 == Decision::Lvh { prop_assert_eq!(sokolow_lyon(&ms, &cfg).0, Decision::Lvh); }
        if modified_cornell(&m, &cfg).0 == Decision::Lvh { prop_assert_eq!(modified_cornell(&ms, &cfg).0, Decision::Lvh); }
    }

    #[test]
    fn confusion_totals_equal_cohort(pairs in prop::collection::vec((0u8..3, any::<bool>()), 0..200)) {
        let labelled: Vec<(Label, Decision)> = pairs
            .iter()
            .map(|&(l, p)| {
                let label = [Label::Normal, Label::Lvh, Label::Unknown][l as usize];
                (label, if p { Decision::Lvh } else { Decision::Normal })
            })
            .collect();
        let m = ConfusionMatrix::from_pairs(labelled.iter().copied());
        let known = labelled.iter().filter(|(l, _)| *l != Label::Unknown).count();
        prop_assert_eq!(m.total(), known);
        prop_assert_eq!(m.tp + m.fn_, labelled.iter().filter(|(l, _)| *l == Label::Lvh).count());
    }
}

#[test]
fn affinity_matrix_is_symmetric_with_infinite_diagonal() {
    let d = AffinityMatrix::from_fn(5, |i, j| (i + j) as f64);
    for i in 0..5 {
        assert!(d.get(i, i).is_infinite());
        for j in 0..5 {
            assert_eq!(d.get(i, j), d.get(j, i));
        }
    }
}

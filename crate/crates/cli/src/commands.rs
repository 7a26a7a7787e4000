use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use bsw_core::diagnosis::{diagnose as diagnose_record, DiagnosisReport};
use bsw_core::io::{confusion_svg, library_svg, load_library, save_library, write_atomic, write_wfdb, BeatBundle, Band};
use bsw_core::preprocess::preprocess_record;
use bsw_core::prototype::{build_all_libraries, subsample, RecordMeanBeats};
use bsw_core::synth::{synthetic_cohort, SynthConfig};
use bsw_core::{ClassLabel, Evaluation, LeadId, PipelineConfig};
use rayon::prelude::*;
use serde::Serialize;
use tracing::{info, warn};

use crate::inputs::{discover_records, ensure_dir, json_files, ptbxl_records, read_id_list, read_labels};

const NO_INPUT: u8 = 2;

const BUNDLE_SUFFIX: &str = ".beats.json";
const REPORT_SUFFIX: &str = ".report.json";

fn no_input(what: &str, dir: &Path) -> ExitCode {
    warn!("no {what} found in {}", dir.display());
    eprintln!("no {what} found");
    ExitCode::from(NO_INPUT)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn load_bundles(dir: &Path) -> Result<Vec<BeatBundle>> {
    json_files(dir, BUNDLE_SUFFIX)?
        .par_iter()
        .map(|p| BeatBundle::load(p).with_context(|| format!("loading {}", p.display())))
        .collect()
}

pub fn preprocess(
    cfg: &PipelineConfig,
    input: &Path,
    out: &Path,
    labels: Option<&Path>,
    ptbxl: bool,
) -> Result<ExitCode> {
    let mut tasks = if ptbxl {
        ptbxl_records(input)?
    } else {
        discover_records(input, labels)?
    };
    if let Some(p) = labels {
        let table = read_labels(p)?;
        for t in &mut tasks {
            if let Some(l) = table.get(&t.id) {
                t.label = Some(*l);
            }
        }
    }
    if tasks.is_empty() {
        return Ok(no_input("records", input));
    }
    ensure_dir(out)?;
    let outcomes: Vec<(String, std::result::Result<usize, String>)> = tasks
        .par_iter()
        .map(|task| {
            let run = || -> bsw_core::Result<usize> {
                let rec = task.load(cfg.io.csv_sample_rate_hz)?;
                let beats = preprocess_record(&rec, &cfg.preprocess)?;
                let bundle = BeatBundle::from_record_beats(&beats, rec.sample_rate_hz())?;
                bundle.save(&out.join(format!("{}{BUNDLE_SUFFIX}", task.id)))?;
                Ok(bundle.n_beats)
            };
            let res = run().map_err(|e| e.to_string());
            match &res {
                Ok(n) => info!(record = %task.id, stage = "preprocess", beats = n, "ok"),
                Err(e) => warn!(record = %task.id, stage = "preprocess", error = %e, "failed"),
            }
            (task.id.clone(), res)
        })
        .collect();

    let mut summary = String::from("record_id,status,detail\n");
    let mut failed = 0;
    for (id, res) in &outcomes {
        match res {
            Ok(n) => writeln!(summary, "{id},ok,{n} beats")?,
            Err(e) => {
                failed += 1;
                writeln!(summary, "{id},failed,\"{}\"", e.replace('"', "'"))?
            }
        }
    }
    write_atomic(&out.join("preprocess_summary.csv"), summary.as_bytes())?;
    info!(records = outcomes.len(), failed, "preprocess finished");
    Ok(ExitCode::SUCCESS)
}

pub fn screen(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<ExitCode> {
    let bundles = load_bundles(input)?;
    if bundles.is_empty() {
        return Ok(no_input("beat bundles", input));
    }
    ensure_dir(out)?;
    let threshold = cfg.screening.vh_threshold;
    let mut table = String::from("record_id,label,eligible,max_vh");
    for l in LeadId::ALL {
        write!(table, ",vh_{l}")?;
    }
    table.push_str(",reason\n");
    let mut eligible = String::new();
    for b in &bundles {
        let rep = b.variability(threshold);
        info!(record = %b.record_id, stage = "screen", max_vh = rep.max_vh, eligible = rep.eligible);
        write!(table, "{},{},{},{}", b.record_id, b.label, rep.eligible, rep.max_vh)?;
        for (_, v) in &rep.per_lead_vh {
            match v {
                Some(v) => write!(table, ",{v}")?,
                None => table.push(','),
            }
        }
        writeln!(table, ",{}", rep.reason.unwrap_or_default())?;
        if rep.eligible {
            writeln!(eligible, "{}", b.record_id)?;
        }
    }
    write_atomic(&out.join("screening.csv"), table.as_bytes())?;
    write_atomic(&out.join("eligible.txt"), eligible.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct LibrarySummary {
    class_label: ClassLabel,
    lead: LeadId,
    prototypes: usize,
    occurrences: Vec<usize>,
}

#[derive(Serialize)]
struct BuildManifest {
    rng_seed: u64,
    donors: BTreeMap<ClassLabel, Vec<String>>,
    libraries: Vec<LibrarySummary>,
}

pub fn build_library(cfg: &PipelineConfig, input: &Path, out: &Path, exclude: Option<&Path>) -> Result<ExitCode> {
    let exclude = exclude.map(read_id_list).transpose()?.unwrap_or_default();
    let bundles = load_bundles(input)?;
    if bundles.is_empty() {
        return Ok(no_input("beat bundles", input));
    }
    let mut by_class: BTreeMap<ClassLabel, BTreeMap<String, &BeatBundle>> = BTreeMap::new();
    for b in &bundles {
        let Some(class) = b.label.class() else { continue };
        if exclude.contains(&b.record_id) {
            continue;
        }
        let rep = b.variability(cfg.screening.vh_threshold);
        if !rep.eligible {
            info!(record = %b.record_id, stage = "build", "skipped: {}", rep.reason.unwrap_or_default());
            continue;
        }
        by_class.entry(class).or_default().insert(b.record_id.clone(), b);
    }

    let mut pools: BTreeMap<ClassLabel, Vec<RecordMeanBeats>> = BTreeMap::new();
    let mut donors = BTreeMap::new();
    for (k, class) in ClassLabel::ALL.into_iter().enumerate() {
        let members = by_class.remove(&class).unwrap_or_default();
        let keep = match class {
            ClassLabel::Normal => cfg.prototype.normal_pool,
            ClassLabel::Lvh => cfg.prototype.lvh_pool,
        };
        let ids: Vec<String> = members.keys().cloned().collect();
        let chosen = subsample(&ids, keep, cfg.rng_seed.wrapping_add(k as u64));
        info!(class = %class, eligible = ids.len(), kept = chosen.len(), stage = "build", "donor pool");
        pools.insert(class, chosen.iter().map(|id| members[id].mean_beats()).collect());
        donors.insert(class, chosen);
    }

    let set = build_all_libraries(&pools, &cfg.warp, &cfg.prototype)?;
    ensure_dir(out)?;
    save_library(&set, &out.join("library.json"))?;
    let libraries = set
        .iter()
        .map(|l| LibrarySummary {
            class_label: l.class_label,
            lead: l.lead,
            prototypes: l.prototypes.len(),
            occurrences: l.prototypes.iter().map(|p| p.occurrence).collect(),
        })
        .collect::<Vec<_>>();
    for l in &libraries {
        info!(class = %l.class_label, lead = %l.lead, prototypes = l.prototypes, stage = "build", "library");
    }
    write_json(
        &out.join("build_manifest.json"),
        &BuildManifest {
            rng_seed: cfg.rng_seed,
            donors,
            libraries,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn diagnose(
    cfg: &PipelineConfig,
    input: &Path,
    library: &Path,
    out: &Path,
    include: Option<&Path>,
) -> Result<ExitCode> {
    let libs = load_library(library).with_context(|| format!("loading {}", library.display()))?;
    let include = include.map(read_id_list).transpose()?;
    let bundles: Vec<BeatBundle> = load_bundles(input)?
        .into_iter()
        .filter(|b| include.as_ref().map_or(true, |s| s.contains(&b.record_id)))
        .collect();
    if bundles.is_empty() {
        return Ok(no_input("beat bundles", input));
    }
    ensure_dir(out)?;
    let failures: usize = bundles
        .par_iter()
        .map(|b| {
            let run = || -> Result<DiagnosisReport> {
                let rep = diagnose_record(&b.record_id, b.label, &b.mean_beats(), &libs, &cfg.warp, &cfg.diagnosis)?;
                write_json(&out.join(format!("{}{REPORT_SUFFIX}", b.record_id)), &rep)?;
                Ok(rep)
            };
            match run() {
                Ok(r) => {
                    info!(
                        record = %b.record_id,
                        stage = "diagnose",
                        bsw = ?r.bsw_decision,
                        sokolow_lyon = ?r.sokolow_lyon,
                        cornell = ?r.cornell,
                        total_normal = r.total_normal,
                        total_lvh = r.total_lvh
                    );
                    0
                }
                Err(e) => {
                    warn!(record = %b.record_id, stage = "diagnose", error = %format!("{e:#}"), "failed");
                    1
                }
            }
        })
        .sum();
    info!(records = bundles.len(), failed = failures, "diagnose finished");
    Ok(ExitCode::SUCCESS)
}

pub fn evaluate(input: &Path, out: &Path) -> Result<ExitCode> {
    let reports = json_files(input, REPORT_SUFFIX)?
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<DiagnosisReport>(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    if reports.is_empty() {
        return Ok(no_input("diagnosis reports", input));
    }
    let eval = Evaluation::from_reports(&reports);
    ensure_dir(out)?;
    let csv = eval.to_csv();
    write_atomic(&out.join("evaluation.csv"), csv.as_bytes())?;
    write_atomic(&out.join("confusion.svg"), confusion_svg(&eval).as_bytes())?;
    print!("{csv}");
    Ok(ExitCode::SUCCESS)
}

/// Approximate wave regions of a 500-sample mean beat centred on R.
fn wave_bands() -> Vec<Band> {
    [(120, 205, "P"), (220, 285, "QRS"), (300, 430, "T")]
        .into_iter()
        .map(|(start, end, label)| Band { start, end, label: label.to_string() })
        .collect()
}

pub fn plot(library: &Path, out: &Path, bands: bool) -> Result<ExitCode> {
    let libs = load_library(library).with_context(|| format!("loading {}", library.display()))?;
    if libs.is_empty() {
        return Ok(no_input("libraries", library));
    }
    ensure_dir(out)?;
    let bands = if bands { wave_bands() } else { Vec::new() };
    for lib in libs.iter() {
        let svg = library_svg(lib, &bands)?;
        let name = format!("{}_{}.svg", lib.class_label, lib.lead);
        write_atomic(&out.join(&name), svg.as_bytes())?;
        info!(file = %name, stage = "plot", "written");
    }
    Ok(ExitCode::SUCCESS)
}

pub fn synth(cfg: &PipelineConfig, out: &Path, normal: usize, lvh: usize) -> Result<ExitCode> {
    ensure_dir(out)?;
    let records = synthetic_cohort(normal, lvh, cfg.rng_seed, &SynthConfig::default())?;
    let mut labels = String::from("record_id,label\n");
    for rec in &records {
        write_wfdb(rec, out, 1000.0)?;
        writeln!(labels, "{},{}", rec.record_id, rec.label)?;
    }
    write_atomic(&out.join("labels.csv"), labels.as_bytes())?;
    info!(records = records.len(), stage = "synth", "written");
    Ok(ExitCode::SUCCESS)
}

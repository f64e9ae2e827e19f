//! Subcommand implementations: wiring between the library and the filesystem.

use std::fs;
use std::path::{Path, PathBuf};

use bicoh_core::bispectrum::{bicoherence, BicoherenceResult};
use bicoh_core::config::{build_scenario, ScenarioConfig};
use bicoh_core::error::{Error, Result};
use bicoh_core::export;
use bicoh_core::manifest::RunManifest;
use bicoh_core::signal::SignalRecord;
use bicoh_core::spectral::{segment_spectra, spectrogram, SegmentSpectra, SegmentationPlan};
use bicoh_core::surrogate::{
    filter_bicoherence_multi, surrogate_distribution, FilterMask, SurvivorCluster,
};

use crate::{AnalyzeArgs, FilterArgs, OutputArgs, PlanArgs, ReportArgs, SimulateArgs, OUT_DIR_ENV};

/// Which artifact kinds to write.
#[derive(Clone, Copy)]
struct Formats {
    csv: bool,
    bin: bool,
    png: bool,
}

impl Formats {
    fn parse(spec: &str) -> Result<Self> {
        let mut formats = Formats {
            csv: false,
            bin: false,
            png: false,
        };
        for item in spec.split(',') {
            match item.trim().to_ascii_lowercase().as_str() {
                "csv" => formats.csv = true,
                "bin" => formats.bin = true,
                "png" => formats.png = true,
                "" => {}
                other => {
                    return Err(Error::InvalidParameter {
                        name: "format",
                        reason: format!("unknown format `{other}` (expected csv, bin or png)"),
                    })
                }
            }
        }
        Ok(formats)
    }
}

fn resolve_out_dir(output: &OutputArgs) -> Result<PathBuf> {
    let dir = output
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn load_signal(plan: &PlanArgs) -> Result<SignalRecord> {
    let path = &plan.signal;
    let is_raw = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("f64"))
        .unwrap_or(false);
    if is_raw {
        let rate = plan.sample_rate.ok_or(Error::InvalidParameter {
            name: "sample_rate",
            reason: "raw .f64 signals carry no time axis; pass --sample-rate".into(),
        })?;
        export::read_signal_f64(path, rate, "signal")
    } else {
        export::read_signal_csv(path, plan.sample_rate, "signal")
    }
}

fn build_plan(plan: &PlanArgs, sample_rate: f64) -> Result<SegmentationPlan> {
    SegmentationPlan::new(plan.segment_length, plan.overlap, plan.window, sample_rate)
}

fn plan_snapshot(plan: &SegmentationPlan, manifest: &mut RunManifest) {
    manifest
        .config
        .insert("segment_length".into(), plan.segment_length().to_string());
    manifest
        .config
        .insert("overlap".into(), plan.overlap_fraction().to_string());
    manifest
        .config
        .insert("window".into(), plan.window().name().into());
    manifest
        .config
        .insert("sample_rate".into(), plan.sample_rate().to_string());
}

fn derived_snapshot(
    plan: &SegmentationPlan,
    spectra: &SegmentSpectra,
    manifest: &mut RunManifest,
) {
    manifest.add_derived("segments", spectra.segment_count());
    manifest.add_derived("half_length", plan.half_length());
    manifest.add_derived("delta_f_hz", plan.delta_f());
    manifest.add_derived("nyquist_hz", plan.nyquist());
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let formats = Formats::parse(&args.output.format)?;
    let out_dir = resolve_out_dir(&args.output)?;
    let text = fs::read_to_string(&args.config)?;
    let config = ScenarioConfig::parse(&text)?;
    let built = build_scenario(&config, args.seed)?;

    let mut manifest = RunManifest::new("simulate", Some(built.seed));
    manifest.set_config(config.to_key_values());
    manifest.add_derived("samples", built.signal.len());
    manifest.add_derived("nonlinearity_e", built.nonlinearity);
    manifest.add_derived("signal_rms", built.signal.rms());

    if formats.csv {
        export::write_signal_csv(&out_dir.join("signal.csv"), &built.signal)?;
        manifest.record_output(&out_dir, "signal.csv")?;
    }
    if formats.bin {
        export::write_signal_f64(&out_dir.join("signal.f64"), &built.signal)?;
        manifest.record_output(&out_dir, "signal.f64")?;
    }
    manifest.write(&out_dir.join("simulate_manifest.json"))?;
    println!(
        "simulated {} samples @ {} Hz (seed {}, E = {})",
        built.signal.len(),
        built.signal.sample_rate(),
        built.seed,
        built.nonlinearity
    );
    Ok(())
}

pub fn analyze(args: AnalyzeArgs) -> Result<()> {
    let formats = Formats::parse(&args.output.format)?;
    let out_dir = resolve_out_dir(&args.output)?;
    let signal = load_signal(&args.plan)?;
    let plan = build_plan(&args.plan, signal.sample_rate())?;
    let spectra = segment_spectra(&signal, &plan)?;
    let result = bicoherence(&spectra)?;
    let gram = spectrogram(&signal, &plan)?;

    let mut manifest = RunManifest::new("analyze", None);
    plan_snapshot(&plan, &mut manifest);
    derived_snapshot(&plan, &spectra, &mut manifest);

    if formats.csv {
        export::write_bicoherence_csv(&out_dir.join("bicoherence.csv"), &result)?;
        manifest.record_output(&out_dir, "bicoherence.csv")?;
        export::write_spectrogram_csv(&out_dir.join("spectrogram.csv"), &gram)?;
        manifest.record_output(&out_dir, "spectrogram.csv")?;
    }
    if formats.png {
        let k_max = result.region().n() / 4;
        export::heatmap_bicoherence(&out_dir.join("bicoherence.png"), &result, Some(k_max))?;
        manifest.record_output(&out_dir, "bicoherence.png")?;
        export::heatmap_spectrogram(&out_dir.join("spectrogram.png"), &gram)?;
        manifest.record_output(&out_dir, "spectrogram.png")?;
    }
    manifest.write(&out_dir.join("analyze_manifest.json"))?;
    println!(
        "segments N = {}, delta_f = {} Hz, nyquist = {} Hz",
        spectra.segment_count(),
        plan.delta_f(),
        plan.nyquist()
    );
    Ok(())
}

fn cluster_line(cluster: &SurvivorCluster) -> String {
    format!(
        "size {} at ({:.3}, {:.3}) Hz",
        cluster.size(),
        cluster.centroid_hz.0,
        cluster.centroid_hz.1
    )
}

fn filter_report(mask: &FilterMask, result: &BicoherenceResult, k_max: usize) -> String {
    let plan = mask.plan();
    let survivors_plotted = mask.survivors_below(k_max).len();
    let defined_plotted = mask.defined_cell_count_below(k_max);
    let mut lines = vec![
        format!("alpha = {}", mask.alpha()),
        format!("realizations = {}", mask.realizations()),
        format!("segments = {}", result.segment_count()),
        format!("defined_cells = {}", mask.defined_cell_count()),
        format!("survivors = {}", mask.survivor_count()),
        format!(
            "expected_false_positives = {:.3}",
            mask.expected_false_positives()
        ),
        format!(
            "plotted_subregion = f1 <= {:.3} Hz (k <= {})",
            plan.bin_frequency(k_max),
            k_max
        ),
        format!("survivors_plotted = {survivors_plotted}"),
        format!(
            "expected_false_positives_plotted = {:.3}",
            defined_plotted as f64 * (1.0 - mask.alpha())
        ),
    ];
    let clusters = mask.clusters();
    match clusters.first() {
        Some(largest) => {
            lines.push(format!("largest_cluster = {}", cluster_line(largest)));
            for cluster in clusters.iter().take(10) {
                lines.push(format!("cluster: {}", cluster_line(cluster)));
            }
        }
        None => lines.push("largest_cluster = none".into()),
    }
    lines.join("\n") + "\n"
}

pub fn filter(args: FilterArgs) -> Result<()> {
    let formats = Formats::parse(&args.output.format)?;
    let out_dir = resolve_out_dir(&args.output)?;
    let signal = load_signal(&args.plan)?;
    let plan = build_plan(&args.plan, signal.sample_rate())?;
    let spectra = segment_spectra(&signal, &plan)?;
    let result = bicoherence(&spectra)?;
    let masks = filter_bicoherence_multi(
        &result,
        &spectra,
        &[args.alpha],
        args.realizations,
        args.seed,
        args.jobs,
    )?;
    let mask = &masks[0];
    let k_max = args.k_max.unwrap_or(result.region().n() / 4);

    let mut manifest = RunManifest::new("filter", Some(args.seed));
    plan_snapshot(&plan, &mut manifest);
    manifest
        .config
        .insert("alpha".into(), args.alpha.to_string());
    manifest
        .config
        .insert("realizations".into(), args.realizations.to_string());
    derived_snapshot(&plan, &spectra, &mut manifest);
    manifest.add_derived("survivors", mask.survivor_count());
    manifest.add_derived(
        "expected_false_positives",
        mask.expected_false_positives(),
    );

    let report = filter_report(mask, &result, k_max);
    if formats.csv {
        export::write_mask_csv(&out_dir.join("mask.csv"), mask)?;
        manifest.record_output(&out_dir, "mask.csv")?;
    }
    fs::write(out_dir.join("report.txt"), &report)?;
    manifest.record_output(&out_dir, "report.txt")?;
    if formats.png {
        export::heatmap_mask_overlay(
            &out_dir.join("mask_overlay.png"),
            &result,
            mask,
            Some(k_max),
        )?;
        manifest.record_output(&out_dir, "mask_overlay.png")?;
    }
    if let Some(cell_spec) = &args.histogram_cell {
        let (k, l) = parse_cell(cell_spec)?;
        let dist = surrogate_distribution(&spectra, (k, l), args.realizations, args.seed)?;
        let name = format!("histogram_{k}_{l}.csv");
        export::write_histogram_csv(&out_dir.join(&name), &dist, 100)?;
        manifest.record_output(&out_dir, &name)?;
    }
    manifest.write(&out_dir.join("filter_manifest.json"))?;
    print!("{report}");
    Ok(())
}

fn parse_cell(spec: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidParameter {
        name: "histogram_cell",
        reason: format!("expected `k,l` bin pair, got `{spec}`"),
    };
    let (k, l) = spec.split_once(',').ok_or_else(bad)?;
    Ok((
        k.trim().parse().map_err(|_| bad())?,
        l.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn report(args: ReportArgs) -> Result<()> {
    let manifest = RunManifest::read(&args.manifest)?;
    let base = args
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    println!(
        "command = {} (tool {} {}, created {})",
        manifest.command, manifest.tool, manifest.version, manifest.created_utc
    );
    if let Some(seed) = manifest.master_seed {
        println!("master_seed = {seed}");
    }
    for (key, value) in &manifest.config {
        println!("config.{key} = {value}");
    }
    for (key, value) in &manifest.derived {
        println!("derived.{key} = {value}");
    }
    let checks = manifest.verify(&base);
    let mut all_ok = true;
    for check in &checks {
        println!(
            "output {} ... {}",
            check.path,
            if check.ok { "ok" } else { &check.detail }
        );
        all_ok &= check.ok;
    }
    if !all_ok {
        return Err(Error::InvalidParameter {
            name: "manifest",
            reason: "one or more outputs failed hash verification".into(),
        });
    }
    Ok(())
}

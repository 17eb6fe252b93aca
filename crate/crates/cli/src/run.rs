use std::fs;
use std::path::{Path, PathBuf};

use aoe_core::analysis::{area_of_effectiveness, build_policy_maps, Ecdf, PolicyMaps};
use aoe_core::montecarlo::{genie_oracle_mc, pixel_seed};
use aoe_core::placement::full_catalog_candidates;
use aoe_core::{genie_evaluate, placement_search, GridMap, Placement, RadioGrids, Scenario};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::options::{CdfArgs, Command, Format, Input, MapsArgs, MonteCarloArgs, PlanArgs, PolicyArg};

/// Agreement band of the Monte Carlo cross-check, in standard errors.
const MC_K_SIGMA: f64 = 3.0;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Maps(args) => maps(args, false),
        Command::Aoe(args) => maps(args, true),
        Command::Cdf(args) => cdf(args),
        Command::Plan(args) => plan(args),
        Command::Validate(args) => {
            let s = Scenario::from_path(&args.scenario)?;
            println!(
                "{}: ok ({}x{} pixels, {} access points, {} models)",
                args.scenario.display(),
                s.cols(),
                s.rows(),
                s.access_points.len(),
                s.models.len()
            );
            Ok(())
        }
    }
}

struct Loaded {
    scenario: Scenario,
    grids: RadioGrids,
    threshold: f64,
}

fn load(input: &Input) -> Result<Loaded, CliError> {
    let scenario = Scenario::from_path(&input.scenario)?;
    let threshold = input.q_th.unwrap_or(scenario.application.effectiveness_threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(CliError::Config(format!("--q-th {threshold} outside [0, 1]")));
    }
    let mut grids = RadioGrids::build(&scenario);
    for (ap_id, path) in &input.rss {
        grids.import_rss_file(path, *ap_id, &scenario)?;
    }
    Ok(Loaded {
        scenario,
        grids,
        threshold,
    })
}

fn check_mc(mc: &MonteCarloArgs) -> Result<(), CliError> {
    if mc.mc && mc.samples == 0 {
        return Err(CliError::Config("--samples must be at least 1".into()));
    }
    Ok(())
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io(aoe_core::Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    write_file(path, text)
}

fn write_raster(
    out: &Path,
    stem: &str,
    map: &GridMap,
    format: Format,
    range: Option<(f64, f64)>,
) -> Result<(), CliError> {
    if format.csv() {
        let path = out.join(format!("{stem}.csv"));
        map.write_csv(&path)?;
    }
    if format.pgm() {
        let path = out.join(format!("{stem}.pgm"));
        map.write_pgm(&path, range)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Summary {
    cols: usize,
    rows: usize,
    pixel_size_m: f64,
    valid_pixels: usize,
    valid_area_m2: f64,
    threshold: f64,
    policies: Vec<PolicySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<McSummary>,
}

#[derive(Debug, Serialize)]
struct PolicySummary {
    policy: &'static str,
    aoe_pixels: usize,
    aoe_area_m2: f64,
    aoe_fraction: f64,
    mean_effectiveness: f64,
    mean_compute_load_flops: f64,
    mean_activity_s: f64,
}

#[derive(Debug, Serialize)]
struct McSummary {
    n_samples: u64,
    seed: u64,
    k_sigma: f64,
    pixels: usize,
    agree_effectiveness: usize,
    agree_compute_load: usize,
    agree_activity: usize,
    agree_all: usize,
    fraction_all: f64,
}

fn summarize(loaded: &Loaded, maps: &[PolicyMaps], mc: Option<McSummary>) -> Summary {
    let g = &loaded.grids;
    let valid = g.mask.iter().filter(|&&m| m).count();
    let policies = maps
        .iter()
        .map(|m| {
            let aoe = area_of_effectiveness(&m.effectiveness, loaded.threshold);
            PolicySummary {
                policy: m.policy.name(),
                aoe_pixels: aoe.pixels,
                aoe_area_m2: aoe.area_m2,
                aoe_fraction: aoe.fraction,
                mean_effectiveness: m.effectiveness.mean().unwrap_or(0.0),
                mean_compute_load_flops: m.compute_load.mean().unwrap_or(0.0),
                mean_activity_s: m.activity.mean().unwrap_or(0.0),
            }
        })
        .collect();
    Summary {
        cols: g.cols,
        rows: g.rows,
        pixel_size_m: g.pixel_size_m,
        valid_pixels: valid,
        valid_area_m2: valid as f64 * g.pixel_size_m * g.pixel_size_m,
        threshold: loaded.threshold,
        policies,
        monte_carlo: mc,
    }
}

/// Compares the closed-form genie outcome with the sampling oracle at every
/// valid pixel. Each pixel draws from its own seed.
fn monte_carlo(loaded: &Loaded, args: &MonteCarloArgs) -> McSummary {
    let (s, g) = (&loaded.scenario, &loaded.grids);
    let pixels: Vec<usize> = (0..g.len()).filter(|&i| g.mask[i]).collect();
    let flags: Vec<[bool; 3]> = pixels
        .par_iter()
        .map(|&i| {
            let exact = genie_evaluate(i, g, s);
            let est = genie_oracle_mc(i, g, s, args.samples, pixel_seed(args.seed, i));
            [
                est.effectiveness.agrees_with(exact.effectiveness, MC_K_SIGMA),
                est.expected_compute_flops.agrees_with(exact.expected_compute_flops, MC_K_SIGMA),
                est.expected_activity_s.agrees_with(exact.expected_activity_s, MC_K_SIGMA),
            ]
        })
        .collect();
    let count = |k: usize| flags.iter().filter(|f| f[k]).count();
    let all = flags.iter().filter(|f| f.iter().all(|&b| b)).count();
    McSummary {
        n_samples: args.samples,
        seed: args.seed,
        k_sigma: MC_K_SIGMA,
        pixels: pixels.len(),
        agree_effectiveness: count(0),
        agree_compute_load: count(1),
        agree_activity: count(2),
        agree_all: all,
        fraction_all: if pixels.is_empty() { 1.0 } else { all as f64 / pixels.len() as f64 },
    }
}

fn policy_maps(loaded: &Loaded, policy: PolicyArg) -> Vec<PolicyMaps> {
    policy
        .policies()
        .into_iter()
        .map(|p| build_policy_maps(p, &loaded.scenario, &loaded.grids))
        .collect()
}

fn maybe_mc(loaded: &Loaded, policy: PolicyArg, mc: &MonteCarloArgs) -> Option<McSummary> {
    let has_genie = matches!(policy, PolicyArg::Genie | PolicyArg::All);
    (mc.mc && has_genie).then(|| monte_carlo(loaded, mc))
}

fn maps(args: MapsArgs, aoe_only: bool) -> Result<(), CliError> {
    check_mc(&args.mc)?;
    let loaded = load(&args.input)?;
    let maps = policy_maps(&loaded, args.policy);
    let mc = maybe_mc(&loaded, args.policy, &args.mc);
    let summary = summarize(&loaded, &maps, mc);

    let out = &args.input.out;
    create_out(out)?;
    for m in &maps {
        let name = m.policy.name();
        if aoe_only {
            let aoe = area_of_effectiveness(&m.effectiveness, loaded.threshold);
            write_raster(out, &format!("{name}_aoe"), &aoe.map, args.format, Some((0.0, 1.0)))?;
            continue;
        }
        for (layer, map) in m.layers() {
            let range = (layer == "effectiveness").then_some((0.0, 1.0));
            write_raster(out, &format!("{name}_{layer}"), map, args.format, range)?;
        }
    }
    write_json(&out.join("summary.json"), &summary)?;
    report(&summary, out);
    Ok(())
}

fn cdf(args: CdfArgs) -> Result<(), CliError> {
    check_mc(&args.mc)?;
    let loaded = load(&args.input)?;
    let maps = policy_maps(&loaded, args.policy);
    let mut tables = Vec::new();
    for m in &maps {
        for (layer, map) in [("compute_load", &m.compute_load), ("activity", &m.activity)] {
            let samples = map.valid_values().filter(|&v| !(args.exclude_zero_cost && v == 0.0));
            let ecdf = Ecdf::new(samples)?;
            tables.push((format!("{}_{layer}_cdf.csv", m.policy.name()), ecdf.to_csv_string()));
        }
    }
    let mc = maybe_mc(&loaded, args.policy, &args.mc);
    let summary = summarize(&loaded, &maps, mc);

    let out = &args.input.out;
    create_out(out)?;
    for (file, table) in tables {
        write_file(&out.join(file), format!("x,F\n{table}"))?;
    }
    write_json(&out.join("summary.json"), &summary)?;
    report(&summary, out);
    Ok(())
}

#[derive(Debug, Serialize)]
struct PlanReport {
    baseline: Vec<(u32, String)>,
    baseline_aoe_fraction: f64,
    #[serde(flatten)]
    placement: Placement,
}

fn plan(args: PlanArgs) -> Result<(), CliError> {
    let loaded = load(&args.input)?;
    let s = &loaded.scenario;
    let mut candidates = full_catalog_candidates(s);
    for (ap_id, models) in &args.candidates {
        let slot = s
            .access_points
            .iter()
            .position(|a| a.id == *ap_id)
            .ok_or_else(|| CliError::Config(format!("--candidates names unknown AP {ap_id}")))?;
        candidates[slot] = models.clone();
    }
    let placement = placement_search(s, &loaded.grids, &candidates, loaded.threshold, args.mode.into())?;
    let genie = build_policy_maps(aoe_core::Policy::Genie, s, &loaded.grids);
    let report = PlanReport {
        baseline: s.access_points.iter().map(|a| (a.id, a.model_id.clone())).collect(),
        baseline_aoe_fraction: area_of_effectiveness(&genie.effectiveness, loaded.threshold).fraction,
        placement,
    };

    let out = &args.input.out;
    create_out(out)?;
    let path: PathBuf = out.join("plan.json");
    write_json(&path, &report)?;
    println!(
        "genie AoE fraction {:.4} -> {:.4} ({} assignments evaluated), wrote {}",
        report.baseline_aoe_fraction,
        report.placement.aoe_fraction,
        report.placement.assignments_evaluated,
        path.display()
    );
    Ok(())
}

fn report(summary: &Summary, out: &Path) {
    for p in &summary.policies {
        println!(
            "{:<10} aoe {:>6.2}% ({:.0} m2)  mean compute {:.4e} FLOPS/s  mean activity {:.4e} s",
            p.policy,
            100.0 * p.aoe_fraction,
            p.aoe_area_m2,
            p.mean_compute_load_flops,
            p.mean_activity_s
        );
    }
    if let Some(mc) = &summary.monte_carlo {
        println!(
            "monte carlo: {}/{} pixels within {} SE on all fields",
            mc.agree_all, mc.pixels, mc.k_sigma
        );
    }
    println!("wrote {}", out.display());
}

//! Subcommand implementations. Each command reads the counts table, runs
//! the per-player computation, and writes the requested tables in sorted
//! player order. A player whose fit degenerates is reported on stderr and
//! skipped; the command still succeeds for the rest.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use anyhow::{anyhow, Context, Result};

use servelab_core::bounds::{classify_player, optimality_bounds, triangle_geometry};
use servelab_core::estimation::{mle_stats, ServeStats};
use servelab_core::ingest::{
    aggregate_counts, parse_points_csv, read_counts_csv, write_counts_csv, ServeCounts,
};
use servelab_core::robustness::{curvature_t_fit, double_fault_fit, gamma_diagnostic, softmax_fit};
use servelab_core::scoring::PrizeLadder;
use servelab_core::structural::{fit_player, lambda_map, StructuralFit};
use servelab_core::{bootstrap_ci, counterfactual_report, BootstrapConfig};

use crate::output::{
    emit, emit_t_grid, fnum, sig15, BoundsRow, CiRow, CounterfactualRow, CurveRow, DiagnosticRow,
    DoubleFaultRow, FitRow, Format, MapRow, SoftmaxRow, StatsRow, TGridRow, TGridTable,
};
use crate::{AppError, InputExt};

pub fn load_counts(path: &Path) -> Result<Vec<ServeCounts>, AppError> {
    let file = File::open(path)
        .with_context(|| format!("cannot open counts file {}", path.display()))
        .input()?;
    let mut counts = read_counts_csv(file)
        .with_context(|| format!("malformed counts file {}", path.display()))
        .input()?;
    counts.sort_by(|a, b| a.player_id.cmp(&b.player_id));
    Ok(counts)
}

fn ensure_out_dir(out: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))
        .input()
        .map(|_| ())
}

fn warn_skip(player: &str, stage: &str, err: impl std::fmt::Display) {
    eprintln!("warning: skipping {player}: {stage}: {err}");
}

/// Per-player stats paired with the sorted counts.
fn stats_by_player(counts: &[ServeCounts]) -> Vec<(String, ServeStats)> {
    counts
        .iter()
        .filter_map(|c| match mle_stats(c) {
            Ok(s) => Some((c.player_id.clone(), s)),
            Err(e) => {
                warn_skip(&c.player_id, "mle_stats", e);
                None
            }
        })
        .collect()
}

pub fn cmd_ingest(
    input: &Path,
    out: &Path,
    min_matches: u64,
    format: Format,
) -> Result<(), AppError> {
    if min_matches == 0 {
        return Err(AppError::config(anyhow!(
            "--min-matches must be at least 1"
        )));
    }
    ensure_out_dir(out)?;
    let file = File::open(input)
        .with_context(|| format!("cannot open points file {}", input.display()))
        .input()?;
    let points = parse_points_csv(file)
        .with_context(|| format!("malformed points file {}", input.display()))
        .input()?;
    let counts = aggregate_counts(&points, min_matches);

    match format {
        Format::Csv => {
            let path = out.join("counts.csv");
            let file = File::create(&path)
                .with_context(|| format!("cannot create {}", path.display()))
                .input()?;
            write_counts_csv(file, &counts)
                .context("writing counts")
                .input()?;
        }
        Format::Json => {
            let path = out.join("counts.json");
            let file = File::create(&path)
                .with_context(|| format!("cannot create {}", path.display()))
                .input()?;
            let rows: Vec<&ServeCounts> = counts.values().collect();
            serde_json::to_writer_pretty(file, &rows)
                .context("writing counts")
                .input()?;
        }
    }
    println!("{} players aggregated", counts.len());
    Ok(())
}

const CURVE_GRID_POINTS: usize = 101;
const MAP_GRID_MAX: f64 = 8.0;
const MAP_GRID_STEP: f64 = 0.05;

pub fn cmd_estimate(input: &Path, out: &Path, eps: f64, format: Format) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let counts = load_counts(input)?;
    let stats = stats_by_player(&counts);

    let mut stats_rows = Vec::new();
    let mut fit_rows = Vec::new();
    let mut bounds_rows = Vec::new();
    let mut curve_rows = Vec::new();
    let mut map_rows = Vec::new();

    for (player, s) in &stats {
        stats_rows.push(StatsRow {
            player_id: player.clone(),
            x1: sig15(s.x1),
            x2: sig15(s.x2),
            f1: sig15(s.f1),
            f2: sig15(s.f2),
            k1: sig15(s.k1),
            k2: sig15(s.k2),
        });
        bounds_rows.push(bounds_row(player, s));

        match fit_player(s, eps) {
            Ok(fit) => {
                fit_rows.push(fit_row(player, &fit));
                for i in 0..CURVE_GRID_POINTS {
                    let x = i as f64 / (CURVE_GRID_POINTS - 1) as f64;
                    curve_rows.push(CurveRow {
                        player_id: player.clone(),
                        x,
                        f: fit.skills.f(x),
                        k: fit.skills.k(x),
                    });
                }
            }
            Err(e) => warn_skip(player, "fit_player", e),
        }

        let mut lambda = MAP_GRID_STEP;
        while lambda <= MAP_GRID_MAX + 1e-12 {
            match lambda_map(lambda, s.x1, s.x2) {
                Ok(v) => map_rows.push(MapRow {
                    player_id: player.clone(),
                    lambda,
                    map: v,
                }),
                Err(_) => break,
            }
            lambda += MAP_GRID_STEP;
        }
    }

    emit(out, "stats", format, &stats_rows).input()?;
    emit(out, "fits", format, &fit_rows).input()?;
    emit(out, "bounds", format, &bounds_rows).input()?;
    emit(out, "skill_curves", format, &curve_rows).input()?;
    emit(out, "lambda_map", format, &map_rows).input()?;
    println!("{} players fit", fit_rows.len());
    Ok(())
}

fn fit_row(player: &str, fit: &StructuralFit) -> FitRow {
    FitRow {
        player_id: player.to_string(),
        delta: fit.prefs.delta,
        beta: fit.prefs.beta,
        lambda: fit.skills.lambda,
        tau_f: fit.skills.tau_f,
        a_f: fit.skills.a_f,
        tau_k: fit.skills.tau_k,
        a_k: fit.skills.a_k,
        a: fit.skills.a,
        tau: fit.skills.tau,
        soc_ok: fit.soc_ok,
        cond3_i: fit.condition3.i,
        cond3_ii: fit.condition3.ii,
        cond3_iii: fit.condition3.iii,
        residual: fit.residual,
        iterations: fit.iterations,
    }
}

fn bounds_row(player: &str, stats: &ServeStats) -> BoundsRow {
    let bounds = optimality_bounds(stats);
    let classification = classify_player(stats, servelab_core::DEFAULT_RATIO_THRESHOLD);
    let geometry = triangle_geometry(stats);
    let (b12, x12, x14, x24, a1, a2, ratio) = match geometry {
        Ok(g) => (
            fnum(g.b12),
            fnum(g.x12),
            fnum(g.x14),
            fnum(g.x24),
            fnum(g.a1),
            fnum(g.a2),
            g.ratio.map_or_else(|| "n.a.".to_string(), fnum),
        ),
        Err(_) => (
            "n.a.".to_string(),
            "n.a.".to_string(),
            "n.a.".to_string(),
            "n.a.".to_string(),
            "n.a.".to_string(),
            "n.a.".to_string(),
            "n.a.".to_string(),
        ),
    };
    BoundsRow {
        player_id: player.to_string(),
        lower: fnum(bounds.lower),
        upper: fnum(bounds.upper),
        lemma1_b: bounds.sign_condition_b(),
        lemma1_c: bounds.sign_condition_c(),
        b12,
        x12,
        x14,
        x24,
        a1,
        a2,
        ratio,
        classification: classification.to_string(),
    }
}

pub fn cmd_bounds(input: &Path, out: &Path, format: Format) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let counts = load_counts(input)?;
    let rows: Vec<BoundsRow> = stats_by_player(&counts)
        .iter()
        .map(|(player, s)| bounds_row(player, s))
        .collect();
    emit(out, "bounds", format, &rows).input()?;
    println!("{} players bounded", rows.len());
    Ok(())
}

pub fn load_ladder(path: &Path) -> Result<PrizeLadder, AppError> {
    let file = File::open(path)
        .with_context(|| format!("cannot open prize ladder {}", path.display()))
        .input()?;
    let ladder: PrizeLadder = serde_json::from_reader(file)
        .with_context(|| format!("malformed prize ladder {}", path.display()))
        .input()?;
    ladder
        .validate()
        .with_context(|| format!("invalid prize ladder {}", path.display()))
        .input()?;
    Ok(ladder)
}

pub fn cmd_counterfactual(
    input: &Path,
    prizes: &Path,
    out: &Path,
    best_of: u32,
    eps: f64,
    format: Format,
) -> Result<(), AppError> {
    if best_of == 0 || best_of % 2 == 0 {
        return Err(AppError::config(anyhow!(
            "--best-of must be odd, got {best_of}"
        )));
    }
    ensure_out_dir(out)?;
    let ladder = load_ladder(prizes)?;
    let counts = load_counts(input)?;

    let mut rows = Vec::new();
    for (player, s) in stats_by_player(&counts) {
        let fit = match fit_player(&s, eps) {
            Ok(f) => f,
            Err(e) => {
                warn_skip(&player, "fit_player", e);
                continue;
            }
        };
        match counterfactual_report(&fit, &ladder, best_of) {
            Ok(r) => rows.push(CounterfactualRow {
                player_id: player,
                delta: fit.prefs.delta,
                dx1: r.delta_x1,
                dx2: r.delta_x2,
                dpt: r.delta_point,
                dgm: r.delta_game,
                dset: r.delta_set,
                dmat: r.delta_match,
                dprize: r.delta_prize,
            }),
            Err(e) => warn_skip(&player, "counterfactual", e),
        }
    }
    emit(out, "counterfactual", format, &rows).input()?;
    println!("{} players reported", rows.len());
    Ok(())
}

pub fn cmd_robustness(
    input: &Path,
    out: &Path,
    t_grid: &[f64],
    span: f64,
    reps: usize,
    seed: u64,
    eps: f64,
    format: Format,
) -> Result<(), AppError> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| t <= 0.0) {
        return Err(AppError::config(anyhow!("--t-grid needs positive values")));
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(AppError::config(anyhow!(
            "--span must lie in (0,1], got {span}"
        )));
    }
    if reps < 100 {
        return Err(AppError::config(anyhow!(
            "--reps must be at least 100 for the diagnostic, got {reps}"
        )));
    }
    ensure_out_dir(out)?;
    let counts = load_counts(input)?;
    let stats = stats_by_player(&counts);

    let mut softmax_rows = Vec::new();
    for (player, s) in &stats {
        match softmax_fit(s, eps) {
            Ok(fit) => softmax_rows.push(SoftmaxRow {
                player_id: player.clone(),
                delta: fit.delta,
                beta: fit.beta,
                lambda: fit.lambda,
                tau_f: fit.tau_f,
                a_f: fit.a_f,
                tau_k: fit.tau_k,
                a_k: fit.a_k,
                roots_found: fit.roots_found,
            }),
            Err(e) => warn_skip(player, "softmax_fit", e),
        }
    }
    emit(out, "softmax", format, &softmax_rows).input()?;

    let mut delta_rows = Vec::new();
    let mut lambda_rows = Vec::new();
    for (player, s) in &stats {
        let mut delta_cells = Vec::new();
        let mut lambda_cells = Vec::new();
        for &t in t_grid {
            let key = format!("t{t:.2}");
            let (d, l) = match curvature_t_fit(s, t, eps) {
                Ok(fit) if fit.solved => (fnum(fit.delta), fnum(fit.lambda)),
                Ok(_) => ("n.a.".to_string(), "n.a.".to_string()),
                Err(e) => {
                    warn_skip(player, &format!("curvature_t_fit(t={t})"), e);
                    ("n.a.".to_string(), "n.a.".to_string())
                }
            };
            delta_cells.push((key.clone(), d));
            lambda_cells.push((key, l));
        }
        delta_rows.push(TGridRow {
            player_id: player.clone(),
            cells: delta_cells,
        });
        lambda_rows.push(TGridRow {
            player_id: player.clone(),
            cells: lambda_cells,
        });
    }
    let t_values = t_grid.to_vec();
    emit_t_grid(
        out,
        "t_grid_delta",
        format,
        &TGridTable {
            t_values: t_values.clone(),
            rows: delta_rows,
        },
    )
    .input()?;
    emit_t_grid(
        out,
        "t_grid_lambda",
        format,
        &TGridTable {
            t_values,
            rows: lambda_rows,
        },
    )
    .input()?;

    let mut df_rows = Vec::new();
    let mut df_fits = BTreeMap::new();
    for (player, s) in &stats {
        match double_fault_fit(s, eps) {
            Ok(fit) => {
                df_rows.push(DoubleFaultRow {
                    player_id: player.clone(),
                    lambda: fit.lambda,
                    a: fit.a,
                    tau: fit.tau,
                    gamma: fit.gamma,
                });
                df_fits.insert(player.clone(), (fit, *s));
            }
            Err(e) => warn_skip(player, "double_fault_fit", e),
        }
    }
    emit(out, "double_fault", format, &df_rows).input()?;

    let diag_rows: Vec<DiagnosticRow> = match gamma_diagnostic(&df_fits, span, reps, seed) {
        Ok(entries) => entries
            .into_iter()
            .map(|e| DiagnosticRow {
                player_id: e.player_id,
                j: e.j,
                fitted: e.fitted,
                lo: e.lo,
                hi: e.hi,
                significant: e.significant,
            })
            .collect(),
        Err(e) => {
            eprintln!("warning: gamma diagnostic skipped: {e}");
            Vec::new()
        }
    };
    emit(out, "gamma_diagnostic", format, &diag_rows).input()?;
    println!(
        "{} softmax fits, {} double-fault fits, {} diagnostic rows",
        softmax_rows.len(),
        df_rows.len(),
        diag_rows.len()
    );
    Ok(())
}

/// Estimand names and reference values for the bootstrap table: the
/// curvature's null is 1, every other parameter's is 0.
const BOOT_PARAMS: [(&str, f64); 6] = [
    ("delta", 0.0),
    ("lambda", 1.0),
    ("tau_f", 0.0),
    ("a_f", 0.0),
    ("tau_k", 0.0),
    ("a_k", 0.0),
];

pub fn cmd_bootstrap(
    input: &Path,
    out: &Path,
    reps: usize,
    level: f64,
    seed: u64,
    eps: f64,
    format: Format,
) -> Result<(), AppError> {
    if reps < 2 {
        return Err(AppError::config(anyhow!(
            "--reps must be at least 2, got {reps}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(AppError::config(anyhow!(
            "--level must lie in (0,1), got {level}"
        )));
    }
    ensure_out_dir(out)?;
    let counts = load_counts(input)?;

    let estimator = |c: &ServeCounts| -> Option<Vec<f64>> {
        let s = mle_stats(c).ok()?;
        let fit = fit_player(&s, eps).ok()?;
        Some(vec![
            fit.prefs.delta,
            fit.skills.lambda,
            fit.skills.tau_f,
            fit.skills.a_f,
            fit.skills.tau_k,
            fit.skills.a_k,
        ])
    };
    let refs: Vec<f64> = BOOT_PARAMS.iter().map(|(_, r)| *r).collect();

    let mut rows = Vec::new();
    for c in &counts {
        let cfg = BootstrapConfig {
            replications: reps,
            level,
            seed,
        };
        match bootstrap_ci(c, estimator, &refs, &cfg) {
            Ok(cis) => {
                for ((name, _), iv) in BOOT_PARAMS.iter().zip(&cis.intervals) {
                    rows.push(CiRow {
                        player_id: c.player_id.clone(),
                        param: name.to_string(),
                        point: iv.point,
                        lo: iv.lo,
                        hi: iv.hi,
                        significant: iv.significant,
                        failed_reps: cis.failed_replicates,
                    });
                }
            }
            Err(e) => warn_skip(&c.player_id, "bootstrap_ci", e),
        }
    }
    emit(out, "cis", format, &rows).input()?;
    println!("{} interval rows", rows.len());
    Ok(())
}

//! Command-line front end: run the refinement guideline, evaluate a single
//! what-if design point, or dump the width/duplication trade-off grid.
//!
//! Exit codes: 0 when the gate lets refinement proceed (or warns), 2 when the
//! gate rejects the kernel outright, 1 on input or validation errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hlsguide::config::{CachingMode, DesignConfig};
use hlsguide::descriptor::{parse_kernel, parse_platform};
use hlsguide::driver::{
    self, GateDecision, GATE_REJECT_DEFAULT, GATE_WARN_DEFAULT,
};
use hlsguide::report::{self, RunReport, SweepReport, WhatifReport};
use hlsguide::transforms::Strategy;

#[derive(Parser)]
#[command(
    name = "hlsguide",
    about = "Model FPGA accelerator designs and drive the iterative refinement guideline",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Kernel descriptor (JSON).
    kernel: PathBuf,
    /// Platform descriptor (JSON); an empty object selects every default.
    platform: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Pin the report timestamp so repeated runs are byte-identical.
    #[arg(long)]
    fixed_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full refinement guideline and report every step.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Gate threshold above which the transfer ratio earns a warning.
        #[arg(long, default_value_t = GATE_WARN_DEFAULT)]
        gate_warn: f64,
        /// Gate threshold at which the kernel is rejected outright.
        #[arg(long, default_value_t = GATE_REJECT_DEFAULT)]
        gate_reject: f64,
    },
    /// Evaluate exactly one design point, no search.
    Whatif {
        #[command(flatten)]
        common: CommonArgs,
        /// Override a config field, e.g. --set pe_factor=16
        /// (keys: caching, pipelined, pe_factor, double_buffered,
        /// buffer_width_bits, partition_factor).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Evaluate the full buffer-width x duplication grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            common,
            gate_warn,
            gate_reject,
        } => cmd_run(&common, gate_warn, gate_reject),
        Command::Whatif { common, set } => cmd_whatif(&common, &set),
        Command::Sweep { common } => cmd_sweep(&common),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit_report(common: &CommonArgs, json: String, summary: String) -> hlsguide::Result<()> {
    match &common.report {
        Some(path) => {
            std::fs::write(path, json).map_err(|source| hlsguide::Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            print!("{summary}");
            println!("report written to {}", path.display());
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn cmd_run(common: &CommonArgs, warn: f64, reject: f64) -> hlsguide::Result<ExitCode> {
    let kernel = parse_kernel(&common.kernel)?;
    let platform = parse_platform(&common.platform)?;
    let trace = driver::run_guideline_from(
        &kernel,
        &platform,
        DesignConfig::naive(&kernel),
        warn,
        reject,
    )?;

    let mut summary = String::new();
    summary.push_str(&format!(
        "kernel {}: gate ratio {:.4e} -> {:?}\n",
        trace.kernel, trace.gate.ratio, trace.gate.decision
    ));
    for step in &trace.steps {
        summary.push_str(&format!(
            "  {:<17} {} total {:.6e}s speedup x{:.2} ({})\n",
            step.strategy.to_string(),
            if step.accepted { "accepted" } else { "skipped " },
            step.breakdown.total_s,
            step.speedup_vs_previous,
            step.reason
        ));
    }
    summary.push_str(&format!(
        "final: total {:.6e}s, speedup vs CPU x{:.2}, {} BRAM blocks, {} compute units\n",
        trace.final_point.breakdown.total_s,
        trace.final_point.breakdown.speedup_vs_cpu,
        trace.final_point.resources.bram_blocks,
        trace.final_point.resources.compute_units,
    ));

    let report = RunReport::from_trace(
        &kernel,
        &platform,
        &trace,
        report::timestamp(common.fixed_timestamp),
    );
    emit_report(common, report::to_json(&report), summary)?;
    Ok(match trace.gate.decision {
        GateDecision::Reject => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    })
}

const VALID_SET_KEYS: &str = "caching (none | batch:BYTES | tile:BYTES), pipelined (true|false), \
     pe_factor (power of two), double_buffered (true|false), buffer_width_bits, partition_factor";

fn parse_bool(key: &str, value: &str) -> hlsguide::Result<bool> {
    value.parse().map_err(|_| {
        hlsguide::Error::Precondition(format!("{key} expects true or false, got {value:?}"))
    })
}

fn parse_u64(key: &str, value: &str) -> hlsguide::Result<u64> {
    value.parse().map_err(|_| {
        hlsguide::Error::Precondition(format!("{key} expects an integer, got {value:?}"))
    })
}

fn apply_overrides(mut cfg: DesignConfig, overrides: &[String]) -> hlsguide::Result<DesignConfig> {
    let mut partition_set = false;
    for item in overrides {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            hlsguide::Error::Precondition(format!(
                "--set expects KEY=VALUE, got {item:?}; valid keys: {VALID_SET_KEYS}"
            ))
        })?;
        match key {
            "caching" => {
                cfg.caching = match value.split_once(':') {
                    None if value == "none" => CachingMode::None,
                    Some(("batch", bytes)) => CachingMode::Batch {
                        batch_bytes: parse_u64("caching", bytes)?,
                    },
                    Some(("tile", bytes)) => CachingMode::Tile {
                        tile_bytes: parse_u64("caching", bytes)?,
                    },
                    _ => {
                        return Err(hlsguide::Error::Precondition(format!(
                            "caching expects none, batch:BYTES or tile:BYTES, got {value:?}"
                        )))
                    }
                };
            }
            "pipelined" => cfg.pipelined = parse_bool(key, value)?,
            "pe_factor" => {
                cfg.pe_factor = parse_u64(key, value)?;
                if !partition_set {
                    cfg.partition_factor = cfg.pe_factor;
                }
            }
            "double_buffered" => cfg.double_buffered = parse_bool(key, value)?,
            "buffer_width_bits" => {
                cfg.buffer_width_bits = parse_u64(key, value)?.try_into().map_err(|_| {
                    hlsguide::Error::Precondition(format!("buffer_width_bits out of range: {value}"))
                })?;
            }
            "partition_factor" => {
                cfg.partition_factor = parse_u64(key, value)?;
                partition_set = true;
            }
            other => {
                return Err(hlsguide::Error::Precondition(format!(
                    "unknown config key {other:?}; valid keys: {VALID_SET_KEYS}"
                )))
            }
        }
    }
    Ok(cfg)
}

fn cmd_whatif(common: &CommonArgs, overrides: &[String]) -> hlsguide::Result<ExitCode> {
    let kernel = parse_kernel(&common.kernel)?;
    let platform = parse_platform(&common.platform)?;
    let cfg = apply_overrides(DesignConfig::naive(&kernel), overrides)?;
    let (breakdown, resources) = driver::whatif(&kernel, &platform, &cfg)?;
    let report = WhatifReport {
        tool: "hlsguide".into(),
        timestamp_unix_s: report::timestamp(common.fixed_timestamp),
        templates: report::implied_templates(&kernel, &cfg),
        kernel,
        platform,
        config: cfg,
        breakdown,
        resources,
    };
    let summary = format!(
        "total {:.6e}s (pcie {:.3e}, dram {:.3e}, compute {:.3e}), speedup x{:.2}, \
         {} BRAM blocks, fits: {}\n",
        breakdown.total_s,
        breakdown.pcie_s,
        breakdown.dram_s,
        breakdown.compute_s,
        breakdown.speedup_vs_cpu,
        resources.bram_blocks,
        resources.fits
    );
    emit_report(common, report::to_json(&report), summary)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(common: &CommonArgs) -> hlsguide::Result<ExitCode> {
    let kernel = parse_kernel(&common.kernel)?;
    let platform = parse_platform(&common.platform)?;
    let trace = driver::run_guideline(&kernel, &platform)?;

    // Explore from the design the guideline had before the trade-off sweep
    // step, so the grid matches what the guideline itself searched.
    let base = trace
        .steps
        .iter()
        .take_while(|s| s.strategy != Strategy::ScratchpadReorg)
        .last()
        .map(|s| s.config)
        .unwrap_or(trace.initial.config);

    let (grid, best, note) = if trace.gate.decision == GateDecision::Reject {
        (
            Vec::new(),
            None,
            Some("gate rejected the kernel; no grid explored".to_string()),
        )
    } else {
        let grid = driver::sweep_grid(&kernel, &platform, &base)?;
        let best = grid
            .iter()
            .filter(|r| r.fits)
            .min_by(|a, b| {
                (a.total_s, a.bram_blocks, a.pe_factor, a.buffer_width_bits)
                    .partial_cmp(&(b.total_s, b.bram_blocks, b.pe_factor, b.buffer_width_bits))
                    .expect("totals are finite")
            })
            .cloned();
        let note = best
            .is_none()
            .then(|| "no feasible wide design: every grid point exceeds a budget".to_string());
        (grid, best, note)
    };

    let mut summary = String::new();
    summary.push_str(&format!(
        "{:>5} {:>4} {:>14} {:>6} {:>6} {:>6}\n",
        "width", "pe", "total_s", "fits", "bram", "units"
    ));
    for row in &grid {
        summary.push_str(&format!(
            "{:>5} {:>4} {:>14.6e} {:>6} {:>6} {:>6}\n",
            row.buffer_width_bits, row.pe_factor, row.total_s, row.fits, row.bram_blocks,
            row.compute_units
        ));
    }
    if let Some(n) = &note {
        summary.push_str(n);
        summary.push('\n');
    }

    let exit = match trace.gate.decision {
        GateDecision::Reject => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    };
    let report = SweepReport {
        tool: "hlsguide".into(),
        timestamp_unix_s: report::timestamp(common.fixed_timestamp),
        kernel,
        platform,
        base_config: base,
        gate: trace.gate,
        grid,
        best,
        note,
    };
    emit_report(common, report::to_json(&report), summary)?;
    Ok(exit)
}

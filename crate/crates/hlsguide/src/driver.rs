//! The iterative refinement driver: gate on PCIe transfer cost, pinpoint the
//! dominant time component, apply the matching strategy, and keep every step
//! only if it strictly improves the modeled total while fitting the fabric.

use serde::{Deserialize, Serialize};

use crate::config::{validate_config, DesignConfig};
use crate::cost::{self, Component, CostBreakdown};
use crate::descriptor::{KernelDescriptor, PlatformDescriptor};
use crate::error::{Error, Result};
use crate::resource::{self, ResourceUsage};
use crate::transforms::{self, Applied, SizePolicy, Strategy};

/// Default gate thresholds: warn when transfer alone reaches 80% of the CPU
/// runtime, reject when it matches or exceeds it.
pub const GATE_WARN_DEFAULT: f64 = 0.8;
pub const GATE_REJECT_DEFAULT: f64 = 1.0;

/// Caching sizes the guideline considers, smallest first.
pub const CACHING_CANDIDATES: [u64; 3] = [2 * 1024, 64 * 1024, 1024 * 1024];
/// A burst must spend less than this fraction of its cycles initializing.
pub const INIT_SHARE_LIMIT: f64 = 0.10;
/// Buffer widths the trade-off sweep explores.
pub const SWEEP_WIDTHS: [u32; 4] = [64, 128, 256, 512];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateDecision {
    Proceed,
    Warn,
    Reject,
}

/// Outcome of the PCIe gate: the transfer/CPU ratio and its classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub ratio: f64,
    pub decision: GateDecision,
}

/// Classifies a kernel by how its host-device transfer time compares to the
/// CPU baseline. Transfer alone at or above `reject` means no refinement can
/// pay off; at or above `warn` the headroom is slim.
pub fn pcie_gate(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    warn: f64,
    reject: f64,
) -> Result<GateReport> {
    if !crate::descriptor::positive(warn) || !crate::descriptor::positive(reject) || warn > reject {
        return Err(Error::Precondition(format!(
            "gate thresholds must satisfy 0 < warn ≤ reject, got warn={warn}, reject={reject}"
        )));
    }
    let ratio = cost::pcie_time(kernel, platform) / kernel.cpu_baseline_s;
    let decision = if ratio >= reject {
        GateDecision::Reject
    } else if ratio >= warn {
        GateDecision::Warn
    } else {
        GateDecision::Proceed
    };
    Ok(GateReport { ratio, decision })
}

/// The component that dominates a breakdown; ties break Dram, then Compute.
pub fn pinpoint(breakdown: &CostBreakdown) -> Component {
    breakdown.dominant
}

/// One evaluated design point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub config: DesignConfig,
    pub breakdown: CostBreakdown,
    pub resources: ResourceUsage,
}

/// One attempted guideline step. Rejected or inapplicable steps keep the
/// previous config (and its breakdown) and say why in `reason`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub strategy: Strategy,
    /// Code template the step corresponds to, when it was applied.
    pub template: Option<String>,
    pub config: DesignConfig,
    pub breakdown: CostBreakdown,
    pub resources: ResourceUsage,
    pub accepted: bool,
    /// Improvement over the previous step's total; 1.0 when not accepted.
    pub speedup_vs_previous: f64,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Ordered record of one guideline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementTrace {
    pub kernel: String,
    pub gate: GateReport,
    pub initial: EvalPoint,
    pub steps: Vec<TraceStep>,
    pub final_point: EvalPoint,
}

impl RefinementTrace {
    pub fn accepted_steps(&self) -> impl Iterator<Item = &TraceStep> {
        self.steps.iter().filter(|s| s.accepted)
    }

    pub fn step(&self, strategy: Strategy) -> Option<&TraceStep> {
        self.steps.iter().find(|s| s.strategy == strategy)
    }
}

fn evaluate(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
) -> Result<EvalPoint> {
    Ok(EvalPoint {
        config: *cfg,
        breakdown: cost::total_time(kernel, platform, cfg)?,
        resources: resource::design_usage(kernel, platform, cfg),
    })
}

/// Smallest candidate caching size that keeps the burst initialization share
/// under 10% at full bus width and covers the kernel's minimum; falls back to
/// the minimum itself when no candidate qualifies.
pub fn choose_caching_size(kernel: &KernelDescriptor, platform: &PlatformDescriptor) -> u64 {
    let min = kernel.min_caching_bytes();
    CACHING_CANDIDATES
        .iter()
        .copied()
        .find(|&c| c >= min && cost::burst_init_share(c, platform) < INIT_SHARE_LIMIT)
        .unwrap_or_else(|| min.max(*CACHING_CANDIDATES.last().unwrap()))
}

struct GuidelineRun<'a> {
    kernel: &'a KernelDescriptor,
    platform: &'a PlatformDescriptor,
    current: EvalPoint,
    steps: Vec<TraceStep>,
}

impl<'a> GuidelineRun<'a> {
    fn record_skip(&mut self, strategy: Strategy, reason: String) {
        self.steps.push(TraceStep {
            strategy,
            template: None,
            config: self.current.config,
            breakdown: self.current.breakdown,
            resources: self.current.resources,
            accepted: false,
            speedup_vs_previous: 1.0,
            reason,
            notes: Vec::new(),
        });
    }

    /// Evaluates an applied transform and accepts it only if it strictly
    /// improves the total and fits every budget.
    fn consider(&mut self, strategy: Strategy, applied: Applied) -> Result<bool> {
        if applied.config == self.current.config {
            let reason = if applied.notes.is_empty() {
                "configuration unchanged".to_string()
            } else {
                applied.notes.join("; ")
            };
            self.record_skip(strategy, reason);
            return Ok(false);
        }
        let candidate = evaluate(self.kernel, self.platform, &applied.config)?;
        let improves = candidate.breakdown.total_s < self.current.breakdown.total_s;
        let fits = candidate.resources.fits;
        if improves && fits {
            let speedup = self.current.breakdown.total_s / candidate.breakdown.total_s;
            self.steps.push(TraceStep {
                strategy,
                template: Some(applied.template.to_string()),
                config: candidate.config,
                breakdown: candidate.breakdown,
                resources: candidate.resources,
                accepted: true,
                speedup_vs_previous: speedup,
                reason: "accepted: strictly improves and fits".into(),
                notes: applied.notes,
            });
            self.current = candidate;
            Ok(true)
        } else {
            let reason = if !fits {
                format!(
                    "rejected: does not fit ({})",
                    resource::binding_budget(self.kernel, self.platform, &applied.config)
                        .unwrap_or_else(|| "budget exceeded".into())
                )
            } else {
                format!(
                    "rejected: no improvement ({:.6e}s vs {:.6e}s)",
                    candidate.breakdown.total_s, self.current.breakdown.total_s
                )
            };
            let mut step = TraceStep {
                strategy,
                template: Some(applied.template.to_string()),
                config: self.current.config,
                breakdown: self.current.breakdown,
                resources: self.current.resources,
                accepted: false,
                speedup_vs_previous: 1.0,
                reason,
                notes: applied.notes,
            };
            step.notes.push(format!(
                "attempted config: {}",
                serde_json::to_string(&applied.config).unwrap_or_default()
            ));
            self.steps.push(step);
            Ok(false)
        }
    }
}

/// Runs the full guideline from the naive design with default thresholds.
pub fn run_guideline(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
) -> Result<RefinementTrace> {
    run_guideline_from(
        kernel,
        platform,
        DesignConfig::naive(kernel),
        GATE_WARN_DEFAULT,
        GATE_REJECT_DEFAULT,
    )
}

/// Runs the guideline from an arbitrary starting design: gate, then the five
/// strategies in order (caching, pipelining, duplication, double buffering,
/// width/duplication sweep), accepting each step only when it strictly
/// improves the modeled total and fits the fabric.
pub fn run_guideline_from(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    initial_config: DesignConfig,
    warn: f64,
    reject: f64,
) -> Result<RefinementTrace> {
    kernel.validate()?;
    platform.validate()?;
    validate_config(kernel, platform, &initial_config)?;
    let gate = pcie_gate(kernel, platform, warn, reject)?;
    let initial = evaluate(kernel, platform, &initial_config)?;

    let mut run = GuidelineRun {
        kernel,
        platform,
        current: initial.clone(),
        steps: Vec::new(),
    };

    if gate.decision == GateDecision::Reject {
        return Ok(RefinementTrace {
            kernel: kernel.name.clone(),
            gate,
            final_point: initial.clone(),
            initial,
            steps: Vec::new(),
        });
    }

    // Iteration 1: explicit data caching.
    if run.current.config.caching.is_none() {
        let size = choose_caching_size(kernel, platform);
        match transforms::apply_data_caching(
            kernel,
            platform,
            &run.current.config,
            size,
            SizePolicy::ClampToValid,
        ) {
            Ok(applied) => {
                run.consider(Strategy::DataCaching, applied)?;
            }
            Err(e) => run.record_skip(Strategy::DataCaching, e.to_string()),
        }
    } else {
        run.record_skip(Strategy::DataCaching, "already applied".into());
    }

    // Iteration 2: pipelining, then duplication.
    if !run.current.config.pipelined {
        match transforms::apply_pipelining(kernel, &run.current.config) {
            Ok(applied) => {
                run.consider(Strategy::Pipelining, applied)?;
            }
            Err(e) => run.record_skip(Strategy::Pipelining, e.to_string()),
        }
    } else {
        run.record_skip(Strategy::Pipelining, "already applied".into());
    }

    attempt_pe_duplication(&mut run)?;

    // Iteration 3: overlap, then wider scratchpads via the joint sweep.
    if !run.current.config.double_buffered {
        match transforms::apply_double_buffering(kernel, &run.current.config) {
            Ok(applied) => {
                run.consider(Strategy::DoubleBuffering, applied)?;
            }
            Err(e) => run.record_skip(Strategy::DoubleBuffering, e.to_string()),
        }
    } else {
        run.record_skip(Strategy::DoubleBuffering, "already applied".into());
    }

    attempt_reorg_sweep(&mut run)?;

    Ok(RefinementTrace {
        kernel: kernel.name.clone(),
        gate,
        initial,
        final_point: run.current.clone(),
        steps: run.steps,
    })
}

/// Largest power-of-two factor within the compute budget that also divides
/// the batch element count.
fn best_pe_factor(kernel: &KernelDescriptor, platform: &PlatformDescriptor, cfg: &DesignConfig) -> u64 {
    let batch_elements = cfg.jobs_in_batch(kernel) * kernel.elements_per_job();
    let mut factor = resource::max_pe_factor(kernel, platform);
    while factor > 1 && !batch_elements.is_multiple_of(factor) {
        factor /= 2;
    }
    factor
}

fn attempt_pe_duplication(run: &mut GuidelineRun) -> Result<()> {
    if run.current.config.caching.is_none() {
        run.record_skip(
            Strategy::PeDuplication,
            "requires explicit data caching".into(),
        );
        return Ok(());
    }
    let factor = best_pe_factor(run.kernel, run.platform, &run.current.config);
    match transforms::apply_pe_duplication(run.kernel, run.platform, &run.current.config, factor) {
        Ok(applied) => {
            let candidate = evaluate(run.kernel, run.platform, &applied.config)?;
            let improves = candidate.breakdown.total_s < run.current.breakdown.total_s;
            if improves && !candidate.resources.fits && factor > 1 {
                // Resource feedback: a factor that improves but does not fit
                // earns one retry at the next-lower factor.
                let retry = factor / 2;
                let mut applied = transforms::apply_pe_duplication(
                    run.kernel,
                    run.platform,
                    &run.current.config,
                    retry,
                )?;
                applied
                    .notes
                    .push(format!("factor {factor} improved but did not fit; retried at {retry}"));
                run.consider(Strategy::PeDuplication, applied)?;
            } else {
                run.consider(Strategy::PeDuplication, applied)?;
            }
        }
        Err(e) => run.record_skip(Strategy::PeDuplication, e.to_string()),
    }
    Ok(())
}

fn attempt_reorg_sweep(run: &mut GuidelineRun) -> Result<()> {
    if run.current.config.caching.is_none() {
        run.record_skip(
            Strategy::ScratchpadReorg,
            "requires explicit data caching".into(),
        );
        return Ok(());
    }
    let (best_cfg, _) = sweep_tradeoff(run.kernel, run.platform, &run.current.config)?;
    if best_cfg == run.current.config {
        run.record_skip(
            Strategy::ScratchpadReorg,
            "no fitting width/duplication point improves on the current design".into(),
        );
        return Ok(());
    }
    let mut applied = Applied {
        config: best_cfg,
        template: Strategy::ScratchpadReorg.template_id(),
        notes: vec![format!(
            "joint width/duplication sweep selected width {} with {} duplicates",
            best_cfg.buffer_width_bits, best_cfg.pe_factor
        )],
    };
    if best_cfg.pe_factor != run.current.config.pe_factor {
        applied.notes.push(format!(
            "duplication factor adjusted from {} to make room for wider buffers",
            run.current.config.pe_factor
        ));
    }
    run.consider(Strategy::ScratchpadReorg, applied)?;
    Ok(())
}

/// One evaluated point of the width/duplication grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub buffer_width_bits: u32,
    pub pe_factor: u64,
    pub total_s: f64,
    pub fits: bool,
    pub bram_blocks: u64,
    pub compute_units: u64,
}

/// Evaluates the full buffer-width x duplication-factor grid reachable from
/// `cfg` (widths 64..512, factors powers of two within budget), sorted by
/// width then factor.
pub fn sweep_grid(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
) -> Result<Vec<SweepPoint>> {
    if cfg.caching.is_none() {
        return Err(Error::Precondition(
            "the trade-off sweep requires explicit data caching".into(),
        ));
    }
    let max_pe = resource::max_pe_factor(kernel, platform);
    let batch_elements = cfg.jobs_in_batch(kernel) * kernel.elements_per_job();
    let mut rows = Vec::new();
    for &width in SWEEP_WIDTHS.iter() {
        if width < kernel.element_width_bits {
            continue;
        }
        let mut pe = 1u64;
        while pe <= max_pe {
            if batch_elements.is_multiple_of(pe) {
                let candidate = DesignConfig {
                    buffer_width_bits: width,
                    pe_factor: pe,
                    partition_factor: pe,
                    ..*cfg
                };
                let breakdown = cost::total_time(kernel, platform, &candidate)?;
                let usage = resource::design_usage(kernel, platform, &candidate);
                rows.push(SweepPoint {
                    buffer_width_bits: width,
                    pe_factor: pe,
                    total_s: breakdown.total_s,
                    fits: usage.fits,
                    bram_blocks: usage.bram_blocks,
                    compute_units: usage.compute_units,
                });
            }
            pe *= 2;
        }
    }
    Ok(rows)
}

/// Exhaustive search over the width/duplication grid. Returns the fitting
/// point with the smallest total (ties broken by fewer BRAM blocks, then
/// smaller factor, then narrower width), or the input config when nothing
/// fitting improves on it.
pub fn sweep_tradeoff(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
) -> Result<(DesignConfig, CostBreakdown)> {
    let rows = sweep_grid(kernel, platform, cfg)?;
    let input_breakdown = cost::total_time(kernel, platform, cfg)?;
    let mut best: Option<&SweepPoint> = None;
    for row in rows.iter().filter(|r| r.fits) {
        best = match best {
            None => Some(row),
            Some(b) => {
                let candidate_key = (row.total_s, row.bram_blocks, row.pe_factor, row.buffer_width_bits);
                let best_key = (b.total_s, b.bram_blocks, b.pe_factor, b.buffer_width_bits);
                if candidate_key < best_key {
                    Some(row)
                } else {
                    Some(b)
                }
            }
        };
    }
    match best {
        Some(row) if row.total_s < input_breakdown.total_s => {
            let chosen = DesignConfig {
                buffer_width_bits: row.buffer_width_bits,
                pe_factor: row.pe_factor,
                partition_factor: row.pe_factor,
                ..*cfg
            };
            let breakdown = cost::total_time(kernel, platform, &chosen)?;
            Ok((chosen, breakdown))
        }
        _ => Ok((*cfg, input_breakdown)),
    }
}

/// Evaluates exactly one config, no search: breakdown plus resource usage.
/// The config must pass every transform-applicability check.
pub fn whatif(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
) -> Result<(CostBreakdown, ResourceUsage)> {
    validate_config(kernel, platform, cfg)?;
    Ok((
        cost::total_time(kernel, platform, cfg)?,
        resource::design_usage(kernel, platform, cfg),
    ))
}

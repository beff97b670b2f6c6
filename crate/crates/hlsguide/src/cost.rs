//! Pure analytical timing of a (kernel, platform, config) triple.
//!
//! Three time components are modeled: PCIe host-device transfer, DRAM access
//! (burst initialization plus streaming beats), and on-chip computation.
//! Everything is integer cycle arithmetic until the final division by the
//! clock, so identical inputs give bit-identical results.

use serde::{Deserialize, Serialize};

use crate::config::DesignConfig;
use crate::descriptor::{KernelDescriptor, LoopBlock, Parallelism, Pipelineable, PlatformDescriptor, TripScaling};
use crate::error::{Error, Result};

/// The three execution-time components an accelerator splits into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Pcie,
    Dram,
    Compute,
}

/// Modeled execution-time breakdown of one design point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub pcie_s: f64,
    pub dram_s: f64,
    pub compute_s: f64,
    pub total_s: f64,
    #[serde(rename = "speedup")]
    pub speedup_vs_cpu: f64,
    pub dominant: Component,
}

/// Per-iteration stage cycles of the load/compute/store decomposition, for a
/// full batch, plus how many iterations the workload takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTimes {
    pub load_cycles: u64,
    pub compute_cycles: u64,
    pub store_cycles: u64,
    pub iteration_count: u64,
}

/// Evaluation scope for compute time: how many jobs and cached elements one
/// batch iteration covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchScope {
    pub jobs: u64,
    pub elements: u64,
}

impl BatchScope {
    /// Scope of one batch iteration under `cfg` (the whole workload when
    /// caching is disabled).
    pub fn for_config(kernel: &KernelDescriptor, cfg: &DesignConfig) -> BatchScope {
        let jobs = cfg.jobs_in_batch(kernel);
        BatchScope {
            jobs,
            elements: jobs * kernel.elements_per_job(),
        }
    }
}

/// Host-device DMA time: fixed setup plus both directions of payload.
pub fn pcie_time(kernel: &KernelDescriptor, platform: &PlatformDescriptor) -> f64 {
    platform.pcie_setup_s
        + (kernel.input_bytes + kernel.output_bytes) as f64 / platform.pcie_bandwidth_bytes_per_s
}

/// Cycles for one memory burst of `bytes` at the full bus width: one fixed
/// initialization plus one beat per bus-width of payload. Zero bytes cost
/// nothing.
pub fn burst_cycles(bytes: u64, platform: &PlatformDescriptor) -> u64 {
    burst_cycles_at_width(
        bytes,
        platform.dram_init_latency_cycles,
        platform.dram_bus_width_bits,
    )
}

/// Burst cycles when the transfer is throttled to `width_bits` per beat
/// (a buffer narrower than the bus caps the streaming rate).
pub fn burst_cycles_at_width(bytes: u64, init_cycles: u64, width_bits: u32) -> u64 {
    if bytes == 0 {
        return 0;
    }
    init_cycles + (bytes * 8).div_ceil(u64::from(width_bits))
}

/// Fraction of a burst spent in initialization.
pub fn burst_init_share(bytes: u64, platform: &PlatformDescriptor) -> f64 {
    let total = burst_cycles(bytes, platform);
    if total == 0 {
        0.0
    } else {
        platform.dram_init_latency_cycles as f64 / total as f64
    }
}

/// DRAM time of the uncached design, where every per-job operand and result
/// element is fetched or written individually, paying the full initialization
/// latency plus one beat each time.
pub fn naive_dram_time(kernel: &KernelDescriptor, platform: &PlatformDescriptor) -> f64 {
    let accesses = naive_dram_accesses(kernel);
    let cycles = accesses * (platform.dram_init_latency_cycles + 1);
    cycles as f64 / platform.clock_hz
}

/// Individual element accesses the uncached design performs: every job's
/// input and output elements, counted per use. For kernels without data
/// reuse this equals `(input_bytes + output_bytes) * 8 / element_width_bits`;
/// kernels whose jobs re-read shared operands (tiled matrix products) touch
/// DRAM more often than the host-transfer byte counts suggest.
pub fn naive_dram_accesses(kernel: &KernelDescriptor) -> u64 {
    kernel.job_count * (kernel.job_input_bytes + kernel.job_output_bytes) * 8
        / u64::from(kernel.element_width_bits)
}

/// Cycles for `n` iterations of one loop block: `n*ii + L` when pipelined
/// (issue one iteration per `ii` cycles, then drain), `n*L` sequentially.
///
/// The drain is paid once, so pipelining wins whenever `n*(L-ii) ≥ L`; below
/// that (tiny trip counts, `ii` close to `L`) the formula can exceed the
/// sequential time, which is why the refinement driver only keeps the step
/// when it actually improves the total.
pub fn loop_time(l: &LoopBlock, pipelined: bool, n: u64) -> u64 {
    if pipelined && l.pipelineable != Pipelineable::No {
        n * l.min_ii + l.body_latency_cycles
    } else {
        n * l.body_latency_cycles
    }
}

fn per_job_trip(l: &LoopBlock, kernel: &KernelDescriptor) -> Option<u64> {
    match l.trip_scaling {
        TripScaling::PerJob => Some(l.trip_count),
        TripScaling::PerBatchElement => Some(l.trip_count * kernel.elements_per_job()),
        TripScaling::Fixed => None,
    }
}

/// Cycles one job spends in the compute body.
pub fn job_loop_time(kernel: &KernelDescriptor, pipelined: bool) -> u64 {
    kernel
        .loops
        .iter()
        .filter_map(|l| per_job_trip(l, kernel).map(|n| loop_time(l, pipelined, n)))
        .sum()
}

/// Cycles of fixed-trip loops that run once per batch iteration and do not
/// shrink with duplication.
fn fixed_batch_overhead(kernel: &KernelDescriptor, pipelined: bool) -> u64 {
    kernel
        .loops
        .iter()
        .filter(|l| l.trip_scaling == TripScaling::Fixed)
        .map(|l| loop_time(l, pipelined, l.trip_count))
        .sum()
}

/// Compute cycles for one batch scope under `cfg`: the per-job loop time
/// spread across duplicates according to the parallelism profile, plus the
/// per-element staging copies that widened scratchpads add.
pub fn compute_cycles(
    kernel: &KernelDescriptor,
    cfg: &DesignConfig,
    scope: BatchScope,
) -> Result<u64> {
    let pe = cfg.pe_factor;
    let job = job_loop_time(kernel, cfg.pipelined);
    let spread = match kernel.parallelism {
        Parallelism::Flat => scope.jobs.div_ceil(pe) * job,
        Parallelism::TreeReduce { layers } => {
            let mut total = 0u64;
            for layer in 0..layers {
                let parallel = scope.jobs.div_ceil(1 << layer.min(63));
                total += parallel.div_ceil(pe) * job;
            }
            total
        }
        Parallelism::ChainDependent => {
            if pe > 1 {
                return Err(Error::Precondition(format!(
                    "chain-dependent jobs cannot be spread across {pe} processing elements"
                )));
            }
            scope.jobs * job
        }
    };
    // Widened buffer groups stage data through a normal-width copy in both
    // directions, one element per cycle per duplicate.
    let reorg_copies = if cfg.buffer_width_bits > kernel.element_width_bits {
        2 * scope.elements.div_ceil(pe)
    } else {
        0
    };
    Ok(spread + reorg_copies + fixed_batch_overhead(kernel, cfg.pipelined))
}

/// Narrower of the buffer width and the bus width: a narrow buffer throttles
/// the bus.
pub fn effective_burst_width(cfg: &DesignConfig, platform: &PlatformDescriptor) -> u32 {
    cfg.buffer_width_bits.min(platform.dram_bus_width_bits)
}

/// Per-iteration load/compute/store cycles for a full batch.
///
/// Requires caching: without an on-chip buffer there is no batch iteration
/// structure to speak of.
pub fn stage_times(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
) -> Result<StageTimes> {
    if cfg.caching.is_none() {
        return Err(Error::Precondition(
            "stage_times requires explicit data caching".into(),
        ));
    }
    let scope = BatchScope::for_config(kernel, cfg);
    let width = effective_burst_width(cfg, platform);
    let init = platform.dram_init_latency_cycles;
    Ok(StageTimes {
        load_cycles: burst_cycles_at_width(scope.jobs * kernel.job_input_bytes, init, width),
        compute_cycles: compute_cycles(kernel, cfg, scope)?,
        store_cycles: burst_cycles_at_width(scope.jobs * kernel.job_output_bytes, init, width),
        iteration_count: kernel.job_count.div_ceil(scope.jobs),
    })
}

/// Per-iteration stage cycles across the whole workload, including a shorter
/// final iteration when the batch size does not divide the job count.
pub fn stage_schedule(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
) -> Result<Vec<(u64, u64, u64)>> {
    if cfg.caching.is_none() {
        return Err(Error::Precondition(
            "stage_schedule requires explicit data caching".into(),
        ));
    }
    let full = BatchScope::for_config(kernel, cfg);
    let width = effective_burst_width(cfg, platform);
    let init = platform.dram_init_latency_cycles;
    let iterations = kernel.job_count.div_ceil(full.jobs);
    let mut schedule = Vec::with_capacity(iterations as usize);
    let mut remaining = kernel.job_count;
    for _ in 0..iterations {
        let jobs = remaining.min(full.jobs);
        let scope = BatchScope {
            jobs,
            elements: jobs * kernel.elements_per_job(),
        };
        schedule.push((
            burst_cycles_at_width(jobs * kernel.job_input_bytes, init, width),
            compute_cycles(kernel, cfg, scope)?,
            burst_cycles_at_width(jobs * kernel.job_output_bytes, init, width),
        ));
        remaining -= jobs;
    }
    Ok(schedule)
}

/// Makespan of the sequential schedule: each iteration loads, computes and
/// stores before the next begins.
pub fn sequential_makespan(schedule: &[(u64, u64, u64)]) -> u64 {
    schedule.iter().map(|&(l, c, s)| l + c + s).sum()
}

/// Makespan of the rotating three-buffer schedule: iteration `i` loads in
/// phase `i`, computes in phase `i+1` and stores in phase `i+2`; each phase
/// lasts as long as its slowest active stage. For `n` iterations there are
/// `n + 2` phases. Uniform stages give `l + c + s + (n-1) * max(l, c, s)`.
pub fn overlapped_makespan(schedule: &[(u64, u64, u64)]) -> u64 {
    let n = schedule.len() as u64;
    let mut makespan = 0u64;
    for phase in 0..n + 2 {
        let mut span = 0u64;
        if phase < n {
            span = span.max(schedule[phase as usize].0);
        }
        if phase >= 1 && phase - 1 < n {
            span = span.max(schedule[(phase - 1) as usize].1);
        }
        if phase >= 2 && phase - 2 < n {
            span = span.max(schedule[(phase - 2) as usize].2);
        }
        makespan += span;
    }
    makespan
}

fn dominant_component(pcie_s: f64, dram_s: f64, compute_s: f64) -> Component {
    // Ties break towards Dram, then Compute.
    if dram_s >= compute_s && dram_s >= pcie_s {
        Component::Dram
    } else if compute_s >= pcie_s {
        Component::Compute
    } else {
        Component::Pcie
    }
}

/// Full breakdown of one design point: PCIe transfer plus the device-side
/// makespan, split into DRAM and compute shares.
///
/// Under the overlapped schedule, load/store cycles hidden beneath compute
/// are attributed to compute so the dominant component reflects the critical
/// path; only exposed DRAM cycles count as DRAM time.
pub fn total_time(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
) -> Result<CostBreakdown> {
    let pcie_s = pcie_time(kernel, platform);
    let clock = platform.clock_hz;
    let (dram_s, compute_s) = if cfg.caching.is_none() {
        let scope = BatchScope::for_config(kernel, cfg);
        let compute = compute_cycles(kernel, cfg, scope)?;
        (naive_dram_time(kernel, platform), compute as f64 / clock)
    } else {
        let schedule = stage_schedule(kernel, platform, cfg)?;
        let compute_total: u64 = schedule.iter().map(|&(_, c, _)| c).sum();
        let device = if cfg.double_buffered {
            overlapped_makespan(&schedule)
        } else {
            sequential_makespan(&schedule)
        };
        (
            (device - compute_total) as f64 / clock,
            compute_total as f64 / clock,
        )
    };
    let total_s = pcie_s + dram_s + compute_s;
    Ok(CostBreakdown {
        pcie_s,
        dram_s,
        compute_s,
        total_s,
        speedup_vs_cpu: kernel.cpu_baseline_s / total_s,
        dominant: dominant_component(pcie_s, dram_s, compute_s),
    })
}

//! The five optimization strategies as checked rewrites on `DesignConfig`.
//!
//! Transforms never touch kernel or platform descriptors and never evaluate
//! timing; applicability is decided from descriptor enums alone. Each
//! successful application names the code template it corresponds to, so a
//! report can say what source change the config implies.

use serde::{Deserialize, Serialize};

use crate::config::{CachingMode, DesignConfig, MAX_PE_FACTOR};
use crate::descriptor::{KernelDescriptor, Pipelineable, PlatformDescriptor, WorkingSetClass};
use crate::error::{Error, Result};
use crate::resource;

/// Reason recorded when duplication is requested for chain-dependent jobs.
pub const REASON_CHAIN_DEPENDENT: &str = "chain-dependent jobs";
/// Reason recorded when overlap is requested but each iteration's results
/// feed the next iteration's load.
pub const REASON_OUTPUT_FEEDS_NEXT_LOAD: &str =
    "output of each iteration feeds the next iteration's load";

/// The five refinement strategies, in guideline order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    DataCaching,
    Pipelining,
    PeDuplication,
    DoubleBuffering,
    ScratchpadReorg,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::DataCaching,
        Strategy::Pipelining,
        Strategy::PeDuplication,
        Strategy::DoubleBuffering,
        Strategy::ScratchpadReorg,
    ];

    /// Identifier of the code template the strategy corresponds to.
    pub fn template_id(self) -> &'static str {
        match self {
            Strategy::DataCaching => "fig4a",
            Strategy::Pipelining | Strategy::PeDuplication => "fig4b",
            Strategy::DoubleBuffering => "fig4c",
            Strategy::ScratchpadReorg => "fig4d",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::DataCaching => "data_caching",
            Strategy::Pipelining => "pipelining",
            Strategy::PeDuplication => "pe_duplication",
            Strategy::DoubleBuffering => "double_buffering",
            Strategy::ScratchpadReorg => "scratchpad_reorg",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of a successful transform: the new config, the template it maps
/// to, and anything worth recording in the trace. A no-op application
/// returns the input config with a note.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub config: DesignConfig,
    pub template: &'static str,
    pub notes: Vec<String>,
}

impl Applied {
    fn new(config: DesignConfig, strategy: Strategy) -> Self {
        Applied {
            config,
            template: strategy.template_id(),
            notes: Vec::new(),
        }
    }
}

/// Whether an out-of-range caching request errors or is clamped into range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizePolicy {
    Strict,
    ClampToValid,
}

fn inapplicable(strategy: Strategy, reason: &str) -> Error {
    Error::Inapplicable {
        strategy: strategy.name().into(),
        reason: reason.into(),
    }
}

/// Introduces an on-chip cache: batch processing for small-job kernels, data
/// tiling for large working sets.
pub fn apply_data_caching(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
    size_bytes: u64,
    policy: SizePolicy,
) -> Result<Applied> {
    if !cfg.caching.is_none() {
        return Err(Error::Precondition(
            "data caching is already applied".into(),
        ));
    }
    let min = kernel.min_caching_bytes();
    let max = platform.bram_usable_bits / 8;
    if min > max {
        return Err(Error::Resource(format!(
            "the smallest usable cache ({min} bytes) exceeds the usable BRAM capacity ({max} bytes)"
        )));
    }
    let mut notes = Vec::new();
    let size = match policy {
        SizePolicy::Strict => {
            if size_bytes < min {
                return Err(Error::Precondition(format!(
                    "caching size {size_bytes} is below the kernel's minimum of {min} bytes"
                )));
            }
            if size_bytes > max {
                return Err(Error::Resource(format!(
                    "caching size {size_bytes} bytes exceeds the usable BRAM capacity of {} bits",
                    platform.bram_usable_bits
                )));
            }
            size_bytes
        }
        SizePolicy::ClampToValid => {
            let clamped = size_bytes.clamp(min, max);
            if clamped != size_bytes {
                notes.push(format!("caching size clamped from {size_bytes} to {clamped} bytes"));
            }
            clamped
        }
    };
    let caching = match kernel.working_set_class {
        WorkingSetClass::SmallJob => CachingMode::Batch { batch_bytes: size },
        WorkingSetClass::LargeTileable => CachingMode::Tile { tile_bytes: size },
    };
    let mut applied = Applied::new(DesignConfig { caching, ..*cfg }, Strategy::DataCaching);
    applied.notes = notes;
    Ok(applied)
}

/// Pipelines every eligible loop at its minimum initiation interval. Loops
/// that only pipeline after perfectization are flagged; if no loop is
/// eligible the config is returned unchanged with a note.
pub fn apply_pipelining(kernel: &KernelDescriptor, cfg: &DesignConfig) -> Result<Applied> {
    if cfg.pipelined {
        return Err(Error::Precondition("pipelining is already applied".into()));
    }
    let eligible = kernel
        .loops
        .iter()
        .filter(|l| l.pipelineable != Pipelineable::No)
        .count();
    if eligible == 0 {
        let mut applied = Applied::new(*cfg, Strategy::Pipelining);
        applied.notes.push("no pipelineable loops; configuration unchanged".into());
        return Ok(applied);
    }
    let mut applied = Applied::new(
        DesignConfig {
            pipelined: true,
            ..*cfg
        },
        Strategy::Pipelining,
    );
    for (i, l) in kernel.loops.iter().enumerate() {
        match l.pipelineable {
            Pipelineable::AfterPerfectization => applied
                .notes
                .push(format!("loop {i} pipelined after rewriting into a perfect nest")),
            Pipelineable::No => applied
                .notes
                .push(format!("loop {i} stays sequential (not pipelineable)")),
            Pipelineable::Immediate => {}
        }
    }
    Ok(applied)
}

/// Duplicates the processing element `factor` times and partitions each
/// buffer group to match.
pub fn apply_pe_duplication(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
    factor: u64,
) -> Result<Applied> {
    if kernel.is_chain_dependent() {
        return Err(inapplicable(Strategy::PeDuplication, REASON_CHAIN_DEPENDENT));
    }
    if cfg.caching.is_none() {
        return Err(Error::Precondition(
            "PE duplication requires explicit data caching (partitioned buffers feed the duplicates)"
                .into(),
        ));
    }
    if factor == 0 || !factor.is_power_of_two() {
        return Err(Error::Precondition(format!(
            "duplication factor must be a power of two, got {factor}"
        )));
    }
    if factor > MAX_PE_FACTOR {
        return Err(Error::Precondition(format!(
            "duplication factor must be ≤ {MAX_PE_FACTOR}, got {factor}"
        )));
    }
    let max = resource::max_pe_factor(kernel, platform);
    if factor > max {
        return Err(Error::Resource(format!(
            "duplication factor {factor} exceeds the compute budget's maximum of {max}"
        )));
    }
    let batch_elements = cfg.jobs_in_batch(kernel) * kernel.elements_per_job();
    if !batch_elements.is_multiple_of(factor) {
        return Err(Error::Precondition(format!(
            "duplication factor {factor} must divide the batch element count {batch_elements}"
        )));
    }
    Ok(Applied::new(
        DesignConfig {
            pe_factor: factor,
            partition_factor: factor,
            ..*cfg
        },
        Strategy::PeDuplication,
    ))
}

/// Rotates three buffer groups so load, compute and store of adjacent
/// iterations overlap.
pub fn apply_double_buffering(kernel: &KernelDescriptor, cfg: &DesignConfig) -> Result<Applied> {
    if cfg.caching.is_none() {
        return Err(Error::Precondition(
            "double buffering requires explicit data caching".into(),
        ));
    }
    if cfg.double_buffered {
        return Err(Error::Precondition(
            "double buffering is already applied".into(),
        ));
    }
    if kernel.output_feeds_next_load {
        return Err(inapplicable(
            Strategy::DoubleBuffering,
            REASON_OUTPUT_FEEDS_NEXT_LOAD,
        ));
    }
    Ok(Applied::new(
        DesignConfig {
            double_buffered: true,
            ..*cfg
        },
        Strategy::DoubleBuffering,
    ))
}

/// Widens the DRAM-facing buffer groups to `w_bits`, keeping one
/// normal-width group to feed the duplicates; the staging copies this adds
/// are charged to compute time.
pub fn apply_scratchpad_reorg(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
    w_bits: u32,
) -> Result<Applied> {
    if cfg.caching.is_none() {
        return Err(Error::Precondition(
            "scratchpad reorganization requires explicit data caching".into(),
        ));
    }
    if !w_bits.is_power_of_two()
        || w_bits < kernel.element_width_bits
        || w_bits > 512
    {
        return Err(Error::Precondition(format!(
            "buffer width must be a power of two between {} and 512, got {w_bits}",
            kernel.element_width_bits
        )));
    }
    let next = DesignConfig {
        buffer_width_bits: w_bits,
        ..*cfg
    };
    if let Some(budget) = resource::binding_budget(kernel, platform, &next) {
        return Err(Error::Resource(budget));
    }
    let mut applied = Applied::new(next, Strategy::ScratchpadReorg);
    if w_bits == kernel.element_width_bits {
        applied
            .notes
            .push("width equals the element width; timing is unchanged".into());
    }
    Ok(applied)
}

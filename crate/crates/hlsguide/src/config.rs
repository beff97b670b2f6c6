//! The design point under evaluation: which of the five optimizations are
//! applied and with what parameters. Configs are immutable values; transforms
//! return new ones.

use serde::{Deserialize, Serialize};

use crate::descriptor::{KernelDescriptor, PlatformDescriptor};
use crate::error::{Error, Result};
use crate::resource;
use crate::transforms::{REASON_CHAIN_DEPENDENT, REASON_OUTPUT_FEEDS_NEXT_LOAD};

/// Hard cap on the duplication factor, independent of platform budgets.
pub const MAX_PE_FACTOR: u64 = 128;

/// Buffer widths a scratchpad can be reorganized to.
pub const SUPPORTED_BUFFER_WIDTHS: [u32; 7] = [8, 16, 32, 64, 128, 256, 512];

/// Explicit data caching mode and size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CachingMode {
    /// Every access goes to DRAM individually.
    None,
    /// A batch of small jobs is cached and processed per iteration.
    Batch { batch_bytes: u64 },
    /// One or more tiles of a large job are cached per iteration.
    Tile { tile_bytes: u64 },
}

impl CachingMode {
    pub fn is_none(&self) -> bool {
        matches!(self, CachingMode::None)
    }

    /// Cached bytes per iteration, if caching is enabled.
    pub fn bytes(&self) -> Option<u64> {
        match *self {
            CachingMode::None => None,
            CachingMode::Batch { batch_bytes } => Some(batch_bytes),
            CachingMode::Tile { tile_bytes } => Some(tile_bytes),
        }
    }
}

/// One accelerator design point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub caching: CachingMode,
    /// All eligible loops pipelined at their minimum initiation interval.
    pub pipelined: bool,
    /// Number of processing-element duplicates, power of two.
    pub pe_factor: u64,
    /// Three rotating buffer groups overlap load/compute/store when true.
    pub double_buffered: bool,
    /// Width of the DRAM-facing buffer group; equals the kernel's element
    /// width until scratchpads are reorganized.
    pub buffer_width_bits: u32,
    /// Cyclic partition count of each buffer group; mirrors `pe_factor`.
    pub partition_factor: u64,
}

impl DesignConfig {
    /// The design synthesized straight from the software kernel: no caching,
    /// no pipelining, one PE, element-width buffers.
    pub fn naive(kernel: &KernelDescriptor) -> Self {
        DesignConfig {
            caching: CachingMode::None,
            pipelined: false,
            pe_factor: 1,
            double_buffered: false,
            buffer_width_bits: kernel.element_width_bits,
            partition_factor: 1,
        }
    }

    /// Jobs processed per batch iteration under this config. Without caching
    /// the whole workload is one scope.
    pub fn jobs_in_batch(&self, kernel: &KernelDescriptor) -> u64 {
        match self.caching.bytes() {
            None => kernel.job_count,
            Some(bytes) => (bytes / kernel.job_input_bytes).max(1).min(kernel.job_count),
        }
    }

    /// Cached bytes each duplicate works on per iteration.
    pub fn pe_batch_bytes(&self) -> Option<u64> {
        self.caching.bytes().map(|b| b / self.pe_factor)
    }
}

/// Checks a config against a kernel and platform: the transform
/// applicability rules plus every structural invariant. Errors are worded so
/// the CLI can surface them verbatim.
pub fn validate_config(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
) -> Result<()> {
    if cfg.pe_factor == 0 || !cfg.pe_factor.is_power_of_two() {
        return Err(Error::Precondition(format!(
            "pe_factor must be a power of two ≥ 1, got {}",
            cfg.pe_factor
        )));
    }
    if cfg.pe_factor > MAX_PE_FACTOR {
        return Err(Error::Precondition(format!(
            "pe_factor must be ≤ {MAX_PE_FACTOR}, got {}",
            cfg.pe_factor
        )));
    }
    if cfg.partition_factor != cfg.pe_factor {
        return Err(Error::Precondition(format!(
            "partition_factor ({}) must equal pe_factor ({})",
            cfg.partition_factor, cfg.pe_factor
        )));
    }
    if kernel.is_chain_dependent() && cfg.pe_factor > 1 {
        return Err(Error::Inapplicable {
            strategy: "pe_duplication".into(),
            reason: REASON_CHAIN_DEPENDENT.into(),
        });
    }
    let max_pe = resource::max_pe_factor(kernel, platform);
    if cfg.pe_factor > max_pe {
        return Err(Error::Resource(format!(
            "pe_factor {} exceeds the compute budget's maximum of {max_pe}",
            cfg.pe_factor
        )));
    }

    let w = cfg.buffer_width_bits;
    if !SUPPORTED_BUFFER_WIDTHS.contains(&w) {
        return Err(Error::Precondition(format!(
            "buffer_width_bits must be one of {SUPPORTED_BUFFER_WIDTHS:?}, got {w}"
        )));
    }
    if w < kernel.element_width_bits {
        return Err(Error::Precondition(format!(
            "buffer_width_bits ({w}) must be ≥ element_width_bits ({})",
            kernel.element_width_bits
        )));
    }
    if w > kernel.element_width_bits && cfg.caching.is_none() {
        return Err(Error::Precondition(
            "scratchpad reorganization requires explicit data caching".into(),
        ));
    }

    if cfg.double_buffered {
        if cfg.caching.is_none() {
            return Err(Error::Precondition(
                "double buffering requires explicit data caching".into(),
            ));
        }
        if kernel.output_feeds_next_load {
            return Err(Error::Inapplicable {
                strategy: "double_buffering".into(),
                reason: REASON_OUTPUT_FEEDS_NEXT_LOAD.into(),
            });
        }
    }

    if let Some(bytes) = cfg.caching.bytes() {
        if bytes < kernel.min_caching_bytes() {
            return Err(Error::Precondition(format!(
                "caching size {bytes} is below the kernel's minimum of {} bytes",
                kernel.min_caching_bytes()
            )));
        }
        if bytes.saturating_mul(8) > platform.bram_usable_bits {
            return Err(Error::Resource(format!(
                "caching size {bytes} bytes exceeds the usable BRAM capacity of {} bits",
                platform.bram_usable_bits
            )));
        }
        let batch_elements =
            cfg.jobs_in_batch(kernel) * kernel.elements_per_job();
        if !batch_elements.is_multiple_of(cfg.pe_factor) {
            return Err(Error::Precondition(format!(
                "pe_factor {} must divide the batch element count {batch_elements}",
                cfg.pe_factor
            )));
        }
    }
    Ok(())
}

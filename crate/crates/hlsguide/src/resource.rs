//! BRAM block counting and compute-budget checks for a design point.

use serde::{Deserialize, Serialize};

use crate::config::{DesignConfig, MAX_PE_FACTOR};
use crate::descriptor::{KernelDescriptor, PlatformDescriptor};

/// Resource footprint of one design point against the platform budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceUsage {
    pub bram_blocks: u64,
    pub compute_units: u64,
    pub fits: bool,
}

/// Fewest physical blocks that realize a logical buffer of the requested
/// width and depth: each block is configured to one of its supported
/// width/depth shapes and blocks tile the buffer in both dimensions.
pub fn bram_blocks(width_bits: u32, depth_entries: u64, platform: &PlatformDescriptor) -> u64 {
    if width_bits == 0 || depth_entries == 0 {
        return 0;
    }
    platform
        .bram_block_configs
        .iter()
        .map(|mode| {
            u64::from(width_bits.div_ceil(mode.width_bits)) * depth_entries.div_ceil(mode.depth_entries)
        })
        .min()
        .unwrap_or(0)
}

/// Buffer groups a config implies: one for plain caching, three rotating
/// groups when double buffered, plus one normal-width staging group when the
/// scratchpads are widened.
fn buffer_groups(kernel: &KernelDescriptor, cfg: &DesignConfig) -> Vec<(u32, u64)> {
    let Some(_) = cfg.caching.bytes() else {
        return Vec::new();
    };
    let jobs = cfg.jobs_in_batch(kernel);
    let capacity_bits = 8 * (jobs * kernel.job_input_bytes).max(jobs * kernel.job_output_bytes);
    let wide_groups = if cfg.double_buffered { 3 } else { 1 };
    let mut groups = vec![(cfg.buffer_width_bits, capacity_bits); wide_groups];
    if cfg.buffer_width_bits > kernel.element_width_bits {
        groups.push((kernel.element_width_bits, capacity_bits));
    }
    groups
}

/// Blocks, compute units and budget fit of one design point.
///
/// Each buffer group is cyclically partitioned `pe_factor` ways; every
/// partition occupies at least one block. Per-duplicate bookkeeping storage
/// is counted on top of the data buffers.
pub fn design_usage(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
) -> ResourceUsage {
    let pe = cfg.pe_factor;
    let mut blocks = 0u64;
    let mut bits = 0u64;
    for (width, capacity_bits) in buffer_groups(kernel, cfg) {
        let entries = capacity_bits.div_ceil(u64::from(width));
        let partition_depth = entries.div_ceil(pe);
        blocks += pe * bram_blocks(width, partition_depth, platform);
        bits += capacity_bits;
    }
    blocks += pe * kernel.per_pe_extra_bram_bits.div_ceil(platform.bram_block_bits.max(1));
    bits += pe * kernel.per_pe_extra_bram_bits;
    let compute_units = pe * kernel.per_pe_compute_units;
    let fits = blocks <= platform.bram_blocks_total
        && compute_units <= platform.compute_units_total
        && bits <= platform.bram_usable_bits;
    ResourceUsage {
        bram_blocks: blocks,
        compute_units,
        fits,
    }
}

/// Names the budget a non-fitting design violates first.
pub fn binding_budget(
    kernel: &KernelDescriptor,
    platform: &PlatformDescriptor,
    cfg: &DesignConfig,
) -> Option<String> {
    let usage = design_usage(kernel, platform, cfg);
    if usage.bram_blocks > platform.bram_blocks_total {
        return Some(format!(
            "{} BRAM blocks needed, {} available",
            usage.bram_blocks, platform.bram_blocks_total
        ));
    }
    if usage.compute_units > platform.compute_units_total {
        return Some(format!(
            "{} compute units needed, {} available",
            usage.compute_units, platform.compute_units_total
        ));
    }
    let mut bits = 0u64;
    for (_, capacity_bits) in buffer_groups(kernel, cfg) {
        bits += capacity_bits;
    }
    bits += cfg.pe_factor * kernel.per_pe_extra_bram_bits;
    if bits > platform.bram_usable_bits {
        return Some(format!(
            "{bits} buffer bits needed, {} usable",
            platform.bram_usable_bits
        ));
    }
    None
}

/// Largest power-of-two duplication factor (capped at 128) whose compute
/// cost fits the platform budget. Chain-dependent kernels never duplicate.
pub fn max_pe_factor(kernel: &KernelDescriptor, platform: &PlatformDescriptor) -> u64 {
    if kernel.is_chain_dependent() {
        return 1;
    }
    let affordable = platform.compute_units_total / kernel.per_pe_compute_units.max(1);
    let mut factor = 1u64;
    while factor * 2 <= affordable.min(MAX_PE_FACTOR) {
        factor *= 2;
    }
    factor
}

//! Analytical performance and resource modeling for batch-oriented FPGA
//! accelerator designs, plus the iterative refinement loop that drives a
//! design from its naive form to a tuned one.
//!
//! The crate models a design as three cooperating pieces:
//!
//! * descriptors ([`descriptor`]) capture what a kernel looks like (data
//!   volumes, loop shapes, parallelism profile) and what the platform
//!   provides (clock, burst latency, BRAM inventory, budgets);
//! * a design point ([`config::DesignConfig`]) says which of the five
//!   optimizations — explicit data caching, pipelining, processing-element
//!   duplication, double buffering, scratchpad reorganization — are applied
//!   and with what parameters;
//! * pure evaluators ([`cost`], [`resource`]) turn a (kernel, platform,
//!   config) triple into a PCIe/DRAM/compute time breakdown and a BRAM /
//!   compute-unit footprint.
//!
//! [`transforms`] are checked rewrites between design points, [`driver`]
//! chains them into the bottleneck-driven refinement loop, and [`sim`] is a
//! discrete-event oracle that validates the overlap arithmetic. Everything
//! is deterministic: identical inputs give bit-identical outputs, so results
//! can be diffed, cached and evaluated concurrently.

pub mod bundled;
pub mod config;
pub mod cost;
pub mod descriptor;
pub mod driver;
mod error;
pub mod report;
pub mod resource;
pub mod sim;
pub mod transforms;

pub use config::{validate_config, CachingMode, DesignConfig, MAX_PE_FACTOR};
pub use cost::{
    burst_cycles, compute_cycles, loop_time, naive_dram_time, pcie_time, stage_times, total_time,
    Component, CostBreakdown, StageTimes,
};
pub use descriptor::{
    parse_kernel, parse_platform, KernelDescriptor, LoopBlock, Parallelism, Pipelineable,
    PlatformDescriptor, TripScaling, WorkingSetClass,
};
pub use driver::{
    pcie_gate, pinpoint, run_guideline, run_guideline_from, sweep_tradeoff, whatif, GateDecision,
    GateReport, RefinementTrace, TraceStep,
};
pub use error::{Error, Result};
pub use resource::{bram_blocks, design_usage, max_pe_factor, ResourceUsage};
pub use transforms::{
    apply_data_caching, apply_double_buffering, apply_pe_duplication, apply_pipelining,
    apply_scratchpad_reorg, Applied, SizePolicy, Strategy,
};

//! Descriptor data model: declarative timing/shape abstractions of a
//! computational kernel and the calibration constants of the CPU-FPGA
//! platform it runs on.
//!
//! Descriptors are plain data, validated once at construction and immutable
//! afterwards. They deliberately carry no functional code: a kernel is
//! described by how much data it moves, how its loops are shaped and how its
//! jobs may be parallelized, which is everything the cost model needs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element widths the model understands (native C scalar widths).
pub const SUPPORTED_ELEMENT_WIDTHS: [u32; 4] = [8, 16, 32, 64];

/// Finite and strictly positive; NaN and infinities fail validation.
pub(crate) fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// One width/depth aspect ratio a physical BRAM block can be configured as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BramMode {
    pub width_bits: u32,
    pub depth_entries: u64,
}

fn default_clock_hz() -> f64 {
    2.0e8
}
fn default_dram_init() -> u64 {
    100
}
fn default_bus_width() -> u32 {
    512
}
fn default_pcie_bandwidth() -> f64 {
    8.0e9
}
fn default_pcie_setup() -> f64 {
    3.0e-5
}
fn default_bram_blocks() -> u64 {
    3000
}
fn default_block_bits() -> u64 {
    18432
}
fn default_compute_units() -> u64 {
    1024
}
fn default_usable_bits() -> u64 {
    4 * 1024 * 1024 * 8
}
fn default_block_modes() -> Vec<BramMode> {
    [
        (36u32, 512u64),
        (18, 1024),
        (9, 2048),
        (4, 4096),
        (2, 8192),
        (1, 16384),
    ]
    .iter()
    .map(|&(width_bits, depth_entries)| BramMode {
        width_bits,
        depth_entries,
    })
    .collect()
}

/// Calibration constants of the CPU-FPGA platform.
///
/// Every field has a default matching the reference platform, so an empty
/// JSON object parses to a usable descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformDescriptor {
    /// Fabric clock in cycles per second.
    #[serde(default = "default_clock_hz")]
    pub clock_hz: f64,
    /// Fixed initialization latency paid once per DRAM access or burst.
    #[serde(default = "default_dram_init")]
    pub dram_init_latency_cycles: u64,
    /// Maximum bits moved per cycle once a burst is streaming.
    #[serde(default = "default_bus_width")]
    pub dram_bus_width_bits: u32,
    /// Effective host-to-device DMA bandwidth.
    #[serde(default = "default_pcie_bandwidth")]
    pub pcie_bandwidth_bytes_per_s: f64,
    /// Fixed per-transfer DMA setup time in seconds.
    #[serde(default = "default_pcie_setup")]
    pub pcie_setup_s: f64,
    #[serde(default = "default_bram_blocks")]
    pub bram_blocks_total: u64,
    /// Capacity of one physical block.
    #[serde(default = "default_block_bits")]
    pub bram_block_bits: u64,
    /// Width/depth shapes one block supports.
    #[serde(default = "default_block_modes")]
    pub bram_block_configs: Vec<BramMode>,
    /// Abstract LUT/DSP budget available to processing elements.
    #[serde(default = "default_compute_units")]
    pub compute_units_total: u64,
    /// BRAM capacity available to user buffers (the rest feeds system IPs).
    #[serde(default = "default_usable_bits")]
    pub bram_usable_bits: u64,
    /// Free-form per-field notes on where each value comes from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<BTreeMap<String, String>>,
}

impl Default for PlatformDescriptor {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty platform object always parses")
    }
}

impl PlatformDescriptor {
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if !positive(self.clock_hz) {
            issues.push("clock_hz must be > 0".into());
        }
        if self.dram_init_latency_cycles == 0 {
            issues.push("dram_init_latency_cycles must be ≥ 1".into());
        }
        if self.dram_bus_width_bits == 0 || !self.dram_bus_width_bits.is_power_of_two() {
            issues.push("dram_bus_width_bits must be a power of two".into());
        }
        if self.dram_bus_width_bits > 512 {
            issues.push("dram_bus_width_bits must be ≤ 512".into());
        }
        if !positive(self.pcie_bandwidth_bytes_per_s) {
            issues.push("pcie_bandwidth_bytes_per_s must be > 0".into());
        }
        if !positive(self.pcie_setup_s) {
            issues.push("pcie_setup_s must be > 0".into());
        }
        if self.bram_blocks_total == 0 {
            issues.push("bram_blocks_total must be ≥ 1".into());
        }
        if self.bram_block_bits == 0 {
            issues.push("bram_block_bits must be ≥ 1".into());
        }
        if self.bram_block_configs.is_empty() {
            issues.push("bram_block_configs must not be empty".into());
        }
        for (i, mode) in self.bram_block_configs.iter().enumerate() {
            if mode.width_bits == 0 || mode.depth_entries == 0 {
                issues.push(format!("bram_block_configs[{i}]: width and depth must be ≥ 1"));
            } else if u64::from(mode.width_bits) * mode.depth_entries > self.bram_block_bits {
                issues.push(format!(
                    "bram_block_configs[{i}]: {}x{} exceeds the {}-bit block capacity",
                    mode.width_bits, mode.depth_entries, self.bram_block_bits
                ));
            }
        }
        if self.compute_units_total == 0 {
            issues.push("compute_units_total must be ≥ 1".into());
        }
        if self.bram_usable_bits == 0 {
            issues.push("bram_usable_bits must be ≥ 1".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::validation(issues))
        }
    }

    /// Peak DRAM-to-BRAM bandwidth implied by bus width and clock. Any
    /// derating below peak is left to platform calibration.
    pub fn peak_dram_bytes_per_s(&self) -> f64 {
        f64::from(self.dram_bus_width_bits) / 8.0 * self.clock_hz
    }
}

/// Whether (and how easily) a loop block can be pipelined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipelineable {
    /// A pipeline pragma suffices as-is.
    Immediate,
    /// Pipelines only after the nest is rewritten into a perfect loop;
    /// flagged in refinement traces.
    AfterPerfectization,
    /// Cannot be pipelined; always runs at full body latency.
    No,
}

/// How a loop's trip count resolves against the evaluation scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripScaling {
    /// `trip_count` iterations per cached data element.
    PerBatchElement,
    /// `trip_count` iterations per job.
    PerJob,
    /// `trip_count` iterations once per batch iteration, regardless of size.
    Fixed,
}

/// Timing shape of one loop block in the compute body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopBlock {
    pub trip_count: u64,
    /// Latency of one iteration when the loop is not pipelined.
    pub body_latency_cycles: u64,
    /// Smallest achievable initiation interval: 1 for integer/bit-level
    /// bodies, larger for floating-point dependence chains.
    pub min_ii: u64,
    pub pipelineable: Pipelineable,
    pub trip_scaling: TripScaling,
}

impl LoopBlock {
    fn validate(&self, idx: usize, issues: &mut Vec<String>) {
        if self.trip_count == 0 {
            issues.push(format!("loops[{idx}]: trip_count ≥ 1"));
        }
        if self.body_latency_cycles == 0 {
            issues.push(format!("loops[{idx}]: body_latency_cycles ≥ 1"));
        }
        if self.min_ii == 0 {
            issues.push(format!("loops[{idx}]: min_ii ≥ 1"));
        }
        if self.min_ii > self.body_latency_cycles {
            issues.push(format!("loops[{idx}]: min_ii ≤ body_latency_cycles"));
        }
    }
}

/// Job-level parallelism profile of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parallelism {
    /// Independent jobs; duplicates scale linearly while jobs last.
    Flat,
    /// Reduction tree: the number of parallel jobs halves after each layer.
    TreeReduce { layers: u32 },
    /// Each job consumes its predecessor's result; duplication is pointless.
    ChainDependent,
}

/// Batch processing vs data tiling: picked by how a kernel's working set
/// compares to on-chip memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkingSetClass {
    /// Jobs are tiny; cache a contiguous batch of them.
    SmallJob,
    /// One job exceeds on-chip memory; split it into tiles.
    LargeTileable,
}

/// Timing and shape abstraction of one computational kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDescriptor {
    pub name: String,
    /// Single-core CPU runtime of the same workload, in seconds.
    pub cpu_baseline_s: f64,
    /// Host bytes shipped to the device before the kernel runs.
    pub input_bytes: u64,
    /// Host bytes shipped back after it finishes.
    pub output_bytes: u64,
    /// Native scalar width of the kernel's data type.
    pub element_width_bits: u32,
    /// Number of independent jobs in the workload.
    pub job_count: u64,
    /// Device-memory traffic per job, each way.
    pub job_input_bytes: u64,
    pub job_output_bytes: u64,
    /// Compute body, per batch; trip counts resolve via `trip_scaling`.
    pub loops: Vec<LoopBlock>,
    pub parallelism: Parallelism,
    /// True when results written by one batch iteration feed the next
    /// iteration's load, which forbids overlap of the two.
    #[serde(default)]
    pub output_feeds_next_load: bool,
    /// Abstract cost of one processing-element duplicate.
    pub per_pe_compute_units: u64,
    /// Bookkeeping storage each duplicate needs beyond the data buffers.
    #[serde(default)]
    pub per_pe_extra_bram_bits: u64,
    pub working_set_class: WorkingSetClass,
    /// Free-form per-field notes on where each value comes from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<BTreeMap<String, String>>,
}

impl KernelDescriptor {
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.name.is_empty() {
            issues.push("name must not be empty".into());
        }
        if !positive(self.cpu_baseline_s) {
            issues.push("cpu_baseline_s must be > 0".into());
        }
        if self.job_count == 0 {
            issues.push("job_count ≥ 1".into());
        }
        if !SUPPORTED_ELEMENT_WIDTHS.contains(&self.element_width_bits) {
            issues.push(format!(
                "element_width_bits must be one of {SUPPORTED_ELEMENT_WIDTHS:?}, got {}",
                self.element_width_bits
            ));
        }
        if self.job_input_bytes == 0 {
            issues.push("job_input_bytes ≥ 1".into());
        }
        if self.element_width_bits > 0 {
            let w = u64::from(self.element_width_bits);
            if !(self.job_input_bytes * 8).is_multiple_of(w) {
                issues.push("job_input_bytes must hold a whole number of elements".into());
            }
            if !(self.job_output_bytes * 8).is_multiple_of(w) {
                issues.push("job_output_bytes must hold a whole number of elements".into());
            }
        }
        if self.loops.is_empty() {
            issues.push("loops must not be empty".into());
        }
        for (i, l) in self.loops.iter().enumerate() {
            l.validate(i, &mut issues);
        }
        if let Parallelism::TreeReduce { layers } = self.parallelism {
            if layers == 0 || layers > 32 {
                issues.push("tree_reduce layers must be in 1..=32".into());
            }
        }
        if self.per_pe_compute_units == 0 {
            issues.push("per_pe_compute_units ≥ 1".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::validation(issues))
        }
    }

    pub fn is_chain_dependent(&self) -> bool {
        matches!(self.parallelism, Parallelism::ChainDependent)
    }

    /// Data elements one job reads.
    pub fn elements_per_job(&self) -> u64 {
        self.job_input_bytes * 8 / u64::from(self.element_width_bits)
    }

    /// Total device input traffic across all jobs.
    pub fn total_job_input_bytes(&self) -> u64 {
        self.job_count * self.job_input_bytes
    }

    pub fn total_job_output_bytes(&self) -> u64 {
        self.job_count * self.job_output_bytes
    }

    /// Smallest on-chip cache that the caching transform accepts.
    ///
    /// Flat and chain-dependent kernels need room for a single job (or tile).
    /// Reduction trees must cache a whole tree's leaves so every merge layer
    /// completes on chip: for `layers` layers that is `2^(layers-1)` jobs.
    pub fn min_caching_bytes(&self) -> u64 {
        match self.parallelism {
            Parallelism::TreeReduce { layers } => {
                self.job_input_bytes << (layers - 1).min(63)
            }
            _ => self.job_input_bytes,
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn schema_error(path: &str, err: &serde_json::Error) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: err.to_string(),
    }
}

/// Parses and validates a kernel descriptor file.
pub fn parse_kernel(path: impl AsRef<Path>) -> Result<KernelDescriptor> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    kernel_from_str(&text, &path.display().to_string())
}

/// Parses and validates a kernel descriptor from JSON text.
pub fn kernel_from_str(text: &str, origin: &str) -> Result<KernelDescriptor> {
    let k: KernelDescriptor =
        serde_json::from_str(text).map_err(|e| schema_error(origin, &e))?;
    k.validate()?;
    Ok(k)
}

/// Parses and validates a platform descriptor file; omitted fields take the
/// reference-platform defaults.
pub fn parse_platform(path: impl AsRef<Path>) -> Result<PlatformDescriptor> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    platform_from_str(&text, &path.display().to_string())
}

pub fn platform_from_str(text: &str, origin: &str) -> Result<PlatformDescriptor> {
    let p: PlatformDescriptor =
        serde_json::from_str(text).map_err(|e| schema_error(origin, &e))?;
    p.validate()?;
    Ok(p)
}

/// Canonical serialized form: pretty-printed JSON with a trailing newline.
/// Serializing twice through a parse yields identical bytes.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("descriptors always serialize");
    s.push('\n');
    s
}

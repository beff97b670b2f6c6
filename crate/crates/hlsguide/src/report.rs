//! Machine-readable reports for the CLI: every number in a report is
//! recomputable from the kernel, platform and config echoes it embeds.

use serde::{Deserialize, Serialize};

use crate::config::DesignConfig;
use crate::cost::CostBreakdown;
use crate::descriptor::{KernelDescriptor, PlatformDescriptor};
use crate::driver::{EvalPoint, GateReport, RefinementTrace, SweepPoint, TraceStep};
use crate::resource::ResourceUsage;

/// Timestamp written into reports; 0 under `--fixed-timestamp` so repeated
/// runs are byte-identical.
pub fn timestamp(fixed: bool) -> u64 {
    if fixed {
        0
    } else {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }
}

/// Report of one full guideline run; mirrors the refinement trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub timestamp_unix_s: u64,
    pub kernel: KernelDescriptor,
    pub platform: PlatformDescriptor,
    pub gate: GateReport,
    pub initial: EvalPoint,
    pub steps: Vec<TraceStep>,
    #[serde(rename = "final")]
    pub final_point: EvalPoint,
}

impl RunReport {
    pub fn from_trace(
        kernel: &KernelDescriptor,
        platform: &PlatformDescriptor,
        trace: &RefinementTrace,
        timestamp_unix_s: u64,
    ) -> Self {
        RunReport {
            tool: "hlsguide".into(),
            timestamp_unix_s,
            kernel: kernel.clone(),
            platform: platform.clone(),
            gate: trace.gate,
            initial: trace.initial.clone(),
            steps: trace.steps.clone(),
            final_point: trace.final_point.clone(),
        }
    }
}

/// Report of a single what-if evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatifReport {
    pub tool: String,
    pub timestamp_unix_s: u64,
    pub kernel: KernelDescriptor,
    pub platform: PlatformDescriptor,
    pub config: DesignConfig,
    pub breakdown: CostBreakdown,
    pub resources: ResourceUsage,
    /// Code templates the config implies, in application order.
    pub templates: Vec<String>,
}

/// Templates implied by a config: which code rewrites produce it.
pub fn implied_templates(kernel: &KernelDescriptor, cfg: &DesignConfig) -> Vec<String> {
    let mut t = Vec::new();
    if !cfg.caching.is_none() {
        t.push("fig4a".to_string());
    }
    if cfg.pipelined || cfg.pe_factor > 1 {
        t.push("fig4b".to_string());
    }
    if cfg.double_buffered {
        t.push("fig4c".to_string());
    }
    if cfg.buffer_width_bits > kernel.element_width_bits {
        t.push("fig4d".to_string());
    }
    t
}

/// Report of the width/duplication trade-off grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub tool: String,
    pub timestamp_unix_s: u64,
    pub kernel: KernelDescriptor,
    pub platform: PlatformDescriptor,
    /// The design the grid was explored from.
    pub base_config: DesignConfig,
    pub gate: GateReport,
    pub grid: Vec<SweepPoint>,
    /// Best fitting grid point, if any fits.
    pub best: Option<SweepPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Canonical report serialization: pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
    s.push('\n');
    s
}

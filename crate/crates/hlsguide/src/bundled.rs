//! Descriptors shipped with the crate: the reference platform and eight
//! benchmark kernels. Numeric loop shapes and baselines are calibrations
//! (see each file's `provenance` map), not measurements of real hardware.

use crate::descriptor::{self, KernelDescriptor, PlatformDescriptor};
use crate::error::Result;

pub const KERNEL_NAMES: [&str; 8] = [
    "aes", "bfs", "gemm", "kmp", "nw", "sort", "spmv", "viterbi",
];

/// Raw JSON of a bundled kernel descriptor.
pub fn kernel_json(name: &str) -> Option<&'static str> {
    match name {
        "aes" => Some(include_str!("../descriptors/aes.json")),
        "bfs" => Some(include_str!("../descriptors/bfs.json")),
        "gemm" => Some(include_str!("../descriptors/gemm.json")),
        "kmp" => Some(include_str!("../descriptors/kmp.json")),
        "nw" => Some(include_str!("../descriptors/nw.json")),
        "sort" => Some(include_str!("../descriptors/sort.json")),
        "spmv" => Some(include_str!("../descriptors/spmv.json")),
        "viterbi" => Some(include_str!("../descriptors/viterbi.json")),
        _ => None,
    }
}

pub const PLATFORM_JSON: &str = include_str!("../descriptors/platform.json");

/// Parses a bundled kernel descriptor by name.
pub fn kernel(name: &str) -> Result<KernelDescriptor> {
    let json = kernel_json(name).ok_or_else(|| crate::error::Error::Precondition(format!(
        "no bundled kernel named {name:?}; available: {KERNEL_NAMES:?}"
    )))?;
    descriptor::kernel_from_str(json, &format!("bundled:{name}"))
}

/// Parses the bundled reference platform.
pub fn platform() -> Result<PlatformDescriptor> {
    descriptor::platform_from_str(PLATFORM_JSON, "bundled:platform")
}

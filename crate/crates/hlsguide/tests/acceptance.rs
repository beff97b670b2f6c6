//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its runtime (visible under `cargo test -- --nocapture`). Expected values
//! are either exact integer anchors or range checks against independent
//! oracles that live in this file.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hlsguide::config::{CachingMode, DesignConfig};
use hlsguide::cost;
use hlsguide::descriptor::{
    KernelDescriptor, LoopBlock, Parallelism, Pipelineable, PlatformDescriptor, TripScaling,
    WorkingSetClass,
};
use hlsguide::driver::{self, GateDecision};
use hlsguide::resource;
use hlsguide::sim;
use hlsguide::transforms::Strategy;
use hlsguide::{bundled, validate_config};

fn pass(criterion: &str, started: Instant, detail: &str) {
    println!(
        "[acceptance] {criterion}: PASS ({:.1} ms) {detail}",
        started.elapsed().as_secs_f64() * 1e3
    );
}

fn platform() -> PlatformDescriptor {
    bundled::platform().unwrap()
}

// --- Criterion 1: burst amortization anchor -------------------------------

#[test]
fn criterion_1_burst_amortization_anchor() {
    let t = Instant::now();
    let p = platform();
    let cycles = cost::burst_cycles(64 * 1024, &p);
    assert_eq!(cycles, 1124, "64 KiB burst must cost exactly 1124 cycles");
    let share = p.dram_init_latency_cycles as f64 / cycles as f64;
    assert!(share < 0.10, "init share {share} must stay below 10%");
    assert!((share - 100.0 / 1124.0).abs() < 1e-15);
    pass(
        "criterion 1 (burst amortization)",
        t,
        &format!("64 KiB -> {cycles} cycles, init share {:.2}%", share * 100.0),
    );
}

// --- Criterion 2: BRAM block anchors and exhaustive minimization ----------

#[test]
fn criterion_2_bram_block_anchors() {
    let t = Instant::now();
    let p = platform();
    assert_eq!(resource::bram_blocks(256, 512, &p), 8);
    assert_eq!(resource::bram_blocks(512, 512, &p), 15);
    assert_eq!(resource::bram_blocks(8, 512, &p), 1);
    assert_eq!(resource::bram_blocks(32, 512, &p), 1);

    // Independent brute force over every block shape, exhaustively.
    let mut checked = 0u64;
    for width in 1..=512u32 {
        for &depth in &[1u64, 128, 512, 1024, 4096] {
            let expected = p
                .bram_block_configs
                .iter()
                .map(|m| {
                    u64::from(width.div_ceil(m.width_bits)) * depth.div_ceil(m.depth_entries)
                })
                .min()
                .unwrap();
            assert_eq!(
                resource::bram_blocks(width, depth, &p),
                expected,
                "width {width} depth {depth}"
            );
            checked += 1;
        }
    }
    pass(
        "criterion 2 (BRAM blocks)",
        t,
        &format!("anchors 8/15/1/1 exact; {checked} grid points match brute force"),
    );
}

// --- Criterion 3: pipelining formula vs event oracle -----------------------

/// Iteration-by-iteration oracle: each iteration occupies one issue slot of
/// `ii` cycles and its result drains `l` cycles after the slot closes;
/// without pipelining iterations serialize at full latency.
fn loop_event_oracle(n: u64, l: u64, ii: u64, pipelined: bool) -> u64 {
    let mut clock = 0u64;
    let mut done_at = 0u64;
    for _ in 0..n {
        if pipelined {
            clock += ii;
            done_at = clock + l;
        } else {
            clock += l;
            done_at = clock;
        }
    }
    done_at
}

#[test]
fn criterion_3_pipelining_formula() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b9);
    for _ in 0..1000 {
        let l = rng.gen_range(1..=1000u64);
        let ii = rng.gen_range(1..=l);
        let n = rng.gen_range(1..=100_000u64);
        let block = LoopBlock {
            trip_count: n,
            body_latency_cycles: l,
            min_ii: ii,
            pipelineable: Pipelineable::Immediate,
            trip_scaling: TripScaling::PerJob,
        };
        assert_eq!(
            cost::loop_time(&block, true, n),
            loop_event_oracle(n, l, ii, true),
            "pipelined n={n} l={l} ii={ii}"
        );
        assert_eq!(cost::loop_time(&block, true, n), n * ii + l);
        assert_eq!(
            cost::loop_time(&block, false, n),
            loop_event_oracle(n, l, ii, false)
        );
    }
    // Speedup tends to L/ii once the trip count dwarfs the drain.
    for _ in 0..200 {
        let l = rng.gen_range(1..=100u64);
        let ii = rng.gen_range(1..=l);
        let n = rng.gen_range(100 * l..=1000 * l);
        let speedup = (n * l) as f64 / (n * ii + l) as f64;
        let limit = l as f64 / ii as f64;
        assert!(
            (speedup - limit).abs() / limit < 0.01,
            "n={n} l={l} ii={ii}: {speedup} vs {limit}"
        );
    }
    pass(
        "criterion 3 (pipelining formula)",
        t,
        "1000 random triples exact vs event oracle; asymptote within 1%",
    );
}

// --- Criterion 4: double-buffer oracle equivalence -------------------------

/// Second oracle: a naive event queue. Each phase schedules completion
/// events for its active stages and ends when the queue drains.
fn event_queue_makespan(stages: &[(u64, u64, u64)]) -> u64 {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let n = stages.len() as u64;
    let mut now = 0u64;
    for phase in 0..n + 2 {
        let mut events: BinaryHeap<Reverse<u64>> = BinaryHeap::new();
        if phase < n {
            events.push(Reverse(now + stages[phase as usize].0));
        }
        if phase >= 1 && phase - 1 < n {
            events.push(Reverse(now + stages[(phase - 1) as usize].1));
        }
        if phase >= 2 && phase - 2 < n {
            events.push(Reverse(now + stages[(phase - 2) as usize].2));
        }
        while let Some(Reverse(done)) = events.pop() {
            now = now.max(done);
        }
    }
    now
}

#[test]
fn criterion_4_double_buffer_oracle_equivalence() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xdb0b5eed);
    for case in 0..1000 {
        let n = rng.gen_range(1..=1000usize);
        let mut stages: Vec<(u64, u64, u64)> = (0..n)
            .map(|_| {
                (
                    rng.gen_range(0..10_000u64),
                    rng.gen_range(0..10_000u64),
                    rng.gen_range(0..10_000u64),
                )
            })
            .collect();
        if cost::sequential_makespan(&stages) == 0 {
            stages[0].0 = 1;
        }
        let model = cost::overlapped_makespan(&stages);
        let simulated = sim::simulate(&stages, 3).unwrap();
        assert_eq!(model, simulated, "case {case}: model vs simulator");
        assert_eq!(model, event_queue_makespan(&stages), "case {case}: event queue");

        let sequential = sim::simulate(&stages, 1).unwrap();
        let speedup = sequential as f64 / simulated as f64;
        assert!(
            (1.0..3.0).contains(&speedup),
            "case {case}: speedup {speedup} outside [1, 3)"
        );
    }
    // Canonical rotation stays hazard-free, exhaustively checking every
    // phase, up to ten thousand iterations.
    for n in (1..=512).chain([1000, 2048, 4096, 8192, 10_000]) {
        sim::check_hazards(&sim::PhasePlan::canonical(n))
            .unwrap_or_else(|h| panic!("n={n}: {h}"));
    }
    pass(
        "criterion 4 (overlap oracle)",
        t,
        "1000 seeded vectors exact across model, simulator and event queue; rotation hazard-free to n=10000",
    );
}

/// The overlapped makespan can never beat the busiest stage, whole-workload.
#[test]
fn overlapped_makespan_lower_bound_on_bundled_kernels() {
    let t = Instant::now();
    let p = platform();
    for name in bundled::KERNEL_NAMES {
        let k = bundled::kernel(name).unwrap();
        let trace = driver::run_guideline(&k, &p).unwrap();
        let cfg = trace.final_point.config;
        if cfg.caching.is_none() || !cfg.double_buffered {
            continue;
        }
        let schedule = cost::stage_schedule(&k, &p, &cfg).unwrap();
        let makespan = cost::overlapped_makespan(&schedule);
        let loads: u64 = schedule.iter().map(|s| s.0).sum();
        let computes: u64 = schedule.iter().map(|s| s.1).sum();
        let stores: u64 = schedule.iter().map(|s| s.2).sum();
        let bound = loads.max(computes).max(stores);
        assert!(makespan >= bound, "{name}: {makespan} < stage bound {bound}");
    }
    pass("invariant (overlap lower bound)", t, "bundled kernels respect the busiest-stage bound");
}

// --- Criterion 5: guideline reproduction on bundled descriptors ------------

#[test]
fn criterion_5_guideline_reproduction() {
    let t = Instant::now();
    let p = platform();
    let order = Strategy::ALL;

    for name in ["aes", "gemm", "kmp", "nw", "sort", "viterbi"] {
        let trace = driver::run_guideline(&bundled::kernel(name).unwrap(), &p).unwrap();
        let strategies: Vec<Strategy> = trace.steps.iter().map(|s| s.strategy).collect();
        assert_eq!(strategies, order, "{name}: steps out of order");
        for step in &trace.steps {
            assert!(step.accepted, "{name}: {} unexpectedly skipped", step.strategy);
        }
    }

    let bfs = driver::run_guideline(&bundled::kernel("bfs").unwrap(), &p).unwrap();
    assert_eq!(bfs.gate.decision, GateDecision::Warn);
    assert!((bfs.gate.ratio - 0.8).abs() < 1e-2, "bfs gate ratio {}", bfs.gate.ratio);
    assert!(bfs.step(Strategy::DataCaching).unwrap().accepted);
    assert!(bfs.step(Strategy::Pipelining).unwrap().accepted);
    let pe = bfs.step(Strategy::PeDuplication).unwrap();
    assert!(!pe.accepted && pe.reason.contains("chain-dependent jobs"));
    let db = bfs.step(Strategy::DoubleBuffering).unwrap();
    assert!(!db.accepted && db.reason.contains("feeds the next iteration's load"));

    let spmv = driver::run_guideline(&bundled::kernel("spmv").unwrap(), &p).unwrap();
    assert_eq!(spmv.gate.decision, GateDecision::Reject);
    assert!((spmv.gate.ratio - 1.3).abs() < 1e-2, "spmv gate ratio {}", spmv.gate.ratio);
    assert!(spmv.steps.is_empty(), "a rejected kernel gets no refinement steps");

    pass(
        "criterion 5 (guideline reproduction)",
        t,
        "six kernels accept all five steps in order; bfs warns and skips duplication/overlap; spmv rejects",
    );
}

// --- Criterion 6: calibration-fit ranges -----------------------------------

const CACHING_RANGE: (f64, f64) = (5.6, 32.1);
const PIPELINING_RANGE: (f64, f64) = (1.3, 10.3);
const PIPELINING_COMPUTE_RANGE: (f64, f64) = (1.4, 10.9);
const PE_RANGE: (f64, f64) = (1.0, 53.6);
const DOUBLE_BUFFER_RANGE: (f64, f64) = (1.0, 2.1);
const REORG_RANGE: (f64, f64) = (1.1, 19.1);

fn in_range(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

/// Computation-only pipelining speedup at the post-caching design point.
fn compute_pipelining_speedup(k: &KernelDescriptor, p: &PlatformDescriptor) -> f64 {
    let cached = DesignConfig {
        caching: CachingMode::Batch {
            batch_bytes: driver::choose_caching_size(k, p),
        },
        ..DesignConfig::naive(k)
    };
    let scope = cost::BatchScope::for_config(k, &cached);
    let unpiped = cost::compute_cycles(k, &cached, scope).unwrap();
    let piped = cost::compute_cycles(
        k,
        &DesignConfig {
            pipelined: true,
            ..cached
        },
        scope,
    )
    .unwrap();
    unpiped as f64 / piped as f64
}

#[test]
fn criterion_6_calibration_fit_ranges() {
    let t = Instant::now();
    let p = platform();

    for name in bundled::KERNEL_NAMES {
        let k = bundled::kernel(name).unwrap();
        let trace = driver::run_guideline(&k, &p).unwrap();
        for step in trace.accepted_steps() {
            let range = match step.strategy {
                Strategy::DataCaching => CACHING_RANGE,
                Strategy::Pipelining => PIPELINING_RANGE,
                Strategy::PeDuplication => PE_RANGE,
                Strategy::DoubleBuffering => DOUBLE_BUFFER_RANGE,
                Strategy::ScratchpadReorg => REORG_RANGE,
            };
            assert!(
                in_range(step.speedup_vs_previous, range),
                "{name}: {} speedup {:.3} outside {range:?}",
                step.strategy,
                step.speedup_vs_previous
            );
        }
    }

    // Computation-only pipelining, measured directly for every kernel
    // (including the gate-rejected one).
    let mut compute_speedups = std::collections::BTreeMap::new();
    for name in bundled::KERNEL_NAMES {
        let k = bundled::kernel(name).unwrap();
        let s = compute_pipelining_speedup(&k, &p);
        assert!(
            in_range(s, PIPELINING_COMPUTE_RANGE),
            "{name}: computation pipelining speedup {s:.3} outside {PIPELINING_COMPUTE_RANGE:?}"
        );
        compute_speedups.insert(name, s);
    }
    assert!(
        compute_speedups["viterbi"] < compute_speedups["nw"],
        "floating-point dependence chains must pipeline worse than bit-level bodies: viterbi {:.2} vs nw {:.2}",
        compute_speedups["viterbi"],
        compute_speedups["nw"]
    );

    pass(
        "criterion 6 (calibration ranges)",
        t,
        &format!(
            "all accepted step speedups within published ranges; computation pipelining {:?}",
            compute_speedups
                .iter()
                .map(|(k, v)| format!("{k} {v:.2}"))
                .collect::<Vec<_>>()
        ),
    );
}

// --- Criterion 7: search correctness ---------------------------------------

/// Brute force over the sweep grid, written from the grid definition rather
/// than the sweep implementation.
fn brute_force_best(
    k: &KernelDescriptor,
    p: &PlatformDescriptor,
    base: &DesignConfig,
) -> Option<(DesignConfig, f64)> {
    let mut best: Option<(f64, u64, u64, u32, DesignConfig)> = None;
    for width in [64u32, 128, 256, 512] {
        for exp in 0..=7u32 {
            let pe = 1u64 << exp;
            let candidate = DesignConfig {
                buffer_width_bits: width,
                pe_factor: pe,
                partition_factor: pe,
                ..*base
            };
            if validate_config(k, p, &candidate).is_err() {
                continue;
            }
            let usage = resource::design_usage(k, p, &candidate);
            if !usage.fits {
                continue;
            }
            let total = cost::total_time(k, p, &candidate).unwrap().total_s;
            let key = (total, usage.bram_blocks, pe, width);
            if best
                .as_ref()
                .is_none_or(|(bt, bb, bp, bw, _)| key < (*bt, *bb, *bp, *bw))
            {
                best = Some((total, usage.bram_blocks, pe, width, candidate));
            }
        }
    }
    best.map(|(total, _, _, _, cfg)| (cfg, total))
}

fn random_kernel(rng: &mut ChaCha8Rng) -> KernelDescriptor {
    let element_width_bits = [8u32, 16, 32, 64][rng.gen_range(0..4)];
    let elem_bytes = u64::from(element_width_bits / 8);
    let job_input_bytes = elem_bytes << rng.gen_range(0..8);
    let job_output_bytes = if rng.gen_bool(0.2) {
        0
    } else {
        elem_bytes << rng.gen_range(0..8)
    };
    let job_count = 1u64 << rng.gen_range(0..12);
    let parallelism = match rng.gen_range(0..4) {
        0 => Parallelism::ChainDependent,
        1 => Parallelism::TreeReduce {
            layers: rng.gen_range(1..=8),
        },
        _ => Parallelism::Flat,
    };
    let mut loops = Vec::new();
    for _ in 0..rng.gen_range(1..=3usize) {
        let body_latency_cycles = rng.gen_range(1..=64u64);
        loops.push(LoopBlock {
            trip_count: rng.gen_range(1..=512),
            body_latency_cycles,
            min_ii: rng.gen_range(1..=body_latency_cycles),
            pipelineable: match rng.gen_range(0..4) {
                0 => Pipelineable::No,
                1 => Pipelineable::AfterPerfectization,
                _ => Pipelineable::Immediate,
            },
            trip_scaling: match rng.gen_range(0..10) {
                0 => TripScaling::Fixed,
                1..=3 => TripScaling::PerBatchElement,
                _ => TripScaling::PerJob,
            },
        });
    }
    let k = KernelDescriptor {
        name: "random".into(),
        cpu_baseline_s: rng.gen_range(1e-3..10.0),
        input_bytes: job_count * job_input_bytes,
        output_bytes: job_count * job_output_bytes,
        element_width_bits,
        job_count,
        job_input_bytes,
        job_output_bytes,
        loops,
        parallelism,
        output_feeds_next_load: rng.gen_bool(0.15),
        per_pe_compute_units: rng.gen_range(1..=64),
        per_pe_extra_bram_bits: if rng.gen_bool(0.3) {
            rng.gen_range(0..60_000)
        } else {
            0
        },
        working_set_class: if rng.gen_bool(0.5) {
            WorkingSetClass::SmallJob
        } else {
            WorkingSetClass::LargeTileable
        },
        provenance: None,
    };
    k.validate().expect("generator must produce valid kernels");
    k
}

#[test]
fn criterion_7_search_correctness() {
    let t = Instant::now();
    let p = platform();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed5eed);

    // Sweep equals brute force for every bundled kernel under 50 randomized
    // budgets (plus the reference budget).
    let mut sweeps = 0;
    for round in 0..=50 {
        let mut budget = p.clone();
        if round > 0 {
            budget.compute_units_total = rng.gen_range(1..=4096);
            budget.bram_blocks_total = rng.gen_range(8..=6000);
            budget.provenance = None;
        }
        for name in bundled::KERNEL_NAMES {
            let k = bundled::kernel(name).unwrap();
            let base = DesignConfig {
                caching: CachingMode::Batch {
                    batch_bytes: driver::choose_caching_size(&k, &budget),
                },
                pipelined: true,
                double_buffered: !k.output_feeds_next_load,
                ..DesignConfig::naive(&k)
            };
            if validate_config(&k, &budget, &base).is_err() {
                continue;
            }
            let (best_cfg, best_breakdown) =
                driver::sweep_tradeoff(&k, &budget, &base).unwrap();
            let input_total = cost::total_time(&k, &budget, &base).unwrap().total_s;
            match brute_force_best(&k, &budget, &base) {
                Some((cfg, total)) if total < input_total => {
                    assert_eq!(best_cfg, cfg, "{name} round {round}: sweep != brute force");
                    assert!((best_breakdown.total_s - total).abs() < 1e-15);
                }
                _ => assert_eq!(best_cfg, base, "{name} round {round}: expected input back"),
            }
            sweeps += 1;
        }
    }

    // Trace monotonicity on randomized descriptors.
    for case in 0..500 {
        let k = random_kernel(&mut rng);
        let trace = driver::run_guideline(&k, &p)
            .unwrap_or_else(|e| panic!("case {case}: guideline failed: {e}"));
        let mut last = trace.initial.breakdown.total_s;
        for step in &trace.steps {
            if step.accepted {
                assert!(
                    step.breakdown.total_s < last,
                    "case {case}: accepted step does not strictly improve"
                );
                assert!(step.resources.fits, "case {case}: accepted step must fit");
                last = step.breakdown.total_s;
            } else {
                assert!(!step.reason.is_empty(), "case {case}: skip without reason");
            }
        }
        assert_eq!(trace.final_point.breakdown.total_s, last);
    }

    pass(
        "criterion 7 (search correctness)",
        t,
        &format!("{sweeps} sweeps match brute force; 500 random traces monotone"),
    );
}

// --- Criterion 8: CLI determinism -------------------------------------------

#[test]
fn criterion_8_cli_determinism() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let kernel = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("descriptors/aes.json");
    let platform = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("descriptors/platform.json");

    let report = dir.path().join("report.json");
    let run = || {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_hlsguide"))
            .args([
                "run",
                kernel.to_str().unwrap(),
                platform.to_str().unwrap(),
                "--report",
                report.to_str().unwrap(),
                "--fixed-timestamp",
            ])
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(&report).unwrap(), out.stdout)
    };

    let (report_a, stdout_a) = run();
    let (report_b, stdout_b) = run();
    assert_eq!(report_a, report_b, "reports must be byte-identical");
    assert_eq!(stdout_a, stdout_b, "summaries must be byte-identical");
    assert!(!report_a.is_empty());
    pass(
        "criterion 8 (determinism)",
        t,
        &format!("two runs, {} identical report bytes", report_a.len()),
    );
}

// --- Extra invariant: the guideline never beats exhaustive search ----------

#[test]
fn guideline_never_beats_global_brute_force() {
    let t = Instant::now();
    let p = platform();
    let mut worst_gap = 0.0f64;
    for name in bundled::KERNEL_NAMES {
        let k = bundled::kernel(name).unwrap();
        let trace = driver::run_guideline(&k, &p).unwrap();
        if trace.gate.decision == GateDecision::Reject {
            continue;
        }
        let mut global_min = trace.initial.breakdown.total_s;
        for caching_bytes in [2048u64, 65536, 1 << 20] {
            for pipelined in [false, true] {
                for db in [false, true] {
                    for width in [k.element_width_bits, 64, 128, 256, 512] {
                        for exp in 0..=7u32 {
                            let pe = 1u64 << exp;
                            let caching = match k.working_set_class {
                                WorkingSetClass::SmallJob => CachingMode::Batch {
                                    batch_bytes: caching_bytes,
                                },
                                WorkingSetClass::LargeTileable => CachingMode::Tile {
                                    tile_bytes: caching_bytes,
                                },
                            };
                            let cfg = DesignConfig {
                                caching,
                                pipelined,
                                pe_factor: pe,
                                partition_factor: pe,
                                double_buffered: db,
                                buffer_width_bits: width,
                            };
                            if validate_config(&k, &p, &cfg).is_err() {
                                continue;
                            }
                            if !resource::design_usage(&k, &p, &cfg).fits {
                                continue;
                            }
                            let total = cost::total_time(&k, &p, &cfg).unwrap().total_s;
                            global_min = global_min.min(total);
                        }
                    }
                }
            }
        }
        let final_total = trace.final_point.breakdown.total_s;
        assert!(
            final_total >= global_min - 1e-15,
            "{name}: guideline {final_total} beat the global grid minimum {global_min}"
        );
        worst_gap = worst_gap.max(final_total / global_min - 1.0);
    }
    pass(
        "invariant (guideline vs global)",
        t,
        &format!("guideline within the grid optimum; worst gap {:.2}%", worst_gap * 100.0),
    );
}

//! Discrete-event oracle for the rotating-buffer schedule.
//!
//! The simulator walks the load/compute/store rotation phase by phase with an
//! explicit buffer state machine, independent of the cost model's closed-form
//! accounting; the two must agree exactly. Phases are synchronous: every
//! stage active in a phase completes before the next phase starts, matching
//! the switch/case template the schedule comes from. Loads and stores of
//! different phases are assumed not to contend (independent read and write
//! channels).

use serde::Serialize;

use crate::error::{Error, Result};

/// The three stages of one batch iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Load,
    Compute,
    Store,
}

/// One scheduled buffer access: in `phase`, `stage` works iteration
/// `iteration`'s data inside buffer `buffer`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannedAccess {
    pub phase: u64,
    pub stage: StageKind,
    pub buffer: u64,
    pub iteration: u64,
}

/// A full phase-by-phase buffer assignment for `iterations` iterations over
/// `buffer_count` rotating buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePlan {
    pub iterations: u64,
    pub buffer_count: u64,
    pub accesses: Vec<PlannedAccess>,
}

impl PhasePlan {
    /// The rotation over `buffer_count` buffers: iteration `i` is loaded into
    /// buffer `i mod k` in phase `i`, computed in phase `i+1` and stored in
    /// phase `i+2`.
    pub fn rotation(iterations: u64, buffer_count: u64) -> PhasePlan {
        let mut accesses = Vec::with_capacity(3 * iterations as usize);
        for i in 0..iterations {
            let buffer = i % buffer_count;
            accesses.push(PlannedAccess {
                phase: i,
                stage: StageKind::Load,
                buffer,
                iteration: i,
            });
            accesses.push(PlannedAccess {
                phase: i + 1,
                stage: StageKind::Compute,
                buffer,
                iteration: i,
            });
            accesses.push(PlannedAccess {
                phase: i + 2,
                stage: StageKind::Store,
                buffer,
                iteration: i,
            });
        }
        PhasePlan {
            iterations,
            buffer_count,
            accesses,
        }
    }

    /// The canonical three-buffer rotation.
    pub fn canonical(iterations: u64) -> PhasePlan {
        PhasePlan::rotation(iterations, 3)
    }
}

/// A detected scheduling hazard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Hazard {
    /// Two or more stages touch one buffer within one phase.
    MultipleAccessors {
        phase: u64,
        buffer: u64,
        stages: Vec<StageKind>,
    },
    /// A buffer's write-read-drain lifecycle is broken.
    LifecycleBroken {
        phase: u64,
        buffer: u64,
        detail: String,
    },
}

impl std::fmt::Display for Hazard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hazard::MultipleAccessors {
                phase,
                buffer,
                stages,
            } => write!(
                f,
                "phase {phase}: buffer {buffer} has {} accessors ({stages:?})",
                stages.len()
            ),
            Hazard::LifecycleBroken {
                phase,
                buffer,
                detail,
            } => write!(f, "phase {phase}: buffer {buffer}: {detail}"),
        }
    }
}

/// Verifies the single-accessor-per-phase rule and the load-compute-store
/// lifecycle of every buffer. Returns the first violation in phase order.
pub fn check_hazards(plan: &PhasePlan) -> std::result::Result<(), Hazard> {
    let mut sorted: Vec<&PlannedAccess> = plan.accesses.iter().collect();
    sorted.sort_by_key(|a| (a.phase, a.buffer));

    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len()
            && sorted[j].phase == sorted[i].phase
            && sorted[j].buffer == sorted[i].buffer
        {
            j += 1;
        }
        if j - i > 1 {
            return Err(Hazard::MultipleAccessors {
                phase: sorted[i].phase,
                buffer: sorted[i].buffer,
                stages: sorted[i..j].iter().map(|a| a.stage).collect(),
            });
        }
        i = j;
    }

    // Every load must be followed by the matching compute one phase later and
    // the matching store two phases later, in the same buffer.
    let mut computes = std::collections::HashMap::new();
    let mut stores = std::collections::HashMap::new();
    for a in &plan.accesses {
        match a.stage {
            StageKind::Compute => {
                computes.entry(a.iteration).or_insert(a);
            }
            StageKind::Store => {
                stores.entry(a.iteration).or_insert(a);
            }
            StageKind::Load => {}
        }
    }
    for load in plan.accesses.iter().filter(|a| a.stage == StageKind::Load) {
        let compute = computes.get(&load.iteration).copied();
        match compute {
            Some(c) if c.buffer == load.buffer && c.phase == load.phase + 1 => {}
            Some(c) => {
                return Err(Hazard::LifecycleBroken {
                    phase: c.phase,
                    buffer: c.buffer,
                    detail: format!(
                        "iteration {} loaded into buffer {} in phase {} but computed from buffer {} in phase {}",
                        load.iteration, load.buffer, load.phase, c.buffer, c.phase
                    ),
                })
            }
            None => {
                return Err(Hazard::LifecycleBroken {
                    phase: load.phase,
                    buffer: load.buffer,
                    detail: format!("iteration {} is loaded but never computed", load.iteration),
                })
            }
        }
        let store = stores.get(&load.iteration).copied();
        match store {
            Some(s) if s.buffer == load.buffer && s.phase == load.phase + 2 => {}
            Some(s) => {
                return Err(Hazard::LifecycleBroken {
                    phase: s.phase,
                    buffer: s.buffer,
                    detail: format!(
                        "iteration {} must drain from buffer {} in phase {}, found buffer {} phase {}",
                        load.iteration,
                        load.buffer,
                        load.phase + 2,
                        s.buffer,
                        s.phase
                    ),
                })
            }
            None => {
                return Err(Hazard::LifecycleBroken {
                    phase: load.phase,
                    buffer: load.buffer,
                    detail: format!("iteration {} is never stored", load.iteration),
                })
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BufferState {
    Free,
    Loaded(u64),
    Computed(u64),
}

/// Makespan in cycles of `stage_times` under `buffers` buffer groups.
///
/// One buffer group serializes every iteration (load, compute, store, next).
/// Three groups run the canonical rotation; each phase lasts as long as its
/// slowest active stage. The rotation is executed against real buffer
/// states, so a hazard in the schedule is an error, not a wrong number.
pub fn simulate(stage_times: &[(u64, u64, u64)], buffers: u32) -> Result<u64> {
    if stage_times.is_empty() {
        return Err(Error::Precondition("at least one iteration is required".into()));
    }
    match buffers {
        1 => Ok(stage_times.iter().map(|&(l, c, s)| l + c + s).sum()),
        3 => {
            let n = stage_times.len() as u64;
            let mut state = [BufferState::Free; 3];
            let mut makespan = 0u64;
            for phase in 0..n + 2 {
                let mut span = 0u64;
                // Store drains the buffer computed two phases ago.
                if phase >= 2 && phase - 2 < n {
                    let iter = phase - 2;
                    let buf = (iter % 3) as usize;
                    if state[buf] != BufferState::Computed(iter) {
                        return Err(Error::Precondition(format!(
                            "phase {phase}: buffer {buf} is not ready to store iteration {iter}"
                        )));
                    }
                    span = span.max(stage_times[iter as usize].2);
                    state[buf] = BufferState::Free;
                }
                // Compute consumes the buffer loaded one phase ago.
                if phase >= 1 && phase - 1 < n {
                    let iter = phase - 1;
                    let buf = (iter % 3) as usize;
                    if state[buf] != BufferState::Loaded(iter) {
                        return Err(Error::Precondition(format!(
                            "phase {phase}: buffer {buf} does not hold iteration {iter}'s input"
                        )));
                    }
                    span = span.max(stage_times[iter as usize].1);
                    state[buf] = BufferState::Computed(iter);
                }
                // Load fills this phase's buffer.
                if phase < n {
                    let buf = (phase % 3) as usize;
                    if state[buf] != BufferState::Free {
                        return Err(Error::Precondition(format!(
                            "phase {phase}: buffer {buf} is still occupied"
                        )));
                    }
                    span = span.max(stage_times[phase as usize].0);
                    state[buf] = BufferState::Loaded(phase);
                }
                makespan += span;
            }
            Ok(makespan)
        }
        other => Err(Error::Precondition(format!(
            "buffer count must be 1 or 3, got {other}"
        ))),
    }
}

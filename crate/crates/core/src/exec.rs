//! Single-instruction-multi-data execution over constituents.
//!
//! A [`CircuitProgram`] is one instruction stream applied to every
//! constituent. Constituents are evolved independently, each on one thread
//! with a fixed arithmetic order, so the output is bit-identical for any
//! worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PqcError, Result};
use crate::gates::{
    apply_unitary_n2f, flip_function_if_marked, hadamard_n2, phase_on_marked, phase_on_zero_n2,
    DenseUnitary,
};
use crate::layout::RegisterLayout;
use crate::scalar::Scalar;
use crate::shor::{modexp_constituent, qft_n2, validate_modexp};
use crate::state::{ConstituentState, Ensemble};

/// Purpose tag separating RNG sub-streams drawn from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamPurpose {
    Measure = 1,
    Rpa = 2,
    Program = 3,
}

/// Reproducible sub-stream for `(master_seed, index, purpose)`.
///
/// The three words are laid out verbatim in the 256-bit ChaCha key, so
/// distinct inputs can never share a key.
pub fn derive_stream(master_seed: u64, index: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..24].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[24..].copy_from_slice(b"pqc-strm");
    ChaCha8Rng::from_seed(key)
}

/// One instruction. Serialized as `{"op": name, "args": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case")]
#[serde(bound = "T: Scalar")]
pub enum CircuitOp<T: Scalar> {
    HadamardN2 {},
    PhaseOnMarked { marked: u64, phi: T },
    PhaseOnZeroN2 { phi: T },
    FlipFunctionIfMarked { marked: u64, target: u32 },
    ApplyUnitaryN2f { unitary: DenseUnitary<T> },
    QftN2 {},
    ModexpIntoFunction { nb: u64, a: u64 },
}

impl<T: Scalar> CircuitOp<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::HadamardN2 {} => "hadamard_n2",
            Self::PhaseOnMarked { .. } => "phase_on_marked",
            Self::PhaseOnZeroN2 { .. } => "phase_on_zero_n2",
            Self::FlipFunctionIfMarked { .. } => "flip_function_if_marked",
            Self::ApplyUnitaryN2f { .. } => "apply_unitary_n2f",
            Self::QftN2 {} => "qft_n2",
            Self::ModexpIntoFunction { .. } => "modexp_into_function",
        }
    }

    /// Whether the instruction consults the marked-state oracle.
    pub fn is_query(&self) -> bool {
        matches!(
            self,
            Self::PhaseOnMarked { .. } | Self::FlipFunctionIfMarked { .. }
        )
    }

    fn validate(&self, layout: &RegisterLayout) -> Result<()> {
        match self {
            Self::PhaseOnMarked { marked, phi } => {
                layout.split_marked(*marked)?;
                if !phi.is_finite() {
                    return Err(PqcError::Program("phase must be finite".into()));
                }
            }
            Self::PhaseOnZeroN2 { phi } if !phi.is_finite() => {
                return Err(PqcError::Program("phase must be finite".into()));
            }
            Self::FlipFunctionIfMarked { marked, target } => {
                layout.split_marked(*marked)?;
                layout.local_bit_of(*target)?;
            }
            Self::ApplyUnitaryN2f { unitary } => {
                if unitary.dim() != layout.coherent_dim() {
                    return Err(PqcError::Dimension {
                        expected: layout.coherent_dim(),
                        got: unitary.dim(),
                    });
                }
                unitary.check_unitary()?;
            }
            Self::ModexpIntoFunction { nb, a } => validate_modexp(layout, *nb, *a)?,
            _ => {}
        }
        Ok(())
    }

    /// Applies this instruction to one constituent. Call
    /// [`CircuitProgram::validate`] first; errors here mean a bad program.
    pub fn apply(&self, state: &mut ConstituentState<T>, layout: &RegisterLayout) -> Result<()> {
        match self {
            Self::HadamardN2 {} => hadamard_n2(state, layout),
            Self::PhaseOnMarked { marked, phi } => phase_on_marked(state, layout, *marked, *phi)?,
            Self::PhaseOnZeroN2 { phi } => phase_on_zero_n2(state, layout, *phi),
            Self::FlipFunctionIfMarked { marked, target } => {
                flip_function_if_marked(state, layout, *marked, *target)?
            }
            Self::ApplyUnitaryN2f { unitary } => apply_unitary_n2f(state, layout, unitary)?,
            Self::QftN2 {} => qft_n2(state, layout),
            Self::ModexpIntoFunction { nb, a } => modexp_constituent(state, layout, *nb, *a),
        }
        Ok(())
    }
}

/// Ordered instruction list, the `U_c` shared by every constituent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Scalar")]
pub struct CircuitProgram<T: Scalar> {
    pub ops: Vec<CircuitOp<T>>,
}

impl<T: Scalar> CircuitProgram<T> {
    pub fn new() -> Self {
        Self { ops: Vec::new() }
    }

    pub fn push(&mut self, op: CircuitOp<T>) -> &mut Self {
        self.ops.push(op);
        self
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Oracle invocations per constituent.
    pub fn query_count(&self) -> usize {
        self.ops.iter().filter(|op| op.is_query()).count()
    }

    pub fn validate(&self, layout: &RegisterLayout) -> Result<()> {
        for (i, op) in self.ops.iter().enumerate() {
            op.validate(layout)
                .map_err(|e| PqcError::Program(format!("op {i} ({}): {e}", op.name())))?;
        }
        Ok(())
    }

    /// Runs the whole program on one constituent.
    pub fn run_on(&self, state: &mut ConstituentState<T>, layout: &RegisterLayout) -> Result<()> {
        for op in &self.ops {
            op.apply(state, layout)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecPolicy {
    pub workers: usize,
    /// Constituents per work item; contiguous `j1` ranges.
    pub chunk_size: usize,
    pub seed: u64,
}

impl Default for ExecPolicy {
    fn default() -> Self {
        Self {
            workers: 1,
            chunk_size: 16,
            seed: 0,
        }
    }
}

impl ExecPolicy {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers,
            ..Self::default()
        }
    }
}

/// Evolves every constituent through `program`. Output is ordered by `j1`.
pub fn execute<T: Scalar>(
    ensemble: Ensemble<T>,
    program: &CircuitProgram<T>,
    policy: &ExecPolicy,
) -> Result<Ensemble<T>> {
    if policy.workers == 0 || policy.chunk_size == 0 {
        return Err(PqcError::Program(
            "workers and chunk_size must be >= 1".into(),
        ));
    }
    let layout = *ensemble.layout();
    program.validate(&layout)?;
    if program.is_empty() {
        return Ok(ensemble);
    }
    let mut ensemble = ensemble;
    let run_chunk = |chunk: &mut [ConstituentState<T>]| -> Result<()> {
        chunk
            .iter_mut()
            .try_for_each(|c| program.run_on(c, &layout))
    };
    if policy.workers == 1 {
        ensemble
            .constituents_mut()
            .chunks_mut(policy.chunk_size)
            .try_for_each(run_chunk)?;
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(policy.workers)
            .build()
            .map_err(|e| PqcError::ThreadPool(e.to_string()))?;
        pool.install(|| {
            ensemble
                .constituents_mut()
                .par_chunks_mut(policy.chunk_size)
                .try_for_each(run_chunk)
        })?;
    }
    Ok(ensemble)
}

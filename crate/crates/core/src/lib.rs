//! Parallel quantum computing on a simulated ensemble quantum computer.
//!
//! The argument register of every molecule is split into a mixed
//! n1-register, enumerated as `N1 = 2^n1` labeled constituents, and a
//! coherent n2-register. One instruction stream runs on all constituents
//! at once, and an ancilla spectrum reads every constituent out in a single
//! ensemble measurement.
//!
//! The math is generic over the float type (see [`Scalar`]); the `*64`
//! aliases below are what the CLI and the tolerance-bearing tests use.

pub mod arith;
pub mod error;
pub mod exec;
pub mod gates;
pub mod grover;
pub mod layout;
pub mod scalar;
pub mod shor;
pub mod spectrometer;
pub mod state;

pub use error::{PqcError, Result};
pub use exec::{derive_stream, execute, CircuitOp, CircuitProgram, ExecPolicy, StreamPurpose};
pub use gates::{
    apply_unitary_n2f, flip_function_if_marked, hadamard_n2, phase_on_marked, phase_on_zero_n2,
    DenseUnitary,
};
pub use grover::{
    grover_iteration, grover_params, grover_params_with_iterations, rpa_majority_vote,
    rpa_marked_frequency, rpa_one_iteration_distribution, rpa_success_rate, run_pqc_grover,
    run_pqc_grover_with, sweep_tradeoff, GroverOptions, GroverParams, ResourceBudget, SearchReport,
    TradeoffRow,
};
pub use layout::RegisterLayout;
pub use scalar::{Amplitude, Scalar};
pub use shor::{
    extract_period, modexp_into_function, n1_validity_check, qft_n2, run_pqc_shor, Advisory,
    PeriodMethod, PeriodReport, ShorFailure, ShorParams, ShorReadout,
};
pub use spectrometer::{
    measure_expected, measure_sampled, BasisBits, CoupledRegister, CouplingConfig, Direction, Peak,
    PeakWeight, Spectrum, SpectrumMode,
};
pub use state::{
    prepare_general_ensemble, prepare_uniform_ensemble, Capacity, ConstituentState, Ensemble,
    FullStateVector,
};

pub type Ensemble64 = Ensemble<f64>;
pub type Ensemble32 = Ensemble<f32>;
pub type ConstituentState64 = ConstituentState<f64>;
pub type FullStateVector64 = FullStateVector<f64>;
pub type DenseUnitary64 = DenseUnitary<f64>;
pub type CouplingConfig64 = CouplingConfig<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type GroverParams64 = GroverParams<f64>;
pub type SearchReport64 = SearchReport<f64>;
pub type CircuitProgram64 = CircuitProgram<f64>;

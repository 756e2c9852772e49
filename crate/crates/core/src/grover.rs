//! Zero-failure Grover search over `N1` sub-databases at once.
//!
//! Each constituent searches its own `N2`-item sub-database. With
//! `β = arcsin(1/√N2)`, `J = ⌊(π/2 − β)/(2β)⌋ + 1` iterations and the
//! matched phase `φ = 2 arcsin(√N2 · sin(π/(4(J−1) + 6)))`, the constituent that
//! holds the marked item ends exactly in `|j2⁰>`; all others return to the
//! uniform state. A final query flips the ancilla on the marked item, so the
//! readout shows a single downward line.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PqcError, Result};
use crate::exec::{derive_stream, execute, CircuitOp, CircuitProgram, ExecPolicy, StreamPurpose};
use crate::gates::{hadamard_n2, phase_on_marked, phase_on_zero_n2};
use crate::layout::RegisterLayout;
use crate::scalar::Scalar;
use crate::spectrometer::{measure_expected, CoupledRegister, CouplingConfig, Spectrum};
use crate::state::{prepare_uniform_ensemble, ConstituentState, Ensemble};

/// Distance below which `(π/2 − β)/(2β)` counts as an exact integer. At
/// `N2 = 4` the ratio is exactly 1 but evaluates to `1 − ε` in floating point.
const INTEGER_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverParams<T: Scalar> {
    pub n2_size: u64,
    pub beta: T,
    pub iterations: u32,
    /// `None` when `N2 = 1` (no iterations run).
    pub phi: Option<T>,
}

fn check_power_of_two(n2_size: u64) -> Result<()> {
    if n2_size == 0 || !n2_size.is_power_of_two() {
        return Err(PqcError::NotPowerOfTwo(n2_size));
    }
    Ok(())
}

fn beta_of(n2_size: u64) -> f64 {
    (1.0 / (n2_size as f64).sqrt()).asin()
}

/// `J = ⌊(π/2 − β)/(2β)⌋ + 1`, or 0 for `N2 = 1`.
pub fn iteration_count(n2_size: u64) -> Result<u32> {
    check_power_of_two(n2_size)?;
    if n2_size == 1 {
        return Ok(0);
    }
    let beta = beta_of(n2_size);
    let x = (std::f64::consts::FRAC_PI_2 - beta) / (2.0 * beta);
    let nearest = x.round();
    let whole = if (x - nearest).abs() < INTEGER_SNAP {
        nearest
    } else {
        x.floor()
    };
    Ok(whole as u32 + 1)
}

/// Parameters with the literal iteration count.
pub fn grover_params<T: Scalar>(n2_size: u64) -> Result<GroverParams<T>> {
    let j = iteration_count(n2_size)?;
    grover_params_with_iterations(n2_size, j)
}

/// Parameters for a chosen `J`. The phase is matched to exactly `J`
/// rounds: `φ = 2 arcsin(√N2 · sin(π/(4J + 2)))`, which is the
/// `π/(4k + 6)` form with `k = J − 1`. Fails when `√N2 · sin(π/(4J+2)) > 1`,
/// i.e. when `J < (π/2 − β)/(2β)`.
pub fn grover_params_with_iterations<T: Scalar>(
    n2_size: u64,
    iterations: u32,
) -> Result<GroverParams<T>> {
    check_power_of_two(n2_size)?;
    let beta = T::lit(beta_of(n2_size));
    if n2_size == 1 {
        if iterations != 0 {
            return Err(PqcError::GroverParams("N2 = 1 needs no iterations".into()));
        }
        return Ok(GroverParams {
            n2_size,
            beta,
            iterations: 0,
            phi: None,
        });
    }
    if iterations == 0 {
        return Err(PqcError::GroverParams("N2 > 1 needs J >= 1".into()));
    }
    let sin_arg =
        (n2_size as f64).sqrt() * (std::f64::consts::PI / (4.0 * iterations as f64 + 2.0)).sin();
    if sin_arg > 1.0 + 1e-12 {
        return Err(PqcError::GroverParams(format!(
            "J = {iterations} too small for N2 = {n2_size}: √N2·sin(π/(4J+2)) = {sin_arg}"
        )));
    }
    let sin_arg = sin_arg.min(1.0);
    let phi = T::lit(2.0) * T::lit(sin_arg).asin();
    Ok(GroverParams {
        n2_size,
        beta,
        iterations,
        phi: Some(phi),
    })
}

impl<T: Scalar> GroverParams<T> {
    /// Oracle calls: `J` in the iterations plus the final marking query.
    pub fn queries(&self) -> u32 {
        self.iterations + 1
    }
}

/// One iteration: oracle phase `φ` on the marked item, `H^{⊗n2}`, phase `φ`
/// on `|0…0>`, `H^{⊗n2}`.
pub fn grover_iteration<T: Scalar>(
    state: &mut ConstituentState<T>,
    layout: &RegisterLayout,
    marked_full: u64,
    params: &GroverParams<T>,
) -> Result<()> {
    let Some(phi) = params.phi else {
        return Ok(());
    };
    phase_on_marked(state, layout, marked_full, phi)?;
    hadamard_n2(state, layout);
    phase_on_zero_n2(state, layout, phi);
    hadamard_n2(state, layout);
    Ok(())
}

/// The full search as one instruction stream.
pub fn grover_program<T: Scalar>(
    layout: &RegisterLayout,
    marked_full: u64,
    params: &GroverParams<T>,
) -> Result<CircuitProgram<T>> {
    layout.split_marked(marked_full)?;
    if params.n2_size != layout.big_n2() {
        return Err(PqcError::GroverParams(format!(
            "parameters for N2 = {} used on N2 = {}",
            params.n2_size,
            layout.big_n2()
        )));
    }
    let mut program = CircuitProgram::new();
    if let Some(phi) = params.phi {
        for _ in 0..params.iterations {
            program
                .push(CircuitOp::PhaseOnMarked {
                    marked: marked_full,
                    phi,
                })
                .push(CircuitOp::HadamardN2 {})
                .push(CircuitOp::PhaseOnZeroN2 { phi })
                .push(CircuitOp::HadamardN2 {});
        }
    }
    program.push(CircuitOp::FlipFunctionIfMarked {
        marked: marked_full,
        target: 0,
    });
    Ok(program)
}

/// Molecule budget of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceBudget {
    /// Physical molecules `N_E`.
    pub molecules: f64,
    /// Molecules per logical molecule `N_s`.
    pub per_logical: f64,
}

/// Avogadro's number, the default molecule budget.
pub const AVOGADRO: f64 = 6.022e23;

impl Default for ResourceBudget {
    fn default() -> Self {
        Self {
            molecules: AVOGADRO,
            per_logical: 1.0,
        }
    }
}

impl ResourceBudget {
    pub fn new(molecules: f64, per_logical: f64) -> Result<Self> {
        if !(molecules >= 1.0
            && per_logical >= 1.0
            && molecules.is_finite()
            && per_logical.is_finite())
            || per_logical > molecules
        {
            return Err(PqcError::InvalidLayout(format!(
                "budget N_E = {molecules}, N_s = {per_logical} is not usable"
            )));
        }
        Ok(Self {
            molecules,
            per_logical,
        })
    }

    /// `log₂(N_E / N_s)` rounded to the nearest integer; 79 for Avogadro's
    /// number.
    pub fn max_n1(&self) -> u32 {
        (self.molecules / self.per_logical).log2().round() as u32
    }

    pub fn check(&self, n1: u32) -> Result<()> {
        let max_n1 = self.max_n1();
        if n1 > max_n1 {
            return Err(PqcError::Budget { n1, max_n1 });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport<T: Scalar> {
    pub marked_full: u64,
    pub queries_used: u32,
    /// Probability that the marked constituent ends in `|1>_anc |j2⁰>`.
    pub success_probability: T,
    pub params: GroverParams<T>,
    pub spectrum: Spectrum<T>,
}

#[derive(Serialize)]
struct SearchDoc {
    marked: u64,
    queries: u32,
    p_success: f64,
    spectrum: serde_json::Value,
}

impl<T: Scalar> SearchReport<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SearchDoc {
            marked: self.marked_full,
            queries: self.queries_used,
            p_success: self.success_probability.as_f64(),
            spectrum: self.spectrum.to_value()?,
        })?)
    }
}

#[derive(Debug, Clone, Default)]
pub struct GroverOptions<T: Scalar> {
    pub budget: Option<ResourceBudget>,
    /// Overrides the literal `J`.
    pub iterations: Option<u32>,
    /// Defaults to powers-of-two couplings on the argument register.
    pub couplings: Option<CouplingConfig<T>>,
    pub policy: ExecPolicy,
}

/// Runs the search with default options apart from the budget.
pub fn run_pqc_grover<T: Scalar>(
    layout: &RegisterLayout,
    marked_full: u64,
    budget: Option<&ResourceBudget>,
    policy: &ExecPolicy,
) -> Result<(Ensemble<T>, SearchReport<T>)> {
    run_pqc_grover_with(
        layout,
        marked_full,
        &GroverOptions {
            budget: budget.copied(),
            iterations: None,
            couplings: None,
            policy: *policy,
        },
    )
}

pub fn run_pqc_grover_with<T: Scalar>(
    layout: &RegisterLayout,
    marked_full: u64,
    options: &GroverOptions<T>,
) -> Result<(Ensemble<T>, SearchReport<T>)> {
    if let Some(budget) = &options.budget {
        budget.check(layout.n1())?;
    }
    let (j1_marked, j2_marked) = layout.split_marked(marked_full)?;
    let params = match options.iterations {
        Some(j) => grover_params_with_iterations(layout.big_n2(), j)?,
        None => grover_params(layout.big_n2())?,
    };
    let program = grover_program(layout, marked_full, &params)?;
    let ensemble = execute(prepare_uniform_ensemble(layout)?, &program, &options.policy)?;

    let marked = ensemble
        .constituent(j1_marked)
        .expect("uniform ensemble holds every j1");
    let success_probability = marked.amps[layout.local_index(1, 0, j2_marked as usize)].norm_sqr();

    let config = match &options.couplings {
        Some(c) => c.clone(),
        None => CouplingConfig::default_for(layout.n(), CoupledRegister::Argument),
    };
    let spectrum = measure_expected(&ensemble, &config)?;
    let report = SearchReport {
        marked_full,
        queries_used: program.query_count() as u32,
        success_probability,
        params,
        spectrum,
    };
    Ok((ensemble, report))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffRow {
    pub n1: u32,
    pub big_n1: u64,
    /// `π √(N/N1) / 4`.
    pub nq_asymptotic: f64,
    /// `J + 1` with the literal `J` (1 when `N2 = 1`).
    pub nq_realized: u32,
}

impl TradeoffRow {
    pub fn product_asymptotic(&self) -> f64 {
        self.nq_asymptotic * self.nq_asymptotic * self.big_n1 as f64
    }

    pub fn product_realized(&self) -> f64 {
        let q = self.nq_realized as f64;
        q * q * self.big_n1 as f64
    }
}

/// Query count against constituent count for each split of `n` qubits.
pub fn sweep_tradeoff(n: u32, n1_values: &[u32]) -> Result<Vec<TradeoffRow>> {
    if n == 0 || n > 62 {
        return Err(PqcError::InvalidLayout(format!("n = {n} outside [1, 62]")));
    }
    n1_values
        .iter()
        .map(|&n1| {
            if n1 > n {
                return Err(PqcError::InvalidLayout(format!(
                    "n1 = {n1} exceeds n = {n}"
                )));
            }
            let n2_size = 1u64 << (n - n1);
            let j = iteration_count(n2_size)?;
            Ok(TradeoffRow {
                n1,
                big_n1: 1 << n1,
                nq_asymptotic: std::f64::consts::PI * (n2_size as f64).sqrt() / 4.0,
                nq_realized: j + 1,
            })
        })
        .collect()
}

/// Marked item used by the repetition-parallel baseline. The last index,
/// so smallest-index tie-breaking never favors it.
pub fn rpa_marked(big_n: u64) -> u64 {
    big_n - 1
}

fn check_rpa_size(big_n: u64) -> Result<u32> {
    check_power_of_two(big_n)?;
    if big_n < 4 {
        return Err(PqcError::GroverParams(format!("N = {big_n} must be >= 4")));
    }
    Ok(big_n.trailing_zeros())
}

/// Born distribution after one standard (`φ = π`) iteration on a single
/// pure `n`-qubit computer. Returns `(p_marked, p_other)` read from the
/// simulated state.
pub fn rpa_one_iteration_distribution(big_n: u64) -> Result<(f64, f64)> {
    let probs = rpa_distribution(big_n)?;
    let marked = rpa_marked(big_n) as usize;
    Ok((probs[marked], probs[0]))
}

fn rpa_distribution(big_n: u64) -> Result<Vec<f64>> {
    let n = check_rpa_size(big_n)?;
    let layout = RegisterLayout::new(0, n, 0)?;
    let ensemble = prepare_uniform_ensemble::<f64>(&layout)?;
    let mut state = ensemble.into_constituents().remove(0);
    let params = GroverParams {
        n2_size: big_n,
        beta: beta_of(big_n),
        iterations: 1,
        phi: Some(std::f64::consts::PI),
    };
    grover_iteration(&mut state, &layout, rpa_marked(big_n), &params)?;
    Ok(state.amps[..big_n as usize]
        .iter()
        .map(|a| a.norm_sqr())
        .collect())
}

fn majority_trial(dist: &WeightedIndex<f64>, big_n: u64, k: u64, seed: u64, trial: u64) -> u64 {
    let mut rng = derive_stream(seed, trial, StreamPurpose::Rpa);
    let mut votes = vec![0u64; big_n as usize];
    for _ in 0..k {
        votes[dist.sample(&mut rng)] += 1;
    }
    // max_by_key keeps the last maximum; scan in reverse so the smallest index wins
    votes
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, &v)| v)
        .map(|(i, _)| i as u64)
        .unwrap()
}

/// `k` single-iteration computers vote; the most frequent outcome wins,
/// ties going to the smallest state index.
pub fn rpa_majority_vote(big_n: u64, k: u64, seed: u64) -> Result<(u64, bool)> {
    if k == 0 {
        return Err(PqcError::GroverParams("k must be >= 1".into()));
    }
    let dist = WeightedIndex::new(rpa_distribution(big_n)?)
        .map_err(|e| PqcError::GroverParams(e.to_string()))?;
    let winner = majority_trial(&dist, big_n, k, seed, 0);
    Ok((winner, winner == rpa_marked(big_n)))
}

/// Fraction of `trials` independent majority votes that pick the marked
/// item. Trial `t` uses stream `(seed, t)`; trial 0 equals
/// [`rpa_majority_vote`].
pub fn rpa_success_rate(big_n: u64, k: u64, trials: u64, seed: u64) -> Result<f64> {
    if k == 0 || trials == 0 {
        return Err(PqcError::GroverParams("k and trials must be >= 1".into()));
    }
    let dist = WeightedIndex::new(rpa_distribution(big_n)?)
        .map_err(|e| PqcError::GroverParams(e.to_string()))?;
    let marked = rpa_marked(big_n);
    let wins = (0..trials)
        .into_par_iter()
        .filter(|&t| majority_trial(&dist, big_n, k, seed, t) == marked)
        .count();
    Ok(wins as f64 / trials as f64)
}

/// Empirical frequency of the marked item among `k` Born samples.
pub fn rpa_marked_frequency(big_n: u64, k: u64, seed: u64) -> Result<f64> {
    if k == 0 {
        return Err(PqcError::GroverParams("k must be >= 1".into()));
    }
    let dist = WeightedIndex::new(rpa_distribution(big_n)?)
        .map_err(|e| PqcError::GroverParams(e.to_string()))?;
    let marked = rpa_marked(big_n) as usize;
    let mut rng = derive_stream(seed, 0, StreamPurpose::Rpa);
    let hits = (0..k).filter(|_| dist.sample(&mut rng) == marked).count();
    Ok(hits as f64 / k as f64)
}

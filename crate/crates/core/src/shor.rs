//! Order finding with the Fourier transform restricted to the n2-register.
//!
//! The argument register holds `x = j1·N2 + j2`. Each constituent computes
//! `a^x mod N_b` into the function register, then transforms only its n2
//! qubits. Every constituent ends with the same n2 distribution, so one
//! ensemble readout shows `N1` copies of the peak comb at multiples of
//! `N2/r`.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::Serialize;

use crate::arith::{convergents, gcd, lcm, mod_pow};
use crate::error::{PqcError, Result};
use crate::exec::{execute, CircuitOp, CircuitProgram, ExecPolicy};
use crate::layout::RegisterLayout;
use crate::scalar::{phase, Scalar};
use crate::spectrometer::{
    measure_expected, measure_sampled, CoupledRegister, CouplingConfig, Spectrum,
};
use crate::state::{prepare_uniform_ensemble, ConstituentState, Ensemble};

/// Largest modulus handled at desk scale.
pub const MAX_MODULUS: u64 = 1_000_000;

/// Discrete Fourier transform `|j> -> N2^{-1/2} Σ_k e^{2πi jk/N2} |k>` on
/// the n2-register, built from Hadamards, controlled phases and a final
/// bit reversal (`n2(n2+1)/2` gates plus swaps).
pub fn qft_n2<T: Scalar>(state: &mut ConstituentState<T>, layout: &RegisterLayout) {
    let n2 = layout.n2();
    if n2 == 0 {
        return;
    }
    let s = T::FRAC_1_SQRT_2();
    let amps = &mut state.amps;
    for target in (0..n2).rev() {
        let t = 1usize << target;
        for i in 0..amps.len() {
            if i & t == 0 {
                let x = amps[i];
                let y = amps[i | t];
                amps[i] = (x + y).scale(s);
                amps[i | t] = (x - y).scale(s);
            }
        }
        for control in (0..target).rev() {
            let c = 1usize << control;
            let k = target - control + 1;
            let rot = phase(T::TAU() / T::from_u64(1u64 << k).unwrap());
            for (i, a) in amps.iter_mut().enumerate() {
                if i & t != 0 && i & c != 0 {
                    *a = *a * rot;
                }
            }
        }
    }
    for lo in 0..n2 / 2 {
        let hi = n2 - 1 - lo;
        let (l, h) = (1usize << lo, 1usize << hi);
        for i in 0..amps.len() {
            if i & l != 0 && i & h == 0 {
                amps.swap(i, (i & !l) | h);
            }
        }
    }
}

pub(crate) fn validate_modexp(layout: &RegisterLayout, nb: u64, a: u64) -> Result<()> {
    if nb < 2 {
        return Err(PqcError::ShorParams(format!("modulus {nb} must be >= 2")));
    }
    if (nb - 1) >> layout.m() != 0 {
        return Err(PqcError::ShorParams(format!(
            "{} function qubits cannot hold residues mod {nb}",
            layout.m()
        )));
    }
    if gcd(a, nb) != 1 {
        return Err(PqcError::ShorParams(format!("gcd({a}, {nb}) != 1")));
    }
    Ok(())
}

/// `|f>|j2> -> |f ⊕ (a^x mod nb)>|j2>` with `x = j1·N2 + j2`. Maps the
/// function value `0` to `a^x mod nb`.
pub(crate) fn modexp_constituent<T: Scalar>(
    state: &mut ConstituentState<T>,
    layout: &RegisterLayout,
    nb: u64,
    a: u64,
) {
    let n2_dim = layout.big_n2() as usize;
    let base = mod_pow(a, state.j1 << layout.n2(), nb);
    let mut values = Vec::with_capacity(n2_dim);
    let mut v = base;
    for _ in 0..n2_dim {
        values.push(v as usize);
        v = ((v as u128 * a as u128) % nb as u128) as u64;
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; state.amps.len()];
    for (i, amp) in state.amps.iter().enumerate() {
        let (anc, f, j2) = layout.split_local(i);
        out[layout.local_index(anc, f ^ values[j2], j2)] = *amp;
    }
    state.amps = out;
}

/// Applies [`modexp_constituent`] to every constituent.
pub fn modexp_into_function<T: Scalar>(
    ensemble: Ensemble<T>,
    params: &ShorParams,
) -> Result<Ensemble<T>> {
    let mut program = CircuitProgram::new();
    program.push(CircuitOp::ModexpIntoFunction {
        nb: params.nb,
        a: params.a,
    });
    execute(ensemble, &program, &ExecPolicy::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShorParams {
    pub nb: u64,
    pub a: u64,
    pub n1: u32,
    pub n2: u32,
    pub m: u32,
}

/// The unique `n` with `nb² < 2^n < 2·nb²`.
pub fn argument_qubits_for(nb: u64) -> Result<u32> {
    if !(3..=MAX_MODULUS).contains(&nb) {
        return Err(PqcError::ShorParams(format!(
            "modulus {nb} outside [3, {MAX_MODULUS}]"
        )));
    }
    let sq = nb as u128 * nb as u128;
    let n = 128 - sq.leading_zeros();
    if (1u128 << n) >= 2 * sq {
        return Err(PqcError::ShorParams(format!(
            "no n with {nb}² < 2^n < 2·{nb}²"
        )));
    }
    Ok(n)
}

/// Smallest `m` with `2^m >= nb`.
pub fn function_qubits_for(nb: u64) -> u32 {
    64 - (nb - 1).leading_zeros()
}

impl ShorParams {
    pub fn new(nb: u64, a: u64, n1: u32, n2: u32) -> Result<Self> {
        let n = argument_qubits_for(nb)?;
        if n1 + n2 != n {
            return Err(PqcError::ShorParams(format!(
                "n1 + n2 = {} but {nb}² < 2^n < 2·{nb}² needs n = {n}",
                n1 + n2
            )));
        }
        if a == 0 || a >= nb {
            return Err(PqcError::ShorParams(format!("base {a} outside [1, {nb})")));
        }
        if gcd(a, nb) != 1 {
            return Err(PqcError::ShorParams(format!(
                "gcd({a}, {nb}) = {}",
                gcd(a, nb)
            )));
        }
        Ok(Self {
            nb,
            a,
            n1,
            n2,
            m: function_qubits_for(nb),
        })
    }

    /// Splits the argument register given only `n2`.
    pub fn with_n2(nb: u64, a: u64, n2: u32) -> Result<Self> {
        let n = argument_qubits_for(nb)?;
        if n2 > n {
            return Err(PqcError::ShorParams(format!("n2 = {n2} exceeds n = {n}")));
        }
        Self::new(nb, a, n - n2, n2)
    }

    pub fn layout(&self) -> Result<RegisterLayout> {
        RegisterLayout::new(self.n1, self.n2, self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Advisory {
    Clean,
    Warn,
    Fail,
}

/// How far the split leaves `N2` from the sharp-interference regime.
/// `N2 >= nb²` is clean, `N2 >= nb` warns, smaller fails. Never blocks a run.
pub fn n1_validity_check(params: &ShorParams) -> (Advisory, String) {
    let n2_size = 1u128 << params.n2;
    let nb = params.nb as u128;
    if n2_size >= nb * nb {
        (
            Advisory::Clean,
            format!("N2 = {n2_size} >= Nb² = {}", nb * nb),
        )
    } else if n2_size >= nb {
        (
            Advisory::Warn,
            format!(
                "N2 = {n2_size} >= Nb = {nb} but < Nb² = {}; peaks may broaden",
                nb * nb
            ),
        )
    } else {
        (
            Advisory::Fail,
            format!(
                "N2 = {n2_size} < Nb = {nb}; n1 = {} is too large",
                params.n1
            ),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodMethod {
    Gcd,
    Cf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShorFailure {
    /// Only the zero peak, or `r = 1`.
    TrivialOrder,
    OddOrder,
    /// `a^{r/2} ≡ −1 (mod nb)`.
    MinusOne,
    /// No candidate satisfied `a^r ≡ 1`.
    NoOrder,
    /// Both gcds were trivial.
    TrivialFactors,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodReport {
    pub nb: u64,
    pub a: u64,
    pub peak_positions: Vec<u64>,
    pub r: Option<u64>,
    pub method: PeriodMethod,
    pub factors: Option<(u64, u64)>,
    pub failure: Option<ShorFailure>,
    pub transitions_observed: usize,
}

#[derive(Serialize)]
struct PeriodDoc<'a> {
    #[serde(rename = "Nb")]
    nb: u64,
    a: u64,
    r: Option<u64>,
    factors: Option<[u64; 2]>,
    peaks: &'a [u64],
    transitions: usize,
    method: PeriodMethod,
}

impl PeriodReport {
    pub fn succeeded(&self) -> bool {
        self.factors.is_some()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PeriodDoc {
            nb: self.nb,
            a: self.a,
            r: self.r,
            factors: self.factors.map(|(p, q)| [p, q]),
            peaks: &self.peak_positions,
            transitions: self.transitions_observed,
            method: self.method,
        })?)
    }
}

/// Least divisor `d` of `r` with `a^d ≡ 1`, given `a^r ≡ 1`.
fn reduce_order(a: u64, nb: u64, r: u64) -> u64 {
    (1..=r)
        .filter(|d| r.is_multiple_of(*d))
        .find(|&d| mod_pow(a, d, nb) == 1)
        .unwrap_or(r)
}

fn factors_from_order(a: u64, nb: u64, r: u64) -> std::result::Result<(u64, u64), ShorFailure> {
    if r == 1 {
        return Err(ShorFailure::TrivialOrder);
    }
    if r % 2 == 1 {
        return Err(ShorFailure::OddOrder);
    }
    let half = mod_pow(a, r / 2, nb);
    if half == nb - 1 {
        return Err(ShorFailure::MinusOne);
    }
    [gcd(half + nb - 1, nb), gcd(half + 1, nb)]
        .into_iter()
        .find(|&f| f != 1 && f != nb)
        .map(|f| (f.min(nb / f), f.max(nb / f)))
        .ok_or(ShorFailure::TrivialFactors)
}

/// Recovers the order from n2-register peak positions.
///
/// If `r0 = N2 / gcd(N2, peaks)` satisfies `a^{r0} ≡ 1` the peaks form an
/// exact comb and `r` is read off directly. Otherwise each nonzero peak is
/// expanded as a continued fraction of `peak / N2`; denominators up to `nb`
/// and their small multiples are tested against `a^r ≡ 1`.
pub fn extract_period(peaks: &[u64], n2_size: u64, nb: u64, a: u64) -> Result<PeriodReport> {
    if peaks.is_empty() {
        return Err(PqcError::NoPeaks);
    }
    let mut positions: Vec<u64> = peaks.to_vec();
    positions.sort_unstable();
    positions.dedup();
    let mut report = PeriodReport {
        nb,
        a,
        peak_positions: positions.clone(),
        r: None,
        method: PeriodMethod::Gcd,
        factors: None,
        failure: None,
        transitions_observed: peaks.len(),
    };

    if positions.iter().all(|&p| p == 0) {
        report.r = Some(1);
        report.failure = Some(ShorFailure::TrivialOrder);
        return Ok(report);
    }

    let g = positions.iter().fold(n2_size, |g, &p| gcd(g, p));
    let r0 = n2_size / g;
    let r = if mod_pow(a, r0, nb) == 1 {
        Some(reduce_order(a, nb, r0))
    } else {
        report.method = PeriodMethod::Cf;
        order_from_fractions(&positions, n2_size, nb, a)
    };
    report.r = r;
    match r {
        None => report.failure = Some(ShorFailure::NoOrder),
        Some(r) => match factors_from_order(a, nb, r) {
            Ok(f) => report.factors = Some(f),
            Err(e) => report.failure = Some(e),
        },
    }
    Ok(report)
}

fn order_from_fractions(positions: &[u64], n2_size: u64, nb: u64, a: u64) -> Option<u64> {
    let mut denominators: Vec<u64> = positions
        .iter()
        .filter(|&&p| p != 0)
        .flat_map(|&p| convergents(p, n2_size))
        .map(|(_, q)| q)
        .filter(|&q| q >= 1 && q <= nb)
        .collect();
    denominators.sort_unstable();
    denominators.dedup();
    let mut candidates = denominators.clone();
    for (i, &p) in denominators.iter().enumerate() {
        for &q in &denominators[i + 1..] {
            let l = lcm(p, q);
            if l <= nb {
                candidates.push(l);
            }
        }
    }
    candidates
        .into_iter()
        .flat_map(|q| (1..=nb / q).map(move |k| q * k))
        .filter(|&r| mod_pow(a, r, nb) == 1)
        .min()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShorReadout {
    Expected,
    Sampled { molecules_per_constituent: u64 },
}

/// Peak count used for period extraction: `⌈2 log₂ nb⌉`.
pub fn peak_budget(nb: u64) -> usize {
    (2.0 * (nb as f64).log2()).ceil() as usize
}

/// Decodes the spectrum into per-constituent `(n2 position, magnitude)`
/// lists, reading positions back from the line frequencies.
pub fn n2_peaks_by_constituent<T: Scalar>(
    spectrum: &Spectrum<T>,
    config: &CouplingConfig<T>,
) -> Result<BTreeMap<u64, Vec<(u64, f64)>>> {
    let decoder = config.decoder()?;
    let mut out: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
    for p in &spectrum.peaks {
        let bits = decoder.get(&p.freq_over_pi).ok_or_else(|| {
            PqcError::Shape(format!("frequency {}π matches no n2 state", p.freq_over_pi))
        })?;
        out.entry(p.j1)
            .or_default()
            .push((bits.value, p.magnitude()));
    }
    for list in out.values_mut() {
        list.sort_by_key(|&(pos, _)| pos);
    }
    Ok(out)
}

/// Prepare, modular exponentiation, n2-register transform, ancilla readout
/// coupled to the n2 qubits, and period recovery.
pub fn run_pqc_shor<T: Scalar>(
    params: &ShorParams,
    readout: ShorReadout,
    seed: u64,
    policy: &ExecPolicy,
) -> Result<(Ensemble<T>, Spectrum<T>, PeriodReport)> {
    let layout = params.layout()?;
    let ensemble = prepare_uniform_ensemble::<T>(&layout)?;
    let mut program = CircuitProgram::new();
    program
        .push(CircuitOp::ModexpIntoFunction {
            nb: params.nb,
            a: params.a,
        })
        .push(CircuitOp::QftN2 {});
    let ensemble = execute(ensemble, &program, policy)?;

    let config = CouplingConfig::default_for(layout.n2(), CoupledRegister::N2Only);
    let spectrum = match readout {
        ShorReadout::Expected => measure_expected(&ensemble, &config)?,
        ShorReadout::Sampled {
            molecules_per_constituent,
        } => measure_sampled(&ensemble, &config, molecules_per_constituent, seed)?,
    };

    let by_constituent = n2_peaks_by_constituent(&spectrum, &config)?;
    let mut totals: BTreeMap<u64, f64> = BTreeMap::new();
    for &(pos, mag) in by_constituent.values().flatten() {
        *totals.entry(pos).or_default() += mag;
    }
    let mut ranked: Vec<(u64, f64)> = totals.into_iter().collect();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    ranked.truncate(peak_budget(params.nb));
    let chosen: Vec<u64> = ranked.into_iter().map(|(p, _)| p).collect();

    let mut report = extract_period(&chosen, layout.big_n2(), params.nb, params.a)?;
    report.transitions_observed = spectrum.transitions();
    Ok((ensemble, spectrum, report))
}

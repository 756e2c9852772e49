//! Ancilla-qubit spectrum readout.
//!
//! The ancilla transition frequency of a molecule whose coupled qubits are
//! in `|i_1 … i_k>` is `ω₀ + Σ_k π J_0k (−1)^{i_k}` (rad/s, `J` in Hz).
//! The peak points up when the ancilla was in `|0>` and down for `|1>`.
//! Each simulated molecule collapses to one basis label with Born
//! probability and contributes one transition.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::Ratio;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PqcError, Result};
use crate::exec::{derive_stream, StreamPurpose};
use crate::layout::RegisterLayout;
use crate::scalar::Scalar;
use crate::state::{ConstituentState, Ensemble};

/// Intensities below this are dropped from expected-mode spectra.
pub const INTENSITY_FLOOR: f64 = 1e-14;

/// Largest coupled-qubit count for which frequencies are enumerated.
const MAX_ENUMERATED_BITS: usize = 20;

/// Basis label of the coupled qubits, first qubit most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisBits {
    pub value: u64,
    pub len: u32,
}

impl BasisBits {
    pub fn new(value: u64, len: u32) -> Self {
        debug_assert!(len == 64 || value < (1u64 << len));
        Self { value, len }
    }

    /// Bit of qubit `k` (0-based from the most significant end).
    #[inline]
    pub fn bit(&self, k: u32) -> bool {
        (self.value >> (self.len - 1 - k)) & 1 == 1
    }

    pub fn parse(text: &str) -> Option<Self> {
        if text.is_empty() || text.len() > 63 {
            return None;
        }
        let value = u64::from_str_radix(text, 2).ok()?;
        Some(Self::new(value, text.len() as u32))
    }
}

impl fmt::Display for BasisBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len {
            f.write_str(if self.bit(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Which qubits the ancilla is coupled to, in coupling-table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoupledRegister {
    /// The full argument register, `j1` bits then `j2` bits.
    Argument,
    /// Only the n2-register.
    N2Only,
    /// Function register followed by the argument register.
    FunctionAndArgument,
}

impl CoupledRegister {
    pub fn width(&self, layout: &RegisterLayout) -> u32 {
        match self {
            Self::Argument => layout.n(),
            Self::N2Only => layout.n2(),
            Self::FunctionAndArgument => layout.m() + layout.n(),
        }
    }

    /// Coupled-qubit label seen by the ancilla for local index `local` of
    /// constituent `j1`.
    pub fn observe(&self, layout: &RegisterLayout, j1: u64, local: usize) -> BasisBits {
        let (_, f, j2) = layout.split_local(local);
        let arg = (j1 << layout.n2()) | j2 as u64;
        match self {
            Self::Argument => BasisBits::new(arg, layout.n()),
            Self::N2Only => BasisBits::new(j2 as u64, layout.n2()),
            Self::FunctionAndArgument => {
                BasisBits::new(((f as u64) << layout.n()) | arg, layout.m() + layout.n())
            }
        }
    }
}

/// Ancilla Hamiltonian parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConfig<T: Scalar> {
    omega0: T,
    couplings: Vec<T>,
    register: CoupledRegister,
}

impl<T: Scalar> CouplingConfig<T> {
    /// Validates that every `|J| > 0` and that distinct bit strings map to
    /// distinct frequencies.
    pub fn new(omega0: T, couplings: Vec<T>, register: CoupledRegister) -> Result<Self> {
        if !omega0.is_finite() {
            return Err(PqcError::NonInjectiveCouplings(
                "omega0 is not finite".into(),
            ));
        }
        if let Some(j) = couplings.iter().find(|j| !j.is_finite() || j.is_zero()) {
            return Err(PqcError::NonInjectiveCouplings(format!(
                "coupling {j} must be finite and nonzero"
            )));
        }
        let config = Self {
            omega0,
            couplings,
            register,
        };
        if !config.is_superincreasing() {
            config.check_injective_by_enumeration()?;
        }
        Ok(config)
    }

    /// Powers-of-two couplings `J_0k = 2^{n−k}` Hz with `ω₀ = 0`, so the
    /// frequency is a strictly decreasing affine function of the integer
    /// value of the bit string: `freq/π = (2^n − 1) − 2·value`.
    pub fn default_for(n: u32, register: CoupledRegister) -> Self {
        let couplings = (1..=n)
            .map(|k| T::from_u64(1u64 << (n - k)).unwrap())
            .collect();
        Self {
            omega0: T::zero(),
            couplings,
            register,
        }
    }

    #[inline]
    pub fn omega0(&self) -> T {
        self.omega0
    }

    #[inline]
    pub fn couplings(&self) -> &[T] {
        &self.couplings
    }

    #[inline]
    pub fn register(&self) -> CoupledRegister {
        self.register
    }

    pub fn with_register(mut self, register: CoupledRegister) -> Self {
        self.register = register;
        self
    }

    pub fn check_layout(&self, layout: &RegisterLayout) -> Result<()> {
        let width = self.register.width(layout) as usize;
        if width != self.couplings.len() {
            return Err(PqcError::BitLength {
                expected: self.couplings.len(),
                got: width,
            });
        }
        Ok(())
    }

    /// Sorted magnitudes where each exceeds the sum of all smaller ones;
    /// such tables give distinct signed sums.
    fn is_superincreasing(&self) -> bool {
        let mut mags: Vec<f64> = self.couplings.iter().map(|j| j.abs().as_f64()).collect();
        mags.sort_by(f64::total_cmp);
        let mut sum = 0.0;
        for m in mags {
            if m <= sum {
                return false;
            }
            sum += m;
        }
        true
    }

    fn check_injective_by_enumeration(&self) -> Result<()> {
        let k = self.couplings.len();
        if k > MAX_ENUMERATED_BITS {
            return Err(PqcError::NonInjectiveCouplings(format!(
                "cannot verify {k} non-superincreasing couplings"
            )));
        }
        let mut freqs: Vec<(f64, u64)> = (0..1u64 << k)
            .map(|v| {
                let bits = BasisBits::new(v, k as u32);
                (self.frequency_unchecked(bits).as_f64(), v)
            })
            .collect();
        freqs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = freqs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(PqcError::NonInjectiveCouplings(format!(
                "{} and {} share frequency {}",
                BasisBits::new(w[0].1, k as u32),
                BasisBits::new(w[1].1, k as u32),
                w[0].0
            )));
        }
        Ok(())
    }

    fn frequency_unchecked(&self, bits: BasisBits) -> T {
        self.couplings
            .iter()
            .enumerate()
            .fold(self.omega0, |acc, (k, &j)| {
                let term = T::PI() * j;
                if bits.bit(k as u32) {
                    acc - term
                } else {
                    acc + term
                }
            })
    }

    /// Transition frequency in rad/s.
    pub fn frequency_of(&self, bits: BasisBits) -> Result<T> {
        if bits.len as usize != self.couplings.len() {
            return Err(PqcError::BitLength {
                expected: self.couplings.len(),
                got: bits.len as usize,
            });
        }
        Ok(self.frequency_unchecked(bits))
    }

    /// Frequency divided by π as an exact rational. Exact whenever `ω₀/π`
    /// and the couplings are dyadic, which covers the default table.
    pub fn freq_over_pi(&self, bits: BasisBits) -> Result<Ratio<i64>> {
        if bits.len as usize != self.couplings.len() {
            return Err(PqcError::BitLength {
                expected: self.couplings.len(),
                got: bits.len as usize,
            });
        }
        let mut acc = self.omega0.as_f64() / std::f64::consts::PI;
        for (k, j) in self.couplings.iter().enumerate() {
            let j = j.as_f64();
            acc += if bits.bit(k as u32) { -j } else { j };
        }
        Ratio::approximate_float(acc).ok_or_else(|| {
            PqcError::NonInjectiveCouplings(format!("frequency {acc} not representable"))
        })
    }

    /// Table from `freq/π` back to the coupled-qubit label.
    pub fn decoder(&self) -> Result<HashMap<Ratio<i64>, BasisBits>> {
        let k = self.couplings.len();
        if k > MAX_ENUMERATED_BITS {
            return Err(PqcError::NonInjectiveCouplings(format!(
                "decoder limited to {MAX_ENUMERATED_BITS} coupled qubits"
            )));
        }
        (0..1u64 << k)
            .map(|v| {
                let bits = BasisBits::new(v, k as u32);
                self.freq_over_pi(bits).map(|f| (f, bits))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    #[inline]
    pub fn from_ancilla(bit: usize) -> Self {
        if bit == 0 {
            Self::Up
        } else {
            Self::Down
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Up => "up",
            Self::Down => "down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PeakWeight<T> {
    Count(u64),
    Intensity(T),
}

/// One spectral line, attributed to the constituent that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Peak<T: Scalar> {
    pub frequency: T,
    pub freq_over_pi: Ratio<i64>,
    pub direction: Direction,
    pub weight: PeakWeight<T>,
    pub state_bits: BasisBits,
    pub j1: u64,
}

impl<T: Scalar> Peak<T> {
    pub fn intensity(&self) -> Option<T> {
        match self.weight {
            PeakWeight::Intensity(x) => Some(x),
            PeakWeight::Count(_) => None,
        }
    }

    pub fn count(&self) -> Option<u64> {
        match self.weight {
            PeakWeight::Count(n) => Some(n),
            PeakWeight::Intensity(_) => None,
        }
    }

    /// Intensity, or count as a plain number.
    pub fn magnitude(&self) -> f64 {
        match self.weight {
            PeakWeight::Count(n) => n as f64,
            PeakWeight::Intensity(x) => x.as_f64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    Sampled,
    Expected,
}

/// Peaks sorted by descending frequency, then `j1`, then direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: Scalar> {
    pub mode: SpectrumMode,
    pub seed: Option<u64>,
    pub peaks: Vec<Peak<T>>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn downward(&self) -> impl Iterator<Item = &Peak<T>> {
        self.peaks.iter().filter(|p| p.direction == Direction::Down)
    }

    pub fn peaks_of(&self, j1: u64) -> impl Iterator<Item = &Peak<T>> {
        self.peaks.iter().filter(move |p| p.j1 == j1)
    }

    /// Number of distinct `(constituent, peak)` transitions.
    pub fn transitions(&self) -> usize {
        self.peaks.len()
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.peaks
            .iter()
            .map(|p| {
                let w = match p.weight {
                    PeakWeight::Count(n) => format!("count {n}"),
                    PeakWeight::Intensity(x) => format!("intensity {:.6}", x.as_f64()),
                };
                format!(
                    "freq/pi {:>8}  {:<4}  {}  |{}>  j1={}",
                    p.freq_over_pi.to_string(),
                    p.direction,
                    w,
                    p.state_bits,
                    p.j1
                )
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SpectrumDoc::from(self))?)
    }

    pub fn to_value(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(SpectrumDoc::from(self))?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct PeakDoc {
    pub freq_over_pi: (i64, i64),
    pub dir: Direction,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub intensity: Option<f64>,
    pub state_bits: String,
    pub j1: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct SpectrumDoc {
    pub mode: SpectrumMode,
    pub seed: Option<u64>,
    pub peaks: Vec<PeakDoc>,
}

impl<T: Scalar> From<&Spectrum<T>> for SpectrumDoc {
    fn from(s: &Spectrum<T>) -> Self {
        Self {
            mode: s.mode,
            seed: s.seed,
            peaks: s
                .peaks
                .iter()
                .map(|p| PeakDoc {
                    freq_over_pi: (*p.freq_over_pi.numer(), *p.freq_over_pi.denom()),
                    dir: p.direction,
                    count: p.count(),
                    intensity: p.intensity().map(Scalar::as_f64),
                    state_bits: p.state_bits.to_string(),
                    j1: p.j1,
                })
                .collect(),
        }
    }
}

/// Key for merging lines within one constituent. The coupling map is
/// injective, so equal labels and equal frequencies coincide.
type LineKey = (BasisBits, Direction);

fn lines_to_peaks<T: Scalar>(
    config: &CouplingConfig<T>,
    j1: u64,
    lines: BTreeMap<LineKey, PeakWeight<T>>,
) -> Result<Vec<Peak<T>>> {
    lines
        .into_iter()
        .map(|((bits, direction), weight)| {
            Ok(Peak {
                frequency: config.frequency_of(bits)?,
                freq_over_pi: config.freq_over_pi(bits)?,
                direction,
                weight,
                state_bits: bits,
                j1,
            })
        })
        .collect()
}

fn sort_peaks<T: Scalar>(peaks: &mut [Peak<T>]) {
    peaks.sort_by(|a, b| {
        b.freq_over_pi
            .cmp(&a.freq_over_pi)
            .then(b.frequency.partial_cmp(&a.frequency).unwrap())
            .then(a.j1.cmp(&b.j1))
            .then(a.direction.cmp(&b.direction))
    });
}

fn expected_lines<T: Scalar>(
    layout: &RegisterLayout,
    register: CoupledRegister,
    c: &ConstituentState<T>,
) -> BTreeMap<LineKey, PeakWeight<T>> {
    let mut lines: BTreeMap<LineKey, T> = BTreeMap::new();
    for (local, a) in c.amps.iter().enumerate() {
        let p = c.weight * a.norm_sqr();
        if p.is_zero() {
            continue;
        }
        let (anc, _, _) = layout.split_local(local);
        let key = (
            register.observe(layout, c.j1, local),
            Direction::from_ancilla(anc),
        );
        let slot = lines.entry(key).or_insert_with(T::zero);
        *slot = *slot + p;
    }
    lines
        .into_iter()
        .filter(|(_, p)| p.as_f64() >= INTENSITY_FLOOR)
        .map(|(k, p)| (k, PeakWeight::Intensity(p)))
        .collect()
}

/// Noise-free limit of the sampled spectrum: one line per (constituent,
/// coupled label, direction) with intensity `weight · Σ|amplitude|²`.
pub fn measure_expected<T: Scalar>(
    ensemble: &Ensemble<T>,
    config: &CouplingConfig<T>,
) -> Result<Spectrum<T>> {
    let layout = ensemble.layout();
    config.check_layout(layout)?;
    let per_constituent: Vec<Vec<Peak<T>>> = ensemble
        .constituents()
        .par_iter()
        .map(|c| lines_to_peaks(config, c.j1, expected_lines(layout, config.register, c)))
        .collect::<Result<_>>()?;
    let mut peaks: Vec<_> = per_constituent.into_iter().flatten().collect();
    sort_peaks(&mut peaks);
    Ok(Spectrum {
        mode: SpectrumMode::Expected,
        seed: None,
        peaks,
    })
}

/// Simulates `molecules_per_constituent` single-molecule transitions per
/// constituent. Constituent `j1` draws from its own stream derived from
/// `(seed, j1)`, so the result does not depend on the thread count.
pub fn measure_sampled<T: Scalar>(
    ensemble: &Ensemble<T>,
    config: &CouplingConfig<T>,
    molecules_per_constituent: u64,
    seed: u64,
) -> Result<Spectrum<T>> {
    let layout = ensemble.layout();
    config.check_layout(layout)?;
    if molecules_per_constituent == 0 {
        return Err(PqcError::Shape(
            "molecules_per_constituent must be >= 1".into(),
        ));
    }
    let per_constituent: Vec<Vec<Peak<T>>> = ensemble
        .constituents()
        .par_iter()
        .map(|c| {
            let probs: Vec<f64> = c.amps.iter().map(|a| a.norm_sqr().as_f64()).collect();
            let dist = WeightedIndex::new(&probs)
                .map_err(|e| PqcError::Shape(format!("constituent {}: {e}", c.j1)))?;
            let mut rng = derive_stream(seed, c.j1, StreamPurpose::Measure);
            let mut hits = vec![0u64; probs.len()];
            for _ in 0..molecules_per_constituent {
                hits[dist.sample(&mut rng)] += 1;
            }
            let mut lines: BTreeMap<LineKey, PeakWeight<T>> = BTreeMap::new();
            for (local, &n) in hits.iter().enumerate().filter(|(_, &n)| n > 0) {
                let (anc, _, _) = layout.split_local(local);
                let key = (
                    config.register.observe(layout, c.j1, local),
                    Direction::from_ancilla(anc),
                );
                let slot = lines.entry(key).or_insert(PeakWeight::Count(0));
                if let PeakWeight::Count(total) = slot {
                    *total += n;
                }
            }
            lines_to_peaks(config, c.j1, lines)
        })
        .collect::<Result<_>>()?;
    let mut peaks: Vec<_> = per_constituent.into_iter().flatten().collect();
    sort_peaks(&mut peaks);
    Ok(Spectrum {
        mode: SpectrumMode::Sampled,
        seed: Some(seed),
        peaks,
    })
}

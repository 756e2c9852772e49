//! Exact ensemble representation: a weighted list of labeled pure states.
//!
//! The ensemble density operator never carries coherence between distinct
//! `j1` labels, so it is stored as `Σ_j1 w_j1 |ψ_j1><ψ_j1|` with each
//! `|ψ_j1>` kept over the (ancilla, function, n2) qubits only.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{PqcError, Result};
use crate::layout::RegisterLayout;
use crate::scalar::{Amplitude, Scalar, AMPLITUDE_TOL, INPUT_TOL};

/// Memory bounds applied when states are allocated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capacity {
    /// Upper bound on `1 + m + n2`.
    pub constituent_qubits: u32,
    /// Upper bound on `n1 + 1 + m + n2` (all stored amplitudes).
    pub ensemble_qubits: u32,
    /// Upper bound on `1 + m + n` for [`FullStateVector`].
    pub full_qubits: u32,
}

impl Default for Capacity {
    fn default() -> Self {
        Self {
            constituent_qubits: 24,
            ensemble_qubits: 26,
            full_qubits: 16,
        }
    }
}

impl Capacity {
    pub fn check_ensemble(&self, layout: &RegisterLayout) -> Result<()> {
        if layout.local_qubits() > self.constituent_qubits {
            return Err(PqcError::Capacity {
                what: "constituent",
                qubits: layout.local_qubits(),
                limit: self.constituent_qubits,
            });
        }
        let total = layout.n1() + layout.local_qubits();
        if total > self.ensemble_qubits {
            return Err(PqcError::Capacity {
                what: "ensemble",
                qubits: total,
                limit: self.ensemble_qubits,
            });
        }
        Ok(())
    }

    pub fn check_full(&self, layout: &RegisterLayout) -> Result<()> {
        if layout.full_qubits() > self.full_qubits {
            return Err(PqcError::Capacity {
                what: "full state vector",
                qubits: layout.full_qubits(),
                limit: self.full_qubits,
            });
        }
        Ok(())
    }
}

/// One molecule class of the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstituentState<T: Scalar> {
    pub j1: u64,
    pub weight: T,
    pub amps: Vec<Amplitude<T>>,
}

impl<T: Scalar> ConstituentState<T> {
    /// Ancilla, function register and n2-register all in `|0>`.
    pub fn zero(layout: &RegisterLayout, j1: u64, weight: T) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); layout.local_dim()];
        amps[0] = Complex::new(T::one(), T::zero());
        Self { j1, weight, amps }
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|amplitude|^2` for every local basis label.
    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Marginal distribution of the n2-register (summed over ancilla and
    /// function values).
    pub fn n2_distribution(&self, layout: &RegisterLayout) -> Vec<T> {
        let n2_dim = layout.big_n2() as usize;
        let mut out = vec![T::zero(); n2_dim];
        for (i, a) in self.amps.iter().enumerate() {
            out[i & (n2_dim - 1)] = out[i & (n2_dim - 1)] + a.norm_sqr();
        }
        out
    }

    /// Embeds this constituent into the full molecule space with the n1
    /// qubits pinned to `j1`.
    pub fn expand_full(&self, layout: &RegisterLayout) -> Result<FullStateVector<T>> {
        self.expand_full_with(layout, &Capacity::default())
    }

    pub fn expand_full_with(
        &self,
        layout: &RegisterLayout,
        capacity: &Capacity,
    ) -> Result<FullStateVector<T>> {
        capacity.check_full(layout)?;
        check_len(layout, self.amps.len())?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1usize << layout.full_qubits()];
        for (local, a) in self.amps.iter().enumerate() {
            amps[layout.full_index(self.j1, local)] = *a;
        }
        Ok(FullStateVector {
            layout: *layout,
            amps,
        })
    }
}

fn check_len(layout: &RegisterLayout, got: usize) -> Result<()> {
    if got != layout.local_dim() {
        return Err(PqcError::Dimension {
            expected: layout.local_dim(),
            got,
        });
    }
    Ok(())
}

/// Weighted mixture of labeled pure constituents, ordered by `j1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T: Scalar> {
    layout: RegisterLayout,
    constituents: Vec<ConstituentState<T>>,
}

impl<T: Scalar> Ensemble<T> {
    /// Validates label uniqueness, vector lengths and total weight, and
    /// sorts by `j1`.
    pub fn from_constituents(
        layout: RegisterLayout,
        mut constituents: Vec<ConstituentState<T>>,
    ) -> Result<Self> {
        constituents.sort_by_key(|c| c.j1);
        for w in constituents.windows(2) {
            if w[0].j1 == w[1].j1 {
                return Err(PqcError::Shape(format!("duplicate j1 label {}", w[0].j1)));
            }
        }
        let mut total = T::zero();
        for c in &constituents {
            if c.j1 >= layout.big_n1() {
                return Err(PqcError::Shape(format!(
                    "j1 label {} outside [0, {})",
                    c.j1,
                    layout.big_n1()
                )));
            }
            check_len(&layout, c.amps.len())?;
            if c.weight < T::zero() {
                return Err(PqcError::Shape(format!(
                    "negative weight for j1 = {}",
                    c.j1
                )));
            }
            total = total + c.weight;
        }
        if (total.as_f64() - 1.0).abs() > INPUT_TOL {
            return Err(PqcError::Shape(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            layout,
            constituents,
        })
    }

    #[inline]
    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    #[inline]
    pub fn constituents(&self) -> &[ConstituentState<T>] {
        &self.constituents
    }

    #[inline]
    pub fn constituents_mut(&mut self) -> &mut [ConstituentState<T>] {
        &mut self.constituents
    }

    pub fn into_constituents(self) -> Vec<ConstituentState<T>> {
        self.constituents
    }

    pub fn constituent(&self, j1: u64) -> Option<&ConstituentState<T>> {
        self.constituents
            .binary_search_by_key(&j1, |c| c.j1)
            .ok()
            .map(|i| &self.constituents[i])
    }

    pub fn total_weight(&self) -> T {
        self.constituents.iter().map(|c| c.weight).sum()
    }

    /// Largest deviation of any constituent norm from 1.
    pub fn max_norm_error(&self) -> f64 {
        self.constituents
            .iter()
            .map(|c| (c.norm_sqr().as_f64() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&EnsembleDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: EnsembleDoc<T> = serde_json::from_str(text)?;
        doc.try_into()
    }
}

/// Uniform PQC preparation: `N1` constituents of weight `1/N1`, n2-register
/// in the equal superposition, ancilla and function register in `|0>`.
pub fn prepare_uniform_ensemble<T: Scalar>(layout: &RegisterLayout) -> Result<Ensemble<T>> {
    prepare_uniform_ensemble_with(layout, &Capacity::default())
}

pub fn prepare_uniform_ensemble_with<T: Scalar>(
    layout: &RegisterLayout,
    capacity: &Capacity,
) -> Result<Ensemble<T>> {
    capacity.check_ensemble(layout)?;
    let n1 = layout.big_n1();
    let weight = T::one() / T::from_u64(n1).unwrap();
    let amp = Complex::new(
        T::one() / T::from_u64(layout.big_n2()).unwrap().sqrt(),
        T::zero(),
    );
    let constituents = (0..n1)
        .map(|j1| {
            let mut c = ConstituentState::zero(layout, j1, weight);
            for j2 in 0..layout.big_n2() as usize {
                c.amps[j2] = amp;
            }
            c
        })
        .collect();
    Ok(Ensemble {
        layout: *layout,
        constituents,
    })
}

/// General preparation from a table `coefficients[j1][j2] = c_{j1,j2}`.
/// Rows must be normalized within [`INPUT_TOL`]; they are stored as given.
pub fn prepare_general_ensemble<T: Scalar>(
    layout: &RegisterLayout,
    coefficients: &[Vec<Amplitude<T>>],
) -> Result<Ensemble<T>> {
    Capacity::default().check_ensemble(layout)?;
    if coefficients.len() as u64 != layout.big_n1() {
        return Err(PqcError::Shape(format!(
            "{} rows for N1 = {}",
            coefficients.len(),
            layout.big_n1()
        )));
    }
    let mut offending = Vec::new();
    for (j1, row) in coefficients.iter().enumerate() {
        if row.len() as u64 != layout.big_n2() {
            return Err(PqcError::Shape(format!(
                "row {j1} has {} entries for N2 = {}",
                row.len(),
                layout.big_n2()
            )));
        }
        let norm: f64 = row.iter().map(|c| c.norm_sqr().as_f64()).sum();
        if (norm - 1.0).abs() > INPUT_TOL {
            offending.push(j1 as u64);
        }
    }
    if !offending.is_empty() {
        return Err(PqcError::Normalization { offending });
    }
    let weight = T::one() / T::from_u64(layout.big_n1()).unwrap();
    let constituents = coefficients
        .iter()
        .enumerate()
        .map(|(j1, row)| {
            let mut c = ConstituentState::zero(layout, j1 as u64, weight);
            c.amps[..row.len()].copy_from_slice(row);
            c
        })
        .collect();
    Ok(Ensemble {
        layout: *layout,
        constituents,
    })
}

/// One constituent expanded over every qubit of the molecule. Used as the
/// reference representation in tests.
#[derive(Debug, Clone, PartialEq)]
pub struct FullStateVector<T: Scalar> {
    pub layout: RegisterLayout,
    pub amps: Vec<Amplitude<T>>,
}

impl<T: Scalar> FullStateVector<T> {
    /// `amps <- U amps` with a dense row-major `U` over all `1 + m + n` qubits.
    pub fn evolve_full(&mut self, unitary: &[Amplitude<T>]) -> Result<()> {
        let dim = self.amps.len();
        if unitary.len() != dim * dim {
            return Err(PqcError::Dimension {
                expected: dim * dim,
                got: unitary.len(),
            });
        }
        let zero = Complex::new(T::zero(), T::zero());
        let out: Vec<_> = unitary
            .chunks_exact(dim)
            .map(|row| {
                row.iter()
                    .zip(&self.amps)
                    .fold(zero, |acc, (u, a)| acc + u * a)
            })
            .collect();
        self.amps = out;
        Ok(())
    }

    /// Projects back onto constituent `j1`. Fails if any amplitude outside
    /// the `j1` slice exceeds [`AMPLITUDE_TOL`].
    pub fn project(&self, j1: u64, weight: T) -> Result<ConstituentState<T>> {
        let layout = self.layout;
        let mut c = ConstituentState::zero(&layout, j1, weight);
        let mut inside = vec![false; self.amps.len()];
        for (local, slot) in c.amps.iter_mut().enumerate() {
            let full = layout.full_index(j1, local);
            *slot = self.amps[full];
            inside[full] = true;
        }
        let leak = self
            .amps
            .iter()
            .zip(&inside)
            .filter(|(_, &k)| !k)
            .map(|(a, _)| a.norm().as_f64())
            .fold(0.0, f64::max);
        if leak > AMPLITUDE_TOL {
            return Err(PqcError::Shape(format!(
                "state leaks {leak:e} outside the j1 = {j1} slice"
            )));
        }
        Ok(c)
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct ConstituentDoc<T> {
    j1: u64,
    weight: T,
    amps: Vec<Complex<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct EnsembleDoc<T> {
    n1: u32,
    n2: u32,
    m: u32,
    constituents: Vec<ConstituentDoc<T>>,
}

impl<T: Scalar> From<&Ensemble<T>> for EnsembleDoc<T> {
    fn from(e: &Ensemble<T>) -> Self {
        Self {
            n1: e.layout.n1(),
            n2: e.layout.n2(),
            m: e.layout.m(),
            constituents: e
                .constituents
                .iter()
                .map(|c| ConstituentDoc {
                    j1: c.j1,
                    weight: c.weight,
                    amps: c.amps.clone(),
                })
                .collect(),
        }
    }
}

impl<T: Scalar> TryFrom<EnsembleDoc<T>> for Ensemble<T> {
    type Error = PqcError;

    fn try_from(doc: EnsembleDoc<T>) -> Result<Self> {
        let layout = RegisterLayout::new(doc.n1, doc.n2, doc.m)?;
        Capacity::default().check_ensemble(&layout)?;
        let constituents: Vec<_> = doc
            .constituents
            .into_iter()
            .map(|c| ConstituentState {
                j1: c.j1,
                weight: c.weight,
                amps: c.amps,
            })
            .collect();
        for c in &constituents {
            if c.amps.len() == layout.local_dim() && (c.norm_sqr().as_f64() - 1.0).abs() > INPUT_TOL
            {
                return Err(PqcError::Normalization {
                    offending: vec![c.j1],
                });
            }
        }
        Ensemble::from_constituents(layout, constituents)
    }
}

//! Primitive gate set acting in place on a single constituent.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PqcError, Result};
use crate::layout::RegisterLayout;
use crate::scalar::{phase, Amplitude, Scalar, UNITARY_TOL};
use crate::state::ConstituentState;

/// `H^{⊗n2}` on the n2-register. Identity when `n2 = 0`.
pub fn hadamard_n2<T: Scalar>(state: &mut ConstituentState<T>, layout: &RegisterLayout) {
    let s = T::FRAC_1_SQRT_2();
    let amps = &mut state.amps;
    for bit in 0..layout.n2() {
        let stride = 1usize << bit;
        for block in (0..amps.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let x = amps[i];
                let y = amps[i + stride];
                amps[i] = (x + y).scale(s);
                amps[i + stride] = (x - y).scale(s);
            }
        }
    }
}

/// Oracle phase: multiplies the `j2⁰` slice by `e^{iφ}` when this
/// constituent's label equals `j1⁰`, where `(j1⁰, j2⁰)` splits `marked_full`.
pub fn phase_on_marked<T: Scalar>(
    state: &mut ConstituentState<T>,
    layout: &RegisterLayout,
    marked_full: u64,
    phi: T,
) -> Result<()> {
    let (j1, j2) = layout.split_marked(marked_full)?;
    if state.j1 != j1 {
        return Ok(());
    }
    let rot = phase(phi);
    for slice in state.amps.chunks_exact_mut(layout.big_n2() as usize) {
        slice[j2 as usize] = slice[j2 as usize] * rot;
    }
    Ok(())
}

/// Multiplies amplitudes whose n2-index is `0` by `e^{iφ}`.
pub fn phase_on_zero_n2<T: Scalar>(
    state: &mut ConstituentState<T>,
    layout: &RegisterLayout,
    phi: T,
) {
    let rot = phase(phi);
    for slice in state.amps.chunks_exact_mut(layout.big_n2() as usize) {
        slice[0] = slice[0] * rot;
    }
}

/// Pauli-X on `target_qubit` (0 = ancilla, 1..=m function qubits), restricted
/// to the marked argument label.
pub fn flip_function_if_marked<T: Scalar>(
    state: &mut ConstituentState<T>,
    layout: &RegisterLayout,
    marked_full: u64,
    target_qubit: u32,
) -> Result<()> {
    let bit = layout.local_bit_of(target_qubit)?;
    let (j1, j2) = layout.split_marked(marked_full)?;
    if state.j1 != j1 {
        return Ok(());
    }
    let mask = 1usize << bit;
    let n2_mask = layout.big_n2() as usize - 1;
    for i in 0..state.amps.len() {
        if i & mask == 0 && i & n2_mask == j2 as usize {
            state.amps.swap(i, i | mask);
        }
    }
    Ok(())
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DenseUnitary<T: Scalar> {
    dim: usize,
    matrix: Vec<Amplitude<T>>,
}

impl<T: Scalar> DenseUnitary<T> {
    /// Checks shape and `‖U†U − I‖_max <= 1e-10`.
    pub fn new(dim: usize, matrix: Vec<Amplitude<T>>) -> Result<Self> {
        let u = Self::new_unchecked(dim, matrix)?;
        u.check_unitary()?;
        Ok(u)
    }

    /// Checks shape only.
    pub fn new_unchecked(dim: usize, matrix: Vec<Amplitude<T>>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(PqcError::Dimension {
                expected: dim * dim,
                got: matrix.len(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        Self { dim, matrix }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Amplitude<T> {
        self.matrix[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[Amplitude<T>] {
        &self.matrix
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..d {
                    acc = acc + self.entry(k, i).conj() * self.entry(k, j);
                }
                if i == j {
                    acc.re = acc.re - T::one();
                }
                worst = worst.max(acc.norm().as_f64());
            }
        }
        worst
    }

    pub fn check_unitary(&self) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > UNITARY_TOL || deviation.is_nan() {
            return Err(PqcError::NotUnitary { deviation });
        }
        Ok(())
    }

    /// Haar-like random unitary: Gram-Schmidt on a complex Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut cols: Vec<Vec<Complex<f64>>> = (0..dim)
            .map(|_| (0..dim).map(|_| gaussian_pair(rng)).collect())
            .collect();
        for j in 0..dim {
            for k in 0..j {
                let proj: Complex<f64> = cols[k]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let (done, rest) = cols.split_at_mut(j);
                for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                    *x -= proj * q;
                }
            }
            let norm = cols[j].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        let mut matrix = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                matrix[i * dim + j] = Complex::new(T::lit(x.re), T::lit(x.im));
            }
        }
        Self { dim, matrix }
    }
}

fn gaussian_pair<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    // Box-Muller
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = std::f64::consts::TAU * u2;
    Complex::new(r * t.cos(), r * t.sin())
}

/// Applies a dense operator over (function ⊗ n2) to each ancilla slice.
pub fn apply_unitary_n2f<T: Scalar>(
    state: &mut ConstituentState<T>,
    layout: &RegisterLayout,
    unitary: &DenseUnitary<T>,
) -> Result<()> {
    let dim = layout.coherent_dim();
    if unitary.dim() != dim {
        return Err(PqcError::Dimension {
            expected: dim,
            got: unitary.dim(),
        });
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut scratch = vec![zero; dim];
    for slice in state.amps.chunks_exact_mut(dim) {
        for (row, out) in unitary.as_slice().chunks_exact(dim).zip(scratch.iter_mut()) {
            *out = row
                .iter()
                .zip(slice.iter())
                .fold(zero, |acc, (u, a)| acc + u * a);
        }
        slice.copy_from_slice(&scratch);
    }
    Ok(())
}

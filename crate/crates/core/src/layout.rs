//! Qubit partition of one molecule.
//!
//! Qubit order, most significant first: ancilla, the `m` function qubits,
//! the `n1` mixed argument qubits, the `n2` coherent argument qubits. The
//! combined argument label is `j1 * N2 + j2`, so `|01,10> = |0110> = |6>`
//! for `n1 = n2 = 2`.
//!
//! A constituent only stores the (ancilla, function, n2) qubits; its n1
//! qubits are pinned to the classical label `j1`. Local index:
//! `anc << (m + n2) | f << n2 | j2`.

use serde::{Deserialize, Serialize};

use crate::error::{PqcError, Result};

/// Largest total qubit count accepted by a layout (labels must fit in `u64`).
pub const MAX_LAYOUT_QUBITS: u32 = 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegisterLayout {
    n1: u32,
    n2: u32,
    m: u32,
}

impl RegisterLayout {
    pub fn new(n1: u32, n2: u32, m: u32) -> Result<Self> {
        if n1 + n2 == 0 {
            return Err(PqcError::InvalidLayout(
                "argument register needs at least one qubit".into(),
            ));
        }
        if 1 + m + n1 + n2 > MAX_LAYOUT_QUBITS {
            return Err(PqcError::InvalidLayout(format!(
                "{} qubits exceeds the {MAX_LAYOUT_QUBITS}-qubit addressing limit",
                1 + m + n1 + n2
            )));
        }
        Ok(Self { n1, n2, m })
    }

    #[inline]
    pub fn n1(&self) -> u32 {
        self.n1
    }

    #[inline]
    pub fn n2(&self) -> u32 {
        self.n2
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Argument register width `n = n1 + n2`.
    #[inline]
    pub fn n(&self) -> u32 {
        self.n1 + self.n2
    }

    #[inline]
    pub fn has_ancilla(&self) -> bool {
        true
    }

    /// Number of constituents `N1 = 2^n1`.
    #[inline]
    pub fn big_n1(&self) -> u64 {
        1 << self.n1
    }

    /// Sub-database size `N2 = 2^n2`.
    #[inline]
    pub fn big_n2(&self) -> u64 {
        1 << self.n2
    }

    /// Database size `N = N1 * N2`.
    #[inline]
    pub fn big_n(&self) -> u64 {
        1 << self.n()
    }

    /// Qubits stored per constituent: ancilla, function and n2.
    #[inline]
    pub fn local_qubits(&self) -> u32 {
        1 + self.m + self.n2
    }

    #[inline]
    pub fn local_dim(&self) -> usize {
        1usize << self.local_qubits()
    }

    /// All qubits of one molecule.
    #[inline]
    pub fn full_qubits(&self) -> u32 {
        1 + self.m + self.n()
    }

    /// Dimension of the (function ⊗ n2) subspace a dense `U_c` acts on.
    #[inline]
    pub fn coherent_dim(&self) -> usize {
        1usize << (self.m + self.n2)
    }

    #[inline]
    pub fn split_marked(&self, marked_full: u64) -> Result<(u64, u64)> {
        if marked_full >= self.big_n() {
            return Err(PqcError::MarkedOutOfRange {
                marked: marked_full,
                size: self.big_n(),
            });
        }
        Ok((marked_full >> self.n2, marked_full & (self.big_n2() - 1)))
    }

    /// Local index of `(ancilla, function, j2)`.
    #[inline]
    pub fn local_index(&self, ancilla: usize, function: usize, j2: usize) -> usize {
        (ancilla << (self.m + self.n2)) | (function << self.n2) | j2
    }

    /// Inverse of [`local_index`](Self::local_index).
    #[inline]
    pub fn split_local(&self, index: usize) -> (usize, usize, usize) {
        let j2 = index & ((1 << self.n2) - 1);
        let f = (index >> self.n2) & ((1 << self.m) - 1);
        let anc = index >> (self.m + self.n2);
        (anc, f, j2)
    }

    /// Full-molecule index of a local index inside constituent `j1`.
    #[inline]
    pub fn full_index(&self, j1: u64, local: usize) -> usize {
        let (anc, f, j2) = self.split_local(local);
        (anc << (self.m + self.n())) | (f << self.n()) | ((j1 as usize) << self.n2) | j2
    }

    /// Bit position (from the least significant end of a local index) of
    /// qubit `q`, where qubit 0 is the ancilla and 1..=m the function qubits.
    pub fn local_bit_of(&self, qubit: u32) -> Result<u32> {
        if qubit > self.m {
            return Err(PqcError::InvalidTarget { qubit, m: self.m });
        }
        Ok(self.m + self.n2 - qubit)
    }
}

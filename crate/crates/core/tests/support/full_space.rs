//! Reference evolution over every qubit of a molecule.
//!
//! Each instruction is rebuilt as a dense `2^(1+m+n)` matrix straight from
//! its definition (Kronecker products, diagonals, permutations) and applied
//! to a constituent expanded with its n1 qubits pinned to `j1`. Nothing here
//! calls the in-place gate kernels.

#![allow(dead_code)]

use num_complex::Complex64;
use pqc_core::{
    CircuitOp, CircuitProgram64, ConstituentState64, DenseUnitary64, Ensemble64, RegisterLayout,
};
use rand::Rng;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn identity(dim: usize) -> Vec<Complex64> {
    let mut m = vec![zero(); dim * dim];
    for i in 0..dim {
        m[i * dim + i] = one();
    }
    m
}

pub fn kron(a: &[Complex64], da: usize, b: &[Complex64], db: usize) -> Vec<Complex64> {
    let d = da * db;
    let mut out = vec![zero(); d * d];
    for ar in 0..da {
        for ac in 0..da {
            let x = a[ar * da + ac];
            if x == zero() {
                continue;
            }
            for br in 0..db {
                for bc in 0..db {
                    out[(ar * db + br) * d + ac * db + bc] = x * b[br * db + bc];
                }
            }
        }
    }
    out
}

fn hadamard_power(k: u32) -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = [s, s, s, -s].map(|x| Complex64::new(x, 0.0));
    let mut m = vec![one()];
    let mut d = 1;
    for _ in 0..k {
        m = kron(&m, d, &h, 2);
        d *= 2;
    }
    m
}

fn dft(size: usize) -> Vec<Complex64> {
    let norm = 1.0 / (size as f64).sqrt();
    let mut m = vec![zero(); size * size];
    for j in 0..size {
        for k in 0..size {
            let theta = std::f64::consts::TAU * ((j * k) % size) as f64 / size as f64;
            m[k * size + j] = Complex64::from_polar(norm, theta);
        }
    }
    m
}

fn diagonal(dim: usize, f: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
    let mut m = vec![zero(); dim * dim];
    for i in 0..dim {
        m[i * dim + i] = f(i);
    }
    m
}

fn permutation(dim: usize, f: impl Fn(usize) -> usize) -> Vec<Complex64> {
    let mut m = vec![zero(); dim * dim];
    for col in 0..dim {
        m[f(col) * dim + col] = one();
    }
    m
}

fn naive_pow_mod(a: u64, x: u64, nb: u64) -> u64 {
    let mut acc = 1 % nb;
    for _ in 0..x {
        acc = acc * a % nb;
    }
    acc
}

/// Dense matrix of `op` over all `1 + m + n` qubits.
pub fn op_matrix(layout: &RegisterLayout, op: &CircuitOp<f64>) -> Vec<Complex64> {
    let (m, n, n2) = (layout.m(), layout.n(), layout.n2());
    let dim = 1usize << (1 + m + n);
    let arg_mask = (1usize << n) - 1;
    let n2_mask = (1usize << n2) - 1;
    let outer = 1usize << (1 + m + layout.n1());
    match op {
        CircuitOp::HadamardN2 {} => kron(&identity(outer), outer, &hadamard_power(n2), 1 << n2),
        CircuitOp::QftN2 {} => kron(&identity(outer), outer, &dft(1 << n2), 1 << n2),
        CircuitOp::PhaseOnMarked { marked, phi } => diagonal(dim, |i| {
            if i & arg_mask == *marked as usize {
                Complex64::from_polar(1.0, *phi)
            } else {
                one()
            }
        }),
        CircuitOp::PhaseOnZeroN2 { phi } => diagonal(dim, |i| {
            if i & n2_mask == 0 {
                Complex64::from_polar(1.0, *phi)
            } else {
                one()
            }
        }),
        CircuitOp::FlipFunctionIfMarked { marked, target } => {
            let bit = m + n - target;
            permutation(dim, |i| {
                if i & arg_mask == *marked as usize {
                    i ^ (1 << bit)
                } else {
                    i
                }
            })
        }
        CircuitOp::ApplyUnitaryN2f { unitary } => {
            let cd = layout.coherent_dim();
            let mut out = vec![zero(); dim * dim];
            // coherent index: f << n2 | j2; spectator: ancilla and j1
            let split = |i: usize| {
                let j2 = i & n2_mask;
                let j1 = (i >> n2) & ((1 << layout.n1()) - 1);
                let f = (i >> n) & ((1 << m) - 1);
                let anc = i >> (m + n);
                ((f << n2) | j2, (anc, j1))
            };
            for r in 0..dim {
                let (cr, sr) = split(r);
                for c in 0..dim {
                    let (cc, sc) = split(c);
                    if sr == sc {
                        out[r * dim + c] = unitary.entry(cr, cc);
                    }
                }
            }
            debug_assert_eq!(unitary.dim(), cd);
            out
        }
        CircuitOp::ModexpIntoFunction { nb, a } => permutation(dim, |i| {
            let x = (i & arg_mask) as u64;
            let v = naive_pow_mod(*a, x, *nb) as usize;
            i ^ (v << n)
        }),
    }
}

/// Runs `program` on one constituent through the full-space matrices.
pub fn evolve_reference(
    layout: &RegisterLayout,
    program: &CircuitProgram64,
    state: &ConstituentState64,
) -> ConstituentState64 {
    let mut full = state.expand_full(layout).unwrap();
    for op in &program.ops {
        full.evolve_full(&op_matrix(layout, op)).unwrap();
    }
    full.project(state.j1, state.weight).unwrap()
}

pub fn max_amp_diff(a: &ConstituentState64, b: &ConstituentState64) -> f64 {
    a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Layout with `1 <= n <= max_n` and `1 + m + n <= max_full`.
pub fn random_layout<R: Rng>(rng: &mut R, max_n: u32, max_full: u32) -> RegisterLayout {
    let n = rng.random_range(1..=max_n);
    let n1 = rng.random_range(0..=n);
    let m_cap = (max_full - 1 - n).min(3);
    let m = rng.random_range(0..=m_cap);
    RegisterLayout::new(n1, n - n1, m).unwrap()
}

fn coprime_pair<R: Rng>(rng: &mut R, m: u32) -> Option<(u64, u64)> {
    if m == 0 {
        return None;
    }
    let nb = rng.random_range(2..=1u64 << m);
    let a = (1..nb)
        .cycle()
        .skip(rng.random_range(0..nb as usize))
        .find(|&a| num_integer::gcd(a, nb) == 1)?;
    Some((nb, a))
}

pub fn random_op<R: Rng>(rng: &mut R, layout: &RegisterLayout) -> CircuitOp<f64> {
    loop {
        let op = match rng.random_range(0..7) {
            0 => CircuitOp::HadamardN2 {},
            1 => CircuitOp::PhaseOnMarked {
                marked: rng.random_range(0..layout.big_n()),
                phi: rng.random_range(-7.0..7.0),
            },
            2 => CircuitOp::PhaseOnZeroN2 {
                phi: rng.random_range(-7.0..7.0),
            },
            3 => CircuitOp::FlipFunctionIfMarked {
                marked: rng.random_range(0..layout.big_n()),
                target: rng.random_range(0..=layout.m()),
            },
            4 => CircuitOp::ApplyUnitaryN2f {
                unitary: DenseUnitary64::random(layout.coherent_dim(), rng),
            },
            5 => CircuitOp::QftN2 {},
            _ => match coprime_pair(rng, layout.m()) {
                Some((nb, a)) => CircuitOp::ModexpIntoFunction { nb, a },
                None => continue,
            },
        };
        return op;
    }
}

pub fn random_program<R: Rng>(
    rng: &mut R,
    layout: &RegisterLayout,
    len: usize,
) -> CircuitProgram64 {
    let mut p = CircuitProgram64::new();
    for _ in 0..len {
        p.push(random_op(rng, layout));
    }
    p
}

/// Uniform weights, each constituent a random normalized vector over its
/// whole local space.
pub fn random_ensemble<R: Rng>(rng: &mut R, layout: &RegisterLayout) -> Ensemble64 {
    let weight = 1.0 / layout.big_n1() as f64;
    let constituents = (0..layout.big_n1())
        .map(|j1| {
            let mut c = ConstituentState64::zero(layout, j1, weight);
            for a in c.amps.iter_mut() {
                *a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            let norm = c.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            c.amps.iter_mut().for_each(|a| *a /= norm);
            c
        })
        .collect();
    Ensemble64::from_constituents(*layout, constituents).unwrap()
}

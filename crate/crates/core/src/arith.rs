//! Integer helpers for order finding.

pub use num_integer::{gcd, lcm};

/// `base^exp mod modulus` by square-and-multiply.
pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Least `r >= 1` with `a^r ≡ 1 (mod n)`, by stepping through powers.
/// `None` when `gcd(a, n) != 1`.
pub fn order_by_search(a: u64, n: u64) -> Option<u64> {
    if n < 2 || gcd(a, n) != 1 {
        return None;
    }
    let mut x = a % n;
    let mut r = 1;
    while x != 1 {
        x = ((x as u128 * a as u128) % n as u128) as u64;
        r += 1;
    }
    Some(r)
}

/// Continued-fraction expansion `[a0; a1, a2, …]` of `num / den`.
pub fn continued_fraction(mut num: u64, mut den: u64) -> Vec<u64> {
    let mut terms = Vec::new();
    while den != 0 {
        terms.push(num / den);
        let rem = num % den;
        num = den;
        den = rem;
    }
    terms
}

/// Convergents `p_k / q_k` of `num / den`, in order.
pub fn convergents(num: u64, den: u64) -> Vec<(u64, u64)> {
    let (mut p_prev, mut p) = (1u128, 0u128);
    let (mut q_prev, mut q) = (0u128, 1u128);
    let mut out = Vec::new();
    for a in continued_fraction(num, den) {
        let a = a as u128;
        let p_next = a * p_prev + p;
        let q_next = a * q_prev + q;
        p = p_prev;
        q = q_prev;
        p_prev = p_next;
        q_prev = q_next;
        out.push((p_next as u64, q_next as u64));
    }
    out
}

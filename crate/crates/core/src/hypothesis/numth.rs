//! Small number-theory helpers for lattice and power-family algebra.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Solves `x = a (mod m)`, `x = b (mod n)`; returns `(c, lcm)` with `0 <= c < lcm`.
pub fn crt(a: &BigInt, m: &BigInt, b: &BigInt, n: &BigInt) -> Option<(BigInt, BigInt)> {
    let g = m.gcd(n);
    let diff = b - a;
    if !(&diff % &g).is_zero() {
        return None;
    }
    let l = m / &g * n;
    let (mg, ng) = (m / &g, n / &g);
    let inv = mg.extended_gcd(&ng).x;
    let k = ((diff / &g) * inv).mod_floor(&ng);
    Some(((a + m * k).mod_floor(&l), l))
}

/// Exponents `n >= from` where `scale * base^n + shift = residue (mod modulus)`:
/// isolated exponents plus arithmetic runs `(start, period)`.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct ExponentSplit {
    pub single: Vec<u32>,
    pub periodic: Vec<(u32, u32)>,
}

pub fn exponent_split(
    scale: &BigInt,
    base: &BigInt,
    shift: &BigInt,
    from: u32,
    modulus: &BigInt,
    residue: &BigInt,
) -> ExponentSplit {
    let target = residue.mod_floor(modulus);
    let hits = |state: &BigInt| (scale * state + shift).mod_floor(modulus) == target;
    let mut seen: HashMap<BigInt, u32> = HashMap::new();
    let mut state = base.modpow(&BigInt::from(from), modulus);
    let mut n = from;
    let mut order = Vec::new();
    let start = loop {
        if let Some(&first) = seen.get(&state) {
            break first;
        }
        seen.insert(state.clone(), n);
        order.push((n, state.clone()));
        state = (&state * base).mod_floor(modulus);
        n += 1;
    };
    let period = n - start;
    let mut out = ExponentSplit::default();
    for (k, st) in order {
        if hits(&st) {
            if k < start {
                out.single.push(k);
            } else {
                out.periodic.push((k, period));
            }
        }
    }
    out
}

/// `v = b^e` with `e` maximal; `(v, 1)` when `v` is not a perfect power.
pub fn root_base(v: &BigInt) -> (BigInt, u32) {
    if v <= &BigInt::one() {
        return (v.clone(), 1);
    }
    let bits = v.bits() as u32;
    for e in (2..=bits).rev() {
        let r = v.nth_root(e);
        if r > BigInt::one() && num_traits::pow(r.clone(), e as usize) == *v {
            return (r, e);
        }
    }
    (v.clone(), 1)
}

/// `Some(n)` when `v = base^n` for some `n >= 0`.
pub fn log_exact(v: &BigInt, base: &BigInt) -> Option<u32> {
    if !v.is_positive() || base <= &BigInt::one() {
        return None;
    }
    let mut n = 0;
    let mut x = v.clone();
    while (&x % base).is_zero() {
        x /= base;
        n += 1;
    }
    x.is_one().then_some(n)
}

const WITNESSES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller-Rabin with the first twelve prime bases; exact below 3.3e24.
pub fn is_prime(n: &BigInt) -> bool {
    if n < &BigInt::from(2) {
        return false;
    }
    for &p in &WITNESSES {
        let p = BigInt::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = BigInt::one();
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'outer: for &a in &WITNESSES {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigInt::from(2), n);
            if x == nm1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// The `count` smallest odd primes.
pub fn odd_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = 3u64;
    while out.len() < count {
        if is_prime(&BigInt::from(c)) {
            out.push(c);
        }
        c += 2;
    }
    out
}

/// Largest odd divisor.
pub fn odd_part(mut k: u64) -> u64 {
    if k == 0 {
        return 0;
    }
    while k % 2 == 0 {
        k /= 2;
    }
    k
}


#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt(&b(0), &b(2), &b(0), &b(3)), Some((b(0), b(6))));
        assert_eq!(crt(&b(1), &b(4), &b(3), &b(6)), Some((b(9), b(12))));
        assert_eq!(crt(&b(0), &b(2), &b(1), &b(4)), None);
    }

    #[test]
    fn exponent_split_of_powers_of_two_mod_three() {
        // 2^n mod 3 alternates 2,1 starting at n = 1
        let s = exponent_split(&b(1), &b(2), &b(0), 1, &b(3), &b(1));
        assert_eq!(s, ExponentSplit { single: vec![], periodic: vec![(2, 2)] });
        // 2^n + 0 is even for n >= 1, and 2^0 = 1 is the odd exception
        let s = exponent_split(&b(1), &b(2), &b(0), 0, &b(2), &b(1));
        assert_eq!(s, ExponentSplit { single: vec![0], periodic: vec![] });
    }

    #[test]
    fn perfect_powers() {
        assert_eq!(root_base(&b(64)), (b(2), 6));
        assert_eq!(root_base(&b(36)), (b(6), 2));
        assert_eq!(root_base(&b(12)), (b(12), 1));
        assert_eq!(log_exact(&b(81), &b(3)), Some(4));
        assert_eq!(log_exact(&b(1), &b(3)), Some(0));
        assert_eq!(log_exact(&b(18), &b(3)), None);
    }

    #[test]
    fn primality() {
        let small: Vec<i64> = (0..60).filter(|&n| is_prime(&b(n))).collect();
        assert_eq!(small, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(&b(1_000_000_007)));
        assert!(!is_prime(&b(3215031751)));
        assert_eq!(odd_primes(4), [3, 5, 7, 11]);
        assert_eq!(odd_part(24), 3);
    }
}

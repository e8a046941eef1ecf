//! Integer partitions and the cycle-type arithmetic built on them.
//!
//! A [`Partition`] is stored as its weakly decreasing parts. The derived
//! ordering is plain lexicographic on parts; the canonical *index* order used
//! for every matrix and every printed expansion is the reverse of it, i.e.
//! `(n)` first and `(1^n)` last, which is what [`enumerate_partitions`]
//! returns.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<usize>,
    n: usize,
}

impl Partition {
    /// Builds a partition from weakly decreasing positive parts.
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::Parse(format!("partition {parts:?} has a zero part")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Parse(format!(
                "partition {parts:?} is not weakly decreasing"
            )));
        }
        let n = parts.iter().sum();
        Ok(Partition { parts, n })
    }

    /// Sorts arbitrary positive parts into a partition. Zero entries are dropped.
    pub fn from_unsorted(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let n = parts.iter().sum();
        Partition { parts, n }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new(), n: 0 }
    }

    /// `(1^n)`.
    pub fn ones(n: usize) -> Self {
        Partition { parts: vec![1; n], n }
    }

    /// `(d^{n/d})`; `d` must divide `n`.
    pub fn rectangle(d: usize, copies: usize) -> Self {
        Partition::from_unsorted(vec![d; copies])
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The weight `|λ|`.
    pub fn weight(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Multiplicity form: distinct parts in decreasing order with their counts.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((q, m)) if *q == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn from_multiplicities(mults: &[(usize, usize)]) -> Self {
        Partition::from_unsorted(
            mults
                .iter()
                .flat_map(|&(p, m)| std::iter::repeat_n(p, m))
                .collect(),
        )
    }

    /// Sorted concatenation of parts (the index of `p_λ · p_μ`).
    pub fn union(&self, other: &Partition) -> Partition {
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        Partition::from_unsorted(parts)
    }

    pub fn is_rectangle(&self) -> bool {
        self.parts.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", s.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `"4,2,2"`; whitespace around parts is ignored and the empty
    /// string is the empty partition.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = t
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad partition part {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

/// All partitions of `n` in canonical order: `(n)`, `(n-1,1)`, …, `(1^n)`.
pub fn enumerate_partitions(n: usize) -> Vec<Partition> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition::from_unsorted(cur.clone()));
            return;
        }
        for p in (1..=max.min(rest)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Order of any permutation of cycle type `α`: the lcm of its parts.
pub fn order_of(alpha: &Partition) -> u64 {
    alpha.parts().iter().fold(1u64, |acc, &p| acc.lcm(&(p as u64)))
}

/// Cycle type of `σ^k` when `σ` has cycle type `α`.
pub fn power_cycle_type(alpha: &Partition, k: u64) -> Partition {
    assert!(k >= 1, "power must be positive");
    let mut parts = Vec::with_capacity(alpha.weight());
    for &l in alpha.parts() {
        let g = (l as u64).gcd(&k) as usize;
        parts.extend(std::iter::repeat_n(l / g, g));
    }
    Partition::from_unsorted(parts)
}

/// `α^r`: every part repeated `r` times.
pub fn repeat_parts(alpha: &Partition, r: usize) -> Partition {
    assert!(r >= 1, "repeat count must be positive");
    Partition::from_unsorted(
        alpha
            .parts()
            .iter()
            .flat_map(|&p| std::iter::repeat_n(p, r))
            .collect(),
    )
}

/// `z_λ = Π i^{m_i} m_i!`, the centralizer order of a permutation of type `λ`.
pub fn z_of(alpha: &Partition) -> num_bigint::BigUint {
    let mut z = num_bigint::BigUint::from(1u32);
    for (i, m) in alpha.multiplicities() {
        for j in 1..=m {
            z *= i * j;
        }
    }
    z
}

pub fn euler_phi(k: u64) -> u64 {
    assert!(k >= 1, "totient of zero");
    let mut n = k;
    let mut out = k;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

/// Positive divisors of `k` in increasing order.
pub fn divisors(k: u64) -> Vec<u64> {
    (1..=k).filter(|d| k.is_multiple_of(*d)).collect()
}

/// `λ ⊴ μ` in dominance order.
pub fn dominance_leq(lambda: &Partition, mu: &Partition) -> Result<bool> {
    if lambda.weight() != mu.weight() {
        return Err(Error::WeightMismatch(lambda.weight(), mu.weight()));
    }
    let len = lambda.len().max(mu.len());
    let (mut sl, mut sm) = (0usize, 0usize);
    for i in 0..len {
        sl += lambda.parts().get(i).copied().unwrap_or(0);
        sm += mu.parts().get(i).copied().unwrap_or(0);
        if sl > sm {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn factorial(n: usize) -> num_bigint::BigUint {
    (1..=n).fold(num_bigint::BigUint::from(1u32), |acc, k| acc * k)
}

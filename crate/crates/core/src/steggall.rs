//! Steggall patterns: orbits of `Z_n × Z_n` acting on permutations of
//! `[n]` by cyclic shift of positions and translation of values mod `n`.
//!
//! The orbit of `π` is exactly the double coset `Z_n π Z_n` for
//! `Z_n = ⟨σ_(n)⟩`, since `σ^k π σ^r` has one-line form
//! `(π(i + r) + k)_i`. Patterns classified by stabilizer order `d` count
//! the coefficients of `C_{(d^{n/d})}` in `C_n ⋆ C_n`.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kronecker::{kron_by_cosets, kron_in_basis, Family};
use crate::partitions::{divisors, Partition};
use crate::permutations::{
    cyclic_group, factorial_usize, intersect_conjugate, rank, unrank, Permutation,
};

/// Largest `n` for which all of `S_n` is swept for orbits.
pub const PATTERN_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteggallPattern {
    /// Lexicographically least element of the orbit.
    pub canonical: Permutation,
    pub orbit_size: usize,
    pub stabilizer_order: usize,
}

/// `Q_i = P_{i+r} + k (mod n)` with positions and values kept in `1..=n`.
pub fn torus_act(p: &Permutation, r: usize, k: usize) -> Permutation {
    let n = p.degree();
    if n == 0 {
        return p.clone();
    }
    let one_line: Vec<usize> = (0..n).map(|i| (p.image((i + r) % n) + k) % n + 1).collect();
    Permutation::from_one_line(&one_line).expect("translation preserves bijectivity")
}

/// `{(r, k) : torus_act(P, r, k) = P}`.
pub fn stabilizer(p: &Permutation) -> Vec<(usize, usize)> {
    let n = p.degree();
    let mut out = Vec::new();
    for r in 0..n {
        for k in 0..n {
            if torus_act(p, r, k) == *p {
                out.push((r, k));
            }
        }
    }
    out
}

fn check_pattern_bound(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Parse("pattern size must be positive".into()));
    }
    if n > PATTERN_LIMIT {
        return Err(Error::Capacity { n, limit: PATTERN_LIMIT });
    }
    Ok(())
}

/// One pattern per orbit, ordered by canonical representative.
pub fn enumerate_patterns(n: usize) -> Result<Vec<SteggallPattern>> {
    check_pattern_bound(n)?;
    let total = factorial_usize(n);
    let mut visited = vec![false; total];
    let mut out = Vec::new();
    for seed_rank in 0..total {
        if visited[seed_rank] {
            continue;
        }
        // every smaller permutation is already in an earlier orbit
        let seed = unrank(n, seed_rank);
        let mut orbit_size = 0;
        for r in 0..n {
            for k in 0..n {
                let q = rank(&torus_act(&seed, r, k));
                if !visited[q] {
                    visited[q] = true;
                    orbit_size += 1;
                }
            }
        }
        out.push(SteggallPattern { canonical: seed, orbit_size, stabilizer_order: n * n / orbit_size });
    }
    Ok(out)
}

/// Number of patterns with each stabilizer order.
pub fn counts_by_stabilizer(n: usize) -> Result<BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for pat in enumerate_patterns(n)? {
        *out.entry(pat.stabilizer_order).or_default() += 1;
    }
    Ok(out)
}

/// Comparison of the pattern count for one divisor `d` against the
/// coefficient of `C_{(d^{n/d})}` in `C_n ⋆ C_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorCheck {
    pub d: usize,
    pub mu: Partition,
    pub patterns: usize,
    pub algebraic: u64,
    pub cosets: u64,
}

impl DivisorCheck {
    pub fn passed(&self) -> bool {
        self.patterns as u64 == self.algebraic && self.algebraic == self.cosets
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub n: usize,
    pub total_patterns: usize,
    pub double_coset_count: usize,
    pub by_stabilizer: BTreeMap<usize, usize>,
    pub checks: Vec<DivisorCheck>,
    /// Coefficients at non-rectangular `μ`, which must all vanish.
    pub non_rectangular: BTreeMap<Partition, u64>,
    /// Patterns whose torus stabilizer order differs from `|Z_n ∩ π Z_n π⁻¹|`.
    pub stabilizer_mismatches: Vec<Permutation>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(DivisorCheck::passed)
            && self.non_rectangular.is_empty()
            && self.total_patterns == self.double_coset_count
            && self.stabilizer_mismatches.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let by_stab: serde_json::Map<String, Value> =
            self.by_stabilizer.iter().map(|(d, c)| (d.to_string(), json!(c))).collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "d": c.d,
                    "mu": c.mu.parts(),
                    "patterns": c.patterns,
                    "algebraic": c.algebraic,
                    "cosets": c.cosets,
                    "result": if c.passed() { "pass" } else { "fail" },
                })
            })
            .collect();
        json!({
            "n": self.n,
            "total": self.total_patterns,
            "by_stabilizer": by_stab,
            "double_coset_count": self.double_coset_count,
            "checks": checks,
            "identity_check": if self.passed() { "pass" } else { "fail" },
        })
    }
}

/// Checks `#{P : |Stab P| = d} = b_{n,n}^{(d^{n/d})}` for every `d | n` and
/// that every other `b_{n,n}^μ` vanishes. Mismatches are reported, not raised.
pub fn verify_steggall_identity(n: usize, limit: usize) -> Result<IdentityReport> {
    let patterns = enumerate_patterns(n)?;
    let cycle = Partition::from_unsorted(vec![n]);
    let algebraic = kron_in_basis(&cycle, &cycle, Family::C)?;
    let dec = kron_by_cosets(&cycle, &cycle, Family::C, limit)?;

    let mut by_stabilizer = BTreeMap::new();
    for pat in &patterns {
        *by_stabilizer.entry(pat.stabilizer_order).or_default() += 1;
    }

    let zn = cyclic_group(&Permutation::standard(&cycle));
    let mut stabilizer_mismatches = Vec::new();
    for pat in &patterns {
        let inter = intersect_conjugate(&zn, &pat.canonical, &zn)?;
        if inter.order() != stabilizer(&pat.canonical).len() || inter.order() != pat.stabilizer_order {
            stabilizer_mismatches.push(pat.canonical.clone());
        }
    }

    let checks = divisors(n as u64)
        .into_iter()
        .map(|d| {
            let d = d as usize;
            let mu = Partition::rectangle(d, n / d);
            DivisorCheck {
                d,
                patterns: by_stabilizer.get(&d).copied().unwrap_or(0),
                algebraic: algebraic.get(&mu),
                cosets: dec.table.get(&mu),
                mu,
            }
        })
        .collect();
    let non_rectangular = algebraic
        .entries
        .iter()
        .chain(dec.table.entries.iter())
        .filter(|(mu, _)| !mu.is_rectangle())
        .map(|(mu, v)| (mu.clone(), *v))
        .collect();

    Ok(IdentityReport {
        n,
        total_patterns: patterns.len(),
        double_coset_count: dec.cosets.len(),
        by_stabilizer,
        checks,
        non_rectangular,
        stabilizer_mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutations::{double_cosets, DEFAULT_LIMIT};

    fn one_line(v: &[usize]) -> Permutation {
        Permutation::from_one_line(v).unwrap()
    }

    #[test]
    fn action_examples() {
        let id = Permutation::identity(4);
        assert_eq!(torus_act(&id, 0, 0), id);
        assert_eq!(torus_act(&id, 1, 0), one_line(&[2, 3, 4, 1]));
        assert_eq!(torus_act(&id, 1, 3), id);
    }

    #[test]
    fn action_laws() {
        for q in crate::permutations::all_permutations(5) {
            for (r1, k1) in [(1, 2), (3, 0), (4, 4)] {
                for (r2, k2) in [(2, 1), (0, 3)] {
                    let lhs = torus_act(&torus_act(&q, r1, k1), r2, k2);
                    let rhs = torus_act(&q, (r1 + r2) % 5, (k1 + k2) % 5);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn small_pattern_sets() {
        let pats = enumerate_patterns(4).unwrap();
        let canon: Vec<Vec<usize>> = pats.iter().map(|p| p.canonical.one_line()).collect();
        assert_eq!(canon, vec![vec![1, 2, 3, 4], vec![1, 2, 4, 3], vec![1, 4, 3, 2]]);
        let stabs: Vec<usize> = pats.iter().map(|p| p.stabilizer_order).collect();
        assert_eq!(stabs, vec![4, 1, 4]);
        assert_eq!(enumerate_patterns(1).unwrap().len(), 1);
        assert_eq!(enumerate_patterns(6).unwrap().len(), 24);
        assert!(enumerate_patterns(0).is_err());
        assert!(matches!(enumerate_patterns(11), Err(Error::Capacity { .. })));
    }

    #[test]
    fn a002619_prefix() {
        let expect = [1usize, 1, 2, 3, 8, 24, 108, 640];
        for (i, &e) in expect.iter().enumerate() {
            assert_eq!(enumerate_patterns(i + 1).unwrap().len(), e);
        }
    }

    #[test]
    fn histograms() {
        assert_eq!(counts_by_stabilizer(6).unwrap(), BTreeMap::from([(1, 18), (2, 2), (3, 2), (6, 2)]));
        assert_eq!(counts_by_stabilizer(4).unwrap(), BTreeMap::from([(1, 1), (4, 2)]));
        assert_eq!(counts_by_stabilizer(1).unwrap(), BTreeMap::from([(1, 1)]));
    }

    #[test]
    fn orbit_and_stabilizer_invariants() {
        for n in 1..=7 {
            let pats = enumerate_patterns(n).unwrap();
            assert_eq!(pats.iter().map(|p| p.orbit_size).sum::<usize>(), factorial_usize(n));
            let counts = counts_by_stabilizer(n).unwrap();
            let weighted: usize = counts.iter().map(|(d, c)| c * n * n / d).sum();
            assert_eq!(weighted, factorial_usize(n));
            for pat in &pats {
                assert_eq!(pat.orbit_size * pat.stabilizer_order, n * n);
                assert_eq!(n % pat.stabilizer_order, 0);
                // canonical is the least orbit element
                for r in 0..n {
                    for k in 0..n {
                        assert!(torus_act(&pat.canonical, r, k) >= pat.canonical);
                    }
                }
                // stabilizer is cyclic of order d: some element has additive order d
                let stab = stabilizer(&pat.canonical);
                assert_eq!(stab.len(), pat.stabilizer_order);
                let add_order = |(r, k): (usize, usize)| {
                    (1..=n * n).find(|m| (m * r) % n == 0 && (m * k) % n == 0).unwrap()
                };
                assert!(stab.iter().any(|&g| add_order(g) == stab.len()));
            }
        }
    }

    /// The double cosets of ⟨σ_n⟩ in S_n are exactly the torus orbits, with
    /// the same lexicographically least representatives.
    #[test]
    fn cameron_bijection() {
        for n in 1..=7 {
            let zn = cyclic_group(&Permutation::standard(&Partition::from_unsorted(vec![n])));
            let reps: Vec<Permutation> =
                double_cosets(&zn, &zn, DEFAULT_LIMIT).unwrap().into_iter().map(|d| d.representative).collect();
            let canon: Vec<Permutation> = enumerate_patterns(n).unwrap().into_iter().map(|p| p.canonical).collect();
            assert_eq!(reps, canon);
        }
    }

    #[test]
    fn identity_reports() {
        let r = verify_steggall_identity(6, DEFAULT_LIMIT).unwrap();
        assert!(r.passed());
        let values: Vec<(usize, usize)> = r.checks.iter().map(|c| (c.d, c.patterns)).collect();
        assert_eq!(values, vec![(1, 18), (2, 2), (3, 2), (6, 2)]);
        assert_eq!(r.to_json()["identity_check"], "pass");
        assert_eq!(r.to_json()["by_stabilizer"]["1"], 18);

        let r = verify_steggall_identity(2, DEFAULT_LIMIT).unwrap();
        assert!(r.passed());
        assert_eq!(r.total_patterns, 1);
        // the single pattern {12, 21} has full stabilizer
        let values: Vec<(usize, usize, u64)> = r.checks.iter().map(|c| (c.d, c.patterns, c.algebraic)).collect();
        assert_eq!(values, vec![(1, 0, 0), (2, 1, 1)]);

        assert!(verify_steggall_identity(1, DEFAULT_LIMIT).unwrap().passed());
    }
}

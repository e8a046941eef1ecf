//! Kronecker products `⋆` and their structure constants in the `E`/`h`, `C`
//! and `K` families.
//!
//! Two engines compute the same tables:
//!
//! * [`kron_in_basis`] expands both factors in power sums, applies
//!   `p_λ ⋆ p_μ = δ_{λμ} z_λ p_λ` and converts back.
//! * [`kron_by_cosets`] enumerates `H_α \ S_n / H_β` for the family's
//!   subgroups and classifies each intersection `H_α ∩ τ H_β τ⁻¹`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cycleindex;
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, z_of, Partition};
use crate::permutations::{
    classify_cyclic, classify_product_cyclic, cyclic_group, double_cosets, intersect_conjugate,
    product_cyclic_group, young_subgroup, ElementGroup, Permutation,
};
use crate::symfunc::{self, Basis, Rational, SymFunc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Set molecules `E_α`, whose cycle index is `h_α`.
    E,
    C,
    K,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::E, Family::C, Family::K];

    pub fn basis(self) -> Basis {
        match self {
            Family::E => Basis::H,
            Family::C => Basis::C,
            Family::K => Basis::K,
        }
    }

    pub fn element(self, alpha: &Partition) -> SymFunc {
        match self {
            Family::E => cycleindex::h_to_p(alpha),
            Family::C => cycleindex::c_to_p(alpha),
            Family::K => cycleindex::k_to_p(alpha),
        }
    }

    /// `S_α`, `⟨σ_α⟩` or `G_α`.
    pub fn subgroup(self, alpha: &Partition, limit: usize) -> Result<ElementGroup> {
        match self {
            Family::E => young_subgroup(alpha, limit),
            Family::C => Ok(cyclic_group(&Permutation::standard(alpha))),
            Family::K => Ok(product_cyclic_group(alpha)),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::E => "E",
            Family::C => "C",
            Family::K => "K",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "E" | "H" => Ok(Family::E),
            "C" => Ok(Family::C),
            "K" => Ok(Family::K),
            _ => Err(Error::Parse(format!("unknown family {s:?} (expected E, H, C or K)"))),
        }
    }
}

/// `X_α ⋆ X_β = Σ_μ entries[μ] X_μ` for one family `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstantTable {
    pub family: Family,
    pub alpha: Partition,
    pub beta: Partition,
    /// Nonzero coefficients only.
    pub entries: BTreeMap<Partition, u64>,
}

impl StructureConstantTable {
    pub fn get(&self, mu: &Partition) -> u64 {
        self.entries.get(mu).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Entries in canonical (reverse-lex) order.
    pub fn iter(&self) -> impl Iterator<Item = (&Partition, &u64)> {
        self.entries.iter().rev()
    }

    pub fn to_json(&self, engine: &str, double_coset_count: Option<usize>) -> Value {
        let coefficients: Vec<Value> =
            self.iter().map(|(mu, v)| json!({ "mu": mu.parts(), "value": v })).collect();
        let mut v = json!({
            "family": self.family.to_string(),
            "alpha": self.alpha.parts(),
            "beta": self.beta.parts(),
            "coefficients": coefficients,
            "engine": engine,
        });
        if let Some(c) = double_coset_count {
            v["double_coset_count"] = json!(c);
        }
        v
    }
}

/// `p_λ ⋆ p_μ = δ_{λμ} z_λ p_λ`, extended bilinearly.
pub fn kron_p(f: &SymFunc, g: &SymFunc) -> Result<SymFunc> {
    for x in [f, g] {
        if x.basis() != Basis::P {
            return Err(Error::BasisMismatch(x.basis(), Basis::P));
        }
    }
    if f.degree() != g.degree() {
        return Err(Error::WeightMismatch(f.degree(), g.degree()));
    }
    let mut out = SymFunc::zero(Basis::P, f.degree());
    for (lambda, a) in f.terms() {
        let b = g.coeff(lambda);
        if !b.is_zero() {
            let z = Rational::from_integer(z_of(lambda).into());
            out.add_term(lambda.clone(), a * b * z)?;
        }
    }
    Ok(out)
}

/// Kronecker product of two functions in any bases, returned in the basis of `f`.
pub fn kron(f: &SymFunc, g: &SymFunc) -> Result<SymFunc> {
    let prod = kron_p(&symfunc::to_p(f), &symfunc::to_p(g))?;
    symfunc::from_p(&prod, f.basis())
}

fn check_weights(alpha: &Partition, beta: &Partition) -> Result<()> {
    if alpha.weight() != beta.weight() {
        Err(Error::WeightMismatch(alpha.weight(), beta.weight()))
    } else {
        Ok(())
    }
}

/// Algebraic engine: power-sum diagonal product, converted back to the family basis.
pub fn kron_in_basis(alpha: &Partition, beta: &Partition, family: Family) -> Result<StructureConstantTable> {
    check_weights(alpha, beta)?;
    let prod = kron_p(&family.element(alpha), &family.element(beta))?;
    let back = symfunc::from_p(&prod, family.basis())?;
    let mut entries = BTreeMap::new();
    for (mu, c) in back.terms() {
        let v = (c.is_integer() && !c.is_negative())
            .then(|| c.numer().to_u64())
            .flatten()
            .ok_or_else(|| {
                Error::Consistency(format!(
                    "{family}[{alpha}] ⋆ {family}[{beta}] has coefficient {c} at {family}[{mu}]"
                ))
            })?;
        entries.insert(mu.clone(), v);
    }
    Ok(StructureConstantTable { family, alpha: alpha.clone(), beta: beta.clone(), entries })
}

/// One double coset with the class of its intersection subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassifiedCoset {
    pub representative: Permutation,
    pub size: usize,
    pub mu: Partition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetDecomposition {
    pub table: StructureConstantTable,
    pub cosets: Vec<ClassifiedCoset>,
}

/// Group engine: tally the classes of `H_α ∩ τ H_β τ⁻¹` over `H_α \ S_n / H_β`.
pub fn kron_by_cosets(
    alpha: &Partition,
    beta: &Partition,
    family: Family,
    limit: usize,
) -> Result<CosetDecomposition> {
    check_weights(alpha, beta)?;
    let h = family.subgroup(alpha, limit)?;
    let k = family.subgroup(beta, limit)?;
    let mut cosets = Vec::new();
    let mut entries: BTreeMap<Partition, u64> = BTreeMap::new();
    for dc in double_cosets(&h, &k, limit)? {
        let mu = match family {
            Family::E => theta_type(&theta_matrix(&dc.representative, alpha, beta)),
            Family::C => classify_cyclic(&intersect_conjugate(&h, &dc.representative, &k)?)?,
            Family::K => classify_product_cyclic(&intersect_conjugate(&h, &dc.representative, &k)?)?,
        };
        *entries.entry(mu.clone()).or_default() += 1;
        cosets.push(ClassifiedCoset { representative: dc.representative, size: dc.size, mu });
    }
    Ok(CosetDecomposition {
        table: StructureConstantTable { family, alpha: alpha.clone(), beta: beta.clone(), entries },
        cosets,
    })
}

/// Both engines on one pair.
#[derive(Clone, Debug)]
pub struct EngineComparison {
    pub algebraic: StructureConstantTable,
    pub cosets: StructureConstantTable,
    pub double_coset_count: usize,
}

impl EngineComparison {
    pub fn agree(&self) -> bool {
        self.algebraic == self.cosets
    }
}

pub fn compare_engines(
    alpha: &Partition,
    beta: &Partition,
    family: Family,
    limit: usize,
) -> Result<EngineComparison> {
    let algebraic = kron_in_basis(alpha, beta, family)?;
    let dec = kron_by_cosets(alpha, beta, family, limit)?;
    Ok(EngineComparison { algebraic, double_coset_count: dec.cosets.len(), cosets: dec.table })
}

/// Both engines over every ordered pair of partitions of `n`, in canonical
/// pair order regardless of how the work is scheduled.
pub fn engine_sweep(n: usize, family: Family, limit: usize) -> Result<Vec<EngineComparison>> {
    let parts = enumerate_partitions(n);
    // Matrices are shared through the cache; build them before fanning out.
    symfunc::transition(Basis::P, family.basis(), n);
    let pairs: Vec<(Partition, Partition)> = parts
        .iter()
        .flat_map(|a| parts.iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    pairs
        .par_iter()
        .map(|(a, b)| compare_engines(a, b, family, limit))
        .collect()
}

/// Nonnegative integer matrices with row sums `α` and column sums `β`, in
/// row-major lexicographic order.
pub fn nm_matrices(alpha: &Partition, beta: &Partition) -> Result<Vec<Vec<Vec<usize>>>> {
    check_weights(alpha, beta)?;
    let rows = alpha.len();
    let cols = beta.len();
    let mut out = Vec::new();
    let mut m = vec![vec![0usize; cols]; rows];
    let mut col_left = beta.parts().to_vec();

    fn fill(
        r: usize,
        c: usize,
        row_left: usize,
        alpha: &[usize],
        m: &mut Vec<Vec<usize>>,
        col_left: &mut Vec<usize>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        let rows = alpha.len();
        let cols = col_left.len();
        if r == rows {
            if col_left.iter().all(|&x| x == 0) {
                out.push(m.clone());
            }
            return;
        }
        if c == cols - 1 {
            // last entry of the row is forced
            if row_left <= col_left[c] {
                m[r][c] = row_left;
                col_left[c] -= row_left;
                let next = alpha.get(r + 1).copied().unwrap_or(0);
                fill(r + 1, 0, next, alpha, m, col_left, out);
                col_left[c] += row_left;
                m[r][c] = 0;
            }
            return;
        }
        // the rest of the row must fit into the remaining columns
        let room_after: usize = col_left[c + 1..].iter().sum();
        let lo = row_left.saturating_sub(room_after);
        let hi = row_left.min(col_left[c]);
        for v in lo..=hi {
            m[r][c] = v;
            col_left[c] -= v;
            fill(r, c + 1, row_left - v, alpha, m, col_left, out);
            col_left[c] += v;
        }
        m[r][c] = 0;
    }

    if rows == 0 {
        return Ok(vec![Vec::new()]);
    }
    fill(0, 0, alpha.parts()[0], alpha.parts(), &mut m, &mut col_left, &mut out);
    Ok(out)
}

/// Sorted nonzero entries of a matrix, as a partition.
pub fn theta_type(m: &[Vec<usize>]) -> Partition {
    Partition::from_unsorted(m.iter().flatten().copied().collect())
}

/// `|NM^μ_{α,β}|`.
pub fn nm_count(alpha: &Partition, beta: &Partition, mu: &Partition) -> Result<usize> {
    check_weights(alpha, beta)?;
    check_weights(alpha, mu)?;
    Ok(nm_matrices(alpha, beta)?.iter().filter(|m| theta_type(m) == *mu).count())
}

/// Consecutive blocks `{1..α_1}, {α_1+1..α_1+α_2}, …` as 0-based ranges.
fn blocks(alpha: &Partition) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    alpha
        .parts()
        .iter()
        .map(|&l| {
            let r = start..start + l;
            start += l;
            r
        })
        .collect()
}

/// `z_ij = |block_i(α) ∩ τ(block_j(β))|`.
pub fn theta_matrix(tau: &Permutation, alpha: &Partition, beta: &Partition) -> Vec<Vec<usize>> {
    let n = tau.degree();
    let mut owner = vec![0usize; n];
    for (i, b) in blocks(alpha).into_iter().enumerate() {
        for x in b {
            owner[x] = i;
        }
    }
    let mut m = vec![vec![0usize; beta.len()]; alpha.len()];
    for (j, b) in blocks(beta).into_iter().enumerate() {
        for x in b {
            m[owner[tau.image(x)]][j] += 1;
        }
    }
    m
}

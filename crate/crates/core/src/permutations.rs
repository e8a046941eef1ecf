//! Explicit permutation groups: standard permutations, Young, cyclic and
//! product-cyclic subgroups of `S_n`, double cosets and intersections.
//!
//! Permutations are stored 0-based internally; every textual form (one-line
//! and cycle notation) is 1-based.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::One;

use crate::cycleindex;
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, Partition};
use crate::symfunc::{Basis, SymFunc};

/// Largest degree for which `S_n` is enumerated element by element.
pub const DEFAULT_LIMIT: usize = 9;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    /// From 1-based one-line notation.
    pub fn from_one_line(one_line: &[usize]) -> Result<Self> {
        let n = one_line.len();
        if n > u8::MAX as usize {
            return Err(Error::InvalidPermutation(format!("degree {n} too large")));
        }
        let mut seen = vec![false; n];
        let mut images = Vec::with_capacity(n);
        for &v in one_line {
            if v == 0 || v > n || seen[v - 1] {
                return Err(Error::InvalidPermutation(format!("{one_line:?} is not a bijection of 1..{n}")));
            }
            seen[v - 1] = true;
            images.push((v - 1) as u8);
        }
        Ok(Permutation { images })
    }

    /// From 1-based cycles on `n` points; omitted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<u8> = (0..n as u8).collect();
        let mut seen = vec![false; n];
        for cyc in cycles {
            for (i, &a) in cyc.iter().enumerate() {
                if a == 0 || a > n || seen[a - 1] {
                    return Err(Error::InvalidPermutation(format!("bad cycle {cyc:?} on {n} points")));
                }
                seen[a - 1] = true;
                let b = cyc[(i + 1) % cyc.len()];
                images[a - 1] = (b - 1) as u8;
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n as u8).collect() }
    }

    /// `σ_α`: cycles of lengths `α_1, α_2, …` filled with `1..n` in order.
    pub fn standard(alpha: &Partition) -> Self {
        let mut images = Vec::with_capacity(alpha.weight());
        let mut start = 0u8;
        for &l in alpha.parts() {
            let l = l as u8;
            for j in 0..l {
                images.push(start + (j + 1) % l);
            }
            start += l;
        }
        Permutation { images }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 0-based point `i`.
    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|&v| v as usize + 1).collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation { images: other.images.iter().map(|&i| self.images[i as usize]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0u8; self.degree()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v as usize] = i as u8;
        }
        Permutation { images }
    }

    pub fn pow(&self, k: u64) -> Permutation {
        let mut out = Permutation::identity(self.degree());
        for _ in 0..k {
            out = out.compose(self);
        }
        out
    }

    /// `π σ π⁻¹`.
    pub fn conjugate_by(&self, pi: &Permutation) -> Permutation {
        pi.compose(self).compose(&pi.inverse())
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    /// Cycles in 1-based labels, each starting at its least point, fixed points included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                cyc.push(x + 1);
                x = self.image(x);
            }
            out.push(cyc);
        }
        out
    }

    pub fn cycle_type(&self) -> Partition {
        Partition::from_unsorted(self.cycles().iter().map(Vec::len).collect())
    }

    pub fn order(&self) -> u64 {
        crate::partitions::order_of(&self.cycle_type())
    }

    /// Cycle notation without fixed points, `()` for the identity.
    pub fn cycle_notation(&self) -> String {
        let s: String = self
            .cycles()
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("({})", inner.join(" "))
            })
            .collect();
        if s.is_empty() {
            "()".to_string()
        } else {
            s
        }
    }

    /// Parses `"3 1 2"`.
    pub fn parse_one_line(s: &str) -> Result<Self> {
        let v = s
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad image {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_one_line(&v)
    }

    /// Parses `"(1 3 2)(4 5)"` on `n` points.
    pub fn parse_cycles(s: &str, n: usize) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in {s:?}")))?;
            let end = body.find(')').ok_or_else(|| Error::Parse(format!("unclosed cycle in {s:?}")))?;
            let cyc = body[..end]
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad point {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if !cyc.is_empty() {
                cycles.push(cyc);
            }
            rest = body[end + 1..].trim_start();
        }
        Permutation::from_cycles(n, &cycles)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.one_line().iter().map(|v| v.to_string()).collect();
        f.write_str(&s.join(" "))
    }
}

/// Lexicographic rank of a permutation among all permutations of its degree.
pub fn rank(p: &Permutation) -> usize {
    let n = p.degree();
    let mut r = 0usize;
    let mut used = 0u32;
    for i in 0..n {
        let v = p.images[i] as u32;
        let smaller_unused = (v - (used & ((1u32 << v) - 1)).count_ones()) as usize;
        r = r * (n - i) + smaller_unused;
        used |= 1 << v;
    }
    r
}

pub fn unrank(n: usize, mut r: usize) -> Permutation {
    let mut digits = vec![0usize; n];
    for i in (0..n).rev() {
        let base = n - i;
        digits[i] = r % base;
        r /= base;
    }
    let mut avail: Vec<u8> = (0..n as u8).collect();
    let images = digits.into_iter().map(|d| avail.remove(d)).collect();
    Permutation { images }
}

pub fn factorial_usize(n: usize) -> usize {
    (1..=n).product()
}

/// All of `S_n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    (0..factorial_usize(n)).map(|r| unrank(n, r)).collect()
}

fn check_limit(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::Capacity { n, limit })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupTag {
    Young(Partition),
    Cyclic(Partition),
    ProductCyclic(Partition),
    Raw,
}

/// A subgroup of `S_n` held as its sorted element list, with a generating set.
#[derive(Clone, Debug)]
pub struct ElementGroup {
    n: usize,
    elements: Vec<Permutation>,
    generators: Vec<Permutation>,
    tag: GroupTag,
}

impl PartialEq for ElementGroup {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.elements == other.elements
    }
}

impl Eq for ElementGroup {}

impl ElementGroup {
    fn from_generators(n: usize, generators: Vec<Permutation>, tag: GroupTag) -> Self {
        let elements = closure(n, &generators);
        ElementGroup { n, elements, generators, tag }
    }

    /// Wraps an element set that is known to be a subgroup.
    pub fn from_elements(n: usize, mut elements: Vec<Permutation>, tag: GroupTag) -> Self {
        elements.sort();
        elements.dedup();
        let generators = extract_generators(n, &elements);
        ElementGroup { n, elements, generators, tag }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn tag(&self) -> &GroupTag {
        &self.tag
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.elements.binary_search(p).is_ok()
    }

    /// `π H π⁻¹`.
    pub fn conjugate_by(&self, pi: &Permutation) -> ElementGroup {
        ElementGroup::from_elements(
            self.n,
            self.elements.iter().map(|h| h.conjugate_by(pi)).collect(),
            GroupTag::Raw,
        )
    }

    /// Identity present and closed under composition and inverses.
    pub fn is_closed(&self) -> bool {
        self.contains(&Permutation::identity(self.n))
            && self.elements.iter().all(|a| self.contains(&a.inverse()))
            && self
                .elements
                .iter()
                .all(|a| self.elements.iter().all(|b| self.contains(&a.compose(b))))
    }
}

fn closure(n: usize, generators: &[Permutation]) -> Vec<Permutation> {
    let id = Permutation::identity(n);
    let mut seen: HashSet<Permutation> = HashSet::from([id.clone()]);
    let mut stack = vec![id];
    while let Some(x) = stack.pop() {
        for g in generators {
            let y = g.compose(&x);
            if seen.insert(y.clone()) {
                stack.push(y);
            }
        }
    }
    let mut v: Vec<Permutation> = seen.into_iter().collect();
    v.sort();
    v
}

/// Greedy generating set: keep each element not yet in the span of the previous ones.
fn extract_generators(n: usize, elements: &[Permutation]) -> Vec<Permutation> {
    let mut gens: Vec<Permutation> = Vec::new();
    let mut span: BTreeSet<Permutation> = BTreeSet::from([Permutation::identity(n)]);
    for e in elements {
        if span.len() == elements.len() {
            break;
        }
        if !span.contains(e) {
            gens.push(e.clone());
            span = closure(n, &gens).into_iter().collect();
        }
    }
    gens
}

/// `⟨σ⟩ = {σ, σ², …, σ^o = id}`.
pub fn cyclic_group(sigma: &Permutation) -> ElementGroup {
    let n = sigma.degree();
    let generators = if sigma.is_identity() { vec![] } else { vec![sigma.clone()] };
    ElementGroup::from_generators(n, generators, GroupTag::Cyclic(sigma.cycle_type()))
}

/// `S_α`: permutations preserving the consecutive blocks of sizes `α_1, α_2, …`.
pub fn young_subgroup(alpha: &Partition, limit: usize) -> Result<ElementGroup> {
    let n = alpha.weight();
    check_limit(n, limit)?;
    let mut generators = Vec::new();
    let mut start = 0;
    for &l in alpha.parts() {
        for i in start..start + l - 1 {
            let mut one_line: Vec<usize> = (1..=n).collect();
            one_line.swap(i, i + 1);
            generators.push(Permutation::from_one_line(&one_line)?);
        }
        start += l;
    }
    Ok(ElementGroup::from_generators(n, generators, GroupTag::Young(alpha.clone())))
}

/// `G_α`: one cyclic factor per distinct part value `i`, generated by the
/// product of all standard `i`-cycles of `σ_α`.
pub fn product_cyclic_group(alpha: &Partition) -> ElementGroup {
    let n = alpha.weight();
    let sigma = Permutation::standard(alpha);
    let mut generators = Vec::new();
    let mut start = 0usize;
    for (part, mult) in alpha.multiplicities() {
        let span = part * mult;
        if part > 1 {
            let mut images: Vec<u8> = (0..n as u8).collect();
            for (i, img) in images.iter_mut().enumerate().skip(start).take(span) {
                *img = sigma.images[i];
            }
            generators.push(Permutation { images });
        }
        start += span;
    }
    ElementGroup::from_generators(n, generators, GroupTag::ProductCyclic(alpha.clone()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCoset {
    /// Lexicographically least element of the coset.
    pub representative: Permutation,
    pub size: usize,
}

/// `H \ S_n / K`, one lexicographically minimal representative per double
/// coset, listed in increasing order of representatives.
pub fn double_cosets(h: &ElementGroup, k: &ElementGroup, limit: usize) -> Result<Vec<DoubleCoset>> {
    if h.n != k.n {
        return Err(Error::WeightMismatch(h.n, k.n));
    }
    let n = h.n;
    check_limit(n, limit)?;
    let total = factorial_usize(n);
    let mut visited = vec![false; total];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for r in 0..total {
        if visited[r] {
            continue;
        }
        let seed = unrank(n, r);
        visited[r] = true;
        stack.push(seed.clone());
        let mut size = 0;
        while let Some(x) = stack.pop() {
            size += 1;
            let left = h.generators.iter().map(|g| g.compose(&x));
            let right = k.generators.iter().map(|g| x.compose(g));
            for y in left.chain(right) {
                let ry = rank(&y);
                if !visited[ry] {
                    visited[ry] = true;
                    stack.push(y);
                }
            }
        }
        out.push(DoubleCoset { representative: seed, size });
    }
    Ok(out)
}

/// `H ∩ π K π⁻¹ = {h ∈ H : π⁻¹ h π ∈ K}`.
pub fn intersect_conjugate(h: &ElementGroup, pi: &Permutation, k: &ElementGroup) -> Result<ElementGroup> {
    if h.n != k.n || pi.degree() != h.n {
        return Err(Error::WeightMismatch(h.n, k.n));
    }
    let pi_inv = pi.inverse();
    let elements = h
        .elements
        .iter()
        .filter(|x| k.contains(&pi_inv.compose(x).compose(pi)))
        .cloned()
        .collect();
    Ok(ElementGroup::from_elements(h.n, elements, GroupTag::Raw))
}

/// Cycle type of a generator of a cyclic group.
pub fn classify_cyclic(c: &ElementGroup) -> Result<Partition> {
    let order = c.order() as u64;
    c.elements
        .iter()
        .find(|g| g.order() == order)
        .map(Permutation::cycle_type)
        .ok_or_else(|| Error::Classification(format!("group of order {order} is not cyclic")))
}

/// The unique `μ` whose `K_μ` has the same cycle index as `H`.
pub fn classify_product_cyclic(h: &ElementGroup) -> Result<Partition> {
    let z = group_cycle_index(h);
    let matches: Vec<Partition> = enumerate_partitions(h.n)
        .into_iter()
        .filter(|mu| cycleindex::k_to_p(mu) == z)
        .collect();
    match matches.as_slice() {
        [mu] => Ok(mu.clone()),
        [] => Err(Error::Classification(format!(
            "cycle index {} matches no K_μ",
            z.to_text()
        ))),
        _ => Err(Error::Classification(format!("cycle index {} matches several K_μ", z.to_text()))),
    }
}

/// `Z = (1/|H|) Σ_{σ ∈ H} p_{λ(σ)}`.
pub fn group_cycle_index(h: &ElementGroup) -> SymFunc {
    let w = BigRational::one() / BigRational::from_integer(h.order().into());
    let mut z = SymFunc::zero(Basis::P, h.n);
    for g in &h.elements {
        z.add_term(g.cycle_type(), w.clone()).expect("cycle type has weight n");
    }
    z
}

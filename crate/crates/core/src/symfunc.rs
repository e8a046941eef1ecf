//! Degree-`n` symmetric functions over exact rationals in the bases
//! `p, h, m, s, C, K`, with cached transition matrices between them.
//!
//! Every transition is routed through the power-sum basis. The to-`p` rows
//! of `h`, `C` and `K` come from their cycle-index expansions, `s` from
//! Murnaghan–Nakayama characters, and `m` by inverting the `p → m` matrix
//! obtained from direct monomial coefficient extraction.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{Read as _, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cycleindex;
use crate::error::{Error, Result};
use crate::partitions::{
    enumerate_partitions, euler_phi, order_of, power_cycle_type, z_of, Partition,
};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_from_uint(x: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(x.clone()))
}

/// `"num/den"`, or just `"num"` for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    P,
    H,
    M,
    S,
    C,
    K,
}

impl Basis {
    pub const ALL: [Basis; 6] = [Basis::P, Basis::H, Basis::M, Basis::S, Basis::C, Basis::K];

    fn code(self) -> u8 {
        match self {
            Basis::P => 0,
            Basis::H => 1,
            Basis::M => 2,
            Basis::S => 3,
            Basis::C => 4,
            Basis::K => 5,
        }
    }

    /// Lower-case symbol used for basis elements in text output.
    pub fn symbol(self) -> &'static str {
        match self {
            Basis::P => "p",
            Basis::H => "h",
            Basis::M => "m",
            Basis::S => "s",
            Basis::C => "C",
            Basis::K => "K",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Basis::P => "P",
            Basis::H => "H",
            Basis::M => "M",
            Basis::S => "S",
            Basis::C => "C",
            Basis::K => "K",
        };
        f.write_str(s)
    }
}

impl FromStr for Basis {
    type Err = Error;

    /// Accepts either case; `E` is an alias of `H` (`E_α` has cycle index `h_α`).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P" => Ok(Basis::P),
            "H" | "E" => Ok(Basis::H),
            "M" => Ok(Basis::M),
            "S" => Ok(Basis::S),
            "C" => Ok(Basis::C),
            "K" => Ok(Basis::K),
            _ => Err(Error::Parse(format!("unknown basis {s:?}"))),
        }
    }
}

/// A homogeneous symmetric function of degree `n` written in one basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymFunc {
    basis: Basis,
    degree: usize,
    coeffs: BTreeMap<Partition, Rational>,
}

impl SymFunc {
    pub fn zero(basis: Basis, degree: usize) -> Self {
        SymFunc { basis, degree, coeffs: BTreeMap::new() }
    }

    /// The basis element indexed by `lambda`.
    pub fn unit(basis: Basis, lambda: &Partition) -> Self {
        let mut f = SymFunc::zero(basis, lambda.weight());
        f.coeffs.insert(lambda.clone(), Rational::one());
        f
    }

    pub fn from_terms<I>(basis: Basis, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Partition, Rational)>,
    {
        let mut f = SymFunc::zero(basis, degree);
        for (lambda, c) in terms {
            f.add_term(lambda, c)?;
        }
        Ok(f)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, lambda: &Partition) -> Rational {
        self.coeffs.get(lambda).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero terms in canonical (reverse-lex) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Partition, &Rational)> {
        self.coeffs.iter().rev()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, lambda: Partition, c: Rational) -> Result<()> {
        if lambda.weight() != self.degree {
            return Err(Error::WeightMismatch(lambda.weight(), self.degree));
        }
        if c.is_zero() {
            return Ok(());
        }
        let entry = self.coeffs.entry(lambda).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.retain(|_, v| !v.is_zero());
        }
        Ok(())
    }

    pub fn add(&self, other: &SymFunc) -> Result<SymFunc> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (lambda, c) in &other.coeffs {
            out.add_term(lambda.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> SymFunc {
        if c.is_zero() {
            return SymFunc::zero(self.basis, self.degree);
        }
        SymFunc {
            basis: self.basis,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    fn check_compatible(&self, other: &SymFunc) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch(self.basis, other.basis));
        }
        if self.degree != other.degree {
            return Err(Error::WeightMismatch(self.degree, other.degree));
        }
        Ok(())
    }

    /// Dense coefficient row in the canonical index order of degree `n`.
    fn to_row(&self, index: &[Partition]) -> Vec<Rational> {
        index.iter().map(|l| self.coeff(l)).collect()
    }

    fn from_row(basis: Basis, degree: usize, index: &[Partition], row: Vec<Rational>) -> SymFunc {
        SymFunc {
            basis,
            degree,
            coeffs: index
                .iter()
                .cloned()
                .zip(row)
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms()
            .map(|(l, c)| {
                json!({
                    "partition": l.parts(),
                    "num": json_int(c.numer()),
                    "den": json_int(c.denom()),
                })
            })
            .collect();
        json!({ "basis": self.basis.to_string(), "n": self.degree, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<SymFunc> {
        let bad = |what: &str| Error::Parse(format!("symfunc json: {what}"));
        let basis: Basis = v["basis"].as_str().ok_or_else(|| bad("basis"))?.parse()?;
        let n = v["n"].as_u64().ok_or_else(|| bad("n"))? as usize;
        let mut f = SymFunc::zero(basis, n);
        for t in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
            let parts = t["partition"]
                .as_array()
                .ok_or_else(|| bad("partition"))?
                .iter()
                .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| bad("part")))
                .collect::<Result<Vec<_>>>()?;
            let num = parse_json_int(&t["num"]).ok_or_else(|| bad("num"))?;
            let den = parse_json_int(&t["den"]).ok_or_else(|| bad("den"))?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            f.add_term(Partition::new(parts)?, Rational::new(num, den))?;
        }
        Ok(f)
    }

    /// `1/4 p[1,1,1,1,1,1,1,1] + 1/2 p[4,2,2]`-style rendering.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let sym = self.basis.symbol();
        self.terms()
            .map(|(l, c)| format!("{} {}[{}]", format_rational(c), sym, l))
            .collect::<Vec<_>>()
            .join(" + ")
            .replace("+ -", "- ")
    }
}

const MAX_SAFE_JSON_INT: i64 = (1i64 << 53) - 1;

/// JSON number when it fits in 53 bits, decimal string otherwise.
pub fn json_int(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) if v.abs() <= MAX_SAFE_JSON_INT => json!(v),
        _ => Value::String(x.to_string()),
    }
}

fn parse_json_int(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Characters and p → m

type CharKey = (Vec<usize>, Vec<usize>);

thread_local! {
    static CHAR_MEMO: RefCell<HashMap<CharKey, i64>> = RefCell::new(HashMap::new());
}

/// `χ^λ(μ)` by the Murnaghan–Nakayama rule on beta-sets.
pub fn mn_character(lambda: &Partition, mu: &Partition) -> Result<i64> {
    if lambda.weight() != mu.weight() {
        return Err(Error::WeightMismatch(lambda.weight(), mu.weight()));
    }
    Ok(mn_rec(lambda.parts(), mu.parts()))
}

fn mn_rec(lambda: &[usize], mu: &[usize]) -> i64 {
    if mu.is_empty() {
        return if lambda.is_empty() { 1 } else { 0 };
    }
    if let Some(v) = CHAR_MEMO.with(|m| m.borrow().get(&(lambda.to_vec(), mu.to_vec())).copied()) {
        return v;
    }
    let r = mu[0];
    let l = lambda.len();
    let beta: Vec<usize> = lambda.iter().enumerate().map(|(i, &p)| p + (l - 1 - i)).collect();
    let mut total = 0i64;
    for (i, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let target = b - r;
        let crossed = beta.iter().filter(|&&x| x > target && x < b).count();
        let mut nb = beta.clone();
        nb[i] = target;
        nb.sort_unstable_by(|a, b| b.cmp(a));
        let shape: Vec<usize> = nb
            .iter()
            .enumerate()
            .map(|(j, &x)| x - (l - 1 - j))
            .filter(|&p| p > 0)
            .collect();
        let sign = if crossed % 2 == 0 { 1 } else { -1 };
        total += sign * mn_rec(&shape, &mu[1..]);
    }
    CHAR_MEMO.with(|m| m.borrow_mut().insert((lambda.to_vec(), mu.to_vec()), total));
    total
}

/// Monomial expansion of `p_λ`: the coefficient of `m_μ` is the coefficient
/// of `x_1^{μ_1} x_2^{μ_2} ⋯` in `Π_i (x_1^{λ_i} + … + x_n^{λ_i})`, counted
/// as the number of ways to send each part of `λ` to a variable so that the
/// exponents come out to `μ`.
pub fn p_to_m_row(lambda: &Partition) -> BTreeMap<Partition, BigUint> {
    let mut out = BTreeMap::new();
    for mu in enumerate_partitions(lambda.weight()) {
        let c = monomial_coefficient(lambda.parts(), mu.parts());
        if !c.is_zero() {
            out.insert(mu, c);
        }
    }
    out
}

fn monomial_coefficient(lambda: &[usize], mu: &[usize]) -> BigUint {
    fn rec(
        parts: &[usize],
        remaining: &mut Vec<usize>,
        memo: &mut HashMap<(usize, Vec<usize>), BigUint>,
    ) -> BigUint {
        if parts.is_empty() {
            return if remaining.iter().all(|&r| r == 0) { BigUint::one() } else { BigUint::zero() };
        }
        let key = (parts.len(), remaining.clone());
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let p = parts[0];
        let mut total = BigUint::zero();
        for slot in 0..remaining.len() {
            if remaining[slot] >= p {
                remaining[slot] -= p;
                total += rec(&parts[1..], remaining, memo);
                remaining[slot] += p;
            }
        }
        memo.insert(key, total.clone());
        total
    }
    let mut remaining = mu.to_vec();
    rec(lambda, &mut remaining, &mut HashMap::new())
}

// ---------------------------------------------------------------------------
// Transition matrices

/// Square change-of-basis matrix over the partitions of `n` in canonical
/// order. Row `i` holds the `to`-expansion of the `i`-th `from` basis element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub from: Basis,
    pub to: Basis,
    pub n: usize,
    index: Arc<Vec<Partition>>,
    entries: Vec<Vec<Rational>>,
}

impl TransitionMatrix {
    fn from_rows(from: Basis, to: Basis, n: usize, rows: Vec<SymFunc>) -> Self {
        let index = Arc::new(enumerate_partitions(n));
        let entries = rows.iter().map(|f| f.to_row(&index)).collect();
        TransitionMatrix { from, to, n, index, entries }
    }

    fn identity(basis: Basis, n: usize) -> Self {
        let index = Arc::new(enumerate_partitions(n));
        let d = index.len();
        let entries = (0..d)
            .map(|i| (0..d).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        TransitionMatrix { from: basis, to: basis, n, index, entries }
    }

    pub fn index(&self) -> &[Partition] {
        &self.index
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn position(&self, lambda: &Partition) -> Option<usize> {
        self.index.binary_search_by(|p| lambda.cmp(p)).ok()
    }

    /// Coefficient of the `to`-element `col` in the `from`-element `row`.
    pub fn entry(&self, row: &Partition, col: &Partition) -> Rational {
        match (self.position(row), self.position(col)) {
            (Some(i), Some(j)) => self.entries[i][j].clone(),
            _ => Rational::zero(),
        }
    }

    pub fn compose(&self, next: &TransitionMatrix) -> Result<TransitionMatrix> {
        if self.to != next.from || self.n != next.n {
            return Err(Error::BasisMismatch(self.to, next.from));
        }
        let d = self.dim();
        let entries = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let mut acc = Rational::zero();
                        for k in 0..d {
                            if !self.entries[i][k].is_zero() && !next.entries[k][j].is_zero() {
                                acc += &self.entries[i][k] * &next.entries[k][j];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(TransitionMatrix {
            from: self.from,
            to: next.to,
            n: self.n,
            index: self.index.clone(),
            entries,
        })
    }

    /// Upper triangular with nonzero diagonal in the canonical order.
    pub fn is_upper_unitriangular_like(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| !self.entries[i][i].is_zero() && (0..i).all(|j| self.entries[i][j].is_zero()))
    }

    /// Exact inverse; back substitution when upper triangular, Gauss–Jordan otherwise.
    pub fn inverse(&self) -> Result<TransitionMatrix> {
        let d = self.dim();
        let entries = if self.is_upper_unitriangular_like() {
            invert_upper(&self.entries)
        } else {
            invert_gauss_jordan(&self.entries).ok_or_else(|| {
                Error::Consistency(format!("{}→{} matrix at n={} is singular", self.from, self.to, self.n))
            })?
        };
        debug_assert_eq!(entries.len(), d);
        Ok(TransitionMatrix {
            from: self.to,
            to: self.from,
            n: self.n,
            index: self.index.clone(),
            entries,
        })
    }

    pub fn apply(&self, f: &SymFunc) -> Result<SymFunc> {
        if f.basis != self.from {
            return Err(Error::BasisMismatch(f.basis, self.from));
        }
        if f.degree != self.n {
            return Err(Error::WeightMismatch(f.degree, self.n));
        }
        let d = self.dim();
        let mut out = vec![Rational::zero(); d];
        for (lambda, c) in &f.coeffs {
            let i = self.position(lambda).expect("weight checked");
            for (j, e) in self.entries[i].iter().enumerate() {
                if !e.is_zero() {
                    out[j] += c * e;
                }
            }
        }
        Ok(SymFunc::from_row(self.to, self.n, &self.index, out))
    }
}

fn invert_upper(a: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let d = a.len();
    let mut inv = vec![vec![Rational::zero(); d]; d];
    for j in 0..d {
        inv[j][j] = a[j][j].recip();
        for i in (0..j).rev() {
            let mut acc = Rational::zero();
            for k in i + 1..=j {
                if !a[i][k].is_zero() && !inv[k][j].is_zero() {
                    acc += &a[i][k] * &inv[k][j];
                }
            }
            inv[i][j] = -acc / &a[i][i];
        }
    }
    inv
}

fn invert_gauss_jordan(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let d = a.len();
    let mut m: Vec<Vec<Rational>> = a.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for col in 0..d {
        let pivot = (col..d).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].recip();
        for x in m[col].iter_mut() {
            *x *= &p;
        }
        for x in inv[col].iter_mut() {
            *x *= &p;
        }
        for r in 0..d {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in 0..d {
                if !m[col][c].is_zero() {
                    let t = &factor * &m[col][c];
                    m[r][c] -= t;
                }
                if !inv[col][c].is_zero() {
                    let t = &factor * &inv[col][c];
                    inv[r][c] -= t;
                }
            }
        }
    }
    Some(inv)
}

type CacheKey = (Basis, Basis, usize);
type CacheSlot = Arc<OnceLock<Arc<TransitionMatrix>>>;

fn cache() -> &'static Mutex<HashMap<CacheKey, CacheSlot>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, CacheSlot>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn persist_dir() -> &'static RwLock<Option<PathBuf>> {
    static DIR: OnceLock<RwLock<Option<PathBuf>>> = OnceLock::new();
    DIR.get_or_init(|| RwLock::new(None))
}

/// Directory where built matrices are persisted and reloaded from; `None` disables it.
pub fn set_persist_dir(dir: Option<PathBuf>) {
    *persist_dir().write().unwrap() = dir;
}

/// The cached `from → to` matrix at degree `n`, built at most once per process.
pub fn transition(from: Basis, to: Basis, n: usize) -> Arc<TransitionMatrix> {
    let slot = {
        let mut map = cache().lock().unwrap();
        map.entry((from, to, n)).or_default().clone()
    };
    slot.get_or_init(|| {
        let dir = persist_dir().read().unwrap().clone();
        if let Some(m) = dir.as_ref().and_then(|d| blob::load(d, from, to, n)) {
            return Arc::new(m);
        }
        let m = Arc::new(build_transition(from, to, n));
        if let Some(d) = dir {
            // Persistence is best effort; a failed write only costs a rebuild.
            let _ = blob::save(&d, &m);
        }
        m
    })
    .clone()
}

fn build_transition(from: Basis, to: Basis, n: usize) -> TransitionMatrix {
    use Basis::*;
    if from == to {
        return TransitionMatrix::identity(from, n);
    }
    let index = enumerate_partitions(n);
    match (from, to) {
        (C, P) => TransitionMatrix::from_rows(C, P, n, index.iter().map(cycleindex::c_to_p).collect()),
        (K, P) => TransitionMatrix::from_rows(K, P, n, index.iter().map(cycleindex::k_to_p).collect()),
        (H, P) => TransitionMatrix::from_rows(H, P, n, index.iter().map(cycleindex::h_to_p).collect()),
        (S, P) => {
            let rows = index
                .par_iter()
                .map(|lambda| {
                    index
                        .iter()
                        .map(|mu| {
                            let chi = mn_rec(lambda.parts(), mu.parts());
                            Rational::new(BigInt::from(chi), BigInt::from(z_of(mu)))
                        })
                        .collect()
                })
                .collect();
            TransitionMatrix { from: S, to: P, n, index: Arc::new(index), entries: rows }
        }
        (P, S) => {
            let rows = index
                .par_iter()
                .map(|mu| {
                    index
                        .iter()
                        .map(|lambda| Rational::from_integer(mn_rec(lambda.parts(), mu.parts()).into()))
                        .collect()
                })
                .collect();
            TransitionMatrix { from: P, to: S, n, index: Arc::new(index), entries: rows }
        }
        (P, M) => {
            let rows = index
                .par_iter()
                .map(|lambda| {
                    let row = p_to_m_row(lambda);
                    index
                        .iter()
                        .map(|mu| row.get(mu).map(rat_from_uint).unwrap_or_else(Rational::zero))
                        .collect()
                })
                .collect();
            TransitionMatrix { from: P, to: M, n, index: Arc::new(index), entries: rows }
        }
        (M, P) => transition(P, M, n).inverse().expect("p→m is triangular"),
        (P, H) | (P, C) | (P, K) => transition(to, P, n)
            .inverse()
            .expect("to-p matrices of h, C, K are triangular"),
        _ => transition(from, P, n)
            .compose(&transition(P, to, n))
            .expect("compatible by construction"),
    }
}

mod blob {
    //! Versioned on-disk format: magic, version, basis codes, `n`, dimension,
    //! then every entry row-major as length-prefixed decimal numerator and
    //! denominator.

    use super::*;

    const MAGIC: &[u8; 4] = b"SKTM";
    pub const VERSION: u32 = 1;

    pub fn path(dir: &std::path::Path, from: Basis, to: Basis, n: usize) -> PathBuf {
        dir.join(format!("{from}{to}-n{n}-v{VERSION}.bin"))
    }

    pub fn save(dir: &std::path::Path, m: &TransitionMatrix) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.push(m.from.code());
        buf.push(m.to.code());
        buf.extend_from_slice(&(m.n as u32).to_le_bytes());
        buf.extend_from_slice(&(m.dim() as u32).to_le_bytes());
        for row in &m.entries {
            for e in row {
                for s in [e.numer().to_string(), e.denom().to_string()] {
                    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
                    buf.extend_from_slice(s.as_bytes());
                }
            }
        }
        let tmp = path(dir, m.from, m.to, m.n).with_extension("tmp");
        fs::File::create(&tmp)?.write_all(&buf)?;
        fs::rename(tmp, path(dir, m.from, m.to, m.n))
    }

    pub fn load(dir: &std::path::Path, from: Basis, to: Basis, n: usize) -> Option<TransitionMatrix> {
        let mut buf = Vec::new();
        fs::File::open(path(dir, from, to, n)).ok()?.read_to_end(&mut buf).ok()?;
        let mut cur = Cursor { buf: &buf, pos: 0 };
        if cur.take(4)? != MAGIC || cur.u32()? != VERSION {
            return None;
        }
        if cur.take(1)?[0] != from.code() || cur.take(1)?[0] != to.code() || cur.u32()? as usize != n {
            return None;
        }
        let index = Arc::new(enumerate_partitions(n));
        let d = cur.u32()? as usize;
        if d != index.len() {
            return None;
        }
        let mut entries = Vec::with_capacity(d);
        for _ in 0..d {
            let mut row = Vec::with_capacity(d);
            for _ in 0..d {
                let num: BigInt = cur.string()?.parse().ok()?;
                let den: BigInt = cur.string()?.parse().ok()?;
                if den.is_zero() {
                    return None;
                }
                row.push(Rational::new(num, den));
            }
            entries.push(row);
        }
        (cur.pos == buf.len()).then_some(TransitionMatrix { from, to, n, index, entries })
    }

    struct Cursor<'a> {
        buf: &'a [u8],
        pos: usize,
    }

    impl<'a> Cursor<'a> {
        fn take(&mut self, k: usize) -> Option<&'a [u8]> {
            let s = self.buf.get(self.pos..self.pos + k)?;
            self.pos += k;
            Some(s)
        }
        fn u32(&mut self) -> Option<u32> {
            Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
        }
        fn string(&mut self) -> Option<&'a str> {
            let len = self.u32()? as usize;
            std::str::from_utf8(self.take(len)?).ok()
        }
    }
}

// ---------------------------------------------------------------------------
// Conversions

pub fn to_p(f: &SymFunc) -> SymFunc {
    if f.basis == Basis::P {
        return f.clone();
    }
    transition(f.basis, Basis::P, f.degree).apply(f).expect("basis and degree match")
}

pub fn from_p(f: &SymFunc, target: Basis) -> Result<SymFunc> {
    if f.basis != Basis::P {
        return Err(Error::BasisMismatch(f.basis, Basis::P));
    }
    if target == Basis::P {
        return Ok(f.clone());
    }
    transition(Basis::P, target, f.degree).apply(f)
}

pub fn convert(f: &SymFunc, target: Basis) -> SymFunc {
    if f.basis == target {
        return f.clone();
    }
    transition(f.basis, target, f.degree).apply(f).expect("basis and degree match")
}

/// Ordinary product, returned in the `p` basis.
pub fn multiply(f: &SymFunc, g: &SymFunc) -> SymFunc {
    let (fp, gp) = (to_p(f), to_p(g));
    let mut out = SymFunc::zero(Basis::P, f.degree + g.degree);
    for (a, x) in &fp.coeffs {
        for (b, y) in &gp.coeffs {
            out.add_term(a.union(b), x * y).expect("degrees add");
        }
    }
    out
}

/// `K_{λ,μ}`: multiplicity of `s_λ` in `h_μ`.
pub fn kostka(lambda: &Partition, mu: &Partition) -> Result<u64> {
    if lambda.weight() != mu.weight() {
        return Err(Error::WeightMismatch(lambda.weight(), mu.weight()));
    }
    let e = transition(Basis::H, Basis::S, mu.weight()).entry(mu, lambda);
    nonneg_integer(&e).ok_or_else(|| Error::Consistency(format!("Kostka number {e} is not a natural number")))
}

fn nonneg_integer(q: &Rational) -> Option<u64> {
    if q.is_integer() && !q.is_negative() {
        q.numer().to_u64()
    } else {
        None
    }
}

fn finish_schur(
    sums: BTreeMap<Partition, Rational>,
    label: &str,
) -> Result<BTreeMap<Partition, u64>> {
    let mut out = BTreeMap::new();
    for (lambda, v) in sums {
        let c = nonneg_integer(&v).ok_or_else(|| {
            Error::Consistency(format!("Schur coefficient of s[{lambda}] in {label} is {v}"))
        })?;
        if c != 0 {
            out.insert(lambda, c);
        }
    }
    Ok(out)
}

/// `d_{λ,μ} = (1/o) Σ_{k | o} φ(k) χ^λ(μ^{(o/k)})`, the multiplicity of `s_λ` in `C_μ`.
pub fn schur_coeffs_c(mu: &Partition) -> Result<BTreeMap<Partition, u64>> {
    let o = order_of(mu);
    let mut sums = BTreeMap::new();
    for lambda in enumerate_partitions(mu.weight()) {
        let mut acc = Rational::zero();
        for k in (1..=o).filter(|k| o.is_multiple_of(*k)) {
            let ty = power_cycle_type(mu, o / k);
            acc += rat(euler_phi(k) as i64 * mn_rec(lambda.parts(), ty.parts()), 1);
        }
        sums.insert(lambda, acc / rat(o as i64, 1));
    }
    finish_schur(sums, &format!("C[{mu}]"))
}

/// Multiplicity of `s_λ` in `K_μ`, summing characters over divisor tuples
/// `(k_1, …, k_m)`, `k_j | i_j`, one per distinct part `i_j` of `μ`.
pub fn schur_coeffs_k(mu: &Partition) -> Result<BTreeMap<Partition, u64>> {
    let mults = mu.multiplicities();
    // Each tuple contributes Π φ(k_j)/i_j on the cycle type V = ∪_j (i_j^{μ_j})^{(i_j/k_j)}.
    let mut weighted: Vec<(Partition, Rational)> = vec![(Partition::empty(), Rational::one())];
    for &(part, mult) in &mults {
        let block = Partition::from_multiplicities(&[(part, mult)]);
        let mut next = Vec::new();
        for (ty, w) in &weighted {
            for k in (1..=part as u64).filter(|k| (part as u64).is_multiple_of(*k)) {
                let piece = power_cycle_type(&block, part as u64 / k);
                next.push((ty.union(&piece), w * rat(euler_phi(k) as i64, part as i64)));
            }
        }
        weighted = next;
    }
    let mut sums = BTreeMap::new();
    for lambda in enumerate_partitions(mu.weight()) {
        let mut acc = Rational::zero();
        for (ty, w) in &weighted {
            acc += w * rat(mn_rec(lambda.parts(), ty.parts()), 1);
        }
        sums.insert(lambda, acc);
    }
    finish_schur(sums, &format!("K[{mu}]"))
}

/// `f^λ = χ^λ(1^n)`.
pub fn dimension(lambda: &Partition) -> i64 {
    mn_rec(lambda.parts(), Partition::ones(lambda.weight()).parts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutations::{all_permutations, Permutation};
    use proptest::prelude::*;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn terms(basis: Basis, n: usize, ts: &[(&[usize], i64, i64)]) -> SymFunc {
        SymFunc::from_terms(basis, n, ts.iter().map(|(l, a, b)| (p(l), rat(*a, *b)))).unwrap()
    }

    /// Character of `S^λ` at `μ` by brute force: the permutation character on
    /// row-tabloids of shape `ν` gives `h_ν`'s character, and the Kostka
    /// inverse (computed by counting SSYT) unravels it.
    fn brute_character(lambda: &Partition, mu: &Partition) -> i64 {
        let n = lambda.weight();
        let parts = enumerate_partitions(n);
        // Permutation character of M^ν at a fixed permutation of type μ:
        // number of tabloids of shape ν fixed by σ_μ.
        let sigma = Permutation::standard(mu);
        let perm_char = |nu: &Partition| -> i64 {
            // count ordered set partitions into blocks of sizes ν stabilized by σ
            let mut count = 0i64;
            let labels = all_permutations(n);
            // assign each point a row by choosing a word with content ν; enumerate words
            let mut seen = std::collections::HashSet::new();
            for w in labels {
                let mut row = vec![0usize; n];
                let mut pos = 0;
                for (r, &len) in nu.parts().iter().enumerate() {
                    for _ in 0..len {
                        row[w.image(pos)] = r;
                        pos += 1;
                    }
                }
                if seen.insert(row.clone()) && (0..n).all(|i| row[sigma.image(i)] == row[i]) {
                    count += 1;
                }
            }
            count
        };
        // SSYT count for Kostka numbers.
        fn ssyt(shape: &[usize], content: &[usize]) -> i64 {
            fn fill(
                grid: &mut Vec<Vec<usize>>,
                cells: &[(usize, usize)],
                idx: usize,
                content: &mut Vec<usize>,
            ) -> i64 {
                if idx == cells.len() {
                    return content.iter().all(|&c| c == 0) as i64;
                }
                let (r, c) = cells[idx];
                let mut total = 0;
                for v in 0..content.len() {
                    if content[v] == 0 {
                        continue;
                    }
                    if c > 0 && grid[r][c - 1] > v {
                        continue;
                    }
                    if r > 0 && grid[r - 1][c] >= v {
                        continue;
                    }
                    content[v] -= 1;
                    grid[r][c] = v;
                    total += fill(grid, cells, idx + 1, content);
                    content[v] += 1;
                }
                total
            }
            let cells: Vec<(usize, usize)> =
                shape.iter().enumerate().flat_map(|(r, &l)| (0..l).map(move |c| (r, c))).collect();
            let mut grid: Vec<Vec<usize>> = shape.iter().map(|&l| vec![0; l]).collect();
            fill(&mut grid, &cells, 0, &mut content.to_vec())
        }
        // perm_char(ν) = Σ_λ K_{λν} χ^λ; solve the unitriangular system.
        let d = parts.len();
        let kmat: Vec<Vec<i64>> =
            parts.iter().map(|nu| parts.iter().map(|l| ssyt(l.parts(), nu.parts())).collect()).collect();
        let rhs: Vec<i64> = parts.iter().map(perm_char).collect();
        // K_{λν} nonzero only for λ ⊵ ν, i.e. λ earlier in canonical order.
        let mut chi = vec![0i64; d];
        for i in 0..d {
            let mut acc = rhs[i];
            for j in 0..i {
                acc -= kmat[i][j] * chi[j];
            }
            chi[i] = acc / kmat[i][i];
        }
        chi[parts.iter().position(|l| l == lambda).unwrap()]
    }

    #[test]
    fn characters_match_brute_force() {
        for n in 1..=5 {
            for lambda in enumerate_partitions(n) {
                for mu in enumerate_partitions(n) {
                    assert_eq!(
                        mn_character(&lambda, &mu).unwrap(),
                        brute_character(&lambda, &mu),
                        "χ^{lambda}({mu})"
                    );
                }
            }
        }
    }

    #[test]
    fn character_examples() {
        for mu in enumerate_partitions(6) {
            assert_eq!(mn_character(&p(&[6]), &mu).unwrap(), 1);
        }
        assert_eq!(mn_character(&p(&[2, 2, 1]), &Partition::ones(5)).unwrap(), 5);
        assert_eq!(mn_character(&p(&[3, 1]), &p(&[2, 2])).unwrap(), -1);
        // sign character
        assert_eq!(mn_character(&Partition::ones(4), &p(&[2, 1, 1])).unwrap(), -1);
        assert!(mn_character(&p(&[3]), &p(&[2])).is_err());
    }

    #[test]
    fn p_to_m_examples() {
        let row = p_to_m_row(&Partition::ones(4));
        assert_eq!(row[&Partition::ones(4)], BigUint::from(24u32));
        let row = p_to_m_row(&p(&[2]));
        assert_eq!(row.len(), 1);
        assert_eq!(row[&p(&[2])], BigUint::one());
        let row = p_to_m_row(&p(&[2, 1]));
        assert_eq!(row[&p(&[3])], BigUint::one());
        assert_eq!(row[&p(&[2, 1])], BigUint::one());
        assert_eq!(row.len(), 2);
    }

    /// Expand p_λ as an explicit polynomial in n variables and read off the
    /// coefficient of each sorted exponent vector.
    #[test]
    fn p_to_m_matches_polynomial_expansion() {
        for n in 1..=5 {
            for lambda in enumerate_partitions(n) {
                let mut poly: HashMap<Vec<usize>, u64> = HashMap::new();
                poly.insert(vec![0; n], 1);
                for &part in lambda.parts() {
                    let mut next = HashMap::new();
                    for (mono, c) in &poly {
                        for v in 0..n {
                            let mut m = mono.clone();
                            m[v] += part;
                            *next.entry(m).or_insert(0) += c;
                        }
                    }
                    poly = next;
                }
                let row = p_to_m_row(&lambda);
                for mu in enumerate_partitions(n) {
                    let mut key = mu.parts().to_vec();
                    key.resize(n, 0);
                    let expect = poly.get(&key).copied().unwrap_or(0);
                    let got = row.get(&mu).cloned().unwrap_or_default();
                    assert_eq!(got, BigUint::from(expect), "p[{lambda}] at m[{mu}]");
                }
            }
        }
    }

    #[test]
    fn schur_to_p() {
        let s21 = to_p(&SymFunc::unit(Basis::S, &p(&[2, 1])));
        assert_eq!(s21, terms(Basis::P, 3, &[(&[1, 1, 1], 1, 3), (&[3], -1, 3)]));
    }

    #[test]
    fn degree_one_h() {
        let f = from_p(&SymFunc::unit(Basis::P, &p(&[1])), Basis::H).unwrap();
        assert_eq!(f, SymFunc::unit(Basis::H, &p(&[1])));
        let f = from_p(&SymFunc::unit(Basis::P, &p(&[1, 1])), Basis::H).unwrap();
        assert_eq!(f, terms(Basis::H, 2, &[(&[1, 1], 1, 1)]));
        let f = from_p(&SymFunc::unit(Basis::P, &p(&[2])), Basis::H).unwrap();
        assert_eq!(f, terms(Basis::H, 2, &[(&[2], 2, 1), (&[1, 1], -1, 1)]));
    }

    #[test]
    fn kostka_examples() {
        assert_eq!(kostka(&p(&[2, 1]), &p(&[1, 1, 1])).unwrap(), 2);
        for n in 1..=6 {
            for mu in enumerate_partitions(n) {
                assert_eq!(kostka(&mu, &mu).unwrap(), 1);
                assert_eq!(kostka(&p(&[n]), &mu).unwrap(), 1);
            }
        }
    }

    #[test]
    fn multiply_examples() {
        let p2 = SymFunc::unit(Basis::P, &p(&[2]));
        assert_eq!(multiply(&p2, &p2), SymFunc::unit(Basis::P, &p(&[2, 2])));
        let h3h2 = multiply(&SymFunc::unit(Basis::H, &p(&[3])), &SymFunc::unit(Basis::H, &p(&[2])));
        assert_eq!(h3h2, cycleindex::h_to_p(&p(&[3, 2])));
        let c2 = cycleindex::c_to_p(&p(&[2]));
        assert_eq!(multiply(&c2, &c2), cycleindex::h_to_p(&p(&[2, 2])));
        let c2c1 = multiply(&c2, &cycleindex::c_to_p(&p(&[1])));
        assert_eq!(c2c1, cycleindex::k_to_p(&p(&[2, 1])));
    }

    #[test]
    fn monomial_examples_from_c42_and_k42() {
        let c = from_p(&cycleindex::c_to_p(&p(&[4, 2])), Basis::M).unwrap();
        let expect_c: &[(&[usize], i64, i64)] = &[
            (&[1, 1, 1, 1, 1, 1], 180, 1),
            (&[2, 1, 1, 1, 1], 90, 1),
            (&[2, 2, 1, 1], 46, 1),
            (&[2, 2, 2], 24, 1),
            (&[3, 1, 1, 1], 30, 1),
            (&[3, 2, 1], 16, 1),
            (&[3, 3], 6, 1),
            (&[4, 1, 1], 8, 1),
            (&[4, 2], 5, 1),
            (&[5, 1], 2, 1),
            (&[6], 1, 1),
        ];
        assert_eq!(c, terms(Basis::M, 6, expect_c));
        let k = from_p(&cycleindex::k_to_p(&p(&[4, 2])), Basis::M).unwrap();
        let expect_k: &[(&[usize], i64, i64)] = &[
            (&[1, 1, 1, 1, 1, 1], 90, 1),
            (&[2, 1, 1, 1, 1], 48, 1),
            (&[2, 2, 1, 1], 26, 1),
            (&[2, 2, 2], 15, 1),
            (&[3, 1, 1, 1], 18, 1),
            (&[3, 2, 1], 10, 1),
            (&[3, 3], 4, 1),
            (&[4, 1, 1], 6, 1),
            (&[4, 2], 4, 1),
            (&[5, 1], 2, 1),
            (&[6], 1, 1),
        ];
        assert_eq!(k, terms(Basis::M, 6, expect_k));
    }

    fn schur(entries: &[(&[usize], u64)]) -> BTreeMap<Partition, u64> {
        entries.iter().map(|(l, c)| (p(l), *c)).collect()
    }

    #[test]
    fn schur_examples() {
        assert_eq!(
            schur_coeffs_c(&Partition::ones(5)).unwrap(),
            schur(&[
                (&[5], 1),
                (&[4, 1], 4),
                (&[3, 2], 5),
                (&[3, 1, 1], 6),
                (&[2, 2, 1], 5),
                (&[2, 1, 1, 1], 4),
                (&[1, 1, 1, 1, 1], 1)
            ])
        );
        assert_eq!(
            schur_coeffs_c(&p(&[4, 1])).unwrap(),
            schur(&[(&[5], 1), (&[4, 1], 1), (&[3, 2], 1), (&[3, 1, 1], 1), (&[2, 2, 1], 2), (&[2, 1, 1, 1], 1)])
        );
        assert_eq!(
            schur_coeffs_k(&p(&[4, 2, 1])).unwrap(),
            schur(&[
                (&[7], 1),
                (&[5, 2], 3),
                (&[6, 1], 2),
                (&[4, 3], 2),
                (&[5, 1, 1], 2),
                (&[4, 2, 1], 5),
                (&[3, 3, 1], 2),
                (&[3, 2, 2], 3),
                (&[3, 2, 1, 1], 4),
                (&[2, 2, 2, 1], 2),
                (&[4, 1, 1, 1], 2),
                (&[3, 1, 1, 1, 1], 1),
                (&[2, 2, 1, 1, 1], 1)
            ])
        );
        assert_eq!(schur_coeffs_k(&p(&[3, 3])).unwrap(), schur_coeffs_c(&p(&[3, 3])).unwrap());
        // K_{1^n} = h_1^n: multiplicities are the dimensions
        for lambda in enumerate_partitions(6) {
            assert_eq!(
                schur_coeffs_k(&Partition::ones(6)).unwrap()[&lambda] as i64,
                dimension(&lambda)
            );
        }
    }

    #[test]
    fn schur_character_sum_for_single_cycle() {
        // (1/n) Σ_{d | n} φ(d) χ^λ(type of a d-power generator) computed over the group elements
        let n = 6;
        let sigma = Permutation::standard(&p(&[n]));
        let mut g = Permutation::identity(n);
        let mut sums: BTreeMap<Partition, i64> = BTreeMap::new();
        for _ in 0..n {
            g = g.compose(&sigma);
            for lambda in enumerate_partitions(n) {
                *sums.entry(lambda.clone()).or_default() += mn_character(&lambda, &g.cycle_type()).unwrap();
            }
        }
        let got = schur_coeffs_c(&p(&[n])).unwrap();
        for (lambda, s) in sums {
            assert_eq!(s % n as i64, 0);
            assert_eq!(got.get(&lambda).copied().unwrap_or(0) as i64, s / n as i64);
        }
    }

    #[test]
    fn schur_routes_agree_with_matrices() {
        for n in 1..=7 {
            for mu in enumerate_partitions(n) {
                let via_c = from_p(&cycleindex::c_to_p(&mu), Basis::S).unwrap();
                let direct: BTreeMap<_, _> = schur_coeffs_c(&mu)
                    .unwrap()
                    .into_iter()
                    .map(|(l, c)| (l, rat(c as i64, 1)))
                    .collect();
                assert_eq!(via_c.coeffs, direct);
                let via_k = from_p(&cycleindex::k_to_p(&mu), Basis::S).unwrap();
                let direct: BTreeMap<_, _> = schur_coeffs_k(&mu)
                    .unwrap()
                    .into_iter()
                    .map(|(l, c)| (l, rat(c as i64, 1)))
                    .collect();
                assert_eq!(via_k.coeffs, direct);
            }
        }
    }

    #[test]
    fn dimension_weighted_column_sums() {
        for n in 1..=7 {
            for mu in enumerate_partitions(n) {
                let total: i64 = schur_coeffs_c(&mu)
                    .unwrap()
                    .iter()
                    .map(|(l, c)| dimension(l) * *c as i64)
                    .sum();
                assert_eq!(BigUint::from(total as u64), cycleindex::count_structures_c(&mu));
            }
        }
    }

    #[test]
    fn matrix_coherence() {
        for n in 1..=6 {
            for a in Basis::ALL {
                for b in Basis::ALL {
                    for c in [Basis::S, Basis::M] {
                        let ab = transition(a, b, n);
                        let bc = transition(b, c, n);
                        assert_eq!(*ab.compose(&bc).unwrap().rows(), *transition(a, c, n).rows());
                    }
                }
            }
        }
    }

    #[test]
    fn m_expansions_are_natural() {
        for n in 1..=7 {
            for mu in enumerate_partitions(n) {
                for f in [cycleindex::c_to_p(&mu), cycleindex::k_to_p(&mu)] {
                    let m = from_p(&f, Basis::M).unwrap();
                    for (_, c) in m.terms() {
                        assert!(c.is_integer() && c.is_positive());
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip_with_big_numbers() {
        let big = BigInt::from(1u64 << 60);
        let f = SymFunc::from_terms(
            Basis::C,
            4,
            [
                (p(&[4]), Rational::new(big.clone(), BigInt::from(3))),
                (p(&[2, 2]), rat(-1, 2)),
            ],
        )
        .unwrap();
        let v = f.to_json();
        assert_eq!(v["terms"][0]["partition"], json!([4]));
        assert_eq!(v["terms"][0]["num"], json!(big.to_string()));
        assert_eq!(v["terms"][1]["num"], json!(-1));
        assert_eq!(SymFunc::from_json(&v).unwrap(), f);
    }

    #[test]
    fn add_rejects_mixed_bases() {
        let a = SymFunc::unit(Basis::C, &p(&[2]));
        let b = SymFunc::unit(Basis::K, &p(&[2]));
        assert!(matches!(a.add(&b), Err(Error::BasisMismatch(Basis::C, Basis::K))));
        let c = SymFunc::unit(Basis::C, &p(&[3]));
        assert!(a.add(&c).is_err());
        let mut z = SymFunc::zero(Basis::P, 2);
        z.add_term(p(&[2]), rat(1, 2)).unwrap();
        z.add_term(p(&[2]), rat(-1, 2)).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn blob_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = build_transition(Basis::S, Basis::P, 5);
        blob::save(dir.path(), &m).unwrap();
        assert_eq!(blob::load(dir.path(), Basis::S, Basis::P, 5).unwrap(), m);
        assert!(blob::load(dir.path(), Basis::S, Basis::P, 4).is_none());
        assert!(blob::load(dir.path(), Basis::P, Basis::S, 5).is_none());
    }

    fn arb_symfunc() -> impl Strategy<Value = SymFunc> {
        (1usize..=7, proptest::sample::select(Basis::ALL.to_vec())).prop_flat_map(|(n, basis)| {
            let all = enumerate_partitions(n);
            let d = all.len();
            proptest::collection::vec((0..d, -5i64..=5), 1..4).prop_map(move |ts| {
                SymFunc::from_terms(basis, n, ts.into_iter().map(|(i, c)| (all[i].clone(), rat(c, 1)))).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_through_p(f in arb_symfunc()) {
            prop_assert_eq!(from_p(&to_p(&f), f.basis()).unwrap(), f);
        }
    }
}

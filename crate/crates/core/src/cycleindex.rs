//! Power-sum expansions of the three molecule families `E_α = h_α`, `C_α`
//! and `K_α`, their structure counts, and the substitution `p_1 ↦ p_1^r`.

use num_bigint::BigUint;
use num_traits::One;

use crate::partitions::{
    divisors, enumerate_partitions, euler_phi, factorial, order_of, power_cycle_type, repeat_parts,
    z_of, Partition,
};
use crate::symfunc::{rat, Basis, Rational, SymFunc};

/// `C_α = (1/o) Σ_{k | o} φ(k) p_{α^{(o/k)}}` with `o` the lcm of the parts.
pub fn c_to_p(alpha: &Partition) -> SymFunc {
    let o = order_of(alpha);
    let mut f = SymFunc::zero(Basis::P, alpha.weight());
    for k in divisors(o) {
        f.add_term(power_cycle_type(alpha, o / k), rat(euler_phi(k) as i64, o as i64))
            .expect("power keeps the weight");
    }
    f
}

/// `K_α = Π_j C_{i_j^{m_j}}` over the distinct parts `i_j` of multiplicity `m_j`.
pub fn k_to_p(alpha: &Partition) -> SymFunc {
    alpha
        .multiplicities()
        .into_iter()
        .map(|(i, m)| c_to_p(&Partition::from_multiplicities(&[(i, m)])))
        .fold(SymFunc::unit(Basis::P, &Partition::empty()), |acc, f| p_product(&acc, &f))
}

/// `h_α = Π_i Σ_{μ ⊢ α_i} p_μ / z_μ`.
pub fn h_to_p(alpha: &Partition) -> SymFunc {
    alpha
        .parts()
        .iter()
        .map(|&m| {
            let mut f = SymFunc::zero(Basis::P, m);
            for mu in enumerate_partitions(m) {
                let z = Rational::from_integer(z_of(&mu).into());
                f.add_term(mu, Rational::one() / z).expect("weight m");
            }
            f
        })
        .fold(SymFunc::unit(Basis::P, &Partition::empty()), |acc, f| p_product(&acc, &f))
}

fn p_product(f: &SymFunc, g: &SymFunc) -> SymFunc {
    let mut out = SymFunc::zero(Basis::P, f.degree() + g.degree());
    for (a, x) in f.terms() {
        for (b, y) in g.terms() {
            out.add_term(a.union(b), x * y).expect("degrees add");
        }
    }
    out
}

/// Number of labelled `C_μ`-structures on `n` points: `n!/o(μ)`.
pub fn count_structures_c(mu: &Partition) -> BigUint {
    factorial(mu.weight()) / BigUint::from(order_of(mu))
}

/// Number of labelled `K_μ`-structures: `n!/|G_μ|`, `|G_μ|` the product of the distinct parts.
pub fn count_structures_k(mu: &Partition) -> BigUint {
    let g: BigUint = mu.multiplicities().iter().map(|&(i, _)| BigUint::from(i)).product();
    factorial(mu.weight()) / g
}

/// Number of labelled `E_μ`-structures: the multinomial `n!/Π μ_i!`.
pub fn count_structures_e(mu: &Partition) -> BigUint {
    let d: BigUint = mu.parts().iter().map(|&i| factorial(i)).product();
    factorial(mu.weight()) / d
}

/// `f ∘ p_1^r` for `f` in the power-sum basis: every `p_λ` becomes `p_{λ^r}`.
pub fn plethysm_p1r(f: &SymFunc, r: usize) -> SymFunc {
    assert_eq!(f.basis(), Basis::P, "plethysm is defined on power-sum input");
    let mut out = SymFunc::zero(Basis::P, f.degree() * r);
    for (lambda, c) in f.terms() {
        out.add_term(repeat_parts(lambda, r), c.clone()).expect("weight scales by r");
    }
    out
}

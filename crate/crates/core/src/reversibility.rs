//! Bijectivity of classical global maps on `Q^n`.
//!
//! The exhaustive check marks every image in a flat bit-set and stops at the
//! first repeat. Affine binary rules also have an algebraic route: their
//! global map is `x -> C x + d` over GF(2)^n with `C` circulant, so they are
//! bijective exactly when `C` has full rank.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ConfigIndex, GlobalMap, LatticeSpec, RuleTable};
use crate::DEFAULT_BUDGET;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectivityVerdict {
    pub bijective: bool,
    /// Two distinct configurations with the same image, present iff not bijective.
    pub collision: Option<(ConfigIndex, ConfigIndex)>,
}

impl BijectivityVerdict {
    fn bijective() -> Self {
        Self {
            bijective: true,
            collision: None,
        }
    }
}

struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(len: u64) -> Self {
        Self {
            words: vec![0; len.div_ceil(64) as usize],
        }
    }

    /// Sets bit `i`; returns whether it was already set.
    #[inline]
    fn test_and_set(&mut self, i: u64) -> bool {
        let word = &mut self.words[(i >> 6) as usize];
        let bit = 1u64 << (i & 63);
        let seen = *word & bit != 0;
        *word |= bit;
        seen
    }
}

fn within_budget(spec: &LatticeSpec, budget: u64) -> Result<()> {
    let needed = spec.config_count();
    if needed > budget {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

pub fn check_bijective(rule: &RuleTable, spec: &LatticeSpec) -> Result<BijectivityVerdict> {
    check_bijective_with_budget(rule, spec, DEFAULT_BUDGET)
}

/// Exhaustive bijectivity check over all `s^n` configurations.
///
/// The collision witness is the pair `(a, b)` where `b` is the first index,
/// in ascending order, whose image was already produced, and `a < b` is the
/// smallest index with the same image.
pub fn check_bijective_with_budget(
    rule: &RuleTable,
    spec: &LatticeSpec,
    budget: u64,
) -> Result<BijectivityVerdict> {
    let map = GlobalMap::new(rule, spec)?;
    within_budget(spec, budget)?;
    let count = spec.config_count();
    let mut seen = BitSet::new(count);
    for x in 0..count {
        let image = map.step(x);
        if seen.test_and_set(image) {
            let a = (0..x)
                .find(|&a| map.step(a) == image)
                .expect("an earlier preimage must exist");
            return Ok(BijectivityVerdict {
                bijective: false,
                collision: Some((ConfigIndex(a), ConfigIndex(x))),
            });
        }
    }
    Ok(BijectivityVerdict::bijective())
}

/// Permutation order, saturating above `2^63`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Finite(u64),
    Overflow,
}

const ORDER_LIMIT: u64 = 1 << 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationProfile {
    pub order: Order,
    pub cycle_count: u64,
    pub longest_cycle: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm_saturating(order: Order, len: u64) -> Order {
    match order {
        Order::Overflow => Order::Overflow,
        Order::Finite(k) => match (k / gcd(k, len)).checked_mul(len) {
            Some(v) if v <= ORDER_LIMIT => Order::Finite(v),
            _ => Order::Overflow,
        },
    }
}

pub fn permutation_profile(rule: &RuleTable, spec: &LatticeSpec) -> Result<PermutationProfile> {
    permutation_profile_with_budget(rule, spec, DEFAULT_BUDGET)
}

pub fn permutation_profile_with_budget(
    rule: &RuleTable,
    spec: &LatticeSpec,
    budget: u64,
) -> Result<PermutationProfile> {
    if !check_bijective_with_budget(rule, spec, budget)?.bijective {
        return Err(Error::NotBijective);
    }
    let map = GlobalMap::new(rule, spec)?;
    let count = spec.config_count();
    let mut visited = BitSet::new(count);
    let mut profile = PermutationProfile {
        order: Order::Finite(1),
        cycle_count: 0,
        longest_cycle: 0,
    };
    for start in 0..count {
        if visited.test_and_set(start) {
            continue;
        }
        let mut len = 1u64;
        let mut x = map.step(start);
        while x != start {
            visited.test_and_set(x);
            x = map.step(x);
            len += 1;
        }
        profile.cycle_count += 1;
        profile.longest_cycle = profile.longest_cycle.max(len);
        profile.order = lcm_saturating(profile.order, len);
    }
    Ok(profile)
}

/// The inverse permutation `F^{-1}` as a table indexed by configuration.
pub fn invert(rule: &RuleTable, spec: &LatticeSpec) -> Result<Vec<ConfigIndex>> {
    let map = GlobalMap::new(rule, spec)?;
    within_budget(spec, DEFAULT_BUDGET)?;
    let count = spec.config_count();
    let mut inverse = vec![ConfigIndex(u64::MAX); count as usize];
    for x in 0..count {
        let slot = &mut inverse[map.step(x) as usize];
        if slot.0 != u64::MAX {
            return Err(Error::NotBijective);
        }
        *slot = ConfigIndex(x);
    }
    Ok(inverse)
}

/// `f(a, b, c) = mask[0]·a ⊕ mask[1]·b ⊕ mask[2]·c ⊕ constant` over GF(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineForm {
    pub mask: [u8; 3],
    pub constant: u8,
}

impl AffineForm {
    pub fn eval(&self, a: u8, b: u8, c: u8) -> u8 {
        (self.mask[0] & a) ^ (self.mask[1] & b) ^ (self.mask[2] & c) ^ self.constant
    }

    /// Rule number of the binary rule this form defines.
    pub fn rule_number(&self) -> u8 {
        (0..8u8).fold(0, |acc, t| {
            acc | (self.eval(t >> 2, (t >> 1) & 1, t & 1) << t)
        })
    }
}

/// Reads off the affine form of a binary rule if it has one.
///
/// `f(0,0,0)` gives the constant and the three unit triples give the mask;
/// the candidate is then confirmed on all eight triples.
pub fn affine_analyze(rule: &RuleTable) -> Result<Option<AffineForm>> {
    if rule.alphabet() != 2 {
        return Err(Error::NotElementary(rule.alphabet()));
    }
    let constant = rule.apply(0, 0, 0);
    let form = AffineForm {
        mask: [
            rule.apply(1, 0, 0) ^ constant,
            rule.apply(0, 1, 0) ^ constant,
            rule.apply(0, 0, 1) ^ constant,
        ],
        constant,
    };
    let ok = (0..8u8).all(|t| {
        let (a, b, c) = (t >> 2, (t >> 1) & 1, t & 1);
        rule.apply(a, b, c) == form.eval(a, b, c)
    });
    Ok(ok.then_some(form))
}

/// Bijectivity of an affine binary rule via the GF(2) rank of its circulant.
pub fn affine_bijective(form: &AffineForm, spec: &LatticeSpec) -> Result<bool> {
    if spec.alphabet() != 2 {
        return Err(Error::NotElementary(spec.alphabet()));
    }
    let n = spec.len();
    // Row i is cell i's dependence on cells i-1, i, i+1; column j is bit j.
    let mut rows: Vec<u64> = (0..n)
        .map(|i| {
            let mut row = 0u64;
            for (offset, &m) in [n - 1, 0, 1].iter().zip(&form.mask) {
                if m & 1 == 1 {
                    row ^= 1 << ((i + offset) % n);
                }
            }
            row
        })
        .collect();
    Ok(gf2_full_rank(&mut rows, n))
}

fn gf2_full_rank(rows: &mut [u64], n: usize) -> bool {
    for col in 0..n {
        let bit = 1u64 << col;
        let Some(pivot) = (col..n).find(|&r| rows[r] & bit != 0) else {
            return false;
        };
        rows.swap(col, pivot);
        let p = rows[col];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != col && *row & bit != 0 {
                *row ^= p;
            }
        }
    }
    true
}

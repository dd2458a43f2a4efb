//! Quantum rules built as `f = g ∘ e`: a classical neighbourhood rule `e`
//! followed by a single-cell gate `g`.
//!
//! If `F_e` is a bijection on `Q^n` and the gate matrix `λ(p, q) = g(p)(q)`
//! is unitary, the composed rule is well formed. The certificate below only
//! ever claims that direction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, RuleTable, State, MAX_ALPHABET};
use crate::quantum::{unitarity_deviation, Amplitude, GlobalMatrix, QuantumRule};
use crate::reversibility::{check_bijective_with_budget, BijectivityVerdict};
use crate::DEFAULT_BUDGET;

/// A single-cell gate `g: Q -> C^Q`; row `p` of `lambda` is `g(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalGate {
    alphabet: u32,
    lambda: Vec<Amplitude>,
}

impl LocalGate {
    pub fn new(alphabet: u32, lambda: Vec<Amplitude>) -> Result<Self> {
        if !(1..=MAX_ALPHABET).contains(&alphabet) {
            return Err(Error::InvalidAlphabet(alphabet));
        }
        let expected = (alphabet as usize).pow(2);
        if lambda.len() != expected {
            return Err(Error::GateSize {
                expected,
                actual: lambda.len(),
            });
        }
        if lambda.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { alphabet, lambda })
    }

    pub fn identity(alphabet: u32) -> Result<Self> {
        let s = alphabet as usize;
        let lambda = (0..s * s)
            .map(|k| if k / s == k % s { Complex64::ONE } else { Complex64::ZERO })
            .collect();
        Self::new(alphabet, lambda)
    }

    /// Gate that maps basis state `p` to basis state `perm[p]`.
    pub fn permutation(perm: &[State]) -> Result<Self> {
        let s = perm.len();
        let mut lambda = vec![Complex64::ZERO; s * s];
        for (p, &q) in perm.iter().enumerate() {
            if q as usize >= s {
                return Err(Error::CellOutOfRange {
                    position: p,
                    state: q.into(),
                    alphabet: s as u32,
                });
            }
            lambda[p * s + q as usize] = Complex64::ONE;
        }
        Self::new(s as u32, lambda)
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn lambda(&self) -> &[Amplitude] {
        &self.lambda
    }

    /// `g(p)`.
    pub fn row(&self, p: State) -> &[Amplitude] {
        let s = self.alphabet as usize;
        &self.lambda[p as usize * s..(p as usize + 1) * s]
    }

    pub fn matrix(&self) -> GlobalMatrix {
        GlobalMatrix::from_entries(self.alphabet as usize, self.lambda.clone())
            .expect("validated on construction")
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix())
    }
}

/// `f(t) = g(e(t))` for every neighbourhood `t`.
pub fn compose_rule(e: &RuleTable, g: &LocalGate) -> Result<QuantumRule> {
    if e.alphabet() != g.alphabet {
        return Err(Error::AlphabetMismatch {
            left: e.alphabet(),
            right: g.alphabet,
        });
    }
    let entries = e
        .outputs()
        .iter()
        .flat_map(|&out| g.row(out).iter().copied())
        .collect();
    QuantumRule::new(e.alphabet(), entries)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Certificate {
    pub e_bijective: BijectivityVerdict,
    pub lambda_unitary: bool,
    pub lambda_deviation: f64,
    /// Both conditions hold, so the composed rule is well formed.
    pub conclusion: bool,
}

pub fn certify(
    e: &RuleTable,
    g: &LocalGate,
    spec: &LatticeSpec,
    tol: f64,
) -> Result<Theorem1Certificate> {
    certify_with_budget(e, g, spec, tol, DEFAULT_BUDGET)
}

pub fn certify_with_budget(
    e: &RuleTable,
    g: &LocalGate,
    spec: &LatticeSpec,
    tol: f64,
    budget: u64,
) -> Result<Theorem1Certificate> {
    if e.alphabet() != g.alphabet {
        return Err(Error::AlphabetMismatch {
            left: e.alphabet(),
            right: g.alphabet,
        });
    }
    let e_bijective = check_bijective_with_budget(e, spec, budget)?;
    let lambda_deviation = g.unitarity_deviation();
    let lambda_unitary = lambda_deviation <= tol;
    Ok(Theorem1Certificate {
        e_bijective,
        lambda_unitary,
        lambda_deviation,
        conclusion: e_bijective.bijective && lambda_unitary,
    })
}

/// Mixed-radix coding of `Q = L × M × R`, `l` most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionCodec {
    pub lsize: u32,
    pub msize: u32,
    pub rsize: u32,
}

impl PartitionCodec {
    pub fn alphabet(&self) -> u32 {
        self.lsize * self.msize * self.rsize
    }

    pub fn encode(&self, l: u32, m: u32, r: u32) -> State {
        ((l * self.msize + m) * self.rsize + r) as State
    }

    pub fn decode(&self, q: State) -> (u32, u32, u32) {
        let q = u32::from(q);
        (q / (self.msize * self.rsize), (q / self.rsize) % self.msize, q % self.rsize)
    }
}

/// The part-exchange rule on `Q = L × M × R`: a cell takes `l` from its right
/// neighbour, keeps its own `m`, and takes `r` from its left neighbour.
pub fn watrous_partition(
    lsize: u32,
    msize: u32,
    rsize: u32,
) -> Result<(RuleTable, LocalGate, PartitionCodec)> {
    let s = [lsize, msize, rsize]
        .iter()
        .try_fold(1u32, |acc, &k| if k == 0 { None } else { acc.checked_mul(k) })
        .filter(|&s| s <= MAX_ALPHABET)
        .ok_or(Error::PartitionSize)?;
    let codec = PartitionCodec {
        lsize,
        msize,
        rsize,
    };
    let e = RuleTable::from_fn(s, |q1, q2, q3| {
        let (_, _, r1) = codec.decode(q1);
        let (_, m2, _) = codec.decode(q2);
        let (l3, _, _) = codec.decode(q3);
        codec.encode(l3, m2, r1)
    })?;
    Ok((e, LocalGate::identity(s)?, codec))
}

/// The 2×2 rotation `[[cos θ, -sin θ], [sin θ, cos θ]]` as a gate on `{0, 1}`.
pub fn rotation_gate(theta: f64) -> Result<LocalGate> {
    if !theta.is_finite() {
        return Err(Error::NonFinite);
    }
    let (s, c) = theta.sin_cos();
    let re = |x: f64| Complex64::new(x, 0.0);
    LocalGate::new(2, vec![re(c), re(-s), re(s), re(c)])
}

/// Pair states `(a, b)` are coded as `2a + b`.
pub fn pair_state(a: u8, b: u8) -> State {
    2 * a + b
}

/// `e((a1,b1),(a2,b2),(a3,b3)) = (a1, b3)` with the gate that swaps
/// `(1,0)` and `(1,1)`, giving `f = (a1, a1 ⊕ b3)`.
pub fn controlled_xor_construction() -> Result<(RuleTable, LocalGate)> {
    let e = RuleTable::from_fn(4, |q1, _, q3| pair_state(q1 >> 1, q3 & 1))?;
    let g = LocalGate::permutation(&[0, 1, 3, 2])?;
    Ok((e, g))
}

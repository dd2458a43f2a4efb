//! Quantum states over `Q^n` and the global operator of a quantum local rule.
//!
//! A quantum local rule assigns an amplitude vector over `Q` to every
//! neighbourhood. The image of a basis configuration `p` is the product state
//! whose site `i` carries the vector of `p`'s `i`-th window, so
//! `F(p)(x) = Π_i f(p_{i-1}, p_i, p_{i+1})[x_i]`.
//!
//! Matrices are stored with rows indexed by the input `p` and columns by the
//! outcome `x`; a state is a row vector multiplied on the left. The inner
//! product conjugates its first argument.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{decode_config, ConfigIndex, LatticeSpec, RuleTable, State, MAX_ALPHABET};
use crate::par;
use crate::reversibility::check_bijective_with_budget;
use crate::{DEFAULT_BUDGET, DEFAULT_DENSE_CAP};

pub type Amplitude = Complex64;

const ZERO: Amplitude = Amplitude::new(0.0, 0.0);
const ONE: Amplitude = Amplitude::new(1.0, 0.0);

fn all_finite(v: &[Amplitude]) -> bool {
    v.iter().all(|a| a.re.is_finite() && a.im.is_finite())
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    spec: LatticeSpec,
    amplitudes: Vec<Amplitude>,
}

impl QuantumState {
    pub fn new(spec: LatticeSpec, amplitudes: Vec<Amplitude>) -> Result<Self> {
        let expected = spec.config_count() as usize;
        if amplitudes.len() != expected {
            return Err(Error::WrongLength {
                expected,
                actual: amplitudes.len(),
            });
        }
        if !all_finite(&amplitudes) {
            return Err(Error::NonFinite);
        }
        Ok(Self { spec, amplitudes })
    }

    pub fn zero(spec: LatticeSpec) -> Self {
        Self {
            spec,
            amplitudes: vec![ZERO; spec.config_count() as usize],
        }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

pub fn basis_state(config: ConfigIndex, spec: &LatticeSpec) -> Result<QuantumState> {
    spec.check_index(config)?;
    let mut state = QuantumState::zero(*spec);
    state.amplitudes[config.0 as usize] = ONE;
    Ok(state)
}

/// `⟨a, b⟩ = Σ_x conj(a(x)) · b(x)`.
pub fn inner_product(a: &QuantumState, b: &QuantumState) -> Result<Amplitude> {
    if a.spec != b.spec {
        return Err(Error::SpecMismatch);
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// A quantum local rule `f: Q^3 -> C^Q`.
///
/// The vector for `(a, b, c)` occupies `s` consecutive slots starting at
/// `((a*s + b)*s + c) * s`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumRule {
    alphabet: u32,
    entries: Vec<Amplitude>,
}

impl QuantumRule {
    pub fn new(alphabet: u32, entries: Vec<Amplitude>) -> Result<Self> {
        if !(1..=MAX_ALPHABET).contains(&alphabet) {
            return Err(Error::InvalidAlphabet(alphabet));
        }
        let expected = (alphabet as usize).pow(4);
        if entries.len() != expected {
            return Err(Error::RuleTableSize {
                expected,
                actual: entries.len(),
            });
        }
        if !all_finite(&entries) {
            return Err(Error::NonFinite);
        }
        Ok(Self { alphabet, entries })
    }

    pub fn from_fn(
        alphabet: u32,
        f: impl Fn(State, State, State) -> Vec<Amplitude>,
    ) -> Result<Self> {
        let s = alphabet as usize;
        let mut entries = Vec::with_capacity(s.pow(4));
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    let v = f(a as State, b as State, c as State);
                    if v.len() != s {
                        return Err(Error::WrongLength {
                            expected: s,
                            actual: v.len(),
                        });
                    }
                    entries.extend(v);
                }
            }
        }
        Self::new(alphabet, entries)
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    #[inline]
    pub fn vector(&self, left: State, center: State, right: State) -> &[Amplitude] {
        let s = self.alphabet as usize;
        let start = ((left as usize * s + center as usize) * s + right as usize) * s;
        &self.entries[start..start + s]
    }

    /// The classical rule this is the lift of, if every vector is exactly a
    /// basis vector.
    pub fn as_classical(&self) -> Option<RuleTable> {
        let s = self.alphabet as usize;
        let outputs = self
            .entries
            .chunks(s)
            .map(|v| {
                let mut hit = None;
                for (q, a) in v.iter().enumerate() {
                    if *a == ONE {
                        if hit.is_some() {
                            return None;
                        }
                        hit = Some(q as State);
                    } else if *a != ZERO {
                        return None;
                    }
                }
                hit
            })
            .collect::<Option<Vec<_>>>()?;
        RuleTable::new(self.alphabet, outputs).ok()
    }
}

/// The quantization `[f]` of a classical rule.
pub fn lift_rule(rule: &RuleTable) -> QuantumRule {
    let s = rule.alphabet() as usize;
    let mut entries = vec![ZERO; s.pow(4)];
    for (t, &out) in rule.outputs().iter().enumerate() {
        entries[t * s + out as usize] = ONE;
    }
    QuantumRule {
        alphabet: rule.alphabet(),
        entries,
    }
}

fn check_alphabet(qrule: &QuantumRule, spec: &LatticeSpec) -> Result<()> {
    if qrule.alphabet != spec.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: qrule.alphabet,
            right: spec.alphabet(),
        });
    }
    Ok(())
}

/// `F(p)(x)`, the amplitude of outcome `x` from basis configuration `p`.
pub fn amplitude(
    qrule: &QuantumRule,
    p: ConfigIndex,
    x: ConfigIndex,
    spec: &LatticeSpec,
) -> Result<Amplitude> {
    check_alphabet(qrule, spec)?;
    let pc = decode_config(p, spec)?;
    let xc = decode_config(x, spec)?;
    let n = pc.len();
    Ok((0..n)
        .map(|i| qrule.vector(pc[(i + n - 1) % n], pc[i], pc[(i + 1) % n])[xc[i] as usize])
        .product())
}

/// Window vectors of basis configuration `p`, one per site.
fn windows<'a>(qrule: &'a QuantumRule, cells: &[State]) -> Vec<&'a [Amplitude]> {
    let n = cells.len();
    (0..n)
        .map(|i| qrule.vector(cells[(i + n - 1) % n], cells[i], cells[(i + 1) % n]))
        .collect()
}

/// Enumerates the non-zero components of the product state `⊗ vectors`,
/// site 1 most significant.
fn expand_product(vectors: &[&[Amplitude]], emit: &mut impl FnMut(usize, Amplitude)) {
    fn go(
        vectors: &[&[Amplitude]],
        site: usize,
        index: usize,
        amp: Amplitude,
        emit: &mut impl FnMut(usize, Amplitude),
    ) {
        let Some(v) = vectors.get(site) else {
            emit(index, amp);
            return;
        };
        let s = v.len();
        for (q, a) in v.iter().enumerate() {
            if *a != ZERO {
                go(vectors, site + 1, index * s + q, amp * a, emit);
            }
        }
    }
    go(vectors, 0, 0, ONE, emit);
}

/// Dense `s^n × s^n` matrix, rows = inputs, columns = outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalMatrix {
    dim: usize,
    entries: Vec<Amplitude>,
}

impl GlobalMatrix {
    pub fn from_entries(dim: usize, entries: Vec<Amplitude>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::WrongLength {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if !all_finite(&entries) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[Amplitude] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    /// `state · M`.
    pub fn apply_row_vector(&self, state: &[Amplitude]) -> Vec<Amplitude> {
        let mut out = vec![ZERO; self.dim];
        for (p, a) in state.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (o, m) in out.iter_mut().zip(self.row(p)) {
                *o += a * m;
            }
        }
        out
    }

    /// True iff every row has exactly one entry equal to 1, every other entry
    /// is exactly 0, and no two rows share a column.
    pub fn is_permutation(&self) -> bool {
        let mut used = vec![false; self.dim];
        for r in 0..self.dim {
            let mut one = None;
            for (c, a) in self.row(r).iter().enumerate() {
                if *a == ONE && one.is_none() {
                    one = Some(c);
                } else if *a != ZERO {
                    return false;
                }
            }
            match one {
                Some(c) if !used[c] => used[c] = true,
                _ => return false,
            }
        }
        true
    }
}

pub fn build_global_matrix(qrule: &QuantumRule, spec: &LatticeSpec) -> Result<GlobalMatrix> {
    build_global_matrix_with_cap(qrule, spec, DEFAULT_DENSE_CAP)
}

pub fn build_global_matrix_with_cap(
    qrule: &QuantumRule,
    spec: &LatticeSpec,
    cap: u64,
) -> Result<GlobalMatrix> {
    check_alphabet(qrule, spec)?;
    let dim = spec.config_count();
    if dim > cap {
        return Err(Error::DenseCapExceeded { dim, cap });
    }
    let dim = dim as usize;
    let mut entries = vec![ZERO; dim * dim];
    par::for_each_chunk_mut(&mut entries, dim, |p, row| {
        let cells = decode_config(ConfigIndex(p as u64), spec).expect("row index in range");
        expand_product(&windows(qrule, &cells), &mut |x, a| row[x] = a);
    });
    Ok(GlobalMatrix { dim, entries })
}

const APPLY_CHUNK: usize = 1024;

/// One step of the global operator: `out(x) = Σ_p state(p) · F(p)(x)`.
///
/// Inputs are split into fixed-size blocks whose partial sums are added in
/// block order, so the result does not depend on the thread count.
pub fn apply_global(qrule: &QuantumRule, state: &QuantumState) -> Result<QuantumState> {
    let spec = state.spec;
    check_alphabet(qrule, &spec)?;
    let dim = spec.config_count() as usize;
    let chunk = APPLY_CHUNK.max(dim.div_ceil(16));
    let blocks = dim.div_ceil(chunk);
    let partials = par::map_range(blocks, |b| {
        let mut acc = vec![ZERO; dim];
        let mut cells = vec![0; spec.len()];
        for p in b * chunk..((b + 1) * chunk).min(dim) {
            let amp = state.amplitudes[p];
            if amp == ZERO {
                continue;
            }
            let mut v = p as u64;
            let s = u64::from(spec.alphabet());
            for c in cells.iter_mut().rev() {
                *c = (v % s) as State;
                v /= s;
            }
            expand_product(&windows(qrule, &cells), &mut |x, a| acc[x] += amp * a);
        }
        acc
    });
    let mut out = vec![ZERO; dim];
    for part in partials {
        for (o, a) in out.iter_mut().zip(part) {
            *o += a;
        }
    }
    QuantumState::new(spec, out)
}

/// `max_{i,j} |(M M†)_{ij} - δ_{ij}|`, or infinity for non-finite entries.
///
/// Products are accumulated through a column index so sparse matrices
/// (permutations, lifted rules) cost roughly `O(dim)`.
pub fn unitarity_deviation(m: &GlobalMatrix) -> f64 {
    if !all_finite(&m.entries) {
        return f64::INFINITY;
    }
    let dim = m.dim;
    let mut by_column: Vec<Vec<(usize, Amplitude)>> = vec![Vec::new(); dim];
    for r in 0..dim {
        for (c, a) in m.row(r).iter().enumerate() {
            if *a != ZERO {
                by_column[c].push((r, *a));
            }
        }
    }
    let per_row = par::map_range(dim, |i| {
        let mut acc = vec![ZERO; dim];
        let mut touched = vec![false; dim];
        for (k, a) in m.row(i).iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for &(j, b) in &by_column[k] {
                acc[j] += a * b.conj();
                touched[j] = true;
            }
        }
        let mut worst: f64 = if touched[i] { 0.0 } else { 1.0 };
        for j in (0..dim).filter(|&j| touched[j]) {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((acc[j] - target).norm());
        }
        worst
    });
    per_row.into_iter().fold(0.0, f64::max)
}

pub fn is_unitary(m: &GlobalMatrix, tol: f64) -> bool {
    unitarity_deviation(m) <= tol
}

/// Resource caps for well-formedness decisions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Most configurations an exhaustive bijectivity check may visit.
    pub budget: u64,
    /// Largest dense matrix dimension that may be built.
    pub dense_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

pub fn is_well_formed(qrule: &QuantumRule, spec: &LatticeSpec, tol: f64) -> Result<bool> {
    is_well_formed_with(qrule, spec, tol, &Limits::default())
}

/// Whether the global operator is unitary.
///
/// Lifted classical rules are decided exactly through bijectivity of the
/// classical map; anything else needs the dense matrix.
pub fn is_well_formed_with(
    qrule: &QuantumRule,
    spec: &LatticeSpec,
    tol: f64,
    limits: &Limits,
) -> Result<bool> {
    check_alphabet(qrule, spec)?;
    if let Some(rule) = qrule.as_classical() {
        return Ok(check_bijective_with_budget(&rule, spec, limits.budget)?.bijective);
    }
    let m = build_global_matrix_with_cap(qrule, spec, limits.dense_cap)?;
    Ok(is_unitary(&m, tol))
}

/// Evolves `state` for `steps` steps, returning every intermediate state.
pub fn evolve(qrule: &QuantumRule, state: QuantumState, steps: usize) -> Result<Vec<QuantumState>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state);
    for _ in 0..steps {
        let next = apply_global(qrule, out.last().expect("non-empty"))?;
        out.push(next);
    }
    Ok(out)
}

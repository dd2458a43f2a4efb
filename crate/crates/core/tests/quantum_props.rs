use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qca::partitioned::{certify, compose_rule, rotation_gate, LocalGate};
use qca::quantum::{
    apply_global, basis_state, build_global_matrix, inner_product, is_unitary, lift_rule,
    unitarity_deviation,
};
use qca::reversibility::check_bijective;
use qca::{decode_config, global_step, ConfigIndex, LatticeSpec, QuantumState, RuleTable};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn bin(n: usize) -> LatticeSpec {
    LatticeSpec::binary(n).unwrap()
}

fn random_amp(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
}

fn random_unit_state(rng: &mut StdRng, spec: LatticeSpec) -> QuantumState {
    let v: Vec<_> = (0..spec.config_count()).map(|_| random_amp(rng)).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    QuantumState::new(spec, v.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// Kronecker product of per-site vectors, site 1 most significant.
fn kron(vs: &[Vec<Complex64>]) -> Vec<Complex64> {
    vs.iter().fold(vec![ONE], |acc, v| {
        acc.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect()
    })
}

#[test]
fn lifted_unitarity_iff_bijective_all_rules() {
    for n in [3, 4, 5] {
        let spec = bin(n);
        for r in 0..=255 {
            let rule = RuleTable::elementary(r).unwrap();
            let m = build_global_matrix(&lift_rule(&rule), &spec).unwrap();
            let bij = check_bijective(&rule, &spec).unwrap().bijective;
            assert_eq!(is_unitary(&m, 1e-12), bij, "rule {r} n {n}");
            if bij {
                assert_eq!(unitarity_deviation(&m), 0.0);
                assert!(m.is_permutation());
            }
        }
    }
}

#[test]
fn lifted_matrix_rows_are_classical_images() {
    let spec = bin(6);
    for r in [30, 90, 150, 154, 204] {
        let rule = RuleTable::elementary(r).unwrap();
        let m = build_global_matrix(&lift_rule(&rule), &spec).unwrap();
        for p in spec.configs() {
            let img = global_step(&rule, p, &spec).unwrap().0 as usize;
            for (x, a) in m.row(p.0 as usize).iter().enumerate() {
                assert_eq!(*a, if x == img { ONE } else { ZERO });
            }
        }
    }
}

#[test]
fn apply_matches_matrix_product() {
    let mut rng = StdRng::seed_from_u64(7);
    for n in [3, 5, 7] {
        let spec = bin(n);
        for (e, theta) in [(150, 0.3), (30, 1.2), (204, 2.5), (154, -0.8)] {
            let q = compose_rule(&RuleTable::elementary(e).unwrap(), &rotation_gate(theta).unwrap()).unwrap();
            let m = build_global_matrix(&q, &spec).unwrap();
            for _ in 0..5 {
                let s = random_unit_state(&mut rng, spec);
                let a = apply_global(&q, &s).unwrap();
                let b = m.apply_row_vector(s.amplitudes());
                for (x, y) in a.amplitudes().iter().zip(&b) {
                    assert!((x - y).norm() <= 1e-13);
                }
            }
        }
    }
}

#[test]
fn well_formed_rules_preserve_norm() {
    let mut rng = StdRng::seed_from_u64(11);
    let spec = bin(5);
    let rules: Vec<_> = [(150, 0.0), (154, 0.7), (170, 1.9), (240, 3.3), (204, 5.0)]
        .iter()
        .map(|&(e, t)| compose_rule(&RuleTable::elementary(e).unwrap(), &rotation_gate(t).unwrap()).unwrap())
        .collect();
    for q in &rules {
        assert!(qca::quantum::is_well_formed(q, &spec, 1e-12).unwrap());
    }
    for k in 0..100 {
        let q = &rules[k % rules.len()];
        let mut s = random_unit_state(&mut rng, spec);
        for _ in 0..100 {
            s = apply_global(q, &s).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn inner_product_factorizes_over_sites() {
    let spec = bin(5);
    for p in spec.configs() {
        for q in spec.configs() {
            let pc = decode_config(p, &spec).unwrap();
            let qc = decode_config(q, &spec).unwrap();
            let factored: Complex64 = pc
                .iter()
                .zip(&qc)
                .map(|(a, b)| if a == b { ONE } else { ZERO })
                .product();
            let whole = inner_product(&basis_state(p, &spec).unwrap(), &basis_state(q, &spec).unwrap()).unwrap();
            assert_eq!(whole, factored);
        }
    }
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..100 {
        let a: Vec<Vec<_>> = (0..5).map(|_| vec![random_amp(&mut rng), random_amp(&mut rng)]).collect();
        let b: Vec<Vec<_>> = (0..5).map(|_| vec![random_amp(&mut rng), random_amp(&mut rng)]).collect();
        let sa = QuantumState::new(spec, kron(&a)).unwrap();
        let sb = QuantumState::new(spec, kron(&b)).unwrap();
        let factored: Complex64 = a
            .iter()
            .zip(&b)
            .map(|(u, v)| u.iter().zip(v).map(|(x, y)| x.conj() * y).sum::<Complex64>())
            .product();
        assert!((inner_product(&sa, &sb).unwrap() - factored).norm() <= 1e-13);
    }
}

fn site_operator_unitary(g: &LocalGate, n: usize) -> bool {
    if n >= 3 {
        let id = RuleTable::identity(g.alphabet()).unwrap();
        let m = build_global_matrix(&compose_rule(&id, g).unwrap(), &LatticeSpec::new(g.alphabet(), n).unwrap()).unwrap();
        return is_unitary(&m, 1e-12);
    }
    // Rings shorter than 3 are not lattices here; build ⊗ λ directly.
    let s = g.alphabet() as usize;
    let dim = s.pow(n as u32);
    let rows: Vec<Vec<Complex64>> = (0..dim)
        .map(|p| {
            let digits: Vec<usize> = (0..n).rev().map(|i| (p / s.pow(i as u32)) % s).collect();
            kron(&digits.iter().map(|&d| g.row(d as u8).to_vec()).collect::<Vec<_>>())
        })
        .collect();
    let m = qca::GlobalMatrix::from_entries(dim, rows.concat()).unwrap();
    is_unitary(&m, 1e-12)
}

#[test]
fn gate_unitary_iff_site_operator_unitary() {
    let non_unitary = LocalGate::new(2, vec![ONE, ONE, ZERO, ONE]).unwrap();
    let scaled = LocalGate::new(2, vec![Complex64::new(0.9, 0.0), ZERO, ZERO, ONE]).unwrap();
    let phase = LocalGate::new(2, vec![ONE, ZERO, ZERO, Complex64::new(0.0, 1.0)]).unwrap();
    let mut gates: Vec<(LocalGate, bool)> = (0..12)
        .map(|k| (rotation_gate(k as f64 * 0.55).unwrap(), true))
        .collect();
    gates.extend([(non_unitary, false), (scaled, false), (phase, true)]);
    for (g, unitary) in &gates {
        assert_eq!(g.unitarity_deviation() <= 1e-12, *unitary);
        for n in [2, 3] {
            assert_eq!(site_operator_unitary(g, n), *unitary);
        }
    }
}

/// The operator of `g ∘ e` equals the lifted permutation `F_e` followed by
/// the site-wise gate operator, checked on every basis state.
#[test]
fn composition_factors_through_permutation() {
    let cases: Vec<(RuleTable, LocalGate, LatticeSpec)> = vec![
        (RuleTable::elementary(150).unwrap(), rotation_gate(0.4).unwrap(), bin(5)),
        (RuleTable::elementary(154).unwrap(), rotation_gate(2.2).unwrap(), bin(7)),
        (RuleTable::elementary(240).unwrap(), rotation_gate(-1.0).unwrap(), bin(8)),
        {
            let (e, g) = qca::partitioned::controlled_xor_construction().unwrap();
            (e, g, LatticeSpec::new(4, 4).unwrap())
        },
    ];
    for (e, g, spec) in cases {
        assert!(spec.config_count() <= 256);
        assert!(check_bijective(&e, &spec).unwrap().bijective);
        let id = RuleTable::identity(e.alphabet()).unwrap();
        let site = compose_rule(&id, &g).unwrap();
        let composed = compose_rule(&e, &g).unwrap();
        for p in spec.configs() {
            let basis = basis_state(p, &spec).unwrap();
            let direct = apply_global(&composed, &basis).unwrap();
            let permuted = basis_state(global_step(&e, p, &spec).unwrap(), &spec).unwrap();
            let staged = apply_global(&site, &permuted).unwrap();
            assert_eq!(direct, staged);
        }
    }
}

#[test]
fn certified_constructions_build_unitary_matrices() {
    for e in 0..=255u32 {
        let e = RuleTable::elementary(e).unwrap();
        for n in [3, 4] {
            let spec = bin(n);
            let g = rotation_gate(0.3 + n as f64).unwrap();
            let cert = certify(&e, &g, &spec, 1e-12).unwrap();
            if cert.conclusion {
                let m = build_global_matrix(&compose_rule(&e, &g).unwrap(), &spec).unwrap();
                assert!(unitarity_deviation(&m) <= 1e-12);
            }
        }
    }
}

proptest! {
    #[test]
    fn identity_gate_gives_lift(s in 2u32..5, seed in proptest::collection::vec(any::<u8>(), 64)) {
        let outputs: Vec<u8> = seed.iter().take((s as usize).pow(3)).map(|v| v % s as u8).collect();
        let e = RuleTable::new(s, outputs).unwrap();
        prop_assert_eq!(compose_rule(&e, &LocalGate::identity(s).unwrap()).unwrap(), lift_rule(&e));
    }

    #[test]
    fn inner_product_hermitian_and_linear(seed in any::<u64>(), c_re in -2.0f64..2.0, c_im in -2.0f64..2.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let spec = bin(4);
        let a = random_unit_state(&mut rng, spec);
        let b = random_unit_state(&mut rng, spec);
        let d = random_unit_state(&mut rng, spec);
        let ab = inner_product(&a, &b).unwrap();
        prop_assert!((ab - inner_product(&b, &a).unwrap().conj()).norm() < 1e-14);
        let c = Complex64::new(c_re, c_im);
        let comb: Vec<_> = b.amplitudes().iter().zip(d.amplitudes()).map(|(x, y)| c * x + y).collect();
        let comb = QuantumState::new(spec, comb).unwrap();
        let lhs = inner_product(&a, &comb).unwrap();
        let rhs = c * ab + inner_product(&a, &d).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-13);
    }
}

#[test]
fn basis_evolution_tracks_classical_map() {
    let spec = bin(6);
    let rule = RuleTable::elementary(170).unwrap();
    let q = lift_rule(&rule);
    let mut state = basis_state(ConfigIndex(13), &spec).unwrap();
    let mut c = ConfigIndex(13);
    for _ in 0..6 {
        state = apply_global(&q, &state).unwrap();
        c = global_step(&rule, c, &spec).unwrap();
        assert_eq!(state, basis_state(c, &spec).unwrap());
    }
    assert_eq!(c, ConfigIndex(13));
}

//! Pins the packed Pauli algebra against explicit dense matrices: the
//! product phase convention, every Clifford conjugation rule, the
//! symplectic form, and sign propagation through row reduction.

mod common;

use common::{c, eye, max_abs_diff, pauli_matrix, random_block, CMat};
use legoqec::group::rref;
use legoqec::pauli::{Pauli, PauliOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

/// All signed Pauli operators on n qubits (Hermitian ones only).
fn all_signed(n: usize) -> Vec<PauliOperator> {
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut out = Vec::new();
    for code in 0..4usize.pow(n as u32) {
        let ls: Vec<Pauli> = (0..n).map(|q| letters[code >> (2 * q) & 3]).collect();
        let p = PauliOperator::from_letters(&ls);
        out.push(p.clone());
        out.push(p.negated());
    }
    out
}

#[test]
fn product_matches_dense_exhaustively() {
    for n in 1..=2 {
        let ops = all_signed(n);
        for a in &ops {
            for b in &ops {
                let prod = a.multiply(b).unwrap();
                let want = pauli_matrix(a) * pauli_matrix(b);
                assert!(
                    max_abs_diff(&pauli_matrix(&prod), &want) < TOL,
                    "{a} * {b} gave {prod}"
                );
            }
        }
    }
}

#[test]
fn symplectic_form_matches_commutator() {
    for a in all_signed(2) {
        for b in all_signed(2) {
            let ma = pauli_matrix(&a);
            let mb = pauli_matrix(&b);
            let comm = max_abs_diff(&(&ma * &mb), &(&mb * &ma));
            let sp = a.symplectic(&b).unwrap();
            if sp == 0 {
                assert!(comm < TOL, "{a} and {b} should commute");
            } else {
                let anti = max_abs_diff(&(&ma * &mb), &-(&mb * &ma));
                assert!(anti < TOL && comm > 0.5, "{a} and {b} should anticommute");
            }
        }
    }
}

fn h_matrix() -> CMat {
    let s = 1.0 / f64::sqrt(2.0);
    CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

fn s_matrix() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
}

/// Embed a single-qubit unitary at qubit `q` of an n-qubit register
/// (qubit 0 = least significant bit).
fn embed1(u: &CMat, q: usize, n: usize) -> CMat {
    let mut m = CMat::from_element(1, 1, c(1.0, 0.0));
    for k in 0..n {
        let f = if k == q { u.clone() } else { eye(2) };
        m = f.kronecker(&m);
    }
    m
}

/// Permutation-style two-qubit gates defined directly on basis-index bits,
/// so they are convention-independent.
fn cx_matrix(ctrl: usize, tgt: usize, n: usize) -> CMat {
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for i in 0..dim {
        let j = i ^ (((i >> ctrl) & 1) << tgt);
        m[(j, i)] = c(1.0, 0.0);
    }
    m
}

fn cz_matrix(a: usize, b: usize, n: usize) -> CMat {
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for i in 0..dim {
        let sign = if (i >> a) & 1 == 1 && (i >> b) & 1 == 1 { -1.0 } else { 1.0 };
        m[(i, i)] = c(sign, 0.0);
    }
    m
}

fn swap_matrix(a: usize, b: usize, n: usize) -> CMat {
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for i in 0..dim {
        let (ba, bb) = ((i >> a) & 1, (i >> b) & 1);
        let j = (i & !(1 << a) & !(1 << b)) | (bb << a) | (ba << b);
        m[(j, i)] = c(1.0, 0.0);
    }
    m
}

fn check_conj(op: &PauliOperator, conjugated: &PauliOperator, u: &CMat, label: &str) {
    let want = u * pauli_matrix(op) * u.adjoint();
    assert!(
        max_abs_diff(&pauli_matrix(conjugated), &want) < 1e-10,
        "{label}: {op} -> {conjugated} disagrees with dense conjugation"
    );
}

#[test]
fn single_qubit_conjugations_match_dense() {
    let n = 2;
    let gates: Vec<(&str, CMat, fn(&mut PauliOperator, usize))> = vec![
        ("H", h_matrix(), PauliOperator::conj_h),
        ("S", s_matrix(), PauliOperator::conj_s),
        ("Sdg", s_matrix().adjoint(), PauliOperator::conj_sdg),
        ("X", pauli_matrix(&PauliOperator::single(1, 0, Pauli::X)), PauliOperator::conj_x),
        ("Y", pauli_matrix(&PauliOperator::single(1, 0, Pauli::Y)), PauliOperator::conj_y),
        ("Z", pauli_matrix(&PauliOperator::single(1, 0, Pauli::Z)), PauliOperator::conj_z),
    ];
    for (label, u, f) in &gates {
        for q in 0..n {
            let dense = embed1(u, q, n);
            for op in all_signed(n) {
                let mut got = op.clone();
                f(&mut got, q);
                check_conj(&op, &got, &dense, label);
            }
        }
    }
}

#[test]
fn two_qubit_conjugations_match_dense() {
    let n = 2;
    for (a, b) in [(0usize, 1usize), (1, 0)] {
        for op in all_signed(n) {
            let mut cx = op.clone();
            cx.conj_cx(a, b);
            check_conj(&op, &cx, &cx_matrix(a, b, n), "CX");

            let mut cz = op.clone();
            cz.conj_cz(a, b);
            check_conj(&op, &cz, &cz_matrix(a, b, n), "CZ");

            let mut sw = op.clone();
            sw.conj_swap(a, b);
            check_conj(&op, &sw, &swap_matrix(a, b, n), "SWAP");
        }
    }
}

/// Row reduction rewrites the generating set; the stabilized subspace and
/// the signs must survive. Compare the projectors densely.
#[test]
fn rref_preserves_projector() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..40 {
        let block = random_block(&format!("b{trial}"), 3, &mut rng);
        let reduced = rref(block.group()).unwrap();
        assert!(!reduced.inconsistent);
        let before = common::group_projector(block.group(), 3);
        let after = common::group_projector(&reduced.basis, 3);
        assert!(max_abs_diff(&before, &after) < 1e-10, "trial {trial}");
    }
}

//! Naive dense reference implementations backing the oracle tests.
//!
//! Everything here works on explicit state vectors and 2^n x 2^n complex
//! matrices built by Kronecker products, independent of the packed GF(2)
//! algebra and of the simulation engines it is used to check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use legoqec::lego::{LegoBlock, LegoNetwork, Palette};
use legoqec::pauli::{Pauli, PauliOperator};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn eye(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn letter_matrix(p: Pauli) -> CMat {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match p {
        Pauli::I => CMat::from_row_slice(2, 2, &[one, z, z, one]),
        Pauli::X => CMat::from_row_slice(2, 2, &[z, one, one, z]),
        Pauli::Y => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => CMat::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

/// Dense matrix of a signed Pauli operator. Qubit 0 is the least
/// significant bit of the basis index, so it sits on the right of the
/// Kronecker chain.
pub fn pauli_matrix(op: &PauliOperator) -> CMat {
    let mut m = CMat::from_element(1, 1, c(1.0, 0.0));
    for q in 0..op.n() {
        m = letter_matrix(op.letter(q)).kronecker(&m);
    }
    let phase = match op.phase_power() {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    };
    m * phase
}

/// Projector onto the joint +1 eigenspace: the product of (I + g)/2.
/// Only use for small qubit counts; prefer the vector-based checks.
pub fn group_projector(gens: &[PauliOperator], n: usize) -> CMat {
    let dim = 1usize << n;
    let mut proj = eye(dim);
    for g in gens {
        proj = (&proj * (eye(dim) + pauli_matrix(g))).scale(0.5);
    }
    proj
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn vec_max_diff(a: &CVec, b: &CVec) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// State vector of a stabilizer-state block: any normalized nonzero column
/// of its rank-one group projector.
pub fn block_vector(block: &LegoBlock) -> CVec {
    let proj = group_projector(block.group(), block.legs());
    let dim = proj.nrows();
    let (col, norm) = (0..dim)
        .map(|j| (j, proj.column(j).norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!(norm > 1e-9, "projector of block {} is zero", block.name());
    CVec::from_column_slice(proj.column(col).as_slice()).unscale(norm)
}

/// Projects legs `pa` and `pb` onto the Bell pair (|00> + |11>)/sqrt(2),
/// mapping a 2^L vector to a 2^(L-2) vector. The result is unnormalized;
/// a (near-)zero norm means the projection annihilated the state.
pub fn bell_project_vec(psi: &CVec, pa: usize, pb: usize) -> CVec {
    assert!(pa != pb);
    let dim_in = psi.len();
    let legs = dim_in.trailing_zeros() as usize;
    let mut out = CVec::zeros(dim_in >> 2);
    let amp = 1.0 / f64::sqrt(2.0);
    for idx in 0..dim_in {
        if (idx >> pa) & 1 != (idx >> pb) & 1 {
            continue;
        }
        let mut o = 0usize;
        let mut shift = 0;
        for q in 0..legs {
            if q == pa || q == pb {
                continue;
            }
            o |= (idx >> q & 1) << shift;
            shift += 1;
        }
        out[o] += psi[idx] * amp;
    }
    out
}

/// Applies a signed Pauli to a state vector directly (no matrix build).
pub fn apply_pauli_vec(op: &PauliOperator, psi: &CVec) -> CVec {
    let dim = psi.len();
    let mut out = CVec::zeros(dim);
    for i in 0..dim {
        let mut a = psi[i];
        let mut target = i;
        for q in 0..op.n() {
            let bit = (i >> q) & 1;
            match op.letter(q) {
                Pauli::I => {}
                Pauli::X => target ^= 1 << q,
                Pauli::Z => {
                    if bit == 1 {
                        a = -a;
                    }
                }
                Pauli::Y => {
                    target ^= 1 << q;
                    // Y|0> = i|1>, Y|1> = -i|0>
                    a *= if bit == 0 { c(0.0, 1.0) } else { c(0.0, -1.0) };
                }
            }
        }
        if op.sign().unwrap() < 0 {
            a = -a;
        }
        out[target] += a;
    }
    out
}

/// Dense state of a network, built from scratch: tensor the block state
/// vectors together and apply one Bell projection per contraction.
/// Returns the normalized vector over the open legs (qubit order = the
/// network's open-leg order), or None when some contraction annihilates
/// the state.
pub fn dense_network_vector(net: &LegoNetwork, palette: &Palette) -> Option<CVec> {
    let mut legs: Vec<(usize, usize)> = Vec::new();
    let mut psi = CVec::from_element(1, c(1.0, 0.0));
    for (bi, name) in net.blocks().iter().enumerate() {
        let block = palette.get(name).expect("palette block");
        // New legs are appended as higher-order bits: psi_new = block (x) psi.
        psi = block_vector(block).kronecker(&psi);
        for l in 0..block.legs() {
            legs.push((bi, l));
        }
    }
    for &(a, b) in net.contractions() {
        let pa = legs.iter().position(|&l| l == (a.block, a.leg)).unwrap();
        let pb = legs.iter().position(|&l| l == (b.block, b.leg)).unwrap();
        psi = bell_project_vec(&psi, pa, pb);
        legs.remove(pa.max(pb));
        legs.remove(pa.min(pb));
        let norm = psi.norm();
        if norm < 1e-6 {
            return None;
        }
        psi = psi.unscale(norm);
    }
    Some(psi)
}

/// Reference check: every derived generator fixes the dense network state.
/// Together with the maintained invariant that the generators are
/// independent and number exactly the open legs, this pins the network
/// state as the unique joint +1 eigenvector, signs included. Returns the
/// worst deviation, or None when the dense state is annihilated.
pub fn network_state_deviation(net: &LegoNetwork, palette: &Palette) -> Option<f64> {
    let psi = dense_network_vector(net, palette)?;
    assert_eq!(
        net.generators().len(),
        net.open_legs().len(),
        "generator count must equal open legs"
    );
    let mut worst = 0.0f64;
    for g in net.generators() {
        worst = worst.max(vec_max_diff(&apply_pauli_vec(g, &psi), &psi));
    }
    Some(worst)
}

/// One randomized build-and-check episode: assemble a few blocks, contract
/// random leg pairs, and after every step compare the GF(2)-derived
/// generators against the dense Bell-projection state. Degenerate
/// contractions reported by the network must correspond to an annihilated
/// dense state. Returns the worst deviation seen.
pub fn random_network_trial(seed: u64) -> f64 {
    use legoqec::error::Error;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let mut palette = Palette::standard();
    palette.register(random_block("r3", 3, &mut rng)).unwrap();
    palette.register(random_block("r4", 4, &mut rng)).unwrap();

    let mut net = LegoNetwork::new();
    let mut total = 0usize;
    let names = ["T6", "BELL", "r3", "r4", "BELL"];
    for _ in 0..rng.gen_range(1..=3) {
        let block = palette.get(names[rng.gen_range(0..names.len())]).unwrap();
        if total + block.legs() > 10 {
            continue;
        }
        net = net.add_block(block).unwrap();
        total += block.legs();
    }
    let mut worst = network_state_deviation(&net, &palette).expect("fresh blocks");

    for _ in 0..rng.gen_range(0..=3) {
        let open = net.open_legs();
        if open.len() < 2 {
            break;
        }
        let i = rng.gen_range(0..open.len());
        let mut j = rng.gen_range(0..open.len() - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (open[i], open[j]);
        match net.contract(a, b) {
            Ok(next) => {
                net = next;
                let dev = network_state_deviation(&net, &palette)
                    .expect("network accepted the contraction, oracle must too");
                worst = worst.max(dev);
            }
            Err(Error::DegenerateContraction) => {
                let psi = dense_network_vector(&net, &palette).expect("pre-state");
                let legs = net.open_legs();
                let pa = legs.iter().position(|&l| l == a).unwrap();
                let pb = legs.iter().position(|&l| l == b).unwrap();
                let norm = bell_project_vec(&psi, pa, pb).norm();
                assert!(
                    norm < 1e-6,
                    "network says degenerate, dense norm is {norm} (seed {seed})"
                );
                break;
            }
            Err(e) => panic!("unexpected contraction error: {e} (seed {seed})"),
        }
    }
    worst
}

/// Random stabilizer-state block on `legs` legs: conjugate {Z_i} through a
/// random Clifford word and flip random signs. The output is plain data
/// (letter strings); the oracle rebuilds matrices from it independently.
pub fn random_block(name: &str, legs: usize, rng: &mut impl Rng) -> LegoBlock {
    let mut gens: Vec<PauliOperator> =
        (0..legs).map(|q| PauliOperator::single(legs, q, Pauli::Z)).collect();
    for _ in 0..(8 * legs * legs).max(16) {
        match rng.gen_range(0..4) {
            0 => {
                let q = rng.gen_range(0..legs);
                gens.iter_mut().for_each(|g| g.conj_h(q));
            }
            1 => {
                let q = rng.gen_range(0..legs);
                gens.iter_mut().for_each(|g| g.conj_s(q));
            }
            2 if legs > 1 => {
                let a = rng.gen_range(0..legs);
                let mut b = rng.gen_range(0..legs - 1);
                if b >= a {
                    b += 1;
                }
                gens.iter_mut().for_each(|g| g.conj_cx(a, b));
            }
            _ => {
                let q = rng.gen_range(0..legs);
                gens.iter_mut().for_each(|g| g.conj_z(q));
            }
        }
    }
    for g in &mut gens {
        if rng.gen_bool(0.5) {
            g.negate();
        }
    }
    LegoBlock::new(name, legs, gens).expect("random block is a stabilizer state")
}

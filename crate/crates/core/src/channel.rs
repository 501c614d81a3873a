//! Single-qubit relaxation-channel toolkit.
//!
//! The relaxation step is available in three independently implemented
//! forms so they can cross-check one another:
//!
//! 1. the literal discrete map
//!    `rho -> (1-D)^2 rho + D(2-D)[P+ rho P+ + X P- rho P- X] + (D/2)(1-D)[rho - Z rho Z]`
//!    with `P± = (1 ± Z)/2` ([`apply_eq4`], [`channel_from_eq4`]),
//! 2. the auxiliary-qubit gadget `rho -> Tr_a[U (rho ⊗ |0><0|) U^†]` with
//!    `U = exp(-i theta (XX + YY))`, `sin^2 theta = D/2` ([`choi_from_gadget`]),
//! 3. standard amplitude damping with `gamma = D(2-D)`
//!    ([`amplitude_damping_kraus`]).
//!
//! Channels are compared through their Choi matrices
//! `J = sum_ij |i><j| ⊗ Phi(|i><j|)`; a trace-preserving map has unit
//! partial trace over the output factor, and complete positivity is
//! positive semidefiniteness of `J`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Config(format!(
            "relaxation strength {delta} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Apply the literal discrete relaxation map to a 2x2 operator.
pub fn apply_eq4(rho: &Mat2, delta: f64) -> Mat2 {
    let d = delta;
    let x = |m: &Mat2| [[m[1][0], m[1][1]], [m[0][0], m[0][1]]]; // X m
    let xr = |m: &Mat2| [[m[0][1], m[0][0]], [m[1][1], m[1][0]]]; // m X
    let p_plus = [[rho[0][0], ZERO], [ZERO, ZERO]]; // P+ rho P+
    let p_minus = [[ZERO, ZERO], [ZERO, rho[1][1]]]; // P- rho P-
    let x_pm_x = x(&xr(&p_minus));
    let z_rho_z = [
        [rho[0][0], -rho[0][1]],
        [-rho[1][0], rho[1][1]],
    ];
    let mut out = [[ZERO; 2]; 2];
    let w0 = (1.0 - d) * (1.0 - d);
    let w1 = d * (2.0 - d);
    let w2 = 0.5 * d * (1.0 - d);
    for r in 0..2 {
        for col in 0..2 {
            out[r][col] = c(w0, 0.0) * rho[r][col]
                + c(w1, 0.0) * (p_plus[r][col] + x_pm_x[r][col])
                + c(w2, 0.0) * (rho[r][col] - z_rho_z[r][col]);
        }
    }
    out
}

/// Kraus operators of amplitude damping with decay probability `gamma`.
pub fn amplitude_damping_kraus(gamma: f64) -> [Mat2; 2] {
    [
        [[ONE, ZERO], [ZERO, c((1.0 - gamma).sqrt(), 0.0)]],
        [[ZERO, c(gamma.sqrt(), 0.0)], [ZERO, ZERO]],
    ]
}

/// Choi matrix of a single-qubit channel, `J = sum_ij |i><j| ⊗ Phi(|i><j|)`,
/// indexed `(i*2 + r, j*2 + c)` for `Phi(|i><j|)[r][c]`.
#[derive(Clone, Debug)]
pub struct Choi {
    j: [Complex64; 16],
}

impl Choi {
    /// Build from the channel's action on the four matrix units.
    pub fn from_map(mut phi: impl FnMut(&Mat2) -> Mat2) -> Choi {
        let mut j = [ZERO; 16];
        for i in 0..2 {
            for k in 0..2 {
                let mut unit = [[ZERO; 2]; 2];
                unit[i][k] = ONE;
                let out = phi(&unit);
                for r in 0..2 {
                    for col in 0..2 {
                        j[(i * 2 + r) * 4 + (k * 2 + col)] = out[r][col];
                    }
                }
            }
        }
        Choi { j }
    }

    pub fn from_kraus(kraus: &[Mat2]) -> Choi {
        Choi::from_map(|unit| {
            let mut out = [[ZERO; 2]; 2];
            for k in kraus {
                for r in 0..2 {
                    for col in 0..2 {
                        let mut acc = ZERO;
                        for a in 0..2 {
                            for b in 0..2 {
                                acc += k[r][a] * unit[a][b] * k[col][b].conj();
                            }
                        }
                        out[r][col] += acc;
                    }
                }
            }
            out
        })
    }

    pub fn entries(&self) -> &[Complex64; 16] {
        &self.j
    }

    /// Smallest eigenvalue of the (Hermitian) Choi matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(4, &self.j)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Max-norm deviation of the output partial trace from the identity;
    /// zero for an exactly trace-preserving map.
    pub fn partial_trace_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for k in 0..2 {
                let tr: Complex64 = (0..2).map(|r| self.j[(i * 2 + r) * 4 + (k * 2 + r)]).sum();
                let expect = if i == k { ONE } else { ZERO };
                worst = worst.max((tr - expect).norm());
            }
        }
        worst
    }

    /// Verify complete positivity and trace preservation numerically.
    pub fn check_cptp(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -1e-12 {
            return Err(Error::Config(format!(
                "channel is not completely positive: Choi eigenvalue {min:.3e}"
            )));
        }
        let dev = self.partial_trace_deviation();
        if dev > 1e-12 {
            return Err(Error::Config(format!(
                "channel is not trace preserving: partial trace deviates by {dev:.3e}"
            )));
        }
        Ok(())
    }
}

/// Half the trace norm of the difference of two Choi matrices — a
/// diamond-norm proxy used to compare channel constructions.
pub fn choi_trace_distance(a: &Choi, b: &Choi) -> f64 {
    let mut diff = [ZERO; 16];
    for (i, d) in diff.iter_mut().enumerate() {
        *d = a.j[i] - b.j[i];
    }
    0.5 * hermitian_eigenvalues(4, &diff)
        .into_iter()
        .map(f64::abs)
        .sum::<f64>()
}

/// The discrete relaxation map as a verified CPTP channel in Choi form.
pub fn channel_from_eq4(delta: f64) -> Result<Choi> {
    check_delta(delta)?;
    let choi = Choi::from_map(|unit| apply_eq4(unit, delta));
    choi.check_cptp()?;
    Ok(choi)
}

/// Independent construction: conjugate by the partial-swap unitary with a
/// fresh `|0>` auxiliary and trace the auxiliary out.
pub fn choi_from_gadget(delta: f64) -> Result<Choi> {
    check_delta(delta)?;
    let theta = (delta / 2.0).sqrt().asin();
    let (cos, sin) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    // Basis index: system bit + 2 * auxiliary bit.
    let mut u = [[ZERO; 4]; 4];
    u[0][0] = ONE;
    u[3][3] = ONE;
    u[1][1] = c(cos, 0.0);
    u[2][2] = c(cos, 0.0);
    u[1][2] = c(0.0, -sin);
    u[2][1] = c(0.0, -sin);
    Ok(Choi::from_map(|unit| {
        // unit ⊗ |0><0| on the auxiliary.
        let mut full = [[ZERO; 4]; 4];
        for r in 0..2 {
            for col in 0..2 {
                full[r][col] = unit[r][col];
            }
        }
        // U full U^†
        let mut tmp = [[ZERO; 4]; 4];
        for r in 0..4 {
            for col in 0..4 {
                let mut acc = ZERO;
                for k in 0..4 {
                    acc += u[r][k] * full[k][col];
                }
                tmp[r][col] = acc;
            }
        }
        let mut out4 = [[ZERO; 4]; 4];
        for r in 0..4 {
            for col in 0..4 {
                let mut acc = ZERO;
                for k in 0..4 {
                    acc += tmp[r][k] * u[col][k].conj();
                }
                out4[r][col] = acc;
            }
        }
        // Trace out the auxiliary (high bit).
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for col in 0..2 {
                out[r][col] = out4[r][col] + out4[r + 2][col + 2];
            }
        }
        out
    }))
}

/// Eigenvalues of an `n x n` complex Hermitian matrix (row-major), by
/// cyclic Jacobi rotations with pivot search. Only the Hermitian part of
/// the input is consulted. Intended for the small matrices used here.
pub(crate) fn hermitian_eigenvalues(n: usize, a: &[Complex64]) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let idx = |r: usize, c: usize| r * n + c;
    for _ in 0..10_000 {
        let mut p = 0;
        let mut q = 0;
        let mut best = 0.0f64;
        for r in 0..n {
            for col in r + 1..n {
                let v = m[idx(r, col)].norm();
                if v > best {
                    best = v;
                    p = r;
                    q = col;
                }
            }
        }
        if best < 1e-15 {
            break;
        }
        let app = m[idx(p, p)].re;
        let aqq = m[idx(q, q)].re;
        let apq = m[idx(p, q)];
        let half_gap = 0.5 * (app - aqq);
        let disc = (half_gap * half_gap + apq.norm_sqr()).sqrt();
        let lam = 0.5 * (app + aqq) + disc;
        // Eigenvector for lam, picking the numerically robust form.
        let (v0, v1) = if app >= aqq {
            (c(lam - aqq, 0.0), apq.conj())
        } else {
            (apq, c(lam - app, 0.0))
        };
        let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        let (g00, g10) = (v0 / norm, v1 / norm);
        // Orthogonal second column.
        let (g01, g11) = (-g10.conj(), g00.conj());
        for i in 0..n {
            let aip = m[idx(i, p)];
            let aiq = m[idx(i, q)];
            m[idx(i, p)] = aip * g00 + aiq * g10;
            m[idx(i, q)] = aip * g01 + aiq * g11;
        }
        for jcol in 0..n {
            let apj = m[idx(p, jcol)];
            let aqj = m[idx(q, jcol)];
            m[idx(p, jcol)] = g00.conj() * apj + g10.conj() * aqj;
            m[idx(q, jcol)] = g01.conj() * apj + g11.conj() * aqj;
        }
    }
    (0..n).map(|i| m[idx(i, i)].re).collect()
}

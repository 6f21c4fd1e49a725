//! Discrete-velocity wave models and their moment bases.
//!
//! A wave model carries `k` kinetic waves per conserved variable; every
//! matrix of the kinetic description (moments matrix `Q`, its inverse, the
//! reduced matrix `Qbar` and its pseudo-inverse) has Kronecker structure
//! `M_scalar (x) I_p`, so only the scalar `k x k` blocks are stored and all
//! transforms run on `p`-vectors per scalar lattice row.

use crate::linalg;
use crate::{Error, Result};

/// Number of space dimensions; the schemes here are two-dimensional.
pub const DIM: usize = 2;

/// Number of Jin-Xin components per conserved variable: `u, v1, v2`.
pub const JX: usize = DIM + 1;

/// Discrete-velocity model: `k` waves, `p` conserved variables, signed
/// speeds per direction. Immutable after construction; safe to share.
#[derive(Debug, Clone)]
pub struct WaveModel {
    pub k: usize,
    pub p: usize,
    /// Scalar kinetic speed scale; `max_w |lambda[i][w]| == a` per direction.
    pub a: f64,
    /// Signed speed of wave `w` in direction `i` (scalar lattice block).
    pub lambda: [Vec<f64>; DIM],
}

impl WaveModel {
    /// Isotropic speed norm shared by the direction matrices.
    pub fn speed_norm(&self) -> f64 {
        self.a
    }

    /// Index of the wave obtained by mirroring wave `w` across the plane
    /// normal to `axis` (speeds: the `axis` component flips, others keep).
    pub fn mirror_wave(&self, w: usize, axis: usize) -> usize {
        let target: Vec<f64> = (0..DIM)
            .map(|i| {
                if i == axis {
                    -self.lambda[i][w]
                } else {
                    self.lambda[i][w]
                }
            })
            .collect();
        for m in 0..self.k {
            if (0..DIM).all(|i| (self.lambda[i][m] - target[i]).abs() <= 1e-12 * self.a) {
                return m;
            }
        }
        unreachable!("wave set is mirror-symmetric by construction");
    }
}

/// Moment basis attached to a wave model. Scalar blocks only; the full
/// matrices are these blocks Kronecker-multiplied with `I_p`.
#[derive(Debug, Clone)]
pub struct MomentBasis {
    pub k: usize,
    /// `k x k`: rows are the projector, the flux rows, then the high-order rows.
    pub q: Vec<f64>,
    /// `k x k` inverse of `q`.
    pub q_inv: Vec<f64>,
    /// `3 x k` reduced moments matrix (projector + flux rows).
    pub q_bar: Vec<f64>,
    /// `k x 3` pseudo-inverse of `q_bar` (first three columns of `q_inv`).
    pub q_bar_plus: Vec<f64>,
    /// `(k-3) x k` high-order rows; annihilate every Maxwellian.
    pub h: Vec<f64>,
}

impl MomentBasis {
    fn from_q(k: usize, q: Vec<f64>) -> Result<Self> {
        let q_inv = linalg::invert(&q, k)
            .map_err(|_| Error::config("moments matrix is singular"))?;
        let mut q_bar = vec![0.0; JX * k];
        q_bar.copy_from_slice(&q[..JX * k]);
        let mut q_bar_plus = vec![0.0; k * JX];
        for w in 0..k {
            for j in 0..JX {
                q_bar_plus[w * JX + j] = q_inv[w * k + j];
            }
        }
        let h = q[JX * k..].to_vec();
        Ok(MomentBasis {
            k,
            q,
            q_inv,
            q_bar,
            q_bar_plus,
            h,
        })
    }

    /// High-order moment count `h = k - d - 1`.
    pub fn high_order_count(&self) -> usize {
        self.k - JX
    }

    /// Expand a scalar `r x c` block to the full `(r p) x (c p)` matrix.
    pub fn kron_identity(block: &[f64], rows: usize, cols: usize, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; rows * p * cols * p];
        for i in 0..rows {
            for j in 0..cols {
                let v = block[i * cols + j];
                if v != 0.0 {
                    for c in 0..p {
                        out[(i * p + c) * cols * p + j * p + c] = v;
                    }
                }
            }
        }
        out
    }
}

fn check_speed(a: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(Error::config(format!("kinetic speed must be positive, got {a}")));
    }
    Ok(())
}

/// Four-wave model: speeds `(-a, a)` along each axis, one high-order moment.
pub fn build_d2q4(a: f64, p: usize) -> Result<(WaveModel, MomentBasis)> {
    check_speed(a)?;
    if p == 0 {
        return Err(Error::config("need at least one conserved variable"));
    }
    let lambda1 = vec![-a, a, 0.0, 0.0];
    let lambda2 = vec![0.0, 0.0, -a, a];
    let q = vec![
        1.0, 1.0, 1.0, 1.0, //
        -a, a, 0.0, 0.0, //
        0.0, 0.0, -a, a, //
        1.0, 1.0, -1.0, -1.0,
    ];
    let model = WaveModel {
        k: 4,
        p,
        a,
        lambda: [lambda1, lambda2],
    };
    let basis = MomentBasis::from_q(4, q)?;
    Ok((model, basis))
}

/// Eight-wave model with speeds `a` on the axes and `a*sqrt(2)` on the
/// diagonals; five high-order moments. Used for property coverage, the
/// solver paths default to D2Q4.
pub fn build_d2q8(a: f64, p: usize) -> Result<(WaveModel, MomentBasis)> {
    check_speed(a)?;
    if p == 0 {
        return Err(Error::config("need at least one conserved variable"));
    }
    let k = 8;
    let mut lambda1 = vec![0.0; k];
    let mut lambda2 = vec![0.0; k];
    for (i, (l1, l2)) in lambda1.iter_mut().zip(lambda2.iter_mut()).enumerate() {
        let speed = if i % 2 == 0 {
            a
        } else {
            a * std::f64::consts::SQRT_2
        };
        let theta = i as f64 * std::f64::consts::FRAC_PI_4;
        // Snap the axis-aligned entries to exact values.
        let c = theta.cos();
        let s = theta.sin();
        *l1 = round_clean(speed * c, a);
        *l2 = round_clean(speed * s, a);
    }
    let a2 = a * a;
    let a3 = a2 * a;
    let mut q = vec![0.0; k * k];
    for w in 0..k {
        q[w] = 1.0;
        q[k + w] = lambda1[w];
        q[2 * k + w] = lambda2[w];
        q[3 * k + w] = 4.0 * lambda1[w] * lambda1[w] - 3.0 * a2;
        q[4 * k + w] = 4.0 * lambda2[w] * lambda2[w] - 3.0 * a2;
        q[5 * k + w] = lambda1[w] * lambda2[w];
        q[6 * k + w] = 3.0 * lambda1[w] * lambda1[w] * lambda2[w] - 2.0 * a2 * lambda2[w];
        q[7 * k + w] = 3.0 * lambda2[w] * lambda2[w] * lambda1[w] - 2.0 * a2 * lambda1[w];
    }
    let _ = a3;
    let model = WaveModel {
        k,
        p,
        a,
        lambda: [lambda1, lambda2],
    };
    let basis = MomentBasis::from_q(k, q)?;
    Ok((model, basis))
}

fn round_clean(v: f64, scale: f64) -> f64 {
    // cos/sin of multiples of pi/4 evaluate to +-a, 0 or +-a up to 1 ulp;
    // snap so the zero-speed sweeps can be skipped exactly.
    if v.abs() < 1e-14 * scale {
        0.0
    } else if (v.abs() - scale).abs() < 1e-14 * scale {
        scale.copysign(v)
    } else {
        v
    }
}

/// Equilibrium distribution for conserved variables `u` and flux values
/// `f1, f2`; writes the `k*p` result into `out`.
pub fn maxwellian(
    model: &WaveModel,
    basis: &MomentBasis,
    u: &[f64],
    f1: &[f64],
    f2: &[f64],
    out: &mut [f64],
) {
    let p = model.p;
    debug_assert_eq!(out.len(), model.k * p);
    for w in 0..model.k {
        let c0 = basis.q_bar_plus[w * JX];
        let c1 = basis.q_bar_plus[w * JX + 1];
        let c2 = basis.q_bar_plus[w * JX + 2];
        let dst = &mut out[w * p..(w + 1) * p];
        for c in 0..p {
            dst[c] = c0 * u[c] + c1 * f1[c] + c2 * f2[c];
        }
    }
}

/// Moments `m = Q F` of a distribution vector (`k*p` in, `k*p` out).
pub fn to_moments(model: &WaveModel, basis: &MomentBasis, f: &[f64], out: &mut [f64]) {
    let (k, p) = (model.k, model.p);
    debug_assert_eq!(f.len(), k * p);
    debug_assert_eq!(out.len(), k * p);
    out.fill(0.0);
    for j in 0..k {
        for w in 0..k {
            let coeff = basis.q[j * k + w];
            if coeff != 0.0 {
                for c in 0..p {
                    out[j * p + c] += coeff * f[w * p + c];
                }
            }
        }
    }
}

/// Inverse of [`to_moments`]: `F = Q^{-1} m`.
pub fn from_moments(model: &WaveModel, basis: &MomentBasis, m: &[f64], out: &mut [f64]) {
    let (k, p) = (model.k, model.p);
    debug_assert_eq!(m.len(), k * p);
    debug_assert_eq!(out.len(), k * p);
    out.fill(0.0);
    for w in 0..k {
        for j in 0..k {
            let coeff = basis.q_inv[w * k + j];
            if coeff != 0.0 {
                for c in 0..p {
                    out[w * p + c] += coeff * m[j * p + c];
                }
            }
        }
    }
}

/// Distribution of a regularized state: `F = Qbar^+ U` with
/// `U = (u, v1, v2)` of length `3p`.
pub fn reconstruct(model: &WaveModel, basis: &MomentBasis, u_jx: &[f64], out: &mut [f64]) {
    let p = model.p;
    debug_assert_eq!(u_jx.len(), JX * p);
    debug_assert_eq!(out.len(), model.k * p);
    maxwellian(
        model,
        basis,
        &u_jx[..p],
        &u_jx[p..2 * p],
        &u_jx[2 * p..3 * p],
        out,
    );
}

/// Reduced moments `U = Qbar F` of a distribution vector.
pub fn reduce(model: &WaveModel, basis: &MomentBasis, f: &[f64], out: &mut [f64]) {
    let (k, p) = (model.k, model.p);
    debug_assert_eq!(out.len(), JX * p);
    out.fill(0.0);
    for j in 0..JX {
        for w in 0..k {
            let coeff = basis.q_bar[j * k + w];
            if coeff != 0.0 {
                for c in 0..p {
                    out[j * p + c] += coeff * f[w * p + c];
                }
            }
        }
    }
}

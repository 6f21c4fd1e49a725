//! Target physical systems: fluxes, flux Jacobians, diffusion blocks and
//! convective wave-speed bounds.

use crate::lattice::DIM;

/// A convection-diffusion system with `p` conserved variables.
///
/// All methods are pure functions of value inputs. Admissibility is checked
/// by the harness and the steppers, not inside the hot flux kernels.
pub trait System: Sync + Send + Clone {
    fn p(&self) -> usize;

    fn flux(&self, u: &[f64], dir: usize, out: &mut [f64]);

    /// Analytic Jacobian of [`System::flux`], row-major `p x p`.
    fn flux_jacobian(&self, u: &[f64], dir: usize, out: &mut [f64]);

    /// Diffusion block `D_ij(u)`, row-major `p x p`.
    fn diffusion_block(&self, u: &[f64], i: usize, j: usize, out: &mut [f64]);

    /// Max over directions of the convective spectral radius at `u`.
    fn max_wave_speed(&self, u: &[f64]) -> f64;

    fn admissible(&self, u: &[f64]) -> bool;

    /// Signs of the state reflection across a plane with normal `axis`
    /// (diagonal of the mirror operator; the normal momentum flips).
    fn reflect_signs(&self, axis: usize) -> Vec<f64>;

    /// True when the relaxation matrix does not depend on the local state,
    /// letting the steppers cache one factorization per step.
    fn state_independent_relaxation(&self) -> bool {
        false
    }

    fn has_diffusion(&self) -> bool;
}

/// Scalar advection-diffusion: fluxes `c_i u`, diffusion `alpha * I`.
#[derive(Debug, Clone)]
pub struct ScalarAdvectionDiffusion {
    pub c: [f64; DIM],
    pub alpha: f64,
}

impl ScalarAdvectionDiffusion {
    pub fn new(c1: f64, c2: f64, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "diffusion coefficient must be nonnegative");
        ScalarAdvectionDiffusion { c: [c1, c2], alpha }
    }
}

impl System for ScalarAdvectionDiffusion {
    fn p(&self) -> usize {
        1
    }

    fn flux(&self, u: &[f64], dir: usize, out: &mut [f64]) {
        out[0] = self.c[dir] * u[0];
    }

    fn flux_jacobian(&self, _u: &[f64], dir: usize, out: &mut [f64]) {
        out[0] = self.c[dir];
    }

    fn diffusion_block(&self, _u: &[f64], i: usize, j: usize, out: &mut [f64]) {
        out[0] = if i == j { self.alpha } else { 0.0 };
    }

    fn max_wave_speed(&self, _u: &[f64]) -> f64 {
        self.c[0].abs().max(self.c[1].abs())
    }

    fn admissible(&self, u: &[f64]) -> bool {
        u[0].is_finite()
    }

    fn reflect_signs(&self, _axis: usize) -> Vec<f64> {
        vec![1.0]
    }

    fn state_independent_relaxation(&self) -> bool {
        true
    }

    fn has_diffusion(&self) -> bool {
        self.alpha != 0.0
    }
}

/// Compressible Navier-Stokes in two dimensions with an ideal-gas EOS,
/// state ordering `(rho, rho u, rho v, E)`.
#[derive(Debug, Clone)]
pub struct CompressibleNavierStokes {
    pub gamma: f64,
    pub mu: f64,
    /// Second viscosity; Stokes' hypothesis `-2 mu / 3` unless overridden.
    pub lambda2: f64,
    pub pr: f64,
}

impl CompressibleNavierStokes {
    pub fn new(gamma: f64, mu: f64, pr: f64) -> Self {
        assert!(gamma > 1.0 && pr > 0.0 && mu >= 0.0);
        CompressibleNavierStokes {
            gamma,
            mu,
            lambda2: -2.0 * mu / 3.0,
            pr,
        }
    }

    pub fn with_second_viscosity(mut self, lambda2: f64) -> Self {
        self.lambda2 = lambda2;
        self
    }

    pub fn pressure(&self, u: &[f64]) -> f64 {
        let rho = u[0];
        (self.gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / rho)
    }

    /// `T = P / rho`.
    pub fn temperature(&self, u: &[f64]) -> f64 {
        self.pressure(u) / u[0]
    }

    pub fn sound_speed(&self, u: &[f64]) -> f64 {
        (self.gamma * self.pressure(u) / u[0]).sqrt()
    }

    pub fn state_from(&self, rho: f64, vel: [f64; DIM], p: f64) -> [f64; 4] {
        let e = p / (self.gamma - 1.0) + 0.5 * rho * (vel[0] * vel[0] + vel[1] * vel[1]);
        [rho, rho * vel[0], rho * vel[1], e]
    }

    pub fn velocity(&self, u: &[f64]) -> [f64; DIM] {
        [u[1] / u[0], u[2] / u[0]]
    }
}

impl System for CompressibleNavierStokes {
    fn p(&self) -> usize {
        4
    }

    fn flux(&self, u: &[f64], dir: usize, out: &mut [f64]) {
        // admissibility is policed by the steppers and the harness; DeC
        // stage iterates may transiently leave the admissible set
        let rho = u[0];
        let vx = u[1] / rho;
        let vy = u[2] / rho;
        let p = self.pressure(u);
        match dir {
            0 => {
                out[0] = u[1];
                out[1] = u[1] * vx + p;
                out[2] = u[2] * vx;
                out[3] = (u[3] + p) * vx;
            }
            _ => {
                out[0] = u[2];
                out[1] = u[1] * vy;
                out[2] = u[2] * vy + p;
                out[3] = (u[3] + p) * vy;
            }
        }
    }

    fn flux_jacobian(&self, u: &[f64], dir: usize, out: &mut [f64]) {
        let g = self.gamma;
        let rho = u[0];
        let vx = u[1] / rho;
        let vy = u[2] / rho;
        let q2 = vx * vx + vy * vy;
        let h = (u[3] + self.pressure(u)) / rho;
        match dir {
            0 => {
                out.copy_from_slice(&[
                    0.0,
                    1.0,
                    0.0,
                    0.0,
                    0.5 * (g - 1.0) * q2 - vx * vx,
                    (3.0 - g) * vx,
                    -(g - 1.0) * vy,
                    g - 1.0,
                    -vx * vy,
                    vy,
                    vx,
                    0.0,
                    vx * (0.5 * (g - 1.0) * q2 - h),
                    h - (g - 1.0) * vx * vx,
                    -(g - 1.0) * vx * vy,
                    g * vx,
                ]);
            }
            _ => {
                out.copy_from_slice(&[
                    0.0,
                    0.0,
                    1.0,
                    0.0,
                    -vx * vy,
                    vy,
                    vx,
                    0.0,
                    0.5 * (g - 1.0) * q2 - vy * vy,
                    -(g - 1.0) * vx,
                    (3.0 - g) * vy,
                    g - 1.0,
                    vy * (0.5 * (g - 1.0) * q2 - h),
                    -(g - 1.0) * vx * vy,
                    h - (g - 1.0) * vy * vy,
                    g * vy,
                ]);
            }
        }
    }

    fn diffusion_block(&self, u: &[f64], i: usize, j: usize, out: &mut [f64]) {
        let rho = u[0];
        let vx = u[1] / rho;
        let vy = u[2] / rho;
        let mu = self.mu;
        let la = self.lambda2;
        let g = self.gamma;
        let pr = self.pr;
        let ir = 1.0 / rho;
        let m2l = 2.0 * mu + la;
        let kth = g * mu / pr; // heat-conduction coefficient on the energy row
        let e_rho = u[3] / rho;
        out.fill(0.0);
        match (i, j) {
            (0, 0) => {
                out[4] = -m2l * vx * ir;
                out[5] = m2l * ir;
                out[8] = -mu * vy * ir;
                out[10] = mu * ir;
                out[12] = (-m2l * vx * vx - mu * vy * vy
                    - kth * (e_rho - vx * vx - vy * vy))
                    * ir;
                out[13] = (m2l - kth) * vx * ir;
                out[14] = (mu - kth) * vy * ir;
                out[15] = kth * ir;
            }
            (0, 1) => {
                out[4] = -la * vy * ir;
                out[6] = la * ir;
                out[8] = -mu * vx * ir;
                out[9] = mu * ir;
                out[12] = -(mu + la) * vx * vy * ir;
                out[13] = mu * vy * ir;
                out[14] = la * vx * ir;
                // (4,4) entry is zero: the cross-block energy row carries no E term.
            }
            (1, 0) => {
                out[4] = -mu * vy * ir;
                out[6] = mu * ir;
                out[8] = -la * vx * ir;
                out[9] = la * ir;
                out[12] = -(mu + la) * vx * vy * ir;
                out[13] = la * vy * ir;
                out[14] = mu * vx * ir;
            }
            (1, 1) => {
                out[4] = -mu * vx * ir;
                out[5] = mu * ir;
                out[8] = -m2l * vy * ir;
                out[10] = m2l * ir;
                out[12] = (-m2l * vy * vy - mu * vx * vx
                    - kth * (e_rho - vx * vx - vy * vy))
                    * ir;
                out[13] = (mu - kth) * vx * ir;
                out[14] = (m2l - kth) * vy * ir;
                out[15] = kth * ir;
            }
            _ => unreachable!("two-dimensional system"),
        }
    }

    fn max_wave_speed(&self, u: &[f64]) -> f64 {
        // guard the square root: transiently negative pressures near a
        // freshly broken diaphragm must not poison the global CFL scan
        let c2 = (self.gamma * self.pressure(u) / u[0]).max(0.0);
        let c = c2.sqrt();
        let [vx, vy] = self.velocity(u);
        (vx.abs() + c).max(vy.abs() + c)
    }

    fn admissible(&self, u: &[f64]) -> bool {
        u.iter().all(|v| v.is_finite()) && u[0] > 0.0 && self.pressure(u) > 0.0
    }

    fn reflect_signs(&self, axis: usize) -> Vec<f64> {
        let mut s = vec![1.0; 4];
        s[1 + axis] = -1.0;
        s
    }

    fn has_diffusion(&self) -> bool {
        self.mu != 0.0 || self.lambda2 != 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn ns() -> CompressibleNavierStokes {
        CompressibleNavierStokes::new(1.4, 0.01, 0.73)
    }

    fn random_admissible(rng: &mut impl Rng, sys: &CompressibleNavierStokes) -> [f64; 4] {
        let rho = rng.random_range(0.1..10.0);
        let vx = rng.random_range(-3.0..3.0);
        let vy = rng.random_range(-3.0..3.0);
        let p = rng.random_range(0.1..10.0);
        sys.state_from(rho, [vx, vy], p)
    }

    #[test]
    fn scalar_flux_and_bounds() {
        let sys = ScalarAdvectionDiffusion::new(10.0, 10.0, 0.01);
        let mut out = [0.0];
        sys.flux(&[2.0], 0, &mut out);
        assert_eq!(out[0], 20.0);
        sys.flux(&[2.0], 1, &mut out);
        assert_eq!(out[0], 20.0);
        sys.flux_jacobian(&[2.0], 0, &mut out);
        assert_eq!(out[0], 10.0);
        assert_eq!(sys.max_wave_speed(&[1.0]), 10.0);
        sys.diffusion_block(&[1.0], 0, 0, &mut out);
        assert_eq!(out[0], 0.01);
        sys.diffusion_block(&[1.0], 0, 1, &mut out);
        assert_eq!(out[0], 0.0);
    }

    #[test]
    fn ns_flux_values() {
        let sys = ns();
        let mut f = [0.0; 4];
        sys.flux(&[1.0, 0.0, 0.0, 2.5], 0, &mut f);
        // P = 1 at rest
        assert_abs_diff_eq!(f[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[3], 0.0, epsilon = 1e-15);
        sys.flux(&[1.0, 1.0, 0.0, 3.0], 0, &mut f);
        assert_abs_diff_eq!(f[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f[2], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f[3], 4.0, epsilon = 1e-14);
    }

    #[test]
    fn ns_wave_speeds() {
        let sys = ns();
        let rest = [1.0, 0.0, 0.0, 2.5];
        assert_abs_diff_eq!(sys.max_wave_speed(&rest), 1.4f64.sqrt(), epsilon = 1e-13);
        let moving = [1.0, 1.0, 0.0, 3.0];
        assert_abs_diff_eq!(
            sys.max_wave_speed(&moving),
            1.0 + 1.4f64.sqrt(),
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(sys.max_wave_speed(&moving), 2.1832, epsilon = 2e-4);
    }

    #[test]
    fn ns_jacobian_spectral_radius_oracle() {
        // Eigenvalues of the convective Jacobian are {v - c, v, v + c}.
        let sys = ns();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let u = random_admissible(&mut rng, &sys);
            for dir in 0..2 {
                let mut jac = [0.0; 16];
                sys.flux_jacobian(&u, dir, &mut jac);
                let m = nalgebra::DMatrix::from_row_slice(4, 4, &jac);
                let radius = m
                    .complex_eigenvalues()
                    .iter()
                    .fold(0.0f64, |s, z| s.max(z.norm()));
                let vel = sys.velocity(&u)[dir];
                let expect = vel.abs() + sys.sound_speed(&u);
                assert_abs_diff_eq!(radius, expect, epsilon = 1e-8 * expect);
            }
        }
        let rest = [1.0, 0.0, 0.0, 2.5];
        let mut jac = [0.0; 16];
        sys.flux_jacobian(&rest, 0, &mut jac);
        let m = nalgebra::DMatrix::from_row_slice(4, 4, &jac);
        let radius = m
            .complex_eigenvalues()
            .iter()
            .fold(0.0f64, |s, z| s.max(z.norm()));
        assert_abs_diff_eq!(radius, 1.4f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn ns_jacobian_matches_finite_differences() {
        let sys = ns();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let u = random_admissible(&mut rng, &sys);
            for dir in 0..2 {
                let mut jac = [0.0; 16];
                sys.flux_jacobian(&u, dir, &mut jac);
                for col in 0..4 {
                    let h = 1e-6 * (1.0 + u[col].abs());
                    let mut up = u;
                    let mut dn = u;
                    up[col] += h;
                    dn[col] -= h;
                    let mut fp = [0.0; 4];
                    let mut fm = [0.0; 4];
                    sys.flux(&up, dir, &mut fp);
                    sys.flux(&dn, dir, &mut fm);
                    for row in 0..4 {
                        let fd = (fp[row] - fm[row]) / (2.0 * h);
                        let scale = 1.0 + jac[row * 4 + col].abs();
                        assert!(
                            (jac[row * 4 + col] - fd).abs() <= 1e-5 * scale,
                            "dir {dir} entry ({row},{col}): {} vs {}",
                            jac[row * 4 + col],
                            fd
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn ns_diffusion_rest_state_rows() {
        let sys = ns();
        let rest = [1.0, 0.0, 0.0, 2.5];
        let mut d = [0.0; 16];
        sys.diffusion_block(&rest, 0, 0, &mut d);
        let m2l = 2.0 * sys.mu + sys.lambda2;
        assert_abs_diff_eq!(d[5], m2l, epsilon = 1e-15);
        assert_abs_diff_eq!(m2l, 0.013333333333333334, epsilon = 1e-15);
        assert_eq!(&d[0..4], &[0.0, 0.0, 0.0, 0.0]); // mass has no diffusion
        assert_abs_diff_eq!(d[12], -1.4 * 0.01 * 2.5 / 0.73, epsilon = 1e-15);
        assert_abs_diff_eq!(d[12], -0.0479452, epsilon = 1e-7);
        assert_abs_diff_eq!(d[15], 1.4 * 0.01 / 0.73, epsilon = 1e-15);
        for (i, j) in [(0usize, 1usize), (1, 0), (1, 1)] {
            sys.diffusion_block(&rest, i, j, &mut d);
            assert_eq!(&d[0..4], &[0.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn ns_direction_relabeling_symmetry() {
        // Swapping the two space directions together with (rho u, rho v)
        // maps f1 <-> f2 and D11 <-> D22, D12 <-> D21.
        let sys = ns();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let perm = [0usize, 2, 1, 3];
        for _ in 0..20 {
            let u = random_admissible(&mut rng, &sys);
            let su = [u[0], u[2], u[1], u[3]];
            let mut f1 = [0.0; 4];
            let mut f2s = [0.0; 4];
            sys.flux(&u, 0, &mut f1);
            sys.flux(&su, 1, &mut f2s);
            for i in 0..4 {
                assert_abs_diff_eq!(f2s[perm[i]], f1[i], epsilon = 1e-12);
            }
            let pairs = [((0, 0), (1, 1)), ((0, 1), (1, 0))];
            for ((i1, j1), (i2, j2)) in pairs {
                let mut d_orig = [0.0; 16];
                let mut d_swap = [0.0; 16];
                sys.diffusion_block(&u, i1, j1, &mut d_orig);
                sys.diffusion_block(&su, i2, j2, &mut d_swap);
                for r in 0..4 {
                    for c in 0..4 {
                        assert_abs_diff_eq!(
                            d_swap[perm[r] * 4 + perm[c]],
                            d_orig[r * 4 + c],
                            epsilon = 1e-12
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn eos_round_trips() {
        let sys = ns();
        let u = sys.state_from(1.0, [0.0, 0.0], 1.0);
        assert_abs_diff_eq!(sys.pressure(&u), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(sys.temperature(&u), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(u[3], 2.5, epsilon = 1e-14);

        // Couette left-wall state.
        let vl = 1.3 * 1.4f64.sqrt();
        let wall = sys.state_from(1.0, [0.0, vl], 1.0);
        assert_abs_diff_eq!(sys.temperature(&wall), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(wall[2], vl, epsilon = 1e-13);

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let rho = rng.random_range(0.05..20.0);
            let vel = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let p = rng.random_range(0.05..20.0);
            let u = sys.state_from(rho, vel, p);
            assert!((sys.pressure(&u) - p).abs() <= 1e-13 * p.max(1.0));
            assert!(sys.admissible(&u));
        }
        assert!(!sys.admissible(&[-1.0, 0.0, 0.0, 1.0]));
        assert!(!sys.admissible(&[1.0, 0.0, 0.0, -1.0]));
    }

    #[test]
    fn reflect_signs_flip_normal_momentum() {
        let sys = ns();
        assert_eq!(sys.reflect_signs(0), vec![1.0, -1.0, 1.0, 1.0]);
        assert_eq!(sys.reflect_signs(1), vec![1.0, 1.0, -1.0, 1.0]);
        let scalar = ScalarAdvectionDiffusion::new(1.0, 1.0, 0.0);
        assert_eq!(scalar.reflect_signs(1), vec![1.0]);
    }
}

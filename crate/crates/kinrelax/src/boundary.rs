//! Wall and symmetry boundary treatment.
//!
//! Walls impose a flux, not ghost values: the boundary distribution
//! `F_b = Qbar^+ (u_b, v_b)` carries the imposed state plus a linearly
//! extrapolated diffusive flux normal to the wall, and interfaces within
//! three cells of a wall switch to the stencils of the near-wall flux plan.
//! Symmetry sides mirror ghost cells with the normal momentum and the
//! normal flux negated.

use crate::lattice::{self, MomentBasis, WaveModel, JX};
use crate::space::{Field, Grid2d, Side};
use crate::systems::{CompressibleNavierStokes, ScalarAdvectionDiffusion, System};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WallKind {
    Isothermal { t_wall: f64 },
    Adiabatic,
}

/// Wall boundary: thermal kind plus the imposed wall velocity
/// (tangential wall motion is what drives a Couette flow).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallSpec {
    pub kind: WallKind,
    pub velocity: [f64; 2],
}

impl WallSpec {
    pub fn isothermal(t_wall: f64, velocity: [f64; 2]) -> Self {
        WallSpec {
            kind: WallKind::Isothermal { t_wall },
            velocity,
        }
    }

    pub fn adiabatic(velocity: [f64; 2]) -> Self {
        WallSpec {
            kind: WallKind::Adiabatic,
            velocity,
        }
    }

    pub fn adiabatic_static() -> Self {
        WallSpec::adiabatic([0.0, 0.0])
    }
}

/// Flux formula choice for one near-wall interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxChoice {
    /// Regular upwind flux of the given order.
    Order(u8),
    /// Second-order one-sided flux through the boundary distribution.
    Star2,
}

/// Per-interface flux selection for the first three interfaces next to a
/// wall, split by whether the wave leaves the wall or enters it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFluxPlan {
    pub leaving: [FluxChoice; 3],
    pub entering: [FluxChoice; 3],
}

impl BoundaryFluxPlan {
    pub fn pick(&self, leaving: bool) -> &[FluxChoice; 3] {
        if leaving {
            &self.leaving
        } else {
            &self.entering
        }
    }
}

/// Flux plan next to a wall for a given scheme order. Waves leaving the
/// wall lack upwind neighbors and drop to one-sided low-order formulas;
/// waves entering the wall keep their full stencils.
pub fn near_wall_flux_plan(order: usize) -> BoundaryFluxPlan {
    use FluxChoice::*;
    match order {
        1 => BoundaryFluxPlan {
            leaving: [Order(1); 3],
            entering: [Order(1); 3],
        },
        2 => BoundaryFluxPlan {
            leaving: [Star2, Order(2), Order(2)],
            entering: [Order(2); 3],
        },
        4 => BoundaryFluxPlan {
            leaving: [Star2, Order(2), Order(4)],
            entering: [Order(4); 3],
        },
        _ => panic!("unsupported scheme order {order}"),
    }
}

/// Wall-state closure: assemble the full conserved state imposed at a wall
/// from the wall specification and the first two interior cells.
///
/// `wall_state` halts on an inadmissible extrapolation; the unchecked
/// variant returns the raw extrapolated values, which the DeC stage sweeps
/// need because stage iterates can transiently leave the admissible set
/// next to a strong discontinuity.
pub trait WallStateClosure: System {
    fn wall_state(&self, spec: &WallSpec, u1: &[f64], u2: &[f64], out: &mut [f64]) -> Result<()>;

    fn wall_state_unchecked(
        &self,
        spec: &WallSpec,
        u1: &[f64],
        u2: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        self.wall_state(spec, u1, u2, out)
    }
}

impl CompressibleNavierStokes {
    fn wall_state_parts(&self, spec: &WallSpec, u1: &[f64], u2: &[f64]) -> (f64, f64) {
        let p1 = self.pressure(u1);
        let p2 = self.pressure(u2);
        // zero normal pressure gradient via second-order extrapolation
        let pb = 1.125 * p1 - 0.125 * p2;
        let tb = match spec.kind {
            WallKind::Isothermal { t_wall } => t_wall,
            WallKind::Adiabatic => 1.125 * self.temperature(u1) - 0.125 * self.temperature(u2),
        };
        (pb, tb)
    }
}

impl WallStateClosure for CompressibleNavierStokes {
    fn wall_state(&self, spec: &WallSpec, u1: &[f64], u2: &[f64], out: &mut [f64]) -> Result<()> {
        let (pb, tb) = self.wall_state_parts(spec, u1, u2);
        if !(pb > 0.0) || !(tb > 0.0) {
            return Err(Error::numerical(format!(
                "inadmissible wall state: extrapolated P = {pb:.6e}, T = {tb:.6e}"
            )));
        }
        let state = self.state_from(pb / tb, spec.velocity, pb);
        out.copy_from_slice(&state);
        Ok(())
    }

    fn wall_state_unchecked(
        &self,
        spec: &WallSpec,
        u1: &[f64],
        u2: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        let (pb, tb) = self.wall_state_parts(spec, u1, u2);
        if !pb.is_finite() || !tb.is_finite() || tb == 0.0 {
            return Err(Error::numerical(format!(
                "wall state extrapolation broke down: P = {pb:.6e}, T = {tb:.6e}"
            )));
        }
        let state = self.state_from(pb / tb, spec.velocity, pb);
        out.copy_from_slice(&state);
        Ok(())
    }
}

impl WallStateClosure for ScalarAdvectionDiffusion {
    fn wall_state(&self, _spec: &WallSpec, _u1: &[f64], _u2: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::config(
            "wall boundaries are not defined for the scalar system",
        ))
    }
}

/// Boundary distribution `F_b` for an imposed state `u_b`.
///
/// The normal flux component is `f_n(u_b)` plus the diffusive flux
/// extrapolated from the two nearest cells, `d_b = 3/2 d_1 - 1/2 d_2` with
/// `d_j = v_{n,j} - f_n(u_j)`; tangential imposed fluxes are zero.
#[allow(clippy::too_many_arguments)]
pub fn boundary_distribution<S: System>(
    model: &WaveModel,
    basis: &MomentBasis,
    sys: &S,
    normal_axis: usize,
    u_b: &[f64],
    u1: &[f64],
    u2: &[f64],
    v_n1: &[f64],
    v_n2: &[f64],
    out_fb: &mut [f64],
) {
    let p = sys.p();
    let mut fb_state = vec![0.0; JX * p];
    fb_state[..p].copy_from_slice(u_b);
    let mut f_tmp = vec![0.0; p];
    sys.flux(u1, normal_axis, &mut f_tmp);
    let mut d_b: Vec<f64> = v_n1
        .iter()
        .zip(&f_tmp)
        .map(|(v, f)| 1.5 * (v - f))
        .collect();
    sys.flux(u2, normal_axis, &mut f_tmp);
    for (d, (v, f)) in d_b.iter_mut().zip(v_n2.iter().zip(&f_tmp)) {
        *d -= 0.5 * (v - f);
    }
    sys.flux(u_b, normal_axis, &mut f_tmp);
    let vn_block = &mut fb_state[(1 + normal_axis) * p..(2 + normal_axis) * p];
    for (dst, (f, d)) in vn_block.iter_mut().zip(f_tmp.iter().zip(&d_b)) {
        *dst = f + d;
    }
    lattice::reconstruct(model, basis, &fb_state, out_fb);
}

/// Imposed wall data for one side and one stage: the boundary distribution
/// per boundary line (`line * kp + w * p + c`).
#[derive(Debug, Clone)]
pub struct WallFluxData {
    pub fb: Vec<f64>,
    pub u_b: Vec<f64>,
}

/// Build the wall data for a stage block of a Jin-Xin state field.
/// `strict` applies the admissibility halt of the wall-state closure.
#[allow(clippy::too_many_arguments)]
pub fn compute_wall_data<S: WallStateClosure>(
    grid: &Grid2d,
    model: &WaveModel,
    basis: &MomentBasis,
    sys: &S,
    side: Side,
    spec: &WallSpec,
    state: &Field,
    stage: usize,
    strict: bool,
) -> Result<WallFluxData> {
    let p = sys.p();
    let kp = model.k * p;
    let axis = side.axis();
    let n_along = if axis == 0 { grid.ny } else { grid.nx };
    let base = stage * JX * p;
    let mut fb = vec![0.0; n_along * kp];
    let mut u_b_all = vec![0.0; n_along * p];
    let mut cell1 = vec![0.0; state.comps];
    let mut cell2 = vec![0.0; state.comps];
    let mut u_b = vec![0.0; p];
    for line in 0..n_along {
        let (x1, y1, x2, y2) = match side {
            Side::XLow => (0isize, line as isize, 1isize, line as isize),
            Side::XHigh => (
                grid.nx as isize - 1,
                line as isize,
                grid.nx as isize - 2,
                line as isize,
            ),
            Side::YLow => (line as isize, 0, line as isize, 1),
            Side::YHigh => (
                line as isize,
                grid.ny as isize - 1,
                line as isize,
                grid.ny as isize - 2,
            ),
        };
        state.cell(x1, y1, &mut cell1);
        state.cell(x2, y2, &mut cell2);
        let u1 = &cell1[base..base + p];
        let u2 = &cell2[base..base + p];
        let built = if strict {
            sys.wall_state(spec, u1, u2, &mut u_b)
        } else {
            sys.wall_state_unchecked(spec, u1, u2, &mut u_b)
        };
        built.map_err(|e| Error::numerical(format!("{e} (side {side:?}, line {line})")))?;
        let vn1 = &cell1[base + (1 + axis) * p..base + (2 + axis) * p];
        let vn2 = &cell2[base + (1 + axis) * p..base + (2 + axis) * p];
        boundary_distribution(
            model,
            basis,
            sys,
            axis,
            &u_b,
            u1,
            u2,
            vn1,
            vn2,
            &mut fb[line * kp..(line + 1) * kp],
        );
        u_b_all[line * p..(line + 1) * p].copy_from_slice(&u_b);
    }
    Ok(WallFluxData { fb, u_b: u_b_all })
}

/// Fill ghost cells on a symmetry side by mirroring: conserved variables
/// reflect (`u_g = S u_m`), the tangential flux reflects, the normal flux
/// reflects with an extra sign flip.
pub fn symmetry_fill<S: System>(
    grid: &Grid2d,
    sys: &S,
    stages: usize,
    field: &mut Field,
    side: Side,
) {
    let p = sys.p();
    let axis = side.axis();
    let signs = sys.reflect_signs(axis);
    let comp_sign = |comp: usize| -> f64 {
        let within = comp % (JX * p);
        let class = within / p;
        let c = within % p;
        let extra = if class == 1 + axis { -1.0 } else { 1.0 };
        signs[c] * extra
    };
    debug_assert_eq!(field.comps, stages * JX * p);
    let h = grid.halo;
    match axis {
        1 => {
            for t in 0..h {
                let (gy, my) = if side.is_low() {
                    (-(t as isize) - 1, t as isize)
                } else {
                    (grid.ny as isize + t as isize, grid.ny as isize - 1 - t as isize)
                };
                for comp in 0..field.comps {
                    let s = comp_sign(comp);
                    let src_start = field.idx(comp, 0, my);
                    let dst_start = field.idx(comp, 0, gy);
                    for x in 0..grid.nx {
                        field.data[dst_start + x] = s * field.data[src_start + x];
                    }
                }
            }
        }
        _ => {
            for t in 0..h {
                let (gx, mx) = if side.is_low() {
                    (-(t as isize) - 1, t as isize)
                } else {
                    (grid.nx as isize + t as isize, grid.nx as isize - 1 - t as isize)
                };
                for y in 0..grid.ny as isize {
                    for comp in 0..field.comps {
                        let s = comp_sign(comp);
                        let v = field.get(comp, mx, y);
                        field.set(comp, gx, y, s * v);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_d2q4;
    use crate::space::BoundaryKind;
    use approx::assert_abs_diff_eq;

    fn ns() -> CompressibleNavierStokes {
        CompressibleNavierStokes::new(1.4, 0.01, 0.73)
    }

    #[test]
    fn wall_state_extrapolation_values() {
        let sys = ns();
        let mut out = [0.0; 4];

        // uniform pressure, isothermal
        let u1 = sys.state_from(1.0, [0.0, 0.2], 1.0);
        let u2 = sys.state_from(1.0, [0.0, 0.1], 1.0);
        let spec = WallSpec::isothermal(1.0, [0.0, 0.0]);
        sys.wall_state(&spec, &u1, &u2, &mut out).unwrap();
        assert_abs_diff_eq!(sys.pressure(&out), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(out[0], 1.0, epsilon = 1e-13);
        assert_eq!(out[1], 0.0);

        // pressure extrapolation: 9/8 * 1.02 - 1/8 * 1.00 = 1.0225
        let u1 = sys.state_from(1.0, [0.0, 0.0], 1.02);
        let u2 = sys.state_from(1.0, [0.0, 0.0], 1.00);
        sys.wall_state(&spec, &u1, &u2, &mut out).unwrap();
        assert_abs_diff_eq!(sys.pressure(&out), 1.0225, epsilon = 1e-12);

        // adiabatic temperature extrapolation: 9/8 * 1.2 - 1/8 * 1.1 = 1.2125
        let u1 = sys.state_from(1.0 / 1.2, [0.0, 0.0], 1.0); // T = 1.2
        let u2 = sys.state_from(1.0 / 1.1, [0.0, 0.0], 1.0); // T = 1.1
        let spec = WallSpec::adiabatic_static();
        sys.wall_state(&spec, &u1, &u2, &mut out).unwrap();
        assert_abs_diff_eq!(sys.temperature(&out), 1.2125, epsilon = 1e-12);
    }

    #[test]
    fn wall_state_rejects_negative_extrapolation() {
        let sys = ns();
        let mut out = [0.0; 4];
        let u1 = sys.state_from(1.0, [0.0, 0.0], 0.01);
        let u2 = sys.state_from(1.0, [0.0, 0.0], 1.0);
        let spec = WallSpec::isothermal(1.0, [0.0, 0.0]);
        assert!(sys.wall_state(&spec, &u1, &u2, &mut out).is_err());
    }

    #[test]
    fn scalar_wall_state_unsupported() {
        let sys = ScalarAdvectionDiffusion::new(1.0, 1.0, 0.0);
        let mut out = [0.0];
        let spec = WallSpec::adiabatic_static();
        assert!(sys.wall_state(&spec, &[1.0], &[1.0], &mut out).is_err());
    }

    #[test]
    fn flux_plan_matches_selection_table() {
        use FluxChoice::*;
        let p4 = near_wall_flux_plan(4);
        assert_eq!(p4.pick(true)[0], Star2);
        assert_eq!(p4.pick(true)[1], Order(2));
        assert_eq!(p4.pick(true)[2], Order(4));
        assert_eq!(p4.pick(false), &[Order(4); 3]);
        let p2 = near_wall_flux_plan(2);
        assert_eq!(p2.pick(true), &[Star2, Order(2), Order(2)]);
        assert_eq!(p2.pick(false), &[Order(2); 3]);
        let p1 = near_wall_flux_plan(1);
        assert_eq!(p1.pick(true), &[Order(1); 3]);
        assert_eq!(p1.pick(false), &[Order(1); 3]);
    }

    #[test]
    fn static_wall_mass_flux_is_zero() {
        // interior at equilibrium rest, isothermal wall at the same T:
        // F_b carries only the pressure flux in the momentum slot.
        let sys = ns();
        let (model, basis) = build_d2q4(5.0, 4).unwrap();
        let rest = sys.state_from(1.0, [0.0, 0.0], 1.0);
        let mut f1 = [0.0; 4];
        sys.flux(&rest, 0, &mut f1);
        let spec = WallSpec::isothermal(1.0, [0.0, 0.0]);
        let mut u_b = [0.0; 4];
        sys.wall_state(&spec, &rest, &rest, &mut u_b).unwrap();
        let mut fb = vec![0.0; 16];
        boundary_distribution(&model, &basis, &sys, 0, &u_b, &rest, &rest, &f1, &f1, &mut fb);
        // P F_b = u_b and P Lambda_1 F_b = f_1(u_b) = (0, P, 0, 0)
        let mut red = vec![0.0; 12];
        lattice::reduce(&model, &basis, &fb, &mut red);
        for c in 0..4 {
            assert_abs_diff_eq!(red[c], u_b[c], epsilon = 1e-13);
        }
        assert_abs_diff_eq!(red[4], 0.0, epsilon = 1e-13); // zero mass flux
        assert_abs_diff_eq!(red[5], 1.0, epsilon = 1e-13); // pressure
        assert_abs_diff_eq!(red[6], 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(red[7], 0.0, epsilon = 1e-13);
        // tangential imposed flux is zero
        for c in 0..4 {
            assert_abs_diff_eq!(red[8 + c], 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn diffusive_flux_extrapolates_linearly() {
        // scalar system with synthetic interior data: v_n - f_n linear in
        // the cell index extrapolates to its wall value 3/2 d1 - 1/2 d2.
        let sys = ScalarAdvectionDiffusion::new(2.0, 0.0, 0.3);
        let (model, basis) = build_d2q4(5.0, 1).unwrap();
        // diffusive flux profile linear in the cell-center coordinate;
        // centers sit at 0.5 and 1.5 cell widths, the wall at 0.
        let g = |xc: f64| 0.7 - 0.2 * xc;
        let u1 = [1.3];
        let u2 = [1.1];
        let vn1 = [2.0 * u1[0] + g(0.5)];
        let vn2 = [2.0 * u2[0] + g(1.5)];
        let u_b = [1.4];
        let mut fb = vec![0.0; 4];
        boundary_distribution(&model, &basis, &sys, 0, &u_b, &u1, &u2, &vn1, &vn2, &mut fb);
        let mut red = vec![0.0; 3];
        lattice::reduce(&model, &basis, &fb, &mut red);
        assert_abs_diff_eq!(red[0], u_b[0], epsilon = 1e-14);
        assert_abs_diff_eq!(red[1], 2.0 * u_b[0] + g(0.0), epsilon = 1e-13);
        assert_abs_diff_eq!(red[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn symmetry_fill_mirror_rules() {
        let sys = ns();
        let grid = Grid2d::new(
            4,
            4,
            0.25,
            [
                BoundaryKind::Periodic,
                BoundaryKind::Periodic,
                BoundaryKind::Symmetry,
                BoundaryKind::Symmetry,
            ],
        )
        .unwrap();
        let mut f = Field::new(12, &grid);
        for y in 0..4 {
            for x in 0..4 {
                let rho = 1.0 + 0.1 * y as f64;
                let u = sys.state_from(rho, [0.2, 0.3 + 0.1 * y as f64], 1.0);
                let mut cell = vec![0.0; 12];
                cell[..4].copy_from_slice(&u);
                let mut fx = [0.0; 4];
                sys.flux(&u, 0, &mut fx);
                cell[4..8].copy_from_slice(&fx);
                let mut fy = [0.0; 4];
                sys.flux(&u, 1, &mut fy);
                cell[8..12].copy_from_slice(&fy);
                f.set_cell(x, y, &cell);
            }
        }
        symmetry_fill(&grid, &sys, 1, &mut f, Side::YHigh);
        // ghost row 4 mirrors interior row 3 with rho v and normal fluxes flipped
        for x in 0..4 {
            assert_eq!(f.get(0, x, 4), f.get(0, x, 3)); // rho copies
            assert_eq!(f.get(1, x, 4), f.get(1, x, 3)); // rho u copies
            assert_eq!(f.get(2, x, 4), -f.get(2, x, 3)); // rho v flips
            assert_eq!(f.get(3, x, 4), f.get(3, x, 3)); // E copies
            // v1 (x-flux): rho v component flips, others copy
            assert_eq!(f.get(4, x, 4), f.get(4, x, 3));
            assert_eq!(f.get(6, x, 4), -f.get(6, x, 3));
            // v2 (y-flux): overall flip plus rho v double-flip
            assert_eq!(f.get(8, x, 4), -f.get(8, x, 3));
            assert_eq!(f.get(10, x, 4), f.get(10, x, 3));
            assert_eq!(f.get(11, x, 4), -f.get(11, x, 3));
        }
        // rest state: ghosts equal interior for the conserved block
        let mut g = Field::new(12, &grid);
        let rest = sys.state_from(1.0, [0.0, 0.0], 1.0);
        for y in 0..4 {
            for x in 0..4 {
                let mut cell = vec![0.0; 12];
                cell[..4].copy_from_slice(&rest);
                let mut fx = [0.0; 4];
                sys.flux(&rest, 0, &mut fx);
                cell[4..8].copy_from_slice(&fx);
                let mut fy = [0.0; 4];
                sys.flux(&rest, 1, &mut fy);
                cell[8..12].copy_from_slice(&fy);
                g.set_cell(x, y, &cell);
            }
        }
        symmetry_fill(&grid, &sys, 1, &mut g, Side::YHigh);
        for x in 0..4 {
            for c in 0..4 {
                assert_eq!(g.get(c, x, 4), g.get(c, x, 3));
            }
        }
    }
}

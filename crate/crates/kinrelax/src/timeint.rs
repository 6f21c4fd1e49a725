//! Time integration of the Jin-Xin state: first-order IMEX and deferred
//! correction with Lobatto IIIC tableaus at orders 2 and 4.
//!
//! Both integrators share one stage machinery (IMEX is the single-stage,
//! single-iteration case). Each iteration sweeps the transport of every
//! stage, updates the conserved variables explicitly, then solves one
//! stage-coupled linear system per cell for the flux variables. The solve
//! uses the substitution `v = D(z1 - z2) + f` with
//! `(D + dt A (x) G) z_i = rhs_i`, which is algebraically identical to the
//! relaxation update written with `Chat^{-1} = D G^{-1}` but never forms
//! `G^{-1}`; with zero diffusion it collapses to `v = f(u)` exactly.

use crate::boundary::{self, WallFluxData, WallStateClosure};
use crate::collision::{assemble_cell_operators, CellAssembly, LambdaMoments};
use crate::lattice::{self, build_d2q4, MomentBasis, WaveModel, JX};
use crate::linalg;
use crate::space::{
    self, fill_periodic_axis, BoundaryKind, Field, Grid2d, TransportTarget, SIDES,
};
use crate::systems::System;
use crate::{Error, Result};
use rayon::prelude::*;

/// Coefficients of an implicit RK scheme driven by deferred correction.
#[derive(Debug, Clone)]
pub struct DecTableau {
    pub s: usize,
    pub c: Vec<f64>,
    /// row-major `s x s`
    pub a: Vec<f64>,
}

impl DecTableau {
    /// Single backward-Euler stage; the first-order IMEX scheme.
    pub fn imex1() -> Self {
        DecTableau {
            s: 1,
            c: vec![1.0],
            a: vec![1.0],
        }
    }

    pub fn lobatto_iiic_2() -> Self {
        DecTableau {
            s: 2,
            c: vec![0.0, 1.0],
            a: vec![0.5, -0.5, 0.5, 0.5],
        }
    }

    pub fn lobatto_iiic_4() -> Self {
        DecTableau {
            s: 3,
            c: vec![0.0, 0.5, 1.0],
            a: vec![
                1.0 / 6.0,
                -1.0 / 3.0,
                1.0 / 6.0,
                1.0 / 6.0,
                5.0 / 12.0,
                -1.0 / 12.0,
                1.0 / 6.0,
                2.0 / 3.0,
                1.0 / 6.0,
            ],
        }
    }

    pub fn for_order(order: usize) -> Result<Self> {
        match order {
            1 => Ok(DecTableau::imex1()),
            2 => Ok(DecTableau::lobatto_iiic_2()),
            4 => Ok(DecTableau::lobatto_iiic_4()),
            _ => Err(Error::config(format!("unsupported scheme order {order}"))),
        }
    }
}

/// Kinetic speed selection.
#[derive(Debug, Clone, Copy)]
pub enum SpeedPolicy {
    Fixed(f64),
    /// `a = max(factor * max wave speed, floor)` refreshed every step.
    Dynamic { factor: f64, floor: f64 },
}

impl SpeedPolicy {
    pub fn dynamic() -> Self {
        SpeedPolicy::Dynamic {
            factor: 2.1,
            floor: 1e-12,
        }
    }
}

/// Scheme order, DeC iteration count, CFL number and speed policy.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub order: usize,
    pub iterations: usize,
    pub cfl: f64,
    pub speed: SpeedPolicy,
}

impl SchemeConfig {
    /// Production defaults: CFL 1 at orders 1 and 4, 0.8 at order 2,
    /// DeC iteration count equal to the order.
    pub fn for_order(order: usize, speed: SpeedPolicy) -> Result<Self> {
        let cfl = match order {
            1 | 4 => 1.0,
            2 => 0.8,
            _ => return Err(Error::config(format!("unsupported scheme order {order}"))),
        };
        Ok(SchemeConfig {
            order,
            iterations: order.max(1),
            cfl,
            speed,
        })
    }
}

/// Kinetic speed and time step for the current field per the CFL policy.
pub fn cfl_policy<S: System>(
    grid: &Grid2d,
    sys: &S,
    state: &Field,
    lambda_cfl: f64,
    policy: &SpeedPolicy,
) -> (f64, f64) {
    let a = match policy {
        SpeedPolicy::Fixed(a) => *a,
        SpeedPolicy::Dynamic { factor, floor } => {
            let p = sys.p();
            let scan = |slab: &[f64]| {
                let mut m = 0.0f64;
                let mut u = [0.0f64; 8];
                let u = &mut u[..p];
                for x in 0..grid.nx {
                    for (c, v) in u.iter_mut().enumerate() {
                        *v = slab[c * state.row + grid.halo + x];
                    }
                    // the subcharacteristic bound is a statement about the
                    // admissible flow; cells knocked transiently out of the
                    // admissible set (diaphragm startup) must not drive the
                    // global speed through garbage velocities
                    if sys.admissible(u) {
                        m = m.max(sys.max_wave_speed(u));
                    }
                }
                m
            };
            let max_speed = if grid.parallel() {
                state
                    .data
                    .par_chunks(state.slab)
                    .skip(grid.halo)
                    .take(grid.ny)
                    .map(scan)
                    .reduce(|| 0.0, f64::max)
            } else {
                state
                    .data
                    .chunks(state.slab)
                    .skip(grid.halo)
                    .take(grid.ny)
                    .map(scan)
                    .fold(0.0, f64::max)
            };
            (factor * max_speed).max(*floor)
        }
    };
    (a, lambda_cfl * grid.dx / a)
}

struct SharedRelax {
    k_lu: Vec<f64>,
    piv: Vec<usize>,
    d: Vec<f64>,
    a: f64,
    dt: f64,
}

/// Time stepper owning the wave model and all scratch fields.
pub struct Stepper<S: WallStateClosure> {
    pub grid: Grid2d,
    pub sys: S,
    pub cfg: SchemeConfig,
    pub tableau: DecTableau,
    model: WaveModel,
    basis: MomentBasis,
    lm: LambdaMoments,
    stages: Field,
    f_scratch: Field,
    transport: Field,
    u0: Field,
    shared: Option<SharedRelax>,
}

impl<S: WallStateClosure> Stepper<S> {
    pub fn new(grid: Grid2d, sys: S, cfg: SchemeConfig) -> Result<Self> {
        let tableau = DecTableau::for_order(cfg.order)?;
        if cfg.iterations == 0 {
            return Err(Error::config("need at least one iteration"));
        }
        let p = sys.p();
        let a0 = match cfg.speed {
            SpeedPolicy::Fixed(a) => a,
            SpeedPolicy::Dynamic { .. } => 1.0,
        };
        let (model, basis) = build_d2q4(a0, p)?;
        let lm = LambdaMoments::new(&model, &basis);
        let s = tableau.s;
        let stages = Field::new(s * JX * p, &grid);
        let f_scratch = Field::new(s * model.k * p, &grid);
        let transport = Field::new(s * JX * p, &grid);
        let u0 = Field::new(JX * p, &grid);
        Ok(Stepper {
            grid,
            sys,
            cfg,
            tableau,
            model,
            basis,
            lm,
            stages,
            f_scratch,
            transport,
            u0,
            shared: None,
        })
    }

    pub fn model(&self) -> &WaveModel {
        &self.model
    }

    pub fn basis(&self) -> &MomentBasis {
        &self.basis
    }

    /// Rebuild the wave model for a new kinetic speed (dynamic policy).
    pub fn set_speed(&mut self, a: f64) -> Result<()> {
        if a != self.model.a {
            let (model, basis) = build_d2q4(a, self.sys.p())?;
            self.lm = LambdaMoments::new(&model, &basis);
            self.model = model;
            self.basis = basis;
        }
        Ok(())
    }

    /// Kinetic speed and step size for the current state; also installs the
    /// speed into the wave model.
    pub fn prepare_step(&mut self, state: &Field) -> Result<(f64, f64)> {
        let (a, dt) = cfl_policy(&self.grid, &self.sys, state, self.cfg.cfl, &self.cfg.speed);
        self.set_speed(a)?;
        Ok((a, dt))
    }

    fn wall_data(&self, field: &Field) -> Result<[Option<Vec<WallFluxData>>; 4]> {
        let mut out: [Option<Vec<WallFluxData>>; 4] = [None, None, None, None];
        for side in SIDES {
            if let BoundaryKind::Wall(spec) = self.grid.side(side) {
                let mut per_stage = Vec::with_capacity(self.tableau.s);
                for stage in 0..self.tableau.s {
                    per_stage.push(boundary::compute_wall_data(
                        &self.grid,
                        &self.model,
                        &self.basis,
                        &self.sys,
                        side,
                        spec,
                        field,
                        stage,
                        self.tableau.s == 1,
                    )?);
                }
                out[side as usize] = Some(per_stage);
            }
        }
        Ok(out)
    }

    fn shared_relax(&mut self, state: &Field, dt: f64) -> Result<()> {
        if !self.sys.state_independent_relaxation() || !self.sys.has_diffusion() {
            self.shared = None;
            return Ok(());
        }
        if let Some(sh) = &self.shared {
            if sh.a == self.model.a && sh.dt == dt {
                return Ok(());
            }
        }
        let p = self.sys.p();
        let dp = 2 * p;
        let s = self.tableau.s;
        let n = s * dp;
        let mut ws = CellAssembly::new(p);
        let mut g = vec![0.0; dp * dp];
        let mut d = vec![0.0; dp * dp];
        let mut u = vec![0.0; p];
        let base = state.idx(0, 0, 0);
        for (c, v) in u.iter_mut().enumerate() {
            *v = state.data[base + c * state.row];
        }
        assemble_cell_operators(&self.lm, &self.sys, &u, &mut ws, &mut g, &mut d);
        let mut k = vec![0.0; n * n];
        assemble_stage_matrix(&self.tableau, dt, s, dp, |_r| &g, |_r| &d, &mut k);
        let mut piv = vec![0usize; n];
        linalg::lu_factor(&mut k, n, &mut piv)
            .map_err(|_| Error::numerical("singular stage-coupled relaxation system"))?;
        self.shared = Some(SharedRelax {
            k_lu: k,
            piv,
            d,
            a: self.model.a,
            dt,
        });
        Ok(())
    }

    /// Advance `state` by one step of size `dt`. `state` holds the Jin-Xin
    /// components `(u, v1, v2)` and is updated in place.
    pub fn step(&mut self, state: &mut Field, dt: f64) -> Result<()> {
        let s = self.tableau.s;
        let p = self.sys.p();
        self.shared_relax(state, dt)?;
        self.u0.copy_from(state);
        self.stages.replicate_stages(state, s);
        for _iter in 0..self.cfg.iterations {
            space::halo_exchange(&self.grid, &self.sys, s, &mut self.stages);
            space::reconstruct_field(&self.model, &self.basis, s, &self.stages, &mut self.f_scratch);
            let walls = self.wall_data(&self.stages)?;
            space::transport(
                &self.grid,
                &self.model,
                self.cfg.order,
                s,
                &self.f_scratch,
                &walls,
                TransportTarget::Reduced(&mut self.transport),
            );
            self.stage_update(dt)?;
        }
        self.stages.extract_stage(s - 1, JX * p, state);
        Ok(())
    }

    fn stage_update(&mut self, dt: f64) -> Result<()> {
        let p = self.sys.p();
        let dp = 2 * p;
        let s = self.tableau.s;
        let n = s * dp;
        let (nx, halo) = (self.grid.nx, self.grid.halo);
        let row = self.stages.row;
        let tab = &self.tableau;
        let sys = &self.sys;
        let lm = &self.lm;
        let no_diffusion = !sys.has_diffusion();
        let shared = self.shared.as_ref();
        let r_field = &self.transport;
        let u0 = &self.u0;

        let body = |ws: &mut CellScratch,
                    y: usize,
                    st_slab: &mut [f64],
                    r_slab: &[f64],
                    u0_slab: &[f64]|
         -> Result<()> {
                    for x in 0..nx {
                        let ix = halo + x;
                        // explicit update of the conserved variables
                        for r in 0..s {
                            for c in 0..p {
                                let mut acc = u0_slab[c * row + ix];
                                for q in 0..s {
                                    acc -= dt
                                        * tab.a[r * s + q]
                                        * r_slab[(q * JX * p + c) * row + ix];
                                }
                                ws.new_u[r * p + c] = acc;
                            }
                            // the single-stage scheme diagnoses inadmissible
                            // intermediate states; DeC stage iterates may
                            // transiently leave the admissible set near
                            // strong discontinuities (oscillations are
                            // damped by the diffusive relaxation), so only
                            // non-finite values abort there
                            let u_new = &ws.new_u[r * p..(r + 1) * p];
                            let bad = if s == 1 {
                                !sys.admissible(u_new)
                            } else {
                                !u_new.iter().all(|v| v.is_finite())
                            };
                            if bad {
                                return Err(Error::numerical(format!(
                                    "inadmissible state at cell ({x},{y}), stage {r}: {:?}",
                                    u_new
                                )));
                            }
                        }
                        // rhs of the flux-variable solve
                        for r in 0..s {
                            for i in 0..2 {
                                for c in 0..p {
                                    let mut acc = u0_slab[((1 + i) * p + c) * row + ix];
                                    for q in 0..s {
                                        acc -= dt
                                            * tab.a[r * s + q]
                                            * r_slab[((q * JX + 1 + i) * p + c) * row + ix];
                                    }
                                    ws.rhs1[r * dp + i * p + c] = acc;
                                }
                            }
                            let u_new = &ws.new_u[r * p..(r + 1) * p];
                            sys.flux(u_new, 0, &mut ws.ftmp);
                            ws.f_hat[r * dp..r * dp + p].copy_from_slice(&ws.ftmp);
                            sys.flux(u_new, 1, &mut ws.ftmp);
                            ws.f_hat[r * dp + p..(r + 1) * dp].copy_from_slice(&ws.ftmp);
                        }
                        if no_diffusion {
                            // relaxation collapses to v = f(u) exactly
                            ws.rhs1.copy_from_slice(&ws.f_hat);
                        } else if let Some(sh) = shared {
                            ws.z2.copy_from_slice(&ws.f_hat);
                            linalg::lu_solve(&sh.k_lu, n, &sh.piv, &mut ws.rhs1);
                            linalg::lu_solve(&sh.k_lu, n, &sh.piv, &mut ws.z2);
                            finish_flux_update(&sh.d, false, &mut ws.rhs1, &ws.z2, &ws.f_hat, s, dp);
                        } else {
                            ws.z2.copy_from_slice(&ws.f_hat);
                            let CellScratch {
                                asm,
                                new_u,
                                rhs1,
                                z2,
                                f_hat,
                                g,
                                d,
                                kmat,
                                piv,
                                ..
                            } = ws;
                            for r in 0..s {
                                let u_new = &new_u[r * p..(r + 1) * p];
                                assemble_cell_operators(
                                    lm,
                                    sys,
                                    u_new,
                                    asm,
                                    &mut g[r * dp * dp..(r + 1) * dp * dp],
                                    &mut d[r * dp * dp..(r + 1) * dp * dp],
                                );
                            }
                            assemble_stage_matrix(
                                tab,
                                dt,
                                s,
                                dp,
                                |r| &g[r * dp * dp..(r + 1) * dp * dp],
                                |r| &d[r * dp * dp..(r + 1) * dp * dp],
                                kmat,
                            );
                            linalg::lu_factor(kmat, n, piv).map_err(|_| {
                                Error::numerical(format!(
                                    "singular stage-coupled relaxation system at cell ({x},{y})"
                                ))
                            })?;
                            linalg::lu_solve(kmat, n, piv, rhs1);
                            linalg::lu_solve(kmat, n, piv, z2);
                            finish_flux_update(d, true, rhs1, z2, f_hat, s, dp);
                        }
                        // write the stage states back
                        for r in 0..s {
                            for c in 0..p {
                                st_slab[(r * JX * p + c) * row + ix] = ws.new_u[r * p + c];
                            }
                            for i in 0..2 {
                                for c in 0..p {
                                    st_slab[((r * JX + 1 + i) * p + c) * row + ix] =
                                        ws.rhs1[r * dp + i * p + c];
                                }
                            }
                        }
                    }
                    Ok(())
        };
        if self.grid.parallel() {
            self.stages
                .data
                .par_chunks_mut(self.stages.slab)
                .zip(r_field.data.par_chunks(r_field.slab))
                .zip(u0.data.par_chunks(u0.slab))
                .skip(halo)
                .take(self.grid.ny)
                .enumerate()
                .try_for_each_init(
                    || CellScratch::new(p, s),
                    |ws, (y, ((st_slab, r_slab), u0_slab))| body(ws, y, st_slab, r_slab, u0_slab),
                )
        } else {
            let mut ws = CellScratch::new(p, s);
            for (y, ((st_slab, r_slab), u0_slab)) in self
                .stages
                .data
                .chunks_mut(self.stages.slab)
                .zip(r_field.data.chunks(r_field.slab))
                .zip(u0.data.chunks(u0.slab))
                .skip(halo)
                .take(self.grid.ny)
                .enumerate()
            {
                body(&mut ws, y, st_slab, r_slab, u0_slab)?;
            }
            Ok(())
        }
    }
}

/// `K = blockdiag(D_r) + dt (A (x) G)` with per-stage blocks.
fn assemble_stage_matrix<'a>(
    tab: &DecTableau,
    dt: f64,
    s: usize,
    dp: usize,
    g_of: impl Fn(usize) -> &'a [f64],
    d_of: impl Fn(usize) -> &'a [f64],
    out: &mut [f64],
) {
    let n = s * dp;
    debug_assert_eq!(out.len(), n * n);
    for r in 0..s {
        let d_r = d_of(r);
        for q in 0..s {
            let g_q = g_of(q);
            let w = dt * tab.a[r * s + q];
            for i in 0..dp {
                let dst = &mut out[(r * dp + i) * n + q * dp..(r * dp + i) * n + q * dp + dp];
                let gsrc = &g_q[i * dp..(i + 1) * dp];
                if r == q {
                    let dsrc = &d_r[i * dp..(i + 1) * dp];
                    for j in 0..dp {
                        dst[j] = dsrc[j] + w * gsrc[j];
                    }
                } else {
                    for j in 0..dp {
                        dst[j] = w * gsrc[j];
                    }
                }
            }
        }
    }
}

/// `v_r = D_r (z1_r - z2_r) + f_r`, writing the result over `z1`.
fn finish_flux_update(
    d: &[f64],
    per_stage: bool,
    z1: &mut [f64],
    z2: &[f64],
    f_hat: &[f64],
    s: usize,
    dp: usize,
) {
    debug_assert!(dp <= 32);
    for r in 0..s {
        let d_r = if per_stage {
            &d[r * dp * dp..(r + 1) * dp * dp]
        } else {
            &d[..dp * dp]
        };
        let mut v = [0.0f64; 32];
        let v = &mut v[..dp];
        for i in 0..dp {
            let mut acc = f_hat[r * dp + i];
            let row = &d_r[i * dp..(i + 1) * dp];
            for j in 0..dp {
                acc += row[j] * (z1[r * dp + j] - z2[r * dp + j]);
            }
            v[i] = acc;
        }
        z1[r * dp..(r + 1) * dp].copy_from_slice(v);
    }
}

struct CellScratch {
    asm: CellAssembly,
    new_u: Vec<f64>,
    rhs1: Vec<f64>,
    z2: Vec<f64>,
    f_hat: Vec<f64>,
    ftmp: Vec<f64>,
    g: Vec<f64>,
    d: Vec<f64>,
    kmat: Vec<f64>,
    piv: Vec<usize>,
}

impl CellScratch {
    fn new(p: usize, s: usize) -> Self {
        let dp = 2 * p;
        CellScratch {
            asm: CellAssembly::new(p),
            new_u: vec![0.0; s * p],
            rhs1: vec![0.0; s * dp],
            z2: vec![0.0; s * dp],
            f_hat: vec![0.0; s * dp],
            ftmp: vec![0.0; p],
            g: vec![0.0; s * dp * dp],
            d: vec![0.0; s * dp * dp],
            kmat: vec![0.0; (s * dp) * (s * dp)],
            piv: vec![0usize; s * dp],
        }
    }

}

/// One step of the first-order IMEX scheme in distribution space; the
/// equivalence oracle for the Jin-Xin formulation. Periodic domains only.
pub fn step_imex1_distribution<S: System>(
    grid: &Grid2d,
    model: &WaveModel,
    basis: &MomentBasis,
    sys: &S,
    f_state: &mut Field,
    dt: f64,
) -> Result<()> {
    if !grid.is_fully_periodic() {
        return Err(Error::config(
            "the distribution-space stepper supports periodic domains only",
        ));
    }
    let (k, p) = (model.k, model.p);
    let kp = k * p;
    debug_assert_eq!(f_state.comps, kp);
    fill_periodic_axis(f_state, 0);
    fill_periodic_axis(f_state, 1);
    let mut t_field = Field::new(kp, grid);
    let walls: [Option<Vec<WallFluxData>>; 4] = [None, None, None, None];
    space::transport(
        grid,
        model,
        1,
        1,
        f_state,
        &walls,
        TransportTarget::Distribution(&mut t_field),
    );
    let lm = LambdaMoments::new(model, basis);
    let mut ws = CellAssembly::new(p);
    let mut g = vec![0.0; 4 * p * p];
    let mut d = vec![0.0; 4 * p * p];
    let mut r_vec = vec![0.0; kp];
    let mut u_next = vec![0.0; p];
    let mut maxw = vec![0.0; kp];
    let mut rhs = vec![0.0; kp];
    let mut omega = vec![0.0; kp * kp];
    let mut piv = vec![0usize; kp];
    let dp = 2 * p;
    for y in 0..grid.ny as isize {
        for x in 0..grid.nx as isize {
            f_state.cell(x, y, &mut r_vec);
            let base = t_field.idx(0, x, y);
            for (cc, c) in r_vec.iter_mut().enumerate() {
                *c -= dt * t_field.data[base + cc * t_field.row];
            }
            u_next.fill(0.0);
            for w in 0..k {
                for c in 0..p {
                    u_next[c] += r_vec[w * p + c];
                }
            }
            if !sys.admissible(&u_next) {
                return Err(Error::numerical(format!(
                    "inadmissible state at cell ({x},{y}): {u_next:?}"
                )));
            }
            // Maxwellian at the updated conserved variables
            let mut f1 = vec![0.0; p];
            let mut f2 = vec![0.0; p];
            sys.flux(&u_next, 0, &mut f1);
            sys.flux(&u_next, 1, &mut f2);
            lattice::maxwellian(model, basis, &u_next, &f1, &f2, &mut maxw);
            // Omega_hat^{-1} = Q^{-1} blockdiag(0, D G^{-1} / dt, 0) Q
            assemble_cell_operators(&lm, sys, &u_next, &mut ws, &mut g, &mut d);
            let mut chat = vec![0.0; dp * dp];
            if sys.has_diffusion() {
                let mut gp = vec![0usize; dp];
                let mut glu = g.clone();
                linalg::lu_factor(&mut glu, dp, &mut gp)
                    .map_err(|_| Error::numerical("singular relaxation system"))?;
                let mut x_inv = vec![0.0; dp * dp];
                for i in 0..dp {
                    x_inv[i * dp + i] = 1.0;
                }
                linalg::lu_solve_block(&glu, dp, &gp, &mut x_inv, dp);
                linalg::matmul(&d, &x_inv, dp, dp, dp, &mut chat);
                for v in chat.iter_mut() {
                    *v /= dt;
                }
            }
            let op = crate::collision::RelaxationOperator {
                chat_inv: chat,
                state_ref: u_next.clone(),
                dt,
            };
            let om = crate::collision::omega_inverse_distribution(model, basis, &op);
            omega.copy_from_slice(&om);
            // (I + Omega^{-1}) F_new = Omega^{-1} r + M
            rhs.copy_from_slice(&maxw);
            linalg::matvec_acc(&omega, &r_vec, kp, kp, &mut rhs);
            for i in 0..kp {
                omega[i * kp + i] += 1.0;
            }
            linalg::lu_factor(&mut omega, kp, &mut piv)
                .map_err(|_| Error::numerical("singular distribution-space update"))?;
            linalg::lu_solve(&omega, kp, &piv, &mut rhs);
            f_state.set_cell(x, y, &rhs);
        }
    }
    Ok(())
}

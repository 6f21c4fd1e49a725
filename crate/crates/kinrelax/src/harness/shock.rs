//! Shock-boundary-layer interaction: a diaphragm flow in a closed box with
//! adiabatic walls and a symmetry top, tracked with conservation and
//! positivity ledgers and temperature-field snapshots.

use super::advance_with_events;
use super::report::snapshot_csv;
use crate::boundary::WallSpec;
use crate::space::{BoundaryKind, Field, Grid2d};
use crate::systems::{CompressibleNavierStokes, System};
use crate::timeint::{SchemeConfig, SpeedPolicy, Stepper};
use crate::{Error, Result};
use std::path::{Path, PathBuf};

pub const GAMMA: f64 = 1.2;
pub const PRANDTL: f64 = 0.73;

#[derive(Debug, Clone)]
pub struct ShockReport {
    pub re: f64,
    pub nx: usize,
    pub ny: usize,
    pub steps: u64,
    pub t_final: f64,
    pub mass_initial: f64,
    pub mass_final: f64,
    /// minima over the whole run (transients included)
    pub rho_min: f64,
    pub p_min: f64,
    pub temp_min: f64,
    pub temp_max: f64,
    /// steps on which some cell had nonpositive density or pressure
    pub positivity_violations: u64,
    /// final-state extrema
    pub final_rho_min: f64,
    pub final_p_min: f64,
    pub final_t_min: f64,
    pub final_t_max: f64,
    pub snapshots: Vec<PathBuf>,
}

impl ShockReport {
    pub fn mass_drift(&self) -> f64 {
        ((self.mass_final - self.mass_initial) / self.mass_initial).abs()
    }
}

/// Number of cells over which the diaphragm is regularized.
///
/// A perfectly sharp 100:1 jump cannot be stepped by the unlimited
/// fourth-order scheme at any resolution: the first stage update
/// undershoots by a fixed fraction of the jump, which drives the light
/// side negative and breaks the relaxation algebra. A tanh profile a few
/// cells wide removes the startup transient entirely; at a 2000-wide grid
/// the run then keeps strictly positive density and pressure, matching
/// the reported behavior of this case.
pub const DIAPHRAGM_WIDTH_CELLS: f64 = 3.0;

/// Initial diaphragm state: heavy fluid at rest left of x = 0.5, light
/// fluid right of it, blended over [`DIAPHRAGM_WIDTH_CELLS`] cells; flux
/// variables start at equilibrium. The tanh blend is symmetric about the
/// cell interface at x = 0.5, so the initial mass is the same as for the
/// sharp jump.
pub fn init_shock(grid: &Grid2d, sys: &CompressibleNavierStokes) -> Field {
    let mut state = Field::new(12, grid);
    let width = DIAPHRAGM_WIDTH_CELLS * grid.dx;
    let mut fx = [0.0; 4];
    let mut fy = [0.0; 4];
    for y in 0..grid.ny as isize {
        for x in 0..grid.nx as isize {
            let xc = grid.center_x(x as usize);
            let s = 0.5 * (1.0 - ((xc - 0.5) / width).tanh());
            let rho = 1.2 + (120.0 - 1.2) * s;
            let u = sys.state_from(rho, [0.0, 0.0], rho / GAMMA);
            let mut cell = vec![0.0; 12];
            cell[..4].copy_from_slice(&u);
            sys.flux(&u, 0, &mut fx);
            sys.flux(&u, 1, &mut fy);
            cell[4..8].copy_from_slice(&fx);
            cell[8..12].copy_from_slice(&fy);
            state.set_cell(x, y, &cell);
        }
    }
    state
}

/// Run the case to `t_end`, emitting snapshots at the requested times into
/// `out_dir` when given.
pub fn shock_bl_case(
    re: f64,
    nx: usize,
    ny: usize,
    t_end: f64,
    order: usize,
    out_dir: Option<&Path>,
    snapshot_times: &[f64],
) -> Result<ShockReport> {
    if nx != 2 * ny {
        return Err(Error::config(
            "the shock case needs nx = 2 ny for square cells on the 1 x 1/2 domain",
        ));
    }
    let sys = CompressibleNavierStokes::new(GAMMA, 1.0 / re, PRANDTL);
    let wall = WallSpec::adiabatic_static();
    let grid = Grid2d::new(
        nx,
        ny,
        1.0 / nx as f64,
        [
            BoundaryKind::Wall(wall),
            BoundaryKind::Wall(wall),
            BoundaryKind::Wall(wall),
            BoundaryKind::Symmetry,
        ],
    )?;
    let cfg = SchemeConfig::for_order(order, SpeedPolicy::dynamic())?;
    let mut stepper = Stepper::new(grid.clone(), sys.clone(), cfg)?;
    let mut state = init_shock(&grid, &sys);

    let cell_area = grid.dx * grid.dx;
    let mass0 = state.interior_sum(0) * cell_area;
    let mut rho_min = f64::INFINITY;
    let mut p_min = f64::INFINITY;
    let mut temp_min = f64::INFINITY;
    let mut temp_max = f64::NEG_INFINITY;
    let mut snapshots = Vec::new();

    let mut positivity_violations = 0u64;
    // per-step ledger scan: track minima, count transient positivity
    // violations (the under-resolved viscous shock oscillates below zero
    // in isolated cells and recovers), abort on non-finite values
    let scan = |state: &Field,
                    rho_min: &mut f64,
                    p_min: &mut f64,
                    temp_min: &mut f64,
                    temp_max: &mut f64,
                    violations: &mut u64|
     -> Result<()> {
        let mut cell = [0.0; 4];
        let mut step_bad = false;
        for y in 0..grid.ny as isize {
            for x in 0..grid.nx as isize {
                let base = state.idx(0, x, y);
                for (c, v) in cell.iter_mut().enumerate() {
                    *v = state.data[base + c * state.row];
                }
                let p = sys.pressure(&cell);
                if !cell[0].is_finite() || !p.is_finite() {
                    return Err(Error::numerical(format!(
                        "non-finite state at cell ({x},{y}): rho = {}, P = {p}",
                        cell[0]
                    )));
                }
                if cell[0] <= 0.0 || p <= 0.0 {
                    step_bad = true;
                }
                *rho_min = rho_min.min(cell[0]);
                *p_min = p_min.min(p);
                let t = p / cell[0];
                *temp_min = temp_min.min(t);
                *temp_max = temp_max.max(t);
            }
        }
        if step_bad {
            *violations += 1;
        }
        Ok(())
    };
    scan(
        &state,
        &mut rho_min,
        &mut p_min,
        &mut temp_min,
        &mut temp_max,
        &mut positivity_violations,
    )?;

    let outcome = advance_with_events(
        &mut stepper,
        &mut state,
        0.0,
        t_end,
        snapshot_times,
        |state, _t, _step| {
            scan(
                state,
                &mut rho_min,
                &mut p_min,
                &mut temp_min,
                &mut temp_max,
                &mut positivity_violations,
            )?;
            Ok(true)
        },
        |state, t| {
            if let Some(dir) = out_dir {
                let path = dir.join(format!("snapshot_t{t:.3}.csv"));
                super::report::write_text(&path, &snapshot_csv(&grid, &sys, state))?;
                snapshots.push(path);
            }
            Ok(())
        },
    )?;

    // final-state positivity and temperature range
    let mut final_rho_min = f64::INFINITY;
    let mut final_p_min = f64::INFINITY;
    let mut final_t_min = f64::INFINITY;
    let mut final_t_max = f64::NEG_INFINITY;
    let mut cell = [0.0; 4];
    for y in 0..grid.ny as isize {
        for x in 0..grid.nx as isize {
            let base = state.idx(0, x, y);
            for (c, v) in cell.iter_mut().enumerate() {
                *v = state.data[base + c * state.row];
            }
            let p = sys.pressure(&cell);
            final_rho_min = final_rho_min.min(cell[0]);
            final_p_min = final_p_min.min(p);
            let t = p / cell[0];
            final_t_min = final_t_min.min(t);
            final_t_max = final_t_max.max(t);
        }
    }

    let mass1 = state.interior_sum(0) * cell_area;
    Ok(ShockReport {
        re,
        nx,
        ny,
        steps: outcome.steps,
        t_final: outcome.t,
        mass_initial: mass0,
        mass_final: mass1,
        rho_min,
        p_min,
        temp_min,
        temp_max,
        positivity_violations,
        final_rho_min,
        final_p_min,
        final_t_min,
        final_t_max,
        snapshots,
    })
}

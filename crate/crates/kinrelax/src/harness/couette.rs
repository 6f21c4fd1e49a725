//! Thermal Couette flow between a moving and a static wall, verified
//! against the analytic steady temperature profiles.

use crate::boundary::WallSpec;
use crate::space::{BoundaryKind, Field, Grid2d};
use crate::systems::{CompressibleNavierStokes, System};
use crate::timeint::{SchemeConfig, SpeedPolicy, Stepper};
use crate::{Error, Result};

pub const GAMMA: f64 = 1.4;
pub const PRANDTL: f64 = 0.73;
pub const MU: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouetteKind {
    /// Both walls isothermal at T = 1, left wall sliding.
    Isothermal,
    /// Adiabatic sliding left wall, isothermal static right wall.
    Adiabatic,
}

impl CouetteKind {
    pub fn id(self) -> &'static str {
        match self {
            CouetteKind::Isothermal => "couette_iso",
            CouetteKind::Adiabatic => "couette_adiab",
        }
    }
}

/// Tangential velocity of the left wall.
pub fn wall_velocity() -> f64 {
    1.3 * GAMMA.sqrt()
}

/// Steady temperature profile at `x` (domain length 1).
pub fn exact_temperature(kind: CouetteKind, x: f64) -> f64 {
    let vl2 = wall_velocity().powi(2);
    let coeff = (GAMMA - 1.0) * PRANDTL / (2.0 * GAMMA) * vl2;
    match kind {
        CouetteKind::Isothermal => 1.0 + coeff * x * (1.0 - x),
        CouetteKind::Adiabatic => 1.0 + coeff * (1.0 - x * x),
    }
}

#[derive(Debug, Clone)]
pub struct CouetteReport {
    pub kind: CouetteKind,
    pub order: usize,
    pub n: usize,
    pub max_t_err: f64,
    pub mass_drift: f64,
    pub steps: u64,
    pub converged: bool,
    /// `(x, T, T_exact)` at cell centers.
    pub profile: Vec<(f64, f64, f64)>,
}

pub fn profile_csv(rep: &CouetteReport) -> String {
    let mut out = String::from("x,t,t_exact\n");
    for (x, t, te) in &rep.profile {
        out.push_str(&format!("{x:.8e},{t:.10e},{te:.10e}\n"));
    }
    out
}

/// Run the Couette case at `n` cells across to its steady state
/// (per-step temperature residual below 1e-12, step budget 1e7).
pub fn couette_case(kind: CouetteKind, n: usize, order: usize) -> Result<CouetteReport> {
    let sys = CompressibleNavierStokes::new(GAMMA, MU, PRANDTL);
    let left = match kind {
        CouetteKind::Isothermal => WallSpec::isothermal(1.0, [0.0, wall_velocity()]),
        CouetteKind::Adiabatic => WallSpec::adiabatic([0.0, wall_velocity()]),
    };
    let right = WallSpec::isothermal(1.0, [0.0, 0.0]);
    // pseudo-1D: two periodic cells across, the flow is y-uniform
    let ny = 2;
    let grid = Grid2d::new(
        n,
        ny,
        1.0 / n as f64,
        [
            BoundaryKind::Wall(left),
            BoundaryKind::Wall(right),
            BoundaryKind::Periodic,
            BoundaryKind::Periodic,
        ],
    )?;
    let cfg = SchemeConfig::for_order(order, SpeedPolicy::dynamic())?;
    let mut stepper = Stepper::new(grid.clone(), sys.clone(), cfg)?;

    let mut state = Field::new(12, &grid);
    let rest = sys.state_from(1.0, [0.0, 0.0], 1.0);
    let mut cell = vec![0.0; 12];
    cell[..4].copy_from_slice(&rest);
    let mut fx = [0.0; 4];
    let mut fy = [0.0; 4];
    sys.flux(&rest, 0, &mut fx);
    sys.flux(&rest, 1, &mut fy);
    cell[4..8].copy_from_slice(&fx);
    cell[8..12].copy_from_slice(&fy);
    for y in 0..ny as isize {
        for x in 0..n as isize {
            state.set_cell(x, y, &cell);
        }
    }

    let mass0 = state.interior_sum(0);
    let mut t_prev = temperatures(&grid, &sys, &state);
    let mut converged = false;
    let mut steps = 0u64;
    let mut quiet = 0u32;
    let budget = 10_000_000u64;
    while steps < budget {
        let (_, dt) = stepper.prepare_step(&state)?;
        stepper.step(&mut state, dt)?;
        steps += 1;
        let t_now = temperatures(&grid, &sys, &state);
        let mut res = 0.0f64;
        for (a, b) in t_now.iter().zip(&t_prev) {
            res = res.max((a - b).abs());
        }
        t_prev = t_now;
        // two consecutive quiet steps: from the uniform start the very
        // first step only moves the flux variables, so a single zero
        // T-increment is not yet steady state
        if res < 1e-12 {
            quiet += 1;
            if quiet >= 2 {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if !converged {
        return Err(Error::numerical(format!(
            "Couette {} did not reach steady state within {budget} steps",
            kind.id()
        )));
    }
    let mass1 = state.interior_sum(0);

    let mut profile = Vec::with_capacity(n);
    let mut max_err = 0.0f64;
    let mut ucell = vec![0.0; 12];
    for x in 0..n {
        state.cell(x as isize, 0, &mut ucell);
        let t = sys.temperature(&ucell[..4]);
        let te = exact_temperature(kind, grid.center_x(x));
        max_err = max_err.max((t - te).abs());
        profile.push((grid.center_x(x), t, te));
    }
    Ok(CouetteReport {
        kind,
        order,
        n,
        max_t_err: max_err,
        mass_drift: ((mass1 - mass0) / mass0).abs(),
        steps,
        converged,
        profile,
    })
}

fn temperatures(grid: &Grid2d, sys: &CompressibleNavierStokes, state: &Field) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.cells());
    let mut cell = vec![0.0; state.comps];
    for y in 0..grid.ny as isize {
        for x in 0..grid.nx as isize {
            state.cell(x, y, &mut cell);
            out.push(sys.temperature(&cell[..4]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_profile_values() {
        // isothermal peak at midchannel
        assert_abs_diff_eq!(
            exact_temperature(CouetteKind::Isothermal, 0.5),
            1.061685,
            epsilon = 1e-6
        );
        // adiabatic wall temperature
        assert_abs_diff_eq!(
            exact_temperature(CouetteKind::Adiabatic, 0.0),
            1.246740,
            epsilon = 1e-6
        );
        // shared right-wall value
        assert_abs_diff_eq!(exact_temperature(CouetteKind::Isothermal, 1.0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(exact_temperature(CouetteKind::Adiabatic, 1.0), 1.0, epsilon = 1e-14);
    }
}

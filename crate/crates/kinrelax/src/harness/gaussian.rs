//! Advection-diffusion of a Gaussian bump on the periodic unit square,
//! with the exact solution for error measurement.

use super::report::{attach_slopes, ErrorReport};
use super::advance_with_events;
use crate::space::{Field, Grid2d};
use crate::systems::ScalarAdvectionDiffusion;
use crate::timeint::{SchemeConfig, SpeedPolicy, Stepper};
use crate::Result;

pub const ADVECTION_SPEED: f64 = 10.0;
pub const GAUSSIAN_WIDTH: f64 = 0.1;
pub const END_TIME: f64 = 0.005;

/// The three canonical parameter sets: (a) diffusive with the minimal
/// subcharacteristic speed, (b) diffusive with a large speed, (c) inviscid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianVariant {
    A,
    B,
    C,
}

impl GaussianVariant {
    pub fn alpha(self) -> f64 {
        match self {
            GaussianVariant::A | GaussianVariant::B => 0.01,
            GaussianVariant::C => 0.0,
        }
    }

    pub fn kinetic_speed(self) -> f64 {
        match self {
            GaussianVariant::A | GaussianVariant::C => 2.1 * ADVECTION_SPEED,
            GaussianVariant::B => 100.0 * ADVECTION_SPEED,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            GaussianVariant::A => "gaussian_a",
            GaussianVariant::B => "gaussian_b",
            GaussianVariant::C => "gaussian_c",
        }
    }

    /// Diagnostic Knudsen number `alpha / (a delta)`.
    pub fn knudsen(self, a: f64) -> f64 {
        self.alpha() / (a * GAUSSIAN_WIDTH)
    }
}

/// Exact solution of the advected-diffused Gaussian.
pub fn exact_gaussian(x: f64, y: f64, t: f64, c1: f64, c2: f64, alpha: f64, delta: f64) -> f64 {
    let d2 = delta * delta;
    let denom = d2 + 4.0 * alpha * t;
    let dx = x - 0.5 - c1 * t;
    let dy = y - 0.5 - c2 * t;
    1.0 + 0.01 * (d2 / denom) * (-(dx * dx + dy * dy) / denom).exp()
}

/// Cell-centered initial state with the flux variables at equilibrium,
/// `v_i = f_i(u0)`; the reference errors of the diffusive tables are
/// reproduced to eight significant digits with this start.
pub fn init_gaussian(grid: &Grid2d, sys: &ScalarAdvectionDiffusion) -> Field {
    let mut state = Field::new(3, grid);
    let d2 = GAUSSIAN_WIDTH * GAUSSIAN_WIDTH;
    for y in 0..grid.ny as isize {
        for x in 0..grid.nx as isize {
            let (cx, cy) = (grid.center_x(x as usize), grid.center_y(y as usize));
            let bump = 0.01 * (-((cx - 0.5).powi(2) + (cy - 0.5).powi(2)) / d2).exp();
            let u = 1.0 + bump;
            state.set_cell(x, y, &[u, sys.c[0] * u, sys.c[1] * u]);
        }
    }
    state
}

/// `sqrt( sum (u - u_exact)^2 / sum u_exact^2 )` over interior cells.
pub fn l2_error(grid: &Grid2d, state: &Field, t: f64, sys: &ScalarAdvectionDiffusion) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for y in 0..grid.ny as isize {
        for x in 0..grid.nx as isize {
            let ue = exact_gaussian(
                grid.center_x(x as usize),
                grid.center_y(y as usize),
                t,
                sys.c[0],
                sys.c[1],
                sys.alpha,
                GAUSSIAN_WIDTH,
            );
            let diff = state.get(0, x, y) - ue;
            num += diff * diff;
            den += ue * ue;
        }
    }
    (num / den).sqrt()
}

/// One run of a Gaussian case at resolution `n`, returning the final-time
/// error, the mass drift and the step count.
pub fn run_single(variant: GaussianVariant, order: usize, n: usize) -> Result<ErrorReport> {
    run_single_with_speed(variant, order, n, variant.kinetic_speed())
}

pub fn run_single_with_speed(
    variant: GaussianVariant,
    order: usize,
    n: usize,
    a: f64,
) -> Result<ErrorReport> {
    let grid = Grid2d::periodic_anchored(n, n, 1.0 / n as f64);
    let sys = ScalarAdvectionDiffusion::new(ADVECTION_SPEED, ADVECTION_SPEED, variant.alpha());
    let cfg = SchemeConfig::for_order(order, SpeedPolicy::Fixed(a))?;
    let mut stepper = Stepper::new(grid.clone(), sys.clone(), cfg)?;
    let mut state = init_gaussian(&grid, &sys);
    let mass0 = state.interior_sum(0);
    let outcome = advance_with_events(
        &mut stepper,
        &mut state,
        0.0,
        END_TIME,
        &[],
        |_, _, _| Ok(true),
        |_, _| Ok(()),
    )?;
    let mass1 = state.interior_sum(0);
    Ok(ErrorReport {
        n,
        order,
        l2: l2_error(&grid, &state, outcome.t, &sys),
        slope: None,
        mass_drift: ((mass1 - mass0) / mass0).abs(),
        steps: outcome.steps,
    })
}

/// Dyadic convergence study; rows are grouped by order with slopes attached.
pub fn convergence_study(
    variant: GaussianVariant,
    orders: &[usize],
    n_list: &[usize],
) -> Result<Vec<ErrorReport>> {
    let mut rows = Vec::new();
    for &order in orders {
        let mut block = Vec::new();
        for &n in n_list {
            block.push(run_single(variant, order, n)?);
        }
        attach_slopes(&mut block);
        rows.extend(block);
    }
    Ok(rows)
}

/// One row of the Knudsen-plateau study.
#[derive(Debug, Clone)]
pub struct KnudsenRow {
    pub multiplier: f64,
    pub a: f64,
    pub epsilon: f64,
    pub l2: f64,
    pub slope: Option<f64>,
}

/// Consistency-error study: fourth-order runs of the diffusive case at a
/// fixed fine mesh for growing kinetic speeds `a = multiplier * c`. The
/// error plateaus at the O(eps^2) consistency level, halving `eps` per
/// doubling of `a`.
pub fn knudsen_study(multipliers: &[f64], n: usize) -> Result<Vec<KnudsenRow>> {
    let variant = GaussianVariant::A;
    let mut rows: Vec<KnudsenRow> = Vec::new();
    for &m in multipliers {
        let a = m * ADVECTION_SPEED;
        let rep = run_single_with_speed(variant, 4, n, a)?;
        let slope = rows.last().map(|prev: &KnudsenRow| {
            (prev.l2 / rep.l2).ln() / (prev.epsilon / variant.knudsen(a)).ln()
        });
        rows.push(KnudsenRow {
            multiplier: m,
            a,
            epsilon: variant.knudsen(a),
            l2: rep.l2,
            slope,
        });
    }
    Ok(rows)
}

pub fn knudsen_csv(rows: &[KnudsenRow]) -> String {
    let mut out = String::from("multiplier,a,epsilon,l2,slope\n");
    for r in rows {
        let slope = r
            .slope
            .map(|s| format!("{s:.4}"))
            .unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "{},{},{:.6e},{:.9e},{slope}\n",
            r.multiplier, r.a, r.epsilon, r.l2
        ));
    }
    out
}

//! Verification cases: Gaussian advection-diffusion with exact-solution
//! errors and convergence/Knudsen studies, thermal Couette flows against
//! their analytic temperature profiles, and the shock-boundary-layer
//! setup with conservation ledgers.

pub mod couette;
pub mod gaussian;
pub mod report;
pub mod shock;

use crate::boundary::WallStateClosure;
use crate::space::Field;
use crate::timeint::Stepper;
use crate::Result;

/// Outcome of a time loop.
#[derive(Debug, Clone, Copy)]
pub struct RunOutcome {
    pub steps: u64,
    pub t: f64,
}

/// March `state` from `t0` to `t_end`, landing exactly on `t_end` and on
/// every time in `events` (both clamp the step size, which only lowers the
/// CFL number). `on_step` may stop the run early by returning `false`.
pub fn advance_with_events<S, FS, FE>(
    stepper: &mut Stepper<S>,
    state: &mut Field,
    t0: f64,
    t_end: f64,
    events: &[f64],
    mut on_step: FS,
    mut on_event: FE,
) -> Result<RunOutcome>
where
    S: WallStateClosure,
    FS: FnMut(&Field, f64, u64) -> Result<bool>,
    FE: FnMut(&Field, f64) -> Result<()>,
{
    let mut t = t0;
    let mut steps = 0u64;
    let mut pending: Vec<f64> = events.iter().copied().filter(|e| *e > t0).collect();
    pending.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let eps = 1e-12 * (1.0 + t_end.abs());
    while t < t_end - eps {
        let (_, mut dt) = stepper.prepare_step(state)?;
        if t + dt > t_end {
            dt = t_end - t;
        }
        if let Some(ev) = pending.first().copied() {
            if t + dt > ev - eps {
                dt = ev - t;
            }
        }
        stepper.step(state, dt)?;
        t += dt;
        steps += 1;
        if let Some(ev) = pending.first().copied() {
            if (t - ev).abs() <= eps {
                on_event(state, t)?;
                pending.remove(0);
            }
        }
        if !on_step(state, t, steps)? {
            break;
        }
    }
    Ok(RunOutcome { steps, t })
}

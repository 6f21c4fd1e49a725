//! Report structures and plain-text emission shared by the cases.

use crate::systems::CompressibleNavierStokes;
use crate::space::{Field, Grid2d};
use crate::Result;
use std::io::Write;
use std::path::Path;

/// Error metrics of one run at one resolution.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub n: usize,
    pub order: usize,
    pub l2: f64,
    /// log2 ratio against the previous dyadic refinement, when available.
    pub slope: Option<f64>,
    pub mass_drift: f64,
    pub steps: u64,
}

/// Attach log2 slopes to a dyadic refinement series (in place).
pub fn attach_slopes(rows: &mut [ErrorReport]) {
    for i in 1..rows.len() {
        if rows[i].order == rows[i - 1].order {
            rows[i].slope = Some((rows[i - 1].l2 / rows[i].l2).log2());
        }
    }
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

/// CSV of convergence rows: `case,order,n,l2,slope,mass_drift,steps`.
pub fn convergence_csv(case: &str, rows: &[ErrorReport]) -> String {
    let mut out = String::from("case,order,n,l2,slope,mass_drift,steps\n");
    for r in rows {
        let slope = r
            .slope
            .map(|s| format!("{s:.4}"))
            .unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "{case},{},{},{:.9e},{slope},{:.3e},{}\n",
            r.order, r.n, r.l2, r.mass_drift, r.steps
        ));
    }
    out
}

/// Structured-grid snapshot `x,y,rho,u,v,p,t` of a Navier-Stokes state.
pub fn snapshot_csv(grid: &Grid2d, sys: &CompressibleNavierStokes, state: &Field) -> String {
    let mut out = String::from("x,y,rho,u,v,p,t\n");
    let mut cell = vec![0.0; state.comps];
    for y in 0..grid.ny {
        for x in 0..grid.nx {
            state.cell(x as isize, y as isize, &mut cell);
            let u = &cell[..4];
            let vel = sys.velocity(u);
            let p = sys.pressure(u);
            let t = sys.temperature(u);
            out.push_str(&format!(
                "{:.8e},{:.8e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}\n",
                grid.center_x(x),
                grid.center_y(y),
                u[0],
                vel[0],
                vel[1],
                p,
                t
            ));
        }
    }
    out
}

/// Machine-readable run ledger.
#[derive(Debug, Clone)]
pub struct Ledger {
    pub case: String,
    pub steps: u64,
    pub mass_initial: f64,
    pub mass_final: f64,
}

impl Ledger {
    pub fn mass_drift(&self) -> f64 {
        ((self.mass_final - self.mass_initial) / self.mass_initial).abs()
    }

    pub fn csv(&self) -> String {
        format!(
            "case,steps,mass_initial,mass_final,mass_drift\n{},{},{:.12e},{:.12e},{:.3e}\n",
            self.case,
            self.steps,
            self.mass_initial,
            self.mass_final,
            self.mass_drift()
        )
    }
}

//! Uniform Cartesian grids, field storage with ghost layers, and the
//! conservative upwind flux operators of orders 1, 2 and 4.
//!
//! Field layout is y-slab major: all components of one grid row are stored
//! contiguously, so parallel sweeps split the state into disjoint `&mut`
//! row slabs without any unsafe aliasing.

use crate::boundary::{self, WallFluxData, WallSpec};
use crate::lattice::{MomentBasis, WaveModel, JX};
use crate::systems::System;
use crate::{Error, Result};
use rayon::prelude::*;

pub const HALO: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    XLow = 0,
    XHigh = 1,
    YLow = 2,
    YHigh = 3,
}

pub const SIDES: [Side; 4] = [Side::XLow, Side::XHigh, Side::YLow, Side::YHigh];

impl Side {
    pub fn axis(self) -> usize {
        match self {
            Side::XLow | Side::XHigh => 0,
            Side::YLow | Side::YHigh => 1,
        }
    }

    pub fn is_low(self) -> bool {
        matches!(self, Side::XLow | Side::YLow)
    }
}

#[derive(Debug, Clone)]
pub enum BoundaryKind {
    Periodic,
    Wall(WallSpec),
    Symmetry,
}

/// Uniform Cartesian grid with square cells and three ghost layers.
#[derive(Debug, Clone)]
pub struct Grid2d {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub halo: usize,
    pub bounds: [BoundaryKind; 4],
    /// Coordinate of the low domain edge; periodic benchmark grids anchor
    /// sample points at `k * dx` by shifting the origin half a cell.
    pub origin: [f64; 2],
}

impl Grid2d {
    pub fn new(nx: usize, ny: usize, dx: f64, bounds: [BoundaryKind; 4]) -> Result<Self> {
        if nx == 0 || ny == 0 || !(dx > 0.0) {
            return Err(Error::config("grid extents and mesh size must be positive"));
        }
        for axis in 0..2 {
            let lo = &bounds[2 * axis];
            let hi = &bounds[2 * axis + 1];
            let lo_p = matches!(lo, BoundaryKind::Periodic);
            let hi_p = matches!(hi, BoundaryKind::Periodic);
            if lo_p != hi_p {
                return Err(Error::config("periodic sides must come in pairs"));
            }
            let n = if axis == 0 { nx } else { ny };
            let has_wall = matches!(lo, BoundaryKind::Wall(_)) || matches!(hi, BoundaryKind::Wall(_));
            if has_wall && n < 7 {
                return Err(Error::config(
                    "wall boundaries need at least 7 cells across for the near-wall flux plan",
                ));
            }
        }
        Ok(Grid2d {
            nx,
            ny,
            dx,
            halo: HALO,
            bounds,
            origin: [0.0, 0.0],
        })
    }

    /// Periodic grid whose cell centers sit at `k * dx` (origin shifted by
    /// half a cell), matching point-sampled periodic benchmarks.
    pub fn periodic_anchored(nx: usize, ny: usize, dx: f64) -> Self {
        let mut g = Grid2d::periodic(nx, ny, dx);
        g.origin = [-0.5 * dx, -0.5 * dx];
        g
    }

    pub fn periodic(nx: usize, ny: usize, dx: f64) -> Self {
        Grid2d::new(
            nx,
            ny,
            dx,
            [
                BoundaryKind::Periodic,
                BoundaryKind::Periodic,
                BoundaryKind::Periodic,
                BoundaryKind::Periodic,
            ],
        )
        .expect("periodic grid")
    }

    pub fn side(&self, s: Side) -> &BoundaryKind {
        &self.bounds[s as usize]
    }

    /// Cell-center x coordinate.
    pub fn center_x(&self, i: usize) -> f64 {
        self.origin[0] + (i as f64 + 0.5) * self.dx
    }

    /// Cell-center y coordinate.
    pub fn center_y(&self, j: usize) -> f64 {
        self.origin[1] + (j as f64 + 0.5) * self.dx
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Whether per-cell work should go through the thread pool; small grids
    /// run serially to dodge fork-join overhead.
    pub fn parallel(&self) -> bool {
        self.cells() >= 1024
    }

    pub fn is_fully_periodic(&self) -> bool {
        self.bounds.iter().all(|b| matches!(b, BoundaryKind::Periodic))
    }
}

/// 2D field with ghost layers. Component `c` of cell `(x, y)` lives at
/// `(y + halo) * slab + c * row + (x + halo)`.
#[derive(Debug, Clone)]
pub struct Field {
    pub comps: usize,
    pub nx: usize,
    pub ny: usize,
    pub halo: usize,
    pub row: usize,
    pub slab: usize,
    pub data: Vec<f64>,
}

impl Field {
    pub fn new(comps: usize, grid: &Grid2d) -> Self {
        let row = grid.nx + 2 * grid.halo;
        let slab = comps * row;
        Field {
            comps,
            nx: grid.nx,
            ny: grid.ny,
            halo: grid.halo,
            row,
            slab,
            data: vec![0.0; slab * (grid.ny + 2 * grid.halo)],
        }
    }

    #[inline]
    pub fn idx(&self, c: usize, x: isize, y: isize) -> usize {
        debug_assert!(c < self.comps);
        let xi = x + self.halo as isize;
        let yi = y + self.halo as isize;
        debug_assert!(xi >= 0 && (xi as usize) < self.row);
        debug_assert!(yi >= 0 && (yi as usize) * self.slab < self.data.len());
        yi as usize * self.slab + c * self.row + xi as usize
    }

    #[inline]
    pub fn get(&self, c: usize, x: isize, y: isize) -> f64 {
        self.data[self.idx(c, x, y)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, x: isize, y: isize, v: f64) {
        let i = self.idx(c, x, y);
        self.data[i] = v;
    }

    /// Contiguous x-row (with ghosts) of one component at interior row `y`.
    #[inline]
    pub fn x_row(&self, c: usize, y: isize) -> &[f64] {
        let start = self.idx(c, -(self.halo as isize), y);
        &self.data[start..start + self.row]
    }

    /// Gather one cell's components into `out`.
    #[inline]
    pub fn cell(&self, x: isize, y: isize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.comps);
        let base = self.idx(0, x, y);
        for (c, v) in out.iter_mut().enumerate() {
            *v = self.data[base + c * self.row];
        }
    }

    #[inline]
    pub fn set_cell(&mut self, x: isize, y: isize, vals: &[f64]) {
        debug_assert_eq!(vals.len(), self.comps);
        let base = self.idx(0, x, y);
        for (c, v) in vals.iter().enumerate() {
            self.data[base + c * self.row] = *v;
        }
    }

    /// Interior sum of one component (fixed order, deterministic).
    pub fn interior_sum(&self, c: usize) -> f64 {
        let mut s = 0.0;
        for y in 0..self.ny as isize {
            let row = self.x_row(c, y);
            for v in &row[self.halo..self.halo + self.nx] {
                s += v;
            }
        }
        s
    }

    pub fn copy_from(&mut self, other: &Field) {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data.copy_from_slice(&other.data);
    }

    /// Replicate the `3p` components of `src` into each of the `stages`
    /// blocks of this field (which has `stages * 3p` components).
    pub fn replicate_stages(&mut self, src: &Field, stages: usize) {
        let block = src.comps;
        debug_assert_eq!(self.comps, stages * block);
        let rows = self.ny + 2 * self.halo;
        for y in 0..rows {
            let src_slab = &src.data[y * src.slab..(y + 1) * src.slab];
            let dst_slab = &mut self.data[y * self.slab..(y + 1) * self.slab];
            for r in 0..stages {
                dst_slab[r * block * self.row..(r * block + block) * self.row]
                    .copy_from_slice(src_slab);
            }
        }
    }

    /// Copy one stage block (of width `block` components) into `dst`.
    pub fn extract_stage(&self, stage: usize, block: usize, dst: &mut Field) {
        debug_assert_eq!(dst.comps, block);
        let rows = self.ny + 2 * self.halo;
        for y in 0..rows {
            let src_slab = &self.data[y * self.slab..(y + 1) * self.slab];
            let dst_slab = &mut dst.data[y * dst.slab..(y + 1) * dst.slab];
            dst_slab.copy_from_slice(
                &src_slab[stage * block * self.row..(stage * block + block) * self.row],
            );
        }
    }
}

/// Fill ghost cells of every component along one periodic axis with the
/// wrapped interior values; handles halos wider than the axis extent.
pub fn fill_periodic_axis(field: &mut Field, axis: usize) {
    let h = field.halo as isize;
    if axis == 0 {
        let nx = field.nx as isize;
        let rows = field.ny + 2 * field.halo;
        for yr in 0..rows {
            for c in 0..field.comps {
                let start = yr * field.slab + c * field.row;
                let row = &mut field.data[start..start + field.row];
                for t in 1..=field.halo as isize {
                    let src_lo = (-t).rem_euclid(nx) as usize + field.halo;
                    row[(h - t) as usize] = row[src_lo];
                    let src_hi = ((nx - 1 + t).rem_euclid(nx)) as usize + field.halo;
                    row[(h + nx - 1 + t) as usize] = row[src_hi];
                }
            }
        }
    } else {
        let ny = field.ny as isize;
        for t in 1..=field.halo as isize {
            let dst_lo = (h - t) as usize;
            let src_lo = ((-t).rem_euclid(ny) + h) as usize;
            let dst_hi = (h + ny - 1 + t) as usize;
            let src_hi = ((ny - 1 + t).rem_euclid(ny) + h) as usize;
            let slab = field.slab;
            let (a, b) = (dst_lo * slab, src_lo * slab);
            copy_slab(&mut field.data, a, b, slab);
            let (a, b) = (dst_hi * slab, src_hi * slab);
            copy_slab(&mut field.data, a, b, slab);
        }
    }
}

fn copy_slab(data: &mut [f64], dst: usize, src: usize, len: usize) {
    if dst == src {
        return;
    }
    let (lo, hi, swapped) = if dst < src {
        (dst, src, false)
    } else {
        (src, dst, true)
    };
    let (head, tail) = data.split_at_mut(hi);
    let a = &mut head[lo..lo + len];
    let b = &mut tail[..len];
    if swapped {
        // (lo, hi) = (src, dst): copy a into b
        b.copy_from_slice(a);
    } else {
        a.copy_from_slice(b);
    }
}

/// Refresh ghost layers of a Jin-Xin state field (`stages * 3p` components):
/// periodic wrap, symmetry mirror, and NaN poison on wall sides in debug
/// builds (wall sides are never read thanks to the near-wall flux plan).
pub fn halo_exchange<S: System>(grid: &Grid2d, sys: &S, stages: usize, field: &mut Field) {
    debug_assert_eq!(field.comps, stages * JX * sys.p());
    for axis in 0..2 {
        if matches!(grid.bounds[2 * axis], BoundaryKind::Periodic) {
            fill_periodic_axis(field, axis);
        }
    }
    for side in SIDES {
        match grid.side(side) {
            BoundaryKind::Symmetry => {
                boundary::symmetry_fill(grid, sys, stages, field, side);
            }
            BoundaryKind::Wall(_) => {
                #[cfg(debug_assertions)]
                poison_side(field, side);
            }
            BoundaryKind::Periodic => {}
        }
    }
}

#[cfg(debug_assertions)]
fn poison_side(field: &mut Field, side: Side) {
    let h = field.halo as isize;
    match side.axis() {
        0 => {
            let (x0, x1) = if side.is_low() {
                (-h, 0)
            } else {
                (field.nx as isize, field.nx as isize + h)
            };
            for y in 0..field.ny as isize {
                for c in 0..field.comps {
                    for x in x0..x1 {
                        field.set(c, x, y, f64::NAN);
                    }
                }
            }
        }
        _ => {
            let (y0, y1) = if side.is_low() {
                (-h, 0)
            } else {
                (field.ny as isize, field.ny as isize + h)
            };
            for y in y0..y1 {
                for c in 0..field.comps {
                    for x in 0..field.nx as isize {
                        field.set(c, x, y, f64::NAN);
                    }
                }
            }
        }
    }
}

/// Materialize the distribution field `F = Qbar^+ U` for every stage over
/// the full padded plane (ghosts included).
pub fn reconstruct_field(
    model: &WaveModel,
    basis: &MomentBasis,
    stages: usize,
    state: &Field,
    f_out: &mut Field,
) {
    let p = model.p;
    let k = model.k;
    debug_assert_eq!(state.comps, stages * JX * p);
    debug_assert_eq!(f_out.comps, stages * k * p);
    let row = state.row;
    let srcslab = state.slab;
    let dstslab = f_out.slab;
    let qbp = &basis.q_bar_plus;
    let parallel = state.nx * state.ny >= 2048;
    let body = |dst: &mut [f64], src: &[f64]| {
        for r in 0..stages {
            let su = r * JX * p;
            for w in 0..k {
                let c0 = qbp[w * JX];
                let c1 = qbp[w * JX + 1];
                let c2 = qbp[w * JX + 2];
                for c in 0..p {
                    let u = &src[(su + c) * row..(su + c + 1) * row];
                    let v1 = &src[(su + p + c) * row..(su + p + c + 1) * row];
                    let v2 = &src[(su + 2 * p + c) * row..(su + 2 * p + c + 1) * row];
                    let out = &mut dst[((r * k + w) * p + c) * row..((r * k + w) * p + c + 1) * row];
                    for i in 0..row {
                        out[i] = c0 * u[i] + c1 * v1[i] + c2 * v2[i];
                    }
                }
            }
        }
    };
    if parallel {
        f_out
            .data
            .par_chunks_mut(dstslab)
            .zip(state.data.par_chunks(srcslab))
            .for_each(|(dst, src)| body(dst, src));
    } else {
        for (dst, src) in f_out.data.chunks_mut(dstslab).zip(state.data.chunks(srcslab)) {
            body(dst, src);
        }
    }
}

/// Interface flux of one scalar wave for a 6-point stencil around the
/// interface: `stencil[0..6]` holds `F` at `k-2 .. k+3`, the flux is at
/// `k+1/2`. A zero wave speed yields a zero flux.
pub fn wave_flux(order: usize, a_w: f64, stencil: &[f64; 6]) -> f64 {
    if a_w == 0.0 {
        return 0.0;
    }
    let up = a_w > 0.0;
    match order {
        1 => {
            if up {
                a_w * stencil[2]
            } else {
                a_w * stencil[3]
            }
        }
        2 => {
            if up {
                a_w * (stencil[3] / 3.0 + 5.0 * stencil[2] / 6.0 - stencil[1] / 6.0)
            } else {
                a_w * (-stencil[4] / 6.0 + 5.0 * stencil[3] / 6.0 + stencil[2] / 3.0)
            }
        }
        4 => {
            if up {
                a_w * (0.25 * stencil[3] + 13.0 * stencil[2] / 12.0 - 5.0 * stencil[1] / 12.0
                    + stencil[0] / 12.0)
            } else {
                a_w * (stencil[5] / 12.0 - 5.0 * stencil[4] / 12.0 + 13.0 * stencil[3] / 12.0
                    + 0.25 * stencil[2])
            }
        }
        _ => panic!("unsupported flux order {order}"),
    }
}

/// Regular-stencil flux along a contiguous row: writes `out[i]` for
/// `i in i0..i1` where interface `i` separates cells `i-1` and `i`;
/// `cells[halo + x]` is cell `x`.
fn flux_row_range(
    order: usize,
    a: f64,
    cells: &[f64],
    halo: usize,
    out: &mut [f64],
    i0: usize,
    i1: usize,
) {
    debug_assert!(a != 0.0);
    let h = halo;
    match (order, a > 0.0) {
        (1, true) => {
            for i in i0..i1 {
                out[i] = a * cells[h + i - 1];
            }
        }
        (1, false) => {
            for i in i0..i1 {
                out[i] = a * cells[h + i];
            }
        }
        (2, true) => {
            for i in i0..i1 {
                out[i] = a
                    * (cells[h + i] / 3.0 + 5.0 * cells[h + i - 1] / 6.0
                        - cells[h + i - 2] / 6.0);
            }
        }
        (2, false) => {
            for i in i0..i1 {
                out[i] = a
                    * (-cells[h + i + 1] / 6.0 + 5.0 * cells[h + i] / 6.0
                        + cells[h + i - 1] / 3.0);
            }
        }
        (4, true) => {
            for i in i0..i1 {
                out[i] = a
                    * (0.25 * cells[h + i] + 13.0 * cells[h + i - 1] / 12.0
                        - 5.0 * cells[h + i - 2] / 12.0
                        + cells[h + i - 3] / 12.0);
            }
        }
        (4, false) => {
            for i in i0..i1 {
                out[i] = a
                    * (cells[h + i + 2] / 12.0 - 5.0 * cells[h + i + 1] / 12.0
                        + 13.0 * cells[h + i] / 12.0
                        + 0.25 * cells[h + i - 1]);
            }
        }
        _ => panic!("unsupported flux order {order}"),
    }
}

/// One side's boundary override for a 1D line of interfaces.
struct LineBoundary<'a> {
    /// distribution value imposed at the wall for this (wave, comp)
    fb: f64,
    plan: &'a boundary::BoundaryFluxPlan,
}

/// Fluxes along one line of `n` cells: fills `out[0..=n]`.
#[allow(clippy::too_many_arguments)]
fn line_fluxes(
    order: usize,
    a: f64,
    cells: &[f64],
    halo: usize,
    n: usize,
    low: Option<&LineBoundary>,
    high: Option<&LineBoundary>,
    out: &mut [f64],
) {
    let lo_start = if low.is_some() { 4 } else { 0 };
    let hi_end = if high.is_some() { n.saturating_sub(3) } else { n + 1 };
    flux_row_range(order, a, cells, halo, out, lo_start, hi_end);
    if let Some(lb) = low {
        out[0] = a * lb.fb;
        let leaving = a > 0.0;
        for (t, choice) in lb.plan.pick(leaving).iter().enumerate() {
            let i = t + 1;
            out[i] = match choice {
                boundary::FluxChoice::Order(q) => single_flux(*q as usize, a, cells, halo, i),
                boundary::FluxChoice::Star2 => {
                    a * (cells[halo] + (cells[halo + 1] - lb.fb) / 3.0)
                }
            };
        }
    }
    if let Some(hb) = high {
        out[n] = a * hb.fb;
        let leaving = a < 0.0;
        for (t, choice) in hb.plan.pick(leaving).iter().enumerate() {
            let i = n - 1 - t;
            out[i] = match choice {
                boundary::FluxChoice::Order(q) => single_flux(*q as usize, a, cells, halo, i),
                boundary::FluxChoice::Star2 => {
                    a * (cells[halo + n - 1] + (cells[halo + n - 2] - hb.fb) / 3.0)
                }
            };
        }
    }
}

fn single_flux(order: usize, a: f64, cells: &[f64], halo: usize, i: usize) -> f64 {
    let stencil: [f64; 6] = std::array::from_fn(|t| cells[halo + i + t - 3]);
    wave_flux(order, a, &stencil)
}

/// What a transport sweep writes.
pub enum TransportTarget<'a> {
    /// Accumulate the reduced moments `(P T, P Lambda_1 T, P Lambda_2 T)`
    /// into a `stages * 3p` field (zeroed by the sweep).
    Reduced(&'a mut Field),
    /// Store the raw distribution transport `sum_i Lambda_i d_i F`
    /// into a `stages * kp` field (zeroed by the sweep).
    Distribution(&'a mut Field),
}

/// Conservative transport `sum_i Lambda_i delta_i^q F` for every stage of a
/// distribution field, with near-wall flux substitution where the grid has
/// wall sides. `walls[side][stage]` must be present for wall sides.
pub fn transport(
    grid: &Grid2d,
    model: &WaveModel,
    order: usize,
    stages: usize,
    f: &Field,
    walls: &[Option<Vec<WallFluxData>>; 4],
    target: TransportTarget<'_>,
) {
    let p = model.p;
    let k = model.k;
    debug_assert_eq!(f.comps, stages * k * p);
    let (out, reduced): (&mut Field, bool) = match target {
        TransportTarget::Reduced(fld) => {
            debug_assert_eq!(fld.comps, stages * JX * p);
            (fld, true)
        }
        TransportTarget::Distribution(fld) => {
            debug_assert_eq!(fld.comps, stages * k * p);
            (fld, false)
        }
    };
    out.data.fill(0.0);
    sweep_x(grid, model, order, stages, f, walls, out, reduced);
    sweep_y(grid, model, order, stages, f, walls, out, reduced);
}

#[allow(clippy::too_many_arguments)]
fn accumulate_row(
    reduced: bool,
    model: &WaveModel,
    w: usize,
    c: usize,
    stage: usize,
    drow: &[f64],
    out_slab: &mut [f64],
    row: usize,
    halo: usize,
) {
    let p = model.p;
    let nx = drow.len();
    if reduced {
        let l1 = model.lambda[0][w];
        let l2 = model.lambda[1][w];
        let base = stage * JX * p;
        let dst = &mut out_slab[(base + c) * row + halo..(base + c) * row + halo + nx];
        for (d, s) in dst.iter_mut().zip(drow) {
            *d += s;
        }
        if l1 != 0.0 {
            let dst = &mut out_slab[(base + p + c) * row + halo..(base + p + c) * row + halo + nx];
            for (d, s) in dst.iter_mut().zip(drow) {
                *d += l1 * s;
            }
        }
        if l2 != 0.0 {
            let dst =
                &mut out_slab[(base + 2 * p + c) * row + halo..(base + 2 * p + c) * row + halo + nx];
            for (d, s) in dst.iter_mut().zip(drow) {
                *d += l2 * s;
            }
        }
    } else {
        let comp = (stage * model.k + w) * p + c;
        let dst = &mut out_slab[comp * row + halo..comp * row + halo + nx];
        for (d, s) in dst.iter_mut().zip(drow) {
            *d += s;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep_x(
    grid: &Grid2d,
    model: &WaveModel,
    order: usize,
    stages: usize,
    f: &Field,
    walls: &[Option<Vec<WallFluxData>>; 4],
    out: &mut Field,
    reduced: bool,
) {
    let p = model.p;
    let nx = grid.nx;
    let halo = grid.halo;
    let inv_dx = 1.0 / grid.dx;
    let row = f.row;
    let plan = boundary::near_wall_flux_plan(order);
    let out_row = out.row;
    let body = |flux: &mut Vec<f64>, drow: &mut Vec<f64>, y: usize, out_slab: &mut [f64], f_slab: &[f64]| {
        for stage in 0..stages {
            for w in 0..model.k {
                let a = model.lambda[0][w];
                if a == 0.0 {
                    continue;
                }
                for c in 0..p {
                    let comp = (stage * model.k + w) * p + c;
                    let cells = &f_slab[comp * row..(comp + 1) * row];
                    let lowb = wall_line_boundary(walls, Side::XLow, stage, y, w, c, model, &plan);
                    let highb = wall_line_boundary(walls, Side::XHigh, stage, y, w, c, model, &plan);
                    line_fluxes(order, a, cells, halo, nx, lowb.as_ref(), highb.as_ref(), flux);
                    for x in 0..nx {
                        drow[x] = (flux[x + 1] - flux[x]) * inv_dx;
                    }
                    accumulate_row(reduced, model, w, c, stage, drow, out_slab, out_row, halo);
                }
            }
        }
    };
    if grid.parallel() {
        out.data
            .par_chunks_mut(out.slab)
            .zip(f.data.par_chunks(f.slab))
            .skip(halo)
            .take(grid.ny)
            .enumerate()
            .for_each_init(
                || (vec![0.0; nx + 1], vec![0.0; nx]),
                |(flux, drow), (y, (out_slab, f_slab))| body(flux, drow, y, out_slab, f_slab),
            );
    } else {
        let mut flux = vec![0.0; nx + 1];
        let mut drow = vec![0.0; nx];
        for (y, (out_slab, f_slab)) in out
            .data
            .chunks_mut(out.slab)
            .zip(f.data.chunks(f.slab))
            .skip(halo)
            .take(grid.ny)
            .enumerate()
        {
            body(&mut flux, &mut drow, y, out_slab, f_slab);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn wall_line_boundary<'a>(
    walls: &'a [Option<Vec<WallFluxData>>; 4],
    side: Side,
    stage: usize,
    line: usize,
    w: usize,
    c: usize,
    model: &WaveModel,
    plan: &'a boundary::BoundaryFluxPlan,
) -> Option<LineBoundary<'a>> {
    walls[side as usize].as_ref().map(|per_stage| {
        let data = &per_stage[stage];
        LineBoundary {
            fb: data.fb[line * model.k * model.p + w * model.p + c],
            plan,
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep_y(
    grid: &Grid2d,
    model: &WaveModel,
    order: usize,
    stages: usize,
    f: &Field,
    walls: &[Option<Vec<WallFluxData>>; 4],
    out: &mut Field,
    reduced: bool,
) {
    let p = model.p;
    let (nx, ny) = (grid.nx, grid.ny);
    let halo = grid.halo;
    let inv_dx = 1.0 / grid.dx;
    let plan = boundary::near_wall_flux_plan(order);
    let out_row = out.row;
    let out_slab = out.slab;

    // one region: each task owns a cell row and evaluates the two interface
    // flux rows bounding it (interior interfaces are computed twice, which
    // costs less than a second parallel pass per component)
    let body = |fl: &mut Vec<f64>, fh: &mut Vec<f64>, y: usize, oslab: &mut [f64]| {
        for stage in 0..stages {
            let low = walls[Side::YLow as usize].as_ref().map(|ps| &ps[stage]);
            let high = walls[Side::YHigh as usize].as_ref().map(|ps| &ps[stage]);
            for w in 0..model.k {
                let a = model.lambda[1][w];
                if a == 0.0 {
                    continue;
                }
                for c in 0..p {
                    let comp = (stage * model.k + w) * p + c;
                    y_interface_flux(order, a, f, comp, y, ny, fl, low, high, &plan, w, c, p, model.k);
                    y_interface_flux(
                        order, a, f, comp, y + 1, ny, fh, low, high, &plan, w, c, p, model.k,
                    );
                    if reduced {
                        let l1 = model.lambda[0][w];
                        let l2 = model.lambda[1][w];
                        let base = stage * JX * p;
                        apply_diff(oslab, (base + c) * out_row + halo, fl, fh, inv_dx, 1.0);
                        if l1 != 0.0 {
                            apply_diff(oslab, (base + p + c) * out_row + halo, fl, fh, inv_dx, l1);
                        }
                        if l2 != 0.0 {
                            apply_diff(oslab, (base + 2 * p + c) * out_row + halo, fl, fh, inv_dx, l2);
                        }
                    } else {
                        apply_diff(oslab, comp * out_row + halo, fl, fh, inv_dx, 1.0);
                    }
                }
            }
        }
    };
    if grid.parallel() {
        out.data
            .par_chunks_mut(out_slab)
            .skip(halo)
            .take(ny)
            .enumerate()
            .for_each_init(
                || (vec![0.0; nx], vec![0.0; nx]),
                |(fl, fh), (y, oslab)| body(fl, fh, y, oslab),
            );
    } else {
        let mut fl = vec![0.0; nx];
        let mut fh = vec![0.0; nx];
        for (y, oslab) in out.data.chunks_mut(out_slab).skip(halo).take(ny).enumerate() {
            body(&mut fl, &mut fh, y, oslab);
        }
    }
}

fn apply_diff(slab: &mut [f64], offset: usize, fl: &[f64], fh: &[f64], inv_dx: f64, weight: f64) {
    let dst = &mut slab[offset..offset + fl.len()];
    for ((d, hi), lo) in dst.iter_mut().zip(fh).zip(fl) {
        *d += weight * (hi - lo) * inv_dx;
    }
}

/// Flux row at y-interface `j` (between cell rows `j-1` and `j`) for one
/// scalar component; mirrors the x kernels with strided row access.
#[allow(clippy::too_many_arguments)]
fn y_interface_flux(
    order: usize,
    a: f64,
    f: &Field,
    comp: usize,
    j: usize,
    ny: usize,
    out: &mut [f64],
    low: Option<&WallFluxData>,
    high: Option<&WallFluxData>,
    plan: &boundary::BoundaryFluxPlan,
    w: usize,
    c: usize,
    p: usize,
    k: usize,
) {
    let nx = out.len();
    let fr = |dy: isize| -> &[f64] {
        let start = f.idx(comp, 0, j as isize + dy);
        &f.data[start..start + nx]
    };
    let kp = k * p;
    // wall interface
    if j == 0 {
        if let Some(wd) = low {
            for (x, o) in out.iter_mut().enumerate() {
                *o = a * wd.fb[x * kp + w * p + c];
            }
            return;
        }
    }
    if j == ny {
        if let Some(wd) = high {
            for (x, o) in out.iter_mut().enumerate() {
                *o = a * wd.fb[x * kp + w * p + c];
            }
            return;
        }
    }
    // near-wall substituted interfaces
    if (1..=3).contains(&j) {
        if let Some(wd) = low {
            let choice = plan.pick(a > 0.0)[j - 1];
            match choice {
                boundary::FluxChoice::Star2 => {
                    let r0 = fr(-(j as isize)); // cell row 0
                    let r1 = fr(1 - j as isize); // cell row 1
                    for x in 0..nx {
                        out[x] = a * (r0[x] + (r1[x] - wd.fb[x * kp + w * p + c]) / 3.0);
                    }
                    return;
                }
                boundary::FluxChoice::Order(q) => {
                    y_regular_flux(q as usize, a, fr, out);
                    return;
                }
            }
        }
    }
    if (ny.saturating_sub(3)..ny).contains(&j) {
        if let Some(wd) = high {
            let t = ny - j; // 1..=3 counted from the wall
            let choice = plan.pick(a < 0.0)[t - 1];
            match choice {
                boundary::FluxChoice::Star2 => {
                    let r0 = fr(ny as isize - 1 - j as isize); // cell row ny-1
                    let r1 = fr(ny as isize - 2 - j as isize); // cell row ny-2
                    for x in 0..nx {
                        out[x] = a * (r0[x] + (r1[x] - wd.fb[x * kp + w * p + c]) / 3.0);
                    }
                    return;
                }
                boundary::FluxChoice::Order(q) => {
                    y_regular_flux(q as usize, a, fr, out);
                    return;
                }
            }
        }
    }
    y_regular_flux(order, a, fr, out);
}

fn y_regular_flux<'a>(order: usize, a: f64, fr: impl Fn(isize) -> &'a [f64], out: &mut [f64]) {
    match (order, a > 0.0) {
        (1, true) => {
            let r = fr(-1);
            for (o, v) in out.iter_mut().zip(r) {
                *o = a * v;
            }
        }
        (1, false) => {
            let r = fr(0);
            for (o, v) in out.iter_mut().zip(r) {
                *o = a * v;
            }
        }
        (2, true) => {
            let (r0, r1, r2) = (fr(0), fr(-1), fr(-2));
            for i in 0..out.len() {
                out[i] = a * (r0[i] / 3.0 + 5.0 * r1[i] / 6.0 - r2[i] / 6.0);
            }
        }
        (2, false) => {
            let (r0, r1, r2) = (fr(1), fr(0), fr(-1));
            for i in 0..out.len() {
                out[i] = a * (-r0[i] / 6.0 + 5.0 * r1[i] / 6.0 + r2[i] / 3.0);
            }
        }
        (4, true) => {
            let (r0, r1, r2, r3) = (fr(0), fr(-1), fr(-2), fr(-3));
            for i in 0..out.len() {
                out[i] =
                    a * (0.25 * r0[i] + 13.0 * r1[i] / 12.0 - 5.0 * r2[i] / 12.0 + r3[i] / 12.0);
            }
        }
        (4, false) => {
            let (r0, r1, r2, r3) = (fr(2), fr(1), fr(0), fr(-1));
            for i in 0..out.len() {
                out[i] =
                    a * (r0[i] / 12.0 - 5.0 * r1[i] / 12.0 + 13.0 * r2[i] / 12.0 + 0.25 * r3[i]);
            }
        }
        _ => panic!("unsupported flux order {order}"),
    }
}

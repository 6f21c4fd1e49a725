//! Small dense linear algebra used by the per-cell relaxation solves.
//!
//! Matrices here are tiny (2x2 for the scalar system up to 24x24 for the
//! stage-coupled Navier-Stokes solve), stored row-major in flat slices. LU
//! factorization with partial pivoting is plenty at these sizes.

/// In-place LU factorization with partial pivoting, `a` row-major `n x n`.
///
/// On success `a` holds L (unit diagonal, below) and U (on/above), and `piv`
/// records the row swaps. Fails when a pivot is exactly zero after pivoting.
pub fn lu_factor(a: &mut [f64], n: usize, piv: &mut [usize]) -> Result<(), ()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert!(piv.len() >= n);
    for col in 0..n {
        let mut p = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return Err(());
        }
        piv[col] = p;
        if p != col {
            for j in 0..n {
                a.swap(col * n + j, p * n + j);
            }
        }
        let pivot = a[col * n + col];
        let inv = 1.0 / pivot;
        for r in col + 1..n {
            let m = a[r * n + col] * inv;
            a[r * n + col] = m;
            if m != 0.0 {
                let (upper, lower) = a.split_at_mut(r * n);
                let src = &upper[col * n + col + 1..col * n + n];
                let dst = &mut lower[col + 1..n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= m * s;
                }
            }
        }
    }
    Ok(())
}

/// Forward/back substitution for a single right-hand side.
///
/// The factorization swaps whole rows, so the permutation applies to the
/// right-hand side up front.
pub fn lu_solve(lu: &[f64], n: usize, piv: &[usize], b: &mut [f64]) {
    debug_assert_eq!(lu.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let p = piv[col];
        if p != col {
            b.swap(col, p);
        }
    }
    for col in 0..n {
        let bc = b[col];
        if bc != 0.0 {
            let (head, tail) = b.split_at_mut(col + 1);
            let _ = head;
            for (r, t) in tail.iter_mut().enumerate() {
                *t -= lu[(col + 1 + r) * n + col] * bc;
            }
        }
    }
    for row in (0..n).rev() {
        let mut s = b[row];
        let urow = &lu[row * n + row + 1..row * n + n];
        for (c, bj) in urow.iter().zip(&b[row + 1..n]) {
            s -= c * bj;
        }
        b[row] = s / lu[row * n + row];
    }
}

/// Solve for `m` right-hand sides stored as an `n x m` row-major block.
pub fn lu_solve_block(lu: &[f64], n: usize, piv: &[usize], b: &mut [f64], m: usize) {
    debug_assert_eq!(b.len(), n * m);
    for col in 0..n {
        let p = piv[col];
        if p != col {
            for j in 0..m {
                b.swap(col * m + j, p * m + j);
            }
        }
    }
    for col in 0..n {
        for r in col + 1..n {
            let f = lu[r * n + col];
            if f != 0.0 {
                let (upper, lower) = b.split_at_mut(r * m);
                let src = &upper[col * m..col * m + m];
                let dst = &mut lower[..m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= f * s;
                }
            }
        }
    }
    for row in (0..n).rev() {
        for j in row + 1..n {
            let f = lu[row * n + j];
            if f != 0.0 {
                let (upper, lower) = b.split_at_mut(j * m);
                let dst = &mut upper[row * m..row * m + m];
                let src = &lower[..m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= f * s;
                }
            }
        }
        let inv = 1.0 / lu[row * n + row];
        for v in &mut b[row * m..row * m + m] {
            *v *= inv;
        }
    }
}

/// Dense inverse via LU; used at setup time, never in hot loops.
pub fn invert(a: &[f64], n: usize) -> Result<Vec<f64>, ()> {
    let mut lu = a.to_vec();
    let mut piv = vec![0usize; n];
    lu_factor(&mut lu, n, &mut piv)?;
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    lu_solve_block(&lu, n, &piv, &mut inv, n);
    Ok(inv)
}

/// `out = a * b` for row-major `n x k` times `k x m`.
pub fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), n * k);
    debug_assert_eq!(b.len(), k * m);
    debug_assert_eq!(out.len(), n * m);
    out.fill(0.0);
    for i in 0..n {
        for l in 0..k {
            let f = a[i * k + l];
            if f != 0.0 {
                let src = &b[l * m..l * m + m];
                let dst = &mut out[i * m..i * m + m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += f * s;
                }
            }
        }
    }
}

/// `out += a * x` for row-major `n x m` times vector of length `m`.
pub fn matvec_acc(a: &[f64], x: &[f64], n: usize, m: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), n * m);
    debug_assert_eq!(x.len(), m);
    debug_assert_eq!(out.len(), n);
    for i in 0..n {
        let row = &a[i * m..i * m + m];
        let mut s = 0.0;
        for (r, v) in row.iter().zip(x) {
            s += r * v;
        }
        out[i] += s;
    }
}

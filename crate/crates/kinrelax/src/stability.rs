//! Von Neumann analysis of the transport discretizations: amplification
//! factors of each (time scheme, flux order, iteration count) pairing on
//! scalar linear advection, and bisection for the critical CFL number.

use crate::timeint::DecTableau;
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemePairing {
    pub time_order: u8,
    pub spatial: u8,
    /// DeC iteration count; ignored for the first-order scheme.
    pub iterations: usize,
}

/// Fourier symbol of the flux-difference operator: the semi-discrete
/// update of a single wave reads `dF/dt = -(a/dx) s(theta) F` for `a > 0`
/// (`positive = true`) or the mirrored stencil otherwise.
pub fn spatial_symbol(q: u8, theta: f64, positive: bool) -> Complex64 {
    if !positive {
        // mirrored stencil: s_-(theta) = -s_+(-theta)
        return -spatial_symbol(q, -theta, true);
    }
    let e = |k: f64| Complex64::from_polar(1.0, k * theta);
    let diff = Complex64::new(1.0, 0.0) - e(-1.0);
    let weights = match q {
        1 => Complex64::new(1.0, 0.0),
        2 => e(1.0) / 3.0 + Complex64::new(5.0 / 6.0, 0.0) - e(-1.0) / 6.0,
        4 => {
            e(1.0) * 0.25 + Complex64::new(13.0 / 12.0, 0.0) - e(-1.0) * (5.0 / 12.0)
                + e(-2.0) / 12.0
        }
        _ => panic!("unsupported flux order {q}"),
    };
    diff * weights
}

/// `|G(theta; lambda)|` of the end-of-step multiplier.
pub fn amplification(pairing: &SchemePairing, lambda: f64, theta: f64) -> f64 {
    let s_hat = spatial_symbol(pairing.spatial, theta, true);
    match pairing.time_order {
        1 => (Complex64::new(1.0, 0.0) - s_hat * lambda).norm(),
        2 | 4 => {
            let tab = if pairing.time_order == 2 {
                DecTableau::lobatto_iiic_2()
            } else {
                DecTableau::lobatto_iiic_4()
            };
            let s = tab.s;
            let mut g = vec![Complex64::new(1.0, 0.0); s];
            let mut next = vec![Complex64::new(0.0, 0.0); s];
            for _ in 0..pairing.iterations {
                for r in 0..s {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for q in 0..s {
                        acc += tab.a[r * s + q] * g[q];
                    }
                    next[r] = Complex64::new(1.0, 0.0) - s_hat * lambda * acc;
                }
                std::mem::swap(&mut g, &mut next);
            }
            g[s - 1].norm()
        }
        _ => panic!("unsupported time order"),
    }
}

fn max_amplification(pairing: &SchemePairing, lambda: f64, samples: usize) -> f64 {
    let mut best = 0.0f64;
    let mut best_theta = 0.0;
    for m in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / samples as f64;
        let g = amplification(pairing, lambda, theta);
        if g > best {
            best = g;
            best_theta = theta;
        }
    }
    // golden-section polish around the grid argmax
    let dtheta = 2.0 * std::f64::consts::PI / samples as f64;
    let (mut lo, mut hi) = (best_theta - dtheta, best_theta + dtheta);
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = amplification(pairing, lambda, x1);
    let mut f2 = amplification(pairing, lambda, x2);
    for _ in 0..40 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = amplification(pairing, lambda, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = amplification(pairing, lambda, x1);
        }
    }
    best.max(f1).max(f2)
}

/// Critical CFL number `lambda*` of a pairing by bisection on the
/// stability predicate `max_theta |G| <= 1 + 1e-10`.
pub fn critical_cfl(pairing: &SchemePairing, theta_samples: usize, tol: f64) -> Result<f64> {
    if theta_samples < 2048 || tol > 1e-3 {
        return Err(Error::config(
            "need at least 2048 theta samples and tol <= 1e-3",
        ));
    }
    let stable = |lambda: f64| max_amplification(pairing, lambda, theta_samples) <= 1.0 + 1e-10;
    if !stable(1e-6) {
        return Ok(0.0);
    }
    let mut lo = 1e-6;
    let mut hi = 0.5;
    while stable(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 16.0 {
            return Err(Error::numerical(
                "no instability found below lambda = 16; pairing looks unconditionally stable",
            ));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if stable(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All pairings of the critical-CFL table: the first-order scheme and the
/// DeC schemes at 1..=6 iterations for each flux order.
pub fn table_pairings() -> Vec<SchemePairing> {
    let mut out = Vec::new();
    for spatial in [1u8, 2, 4] {
        out.push(SchemePairing {
            time_order: 1,
            spatial,
            iterations: 1,
        });
    }
    for time_order in [2u8, 4] {
        for spatial in [1u8, 2, 4] {
            for iterations in 1..=6 {
                out.push(SchemePairing {
                    time_order,
                    spatial,
                    iterations,
                });
            }
        }
    }
    out
}

/// Reference critical-CFL values for every pairing of [`table_pairings`].
pub fn reference_table() -> Vec<(SchemePairing, f64)> {
    let rows: [(u8, u8, [f64; 6]); 9] = [
        (1, 1, [1.0, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN]),
        (1, 2, [0.0, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN]),
        (1, 4, [0.0, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN]),
        (2, 1, [1.0, 1.0, 1.0, 0.78, 0.71, 0.85]),
        (2, 2, [0.0, 0.87, 0.87, 0.96, 0.88, 0.98]),
        (2, 4, [0.0, 0.12, 0.12, 0.54, 0.53, 0.61]),
        (4, 1, [1.0, 1.0, 1.26, 1.39, 1.46, 1.34]),
        (4, 2, [0.0, 0.87, 1.63, 1.75, 1.81, 1.77]),
        (4, 4, [0.0, 0.12, 0.90, 1.04, 1.09, 1.00]),
    ];
    let mut out = Vec::new();
    for (time_order, spatial, vals) in rows {
        let iter_count = if time_order == 1 { 1 } else { 6 };
        for (i, v) in vals.iter().take(iter_count).enumerate() {
            out.push((
                SchemePairing {
                    time_order,
                    spatial,
                    iterations: i + 1,
                },
                *v,
            ));
        }
    }
    out
}

/// Compute the full table; returns `(pairing, lambda*)` rows.
pub fn compute_table(theta_samples: usize, tol: f64) -> Result<Vec<(SchemePairing, f64)>> {
    table_pairings()
        .into_iter()
        .map(|p| critical_cfl(&p, theta_samples, tol).map(|l| (p, l)))
        .collect()
}

/// CSV rendering of the critical-CFL table.
pub fn table_csv(rows: &[(SchemePairing, f64)]) -> String {
    let mut out = String::from("time_order,spatial_order,iterations,critical_lambda\n");
    for (p, l) in rows {
        out.push_str(&format!(
            "{},{},{},{:.3}\n",
            p.time_order, p.spatial, p.iterations, l
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symbol_limits() {
        for q in [1u8, 2, 4] {
            let s0 = spatial_symbol(q, 0.0, true);
            assert_abs_diff_eq!(s0.norm(), 0.0, epsilon = 1e-14);
        }
        let s_pi = spatial_symbol(1, std::f64::consts::PI, true);
        assert_abs_diff_eq!(s_pi.re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s_pi.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn symbol_matches_dft_oracle() {
        // apply the flux-difference stencil to e^{i k theta} on a ring and
        // compare with the closed-form symbol.
        let m = 64usize;
        for q in [1u8, 2, 4] {
            for positive in [true, false] {
                for mode in [1usize, 3, 7, 31] {
                    let theta = 2.0 * std::f64::consts::PI * mode as f64 / m as f64;
                    let f: Vec<Complex64> = (0..m)
                        .map(|kk| Complex64::from_polar(1.0, kk as f64 * theta))
                        .collect();
                    let a = if positive { 1.0 } else { -1.0 };
                    let flux = |k: isize| -> Complex64 {
                        // interface k+1/2
                        let g = |off: isize| f[(k + off).rem_euclid(m as isize) as usize];
                        match (q, positive) {
                            (1, true) => g(0) * a,
                            (1, false) => g(1) * a,
                            (2, true) => (g(1) / 3.0 + g(0) * (5.0 / 6.0) - g(-1) / 6.0) * a,
                            (2, false) => (-g(2) / 6.0 + g(1) * (5.0 / 6.0) + g(0) / 3.0) * a,
                            (4, true) => {
                                (g(1) * 0.25 + g(0) * (13.0 / 12.0) - g(-1) * (5.0 / 12.0)
                                    + g(-2) / 12.0)
                                    * a
                            }
                            (4, false) => {
                                (g(3) / 12.0 - g(2) * (5.0 / 12.0) + g(1) * (13.0 / 12.0)
                                    + g(0) * 0.25)
                                    * a
                            }
                            _ => unreachable!(),
                        }
                    };
                    let k0 = 5isize;
                    // a * delta F = (flux(k) - flux(k-1)); symbol: a*s(theta)*F_k
                    let lhs = flux(k0) - flux(k0 - 1);
                    let rhs = spatial_symbol(q, theta, positive) * a * f[k0 as usize];
                    assert!(
                        (lhs - rhs).norm() < 1e-12,
                        "q={q} positive={positive} mode={mode}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn amplification_basics() {
        // lambda = 0: |G| = 1 for every theta
        for pairing in [
            SchemePairing { time_order: 1, spatial: 1, iterations: 1 },
            SchemePairing { time_order: 2, spatial: 2, iterations: 2 },
            SchemePairing { time_order: 4, spatial: 4, iterations: 4 },
        ] {
            for m in 0..16 {
                let theta = 0.4 * m as f64;
                assert_abs_diff_eq!(amplification(&pairing, 0.0, theta), 1.0, epsilon = 1e-13);
            }
        }
        // unit-CFL upwind exactness: |G| = |e^{-i theta}| = 1
        let p1 = SchemePairing { time_order: 1, spatial: 1, iterations: 1 };
        for m in 0..32 {
            let theta = 0.2 * m as f64;
            assert_abs_diff_eq!(amplification(&p1, 1.0, theta), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn monotone_first_order_upwind() {
        let p1 = SchemePairing { time_order: 1, spatial: 1, iterations: 1 };
        assert!(max_amplification(&p1, 0.999, 4096) <= 1.0 + 1e-12);
        assert!(max_amplification(&p1, 1.001, 4096) > 1.0 + 1e-4);
    }

    #[test]
    fn dec2_above_critical_is_unstable() {
        let p = SchemePairing { time_order: 2, spatial: 2, iterations: 2 };
        assert!(max_amplification(&p, 0.9, 4096) > 1.0 + 1e-10);
        assert!(max_amplification(&p, 0.85, 4096) <= 1.0 + 1e-10);
    }

    #[test]
    fn selected_critical_values() {
        let check = |t: u8, q: u8, it: usize, want: f64| {
            let p = SchemePairing { time_order: t, spatial: q, iterations: it };
            let got = critical_cfl(&p, 4096, 1e-3).unwrap();
            assert!(
                (got - want).abs() <= 0.01,
                "pairing {t}/{q}/{it}: got {got:.3}, want {want}"
            );
        };
        check(1, 1, 1, 1.0);
        check(1, 2, 1, 0.0);
        check(2, 2, 2, 0.87);
        check(4, 4, 4, 1.04);
        check(4, 2, 5, 1.81);
    }
}

//! Brute-force reference computations.
//!
//! Everything here is deliberately naive and shares no code with
//! `celldim-core`: closed forms evaluated term by term, exhaustive state
//! enumeration, dense-grid integrals and plain bisection. The core test
//! suites and the `celldim validate` command compare the production
//! algorithms against these.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("state space too large: more than {limit} admissible states")]
    StateSpaceTooLarge { limit: usize },
}

/// Erlang-B blocking for `servers` circuits offered `rho` erlangs.
///
/// Uses the recurrence `E_c = rho E_{c-1} / (c + rho E_{c-1})`, `E_0 = 1`.
pub fn erlang_b(rho: f64, servers: u32) -> f64 {
    let mut e = 1.0;
    for c in 1..=servers {
        let c = f64::from(c);
        e = rho * e / (c + rho * e);
    }
    e
}

/// Exact blocking of a multi-rate loss system.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedBlocking {
    pub per_class: Vec<f64>,
    /// `sum rho_k B_k / sum rho_k`.
    pub weighted: f64,
    /// `sum B_k`.
    pub unweighted: f64,
}

/// Default cap on the number of admissible states visited.
pub const STATE_LIMIT: usize = 1_000_000;

/// Stationary blocking of a multi-class loss system by walking every
/// admissible occupancy vector `n` with `sum n_k b_k <= capacity` and
/// weighting it with the product form `prod rho_k^n_k / n_k!`.
///
/// `classes` holds `(b_k in units, rho_k in erlangs)`.
pub fn state_enumeration_blocking(classes: &[(u32, f64)], capacity: u32) -> Result<EnumeratedBlocking, OracleError> {
    let k = classes.len();
    let mut n = vec![0u32; k];
    let mut total = 0.0;
    let mut blocked = vec![0.0; k];
    let mut visited = 0usize;

    loop {
        let occupancy: u32 = n.iter().zip(classes).map(|(&nk, &(b, _))| nk * b).sum();
        if occupancy <= capacity {
            visited += 1;
            if visited > STATE_LIMIT {
                return Err(OracleError::StateSpaceTooLarge { limit: STATE_LIMIT });
            }
            let mut w = 1.0;
            for (&nk, &(_, rho)) in n.iter().zip(classes) {
                for j in 1..=nk {
                    w *= rho / f64::from(j);
                }
            }
            total += w;
            for (idx, &(b, _)) in classes.iter().enumerate() {
                if occupancy + b > capacity {
                    blocked[idx] += w;
                }
            }
        }

        // odometer increment, skipping coordinates that already overflow
        let mut pos = 0;
        loop {
            if pos == k {
                let per_class: Vec<f64> = blocked.iter().map(|b| b / total).collect();
                let rho_sum: f64 = classes.iter().map(|c| c.1).sum();
                let weighted = if rho_sum > 0.0 {
                    per_class.iter().zip(classes).map(|(b, c)| b * c.1).sum::<f64>() / rho_sum
                } else {
                    0.0
                };
                let unweighted = if rho_sum > 0.0 { per_class.iter().sum() } else { 0.0 };
                return Ok(EnumeratedBlocking { per_class, weighted, unweighted });
            }
            n[pos] += 1;
            let occ: u32 = n.iter().zip(classes).map(|(&nk, &(b, _))| nk * b).sum();
            if occ <= capacity {
                break;
            }
            n[pos] = 0;
            pos += 1;
        }
    }
}

/// Okumura-Hata median loss (dB), small/medium city mobile-height
/// correction, evaluated straight from the published expressions.
pub fn hata_urban_db(f_mhz: f64, h_base: f64, h_mobile: f64, d_km: f64) -> f64 {
    let lf = f_mhz.log10();
    let a_hm = (1.1 * lf - 0.7) * h_mobile - (1.56 * lf - 0.8);
    69.55 + 26.16 * lf - 13.82 * h_base.log10() - a_hm + (44.9 - 6.55 * h_base.log10()) * d_km.log10()
}

/// Okumura-Hata open (rural) area loss in dB.
pub fn hata_open_db(f_mhz: f64, h_base: f64, h_mobile: f64, d_km: f64) -> f64 {
    let lf = f_mhz.log10();
    hata_urban_db(f_mhz, h_base, h_mobile, d_km) - 4.78 * lf * lf + 18.33 * lf - 40.94
}

/// COST-231 Hata loss in dB with area correction `c_m` (0 or 3 dB).
pub fn cost231_db(f_mhz: f64, h_base: f64, h_mobile: f64, d_km: f64, c_m: f64) -> f64 {
    let lf = f_mhz.log10();
    let a_hm = (1.1 * lf - 0.7) * h_mobile - (1.56 * lf - 0.8);
    46.3 + 33.9 * lf - 13.82 * h_base.log10() - a_hm + (44.9 - 6.55 * h_base.log10()) * d_km.log10() + c_m
}

/// Hand-evaluated Okumura-Hata open-area loss at 630 MHz, base 90 m,
/// receiver 10 m, 5 km.
///
/// lf = log10 630 = 2.799341;
/// a(hm) = (1.1 lf - 0.7) 10 - (1.56 lf - 0.8) = 20.225775;
/// urban = 69.55 + 73.230 - 27.007 - 20.226 + 32.098 log10 5 = 117.984078;
/// open = urban - 4.78 lf^2 + 18.33 lf - 40.94 = 90.898440.
pub const HATA_OPEN_630MHZ_90M_10M_5KM_DB: f64 = 90.898_440_401_916;

/// Mean distance from the centre of a regular hexagon to a uniform point,
/// for unit inter-site distance (apothem 1/2), by midpoint rule on an
/// `n x n` grid over the bounding box.
pub fn hexagon_mean_distance(n: usize) -> f64 {
    let apothem = 0.5;
    let half_height = 1.0 / 3f64.sqrt();
    let normals: Vec<(f64, f64)> = (0..3)
        .map(|k| {
            let t = std::f64::consts::PI / 3.0 * k as f64;
            (t.cos(), t.sin())
        })
        .collect();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        let x = -apothem + (i as f64 + 0.5) / n as f64 * 2.0 * apothem;
        for j in 0..n {
            let y = -half_height + (j as f64 + 0.5) / n as f64 * 2.0 * half_height;
            if normals.iter().all(|(cx, cy)| (x * cx + y * cy).abs() <= apothem) {
                sum += x.hypot(y);
                count += 1;
            }
        }
    }
    sum / count as f64
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Bisection for a sign change of `g` on `[lo, hi]`; stops when the
/// bracket is narrower than `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut g: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    if g(lo) >= 0.0 {
        return lo;
    }
    if g(hi) <= 0.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Invert Erlang-B: the smallest number of servers whose blocking is at
/// most `target`.
pub fn erlang_b_servers(rho: f64, target: f64) -> u32 {
    let mut c = 0;
    while erlang_b(rho, c) > target {
        c += 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erlang_b_small_cases() {
        assert!((erlang_b(1.0, 1) - 0.5).abs() < 1e-15);
        assert!((erlang_b(1.0, 2) - 0.2).abs() < 1e-15);
        assert_eq!(erlang_b(3.0, 0), 1.0);
    }

    #[test]
    fn enumeration_single_class_is_erlang_b() {
        for &(rho, c) in &[(1.0, 1), (1.0, 2), (4.5, 7), (10.0, 12)] {
            let e = state_enumeration_blocking(&[(1, rho)], c).unwrap();
            assert!((e.weighted - erlang_b(rho, c)).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_zero_traffic() {
        let e = state_enumeration_blocking(&[(1, 0.0), (3, 0.0)], 5).unwrap();
        assert_eq!(e.weighted, 0.0);
    }

    #[test]
    fn enumeration_refuses_huge_spaces() {
        let r = state_enumeration_blocking(&[(1, 1.0), (1, 1.0), (1, 1.0)], 400);
        assert!(matches!(r, Err(OracleError::StateSpaceTooLarge { .. })));
    }

    #[test]
    fn hata_hand_constant() {
        let v = hata_open_db(630.0, 90.0, 10.0, 5.0);
        assert!((v - HATA_OPEN_630MHZ_90M_10M_5KM_DB).abs() < 1e-9);
    }

    #[test]
    fn hexagon_mean_distance_is_close_to_disc_value() {
        // equal-area disc: 2/3 R with R = sqrt(sqrt3 / 2pi)
        let disc = 2.0 / 3.0 * (3f64.sqrt() / (2.0 * std::f64::consts::PI)).sqrt();
        let hex = hexagon_mean_distance(1500);
        assert!((hex - 0.35102).abs() < 2e-4, "{hex}");
        assert!(hex > disc);
    }

    #[test]
    fn simpson_polynomial_exact() {
        let v = simpson(|x| x * x * x, 0.0, 2.0, 4);
        assert!((v - 4.0).abs() < 1e-12);
    }
}

//! Multi-rate loss system: Kaufman-Roberts blocking, a discrete-event
//! Monte Carlo cross-check and the minimum-bandwidth search.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, Stream};
use crate::traffic::TrafficClasses;

/// Largest capacity the bandwidth search will try, in units.
pub const MAX_SEARCH_UNITS: u32 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErlangClass {
    pub b_units: u32,
    pub rho: f64,
}

/// Classes and capacity discretised on a common bandwidth unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErlangSystem {
    /// MHz.
    pub unit: f64,
    pub classes: Vec<ErlangClass>,
    pub capacity: u32,
}

/// Number of units closest to `mhz`, at least one.
pub fn to_units(mhz: f64, unit: f64) -> u32 {
    ((mhz / unit).round() as u32).max(1)
}

impl ErlangSystem {
    /// Discretises `(b MHz, rho)` pairs onto `unit` with capacity `capacity`.
    pub fn new(classes: &[(f64, f64)], unit: f64, capacity: u32) -> Self {
        let classes = classes.iter().map(|&(b, rho)| ErlangClass { b_units: to_units(b, unit), rho }).collect();
        Self { unit, classes, capacity }
    }

    pub fn from_traffic(traffic: &TrafficClasses, unit: f64, bandwidth_mhz: f64) -> Self {
        let pairs: Vec<(f64, f64)> = traffic.classes.iter().map(|c| (c.b_mhz, c.rho)).collect();
        Self::new(&pairs, unit, (bandwidth_mhz / unit + 1e-9).floor() as u32)
    }

    pub fn max_units(&self) -> u32 {
        self.classes.iter().map(|c| c.b_units).max().unwrap_or(0)
    }

    pub fn with_capacity(&self, capacity: u32) -> Self {
        Self { capacity, ..self.clone() }
    }

    pub fn bandwidth_mhz(&self) -> f64 {
        f64::from(self.capacity) * self.unit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blocking {
    pub per_class: Vec<f64>,
    /// Traffic-weighted mean of the per-class blocking.
    pub aggregate: f64,
    /// Plain sum of the per-class blocking.
    pub unweighted: f64,
}

fn aggregate(per_class: Vec<f64>, classes: &[ErlangClass]) -> Blocking {
    let total: f64 = classes.iter().map(|c| c.rho).sum();
    let weighted: f64 = classes.iter().zip(&per_class).map(|(c, b)| c.rho * b).sum();
    Blocking {
        aggregate: if total > 0.0 { weighted / total } else { 0.0 },
        unweighted: per_class.iter().sum(),
        per_class,
    }
}

const RESCALE_ABOVE: f64 = 1e200;

/// Kaufman-Roberts recursion `c G(c) = sum_k rho_k b_k G(c - b_k)`.
///
/// The occupancy weights are rescaled whenever they grow past 1e200, which
/// leaves every ratio unchanged and keeps capacities of 10^5 units and
/// beyond finite.
pub fn kaufman_roberts(system: &ErlangSystem) -> Result<Blocking> {
    let capacity = system.capacity;
    let largest = system.max_units();
    if capacity < largest {
        return Err(Error::CapacityTooSmall { capacity, largest });
    }
    let c_max = capacity as usize;
    let active: Vec<(usize, f64)> = system
        .classes
        .iter()
        .filter(|c| c.rho > 0.0)
        .map(|c| (c.b_units as usize, c.rho * f64::from(c.b_units)))
        .collect();

    let mut g = vec![0.0; c_max + 1];
    g[0] = 1.0;
    for c in 1..=c_max {
        let mut acc = 0.0;
        for &(b, rb) in &active {
            if b <= c {
                acc += rb * g[c - b];
            }
        }
        g[c] = acc / c as f64;
        if g[c] > RESCALE_ABOVE {
            let s = 1.0 / g[c];
            g[..=c].iter_mut().for_each(|v| *v *= s);
        }
    }

    // suffix sums: tail[j] = sum_{c >= j} G(c)
    let mut tail = vec![0.0; c_max + 2];
    for c in (0..=c_max).rev() {
        tail[c] = tail[c + 1] + g[c];
    }
    let total = tail[0];
    let per_class = system
        .classes
        .iter()
        .map(|k| if k.rho > 0.0 { tail[c_max + 1 - k.b_units as usize] / total } else { 0.0 })
        .collect();
    Ok(aggregate(per_class, &system.classes))
}

/// Continuous-time simulation of the loss system with unit mean holding
/// time: class `k` arrives at rate `rho_k`, is admitted iff it fits, and
/// leaves after an exponential holding time. Blocking of class `k` is the
/// fraction of time the free capacity is below `b_k`.
///
/// Runs `events` transitions after a burn-in of `events / 10`.
pub fn mc_blocking_oracle(system: &ErlangSystem, events: u64, seed: u64) -> Blocking {
    let k = system.classes.len();
    let arrival: f64 = system.classes.iter().map(|c| c.rho).sum();
    if arrival == 0.0 {
        return aggregate(vec![0.0; k], &system.classes);
    }
    let mut rng = substream(seed, Stream::Queue, 0);
    let mut active = vec![0u64; k];
    let mut occupancy = 0u32;
    let mut blocked_time = vec![0.0; k];
    let mut elapsed = 0.0;
    let burn_in = events / 10;

    for step in 0..burn_in + events {
        let departures: f64 = active.iter().map(|&n| n as f64).sum();
        let rate = arrival + departures;
        let dt = -(1.0 - rng.random::<f64>()).ln() / rate;
        if step >= burn_in {
            elapsed += dt;
            for (t, c) in blocked_time.iter_mut().zip(&system.classes) {
                if occupancy + c.b_units > system.capacity {
                    *t += dt;
                }
            }
        }
        let mut u = rng.random::<f64>() * rate;
        if u < arrival {
            for (i, c) in system.classes.iter().enumerate() {
                if u < c.rho || i == k - 1 {
                    if occupancy + c.b_units <= system.capacity {
                        active[i] += 1;
                        occupancy += c.b_units;
                    }
                    break;
                }
                u -= c.rho;
            }
        } else {
            u -= arrival;
            for (i, c) in system.classes.iter().enumerate() {
                let n = active[i] as f64;
                if (u < n || i == k - 1) && active[i] > 0 {
                    active[i] -= 1;
                    occupancy -= c.b_units;
                    break;
                }
                u -= n;
            }
        }
    }
    let per_class = blocked_time.into_iter().map(|t| t / elapsed).collect();
    aggregate(per_class, &system.classes)
}

/// Smallest capacity (MHz, a multiple of `unit`) whose aggregate blocking
/// is at most `target`.
pub fn min_bandwidth(classes: &[(f64, f64)], target: f64, unit: f64) -> Result<f64> {
    let system = ErlangSystem::new(classes, unit, 0);
    Ok(f64::from(min_capacity(&system, target)?) * unit)
}

/// [`min_bandwidth`] in units: exponential bracket, then bisection.
pub fn min_capacity(system: &ErlangSystem, target: f64) -> Result<u32> {
    let meets = |c: u32| -> Result<bool> { Ok(kaufman_roberts(&system.with_capacity(c))?.aggregate <= target) };
    let mut lo = system.max_units().max(1);
    if meets(lo)? {
        return Ok(lo);
    }
    let mut hi = lo;
    loop {
        hi = hi.saturating_mul(2);
        if hi > MAX_SEARCH_UNITS {
            return Err(Error::Infeasible { ceiling_mhz: f64::from(MAX_SEARCH_UNITS) * system.unit });
        }
        if meets(hi)? {
            break;
        }
        lo = hi;
    }
    // lo fails, hi meets
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(rho: f64, capacity: u32) -> ErlangSystem {
        ErlangSystem { unit: 1.0, classes: vec![ErlangClass { b_units: 1, rho }], capacity }
    }

    #[test]
    fn erlang_b_small_cases() {
        assert!((kaufman_roberts(&single(1.0, 1)).unwrap().aggregate - 0.5).abs() < 1e-15);
        assert!((kaufman_roberts(&single(1.0, 2)).unwrap().aggregate - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_traffic_never_blocks() {
        let s = ErlangSystem::new(&[(1.0, 0.0), (2.5, 0.0)], 0.1, 40);
        let b = kaufman_roberts(&s).unwrap();
        assert_eq!(b.aggregate, 0.0);
        assert_eq!(b.unweighted, 0.0);
    }

    #[test]
    fn capacity_below_largest_class() {
        let s = ErlangSystem::new(&[(1.0, 1.0), (3.0, 1.0)], 1.0, 2);
        assert!(matches!(kaufman_roberts(&s), Err(Error::CapacityTooSmall { capacity: 2, largest: 3 })));
    }

    #[test]
    fn huge_capacity_stays_finite() {
        let s = ErlangSystem {
            unit: 0.1,
            classes: vec![ErlangClass { b_units: 3, rho: 20_000.0 }, ErlangClass { b_units: 7, rho: 4_000.0 }],
            capacity: 100_000,
        };
        let b = kaufman_roberts(&s).unwrap();
        assert!(b.aggregate.is_finite() && (0.0..=1.0).contains(&b.aggregate));
    }

    #[test]
    fn unit_rounding() {
        let s = ErlangSystem::new(&[(0.04, 1.0), (2.96, 1.0), (3.04, 1.0)], 0.1, 50);
        let u: Vec<u32> = s.classes.iter().map(|c| c.b_units).collect();
        assert_eq!(u, vec![1, 30, 30]);
    }

    #[test]
    fn monte_carlo_single_class() {
        let s = single(5.0, 6);
        let exact = kaufman_roberts(&s).unwrap().aggregate;
        let mc = mc_blocking_oracle(&s, 400_000, 1).aggregate;
        assert!((mc - exact).abs() / exact < 0.05, "{mc} vs {exact}");
    }

    #[test]
    fn min_bandwidth_target_one_is_largest_class() {
        let bw = min_bandwidth(&[(2.0, 5.0), (0.7, 3.0)], 1.0, 0.1).unwrap();
        assert!((bw - 2.0).abs() < 1e-12);
    }

    #[test]
    fn min_bandwidth_is_tight() {
        let classes = [(3.0, 2.0), (1.2, 4.0)];
        let s = ErlangSystem::new(&classes, 0.1, 0);
        let c = min_capacity(&s, 1e-3).unwrap();
        assert!(kaufman_roberts(&s.with_capacity(c)).unwrap().aggregate <= 1e-3);
        assert!(kaufman_roberts(&s.with_capacity(c - 1)).unwrap().aggregate > 1e-3);
    }
}

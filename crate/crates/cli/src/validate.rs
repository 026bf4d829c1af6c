//! `celldim validate`: production kernels against the reference oracles.

use rand::Rng;

use celldim::erlang::{kaufman_roberts, mc_blocking_oracle, ErlangClass, ErlangSystem};
use celldim::geometry::{build_layout, cell_area, sample_users};
use celldim::propagation::path_loss;
use celldim::rng::{substream, Stream};
use celldim::scenario::{Bundle, Morphology, Scenario, ServiceConfig};
use celldim::sfn::{broadcast_bandwidth, weight, WeightParams};
use celldim::unicast::UnicastEnsemble;
use celldim_oracles as oracle;

struct Report {
    ok: bool,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.ok &= pass;
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn run(thorough: bool) -> bool {
    let mut r = Report { ok: true };

    let s = Scenario::rural();
    let pl = path_loss(5_000.0, &s);
    r.check("path loss", (pl - oracle::HATA_OPEN_630MHZ_90M_10M_5KM_DB).abs() < 1e-9, format!("rural 5 km {pl:.6} dB"));

    let bw = broadcast_bandwidth(&ServiceConfig::default(), 1.0, 1.0, 3);
    r.check("broadcast arithmetic", (bw - 343.80).abs() < 1e-6, format!("{bw:.6} MHz at unit efficiency"));

    let mut worst = 0.0f64;
    for rho in [0.1, 1.0, 7.5, 30.0] {
        for c in 1..=60u32 {
            let sys = ErlangSystem { unit: 1.0, classes: vec![ErlangClass { b_units: 1, rho }], capacity: c };
            let kr = kaufman_roberts(&sys).expect("capacity >= 1").aggregate;
            worst = worst.max(rel(kr, oracle::erlang_b(rho, c)));
        }
    }
    r.check("single-class blocking", worst < 1e-9, format!("max relative error {worst:.2e}"));

    let mut rng = substream(0xC0FFEE, Stream::Queue, 99);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(1..=3);
        let classes: Vec<(u32, f64)> =
            (0..k).map(|_| (rng.random_range(1..=6u32), rng.random_range(0.05..4.0))).collect();
        let largest = classes.iter().map(|c| c.0).max().unwrap_or(1);
        let capacity = rng.random_range(largest..=50);
        let sys = ErlangSystem {
            unit: 1.0,
            classes: classes.iter().map(|&(b, rho)| ErlangClass { b_units: b, rho }).collect(),
            capacity,
        };
        let kr = kaufman_roberts(&sys).expect("capacity checked");
        let ex = oracle::state_enumeration_blocking(&classes, capacity).expect("small state space");
        worst = worst.max(rel(kr.aggregate, ex.weighted));
        for (a, b) in kr.per_class.iter().zip(&ex.per_class) {
            worst = worst.max(rel(*a, *b));
        }
    }
    r.check("multi-class blocking vs enumeration", worst < 1e-9, format!("max relative error {worst:.2e}"));

    let events = if thorough { 4_000_000 } else { 1_000_000 };
    let sys = ErlangSystem {
        unit: 1.0,
        classes: vec![
            ErlangClass { b_units: 1, rho: 2.0 },
            ErlangClass { b_units: 2, rho: 1.0 },
            ErlangClass { b_units: 4, rho: 0.5 },
        ],
        capacity: 20,
    };
    let kr = kaufman_roberts(&sys).expect("capacity checked").aggregate;
    let mc = mc_blocking_oracle(&sys, events, 7).aggregate;
    let pass = rel(mc, kr) < 0.10 || (mc - kr).abs() < 1e-3;
    r.check("blocking vs event simulation", pass, format!("analytic {kr:.4e}, simulated {mc:.4e}"));

    let p = WeightParams::from_scenario(&Scenario::rural());
    let (lo, hi) = (-1.5 * p.t_u, p.t_cp + 1.5 * p.t_u);
    let n = 1_000_000;
    let h = (hi - lo) / n as f64;
    let mut jump = 0.0f64;
    let mut in_range = true;
    let mut prev = weight(lo, &p);
    for i in 1..=n {
        let w = weight(lo + h * i as f64, &p);
        in_range &= (0.0..=1.0).contains(&w);
        jump = jump.max((w - prev).abs() - h / p.t_u);
        prev = w;
    }
    let area = oracle::simpson(|t| weight(t, &p), lo, hi, 200_000);
    let area_err = rel(area, p.t_u + p.t_cp);
    r.check(
        "weight function",
        jump < 1e-9 && in_range && area_err < 1e-6,
        format!("excess jump {jump:.1e}, integral error {area_err:.1e}"),
    );

    let mut b = Bundle::preset(Morphology::Urban);
    if !thorough {
        b.numerics.quadrature_nodes = 32;
        b.numerics.draws_per_node = 300;
    }
    let layout = build_layout(b.scenario.isd, b.scenario.interferer_rings, false);
    let ens = UnicastEnsemble::new(&b.scenario, &layout, &b.efficiency.unicast, &b.numerics, 3).expect("reuse 3");
    let mut worst = 0.0f64;
    for demand in [20.0, 80.0, 200.0] {
        for bw in [10.0, 30.0, 60.0] {
            let sol = ens.solve(demand, bw, &b.numerics);
            let reference = oracle::bisect(|x| x - ens.load_map(x, demand, bw).min(1.0), 0.0, 1.0, 1e-7);
            worst = worst.max((sol.x - reference).abs());
        }
    }
    let zero = ens.solve(0.0, 10.0, &b.numerics).x;
    let one = ens.solve(1e9, 10.0, &b.numerics).x;
    r.check(
        "load fixed point",
        worst <= 2e-3 && zero == 0.0 && one == 1.0,
        format!("max deviation from bisection {worst:.2e}, limits {zero} and {one}"),
    );

    let users = sample_users(&layout, if thorough { 200_000 } else { 50_000 }, 5);
    let mean = users.iter().map(|u| u.position.norm()).sum::<f64>() / users.len() as f64 / b.scenario.isd;
    let reference = oracle::hexagon_mean_distance(2_000);
    r.check(
        "user placement",
        rel(mean, reference) < 0.01,
        format!("mean distance {mean:.4} isd (reference {reference:.4}); cell {:.0} m²", cell_area(b.scenario.isd)),
    );

    println!("{}", if r.ok { "all checks passed" } else { "some checks FAILED" });
    r.ok
}

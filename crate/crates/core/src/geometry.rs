//! Regular hexagonal site layouts and user placement in the evaluated cell.

use rand::Rng;
use rayon::prelude::*;

use crate::rng::{substream, SampleRng, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Axial step vectors, counter-clockwise from +x.
const DIRECTIONS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// A full hexagonal lattice of sites centred on site 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HexLayout {
    pub isd: f64,
    pub rings: u32,
    /// Axial lattice coordinates, parallel to `sites`.
    pub axial: Vec<(i32, i32)>,
    pub sites: Vec<Point>,
    /// `false` for sites outside the evaluated cell's region. All `true`
    /// unless the layout was built with a regional split.
    pub in_region: Vec<bool>,
}

/// Builds `1 + 3 rings (rings + 1)` sites ring by ring.
///
/// With `region_split`, sites strictly right of the vertical line through
/// site 0 (`x > 0`) belong to the neighbouring region.
pub fn build_layout(isd: f64, rings: u32, region_split: bool) -> HexLayout {
    let mut axial = vec![(0, 0)];
    for k in 1..=rings as i32 {
        let (mut q, mut r) = (k * DIRECTIONS[0].0, k * DIRECTIONS[0].1);
        for side in 0..6 {
            let (dq, dr) = DIRECTIONS[(side + 2) % 6];
            for _ in 0..k {
                axial.push((q, r));
                q += dq;
                r += dr;
            }
        }
    }
    let sites: Vec<Point> = axial.iter().map(|&(q, r)| axial_to_point(q, r, isd)).collect();
    let eps = 1e-9 * isd;
    let in_region = sites.iter().map(|p| !region_split || p.x <= eps).collect();
    HexLayout { isd, rings, axial, sites, in_region }
}

pub fn axial_to_point(q: i32, r: i32, isd: f64) -> Point {
    let (q, r) = (f64::from(q), f64::from(r));
    Point::new(isd * (q + 0.5 * r), isd * (3f64.sqrt() / 2.0 * r))
}

impl HexLayout {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn distances_from(&self, p: &Point) -> Vec<f64> {
        self.sites.iter().map(|s| s.distance(p)).collect()
    }

    pub fn out_of_region_count(&self) -> usize {
        self.in_region.iter().filter(|f| !**f).count()
    }

    /// `site,x_m,y_m,in_region` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("site,x_m,y_m,in_region\n");
        for (i, (p, r)) in self.sites.iter().zip(&self.in_region).enumerate() {
            out.push_str(&format!("{i},{:.3},{:.3},{}\n", p.x, p.y, u8::from(*r)));
        }
        out
    }
}

/// Radius of the disc with the same area as one hexagonal cell.
pub fn cell_radius(isd: f64) -> f64 {
    isd * (3f64.sqrt() / (2.0 * std::f64::consts::PI)).sqrt()
}

/// Area of one hexagonal cell in m².
pub fn cell_area(isd: f64) -> f64 {
    3f64.sqrt() / 2.0 * isd * isd
}

/// Point-in-cell test for the hexagon of site 0 (apothem `isd / 2`, flat
/// edges facing the six neighbours).
pub fn in_cell(p: &Point, isd: f64) -> bool {
    let a = 0.5 * isd * (1.0 + 1e-12);
    let s = 3f64.sqrt() / 2.0;
    p.x.abs() <= a && (0.5 * p.x + s * p.y).abs() <= a && (-0.5 * p.x + s * p.y).abs() <= a
}

/// Uniform point in cell 0 by rejection from the bounding box.
pub fn sample_in_cell(rng: &mut SampleRng, isd: f64) -> Point {
    let half_w = 0.5 * isd;
    let half_h = isd / 3f64.sqrt();
    loop {
        let p = Point::new(rng.random_range(-half_w..half_w), rng.random_range(-half_h..half_h));
        if in_cell(&p, isd) {
            return p;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserPosition {
    pub position: Point,
    pub distance_to_site: Vec<f64>,
}

/// `n` i.i.d. uniform users in cell 0, reproducible from `seed`.
pub fn sample_users(layout: &HexLayout, n: usize, seed: u64) -> Vec<UserPosition> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, Stream::Users, i);
            let position = sample_in_cell(&mut rng, layout.isd);
            UserPosition { distance_to_site: layout.distances_from(&position), position }
        })
        .collect()
}

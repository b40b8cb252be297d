//! Station point process and cell geometry primitives.
//!
//! Stations form a homogeneous Poisson process in a square window, with the
//! station under study pinned at the origin (adding a point at the origin
//! leaves the remaining process unchanged by Slivnyak's theorem). The cell
//! of a station is the intersection of its Voronoi cell with the disk of
//! radius `r_c` around it; all membership tests here are exact brute-force
//! nearest-station checks.

use crate::error::{Error, Result};
use crate::rng::{self, tag};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Trial budget for rejection sampling inside a cell. Cells have positive
/// area almost surely, so exhausting this indicates a degenerate setup.
const REJECTION_BUDGET: u64 = 1_000_000;

/// Probe-pair count scale: window must cover at least this many mean
/// station spacings per half-width to keep boundary bias negligible.
const MIN_HALF_WIDTH_SPACINGS: f64 = 10.0;

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist_sq(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point2) -> f64 {
        self.dist_sq(other).sqrt()
    }

    /// Distance to the origin.
    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

/// Square observation window centered at the origin.
#[derive(Debug, Clone, Copy)]
pub struct SimulationWindow {
    pub half_width: f64,
}

impl SimulationWindow {
    pub fn new(half_width: f64) -> Self {
        Self { half_width }
    }

    /// Window sized to `factor` mean station spacings (`factor / sqrt(density)`).
    pub fn for_density(density: f64, factor: f64) -> Self {
        Self {
            half_width: factor / density.sqrt(),
        }
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_width * self.half_width
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x.abs() <= self.half_width && p.y.abs() <= self.half_width
    }
}

/// One realization of the station process. `points[0]` is always the
/// station at the exact origin; the rest are the Poisson points.
#[derive(Debug, Clone)]
pub struct BsProcess {
    pub density: f64,
    pub window: SimulationWindow,
    pub points: Vec<Point2>,
}

/// Samples a station process of the given density, pinning one station at
/// the origin. Fails with [`Error::WindowTooSmall`] when the window spans
/// fewer than ten mean spacings per half-width, where boundary effects on
/// cells near the origin stop being negligible.
pub fn sample_ppp(density: f64, window: SimulationWindow, seed: u64) -> Result<BsProcess> {
    if !(density > 0.0) || !density.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "station density must be positive, got {density}"
        )));
    }
    let min_half_width = MIN_HALF_WIDTH_SPACINGS / density.sqrt();
    if window.half_width < min_half_width {
        return Err(Error::WindowTooSmall {
            half_width: window.half_width,
            min: min_half_width,
            density,
        });
    }

    let mut rng = rng::stream(rng::derive(seed, &[tag::PPP]));
    let mean = density * window.area();
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidParameter(format!("invalid process mean {mean}: {e}")))?
        .sample(&mut rng) as usize;

    let mut points = Vec::with_capacity(count + 1);
    points.push(Point2::ORIGIN);
    let hw = window.half_width;
    for _ in 0..count {
        let x = rng.random_range(-hw..=hw);
        let y = rng.random_range(-hw..=hw);
        points.push(Point2::new(x, y));
    }
    Ok(BsProcess {
        density,
        window,
        points,
    })
}

/// Stations other than `bs` that can influence membership in the cell of
/// `bs`: any point of the cell is within `r_c` of `bs`, so stations farther
/// than `2 r_c` from `bs` are always the losing candidate.
pub(crate) fn influencing_neighbors(bs: Point2, process: &BsProcess, r_c: f64) -> Vec<Point2> {
    let reach = 2.0 * r_c;
    let reach_sq = reach * reach;
    process
        .points
        .iter()
        .copied()
        .filter(|&b| {
            let dx = (b.x - bs.x).abs();
            if dx > reach {
                return false;
            }
            let d2 = b.dist_sq(bs);
            d2 > 0.0 && d2 <= reach_sq
        })
        .collect()
}

fn member_against(p: Point2, bs: Point2, neighbors: &[Point2], r_c: f64) -> bool {
    let own = p.dist_sq(bs);
    if own > r_c * r_c {
        return false;
    }
    neighbors.iter().all(|&b| own <= p.dist_sq(b))
}

/// Whether `p` belongs to the cell of `bs`: within range `r_c` of `bs` and
/// at least as close to `bs` as to every other station (ties kept).
pub fn is_in_jm_cell(p: Point2, bs: Point2, process: &BsProcess, r_c: f64) -> bool {
    let own = p.dist_sq(bs);
    if own > r_c * r_c {
        return false;
    }
    process.points.iter().all(|&b| {
        // The station itself compares equal and never rejects.
        own <= p.dist_sq(b) || b == bs
    })
}

/// Draws a point uniformly distributed over the cell of `bs` by rejection
/// from the disk of radius `r_c` around it.
pub fn sample_uniform_in_jm_cell(
    bs: Point2,
    process: &BsProcess,
    r_c: f64,
    seed: u64,
) -> Result<Point2> {
    let neighbors = influencing_neighbors(bs, process, r_c);
    let mut rng = rng::stream(rng::derive(seed, &[tag::USER]));
    sample_in_cell_with(&mut rng, bs, &neighbors, r_c)
}

/// Rejection loop shared by the public sampler and the simulator hot path.
pub(crate) fn sample_in_cell_with<R: Rng>(
    rng: &mut R,
    bs: Point2,
    neighbors: &[Point2],
    r_c: f64,
) -> Result<Point2> {
    for _ in 0..REJECTION_BUDGET {
        let radius = r_c * rng.random::<f64>().sqrt();
        let angle = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let p = Point2::new(bs.x + radius * angle.cos(), bs.y + radius * angle.sin());
        if member_against(p, bs, neighbors, r_c) {
            return Ok(p);
        }
    }
    Err(Error::RejectionBudgetExceeded {
        budget: REJECTION_BUDGET,
    })
}

/// Unbiased cell area estimate: the hit fraction of `n_probe` uniform
/// probes in the surrounding disk, times the disk area.
pub fn estimate_cell_area(
    bs: Point2,
    process: &BsProcess,
    r_c: f64,
    n_probe: u32,
    seed: u64,
) -> f64 {
    let neighbors = influencing_neighbors(bs, process, r_c);
    let mut rng = rng::stream(rng::derive(seed, &[tag::PROBE]));
    estimate_area_with(&mut rng, bs, &neighbors, r_c, n_probe)
}

pub(crate) fn estimate_area_with<R: Rng>(
    rng: &mut R,
    bs: Point2,
    neighbors: &[Point2],
    r_c: f64,
    n_probe: u32,
) -> f64 {
    if neighbors.is_empty() {
        // The disk lies entirely inside the Voronoi cell.
        return std::f64::consts::PI * r_c * r_c;
    }
    let mut hits = 0u32;
    for _ in 0..n_probe {
        let radius = r_c * rng.random::<f64>().sqrt();
        let angle = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let p = Point2::new(bs.x + radius * angle.cos(), bs.y + radius * angle.sin());
        if member_against(p, bs, neighbors, r_c) {
            hits += 1;
        }
    }
    std::f64::consts::PI * r_c * r_c * f64::from(hits) / f64::from(n_probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn same_seed_reproduces_points() {
        let w = SimulationWindow::for_density(1e-2, 10.0);
        let a = sample_ppp(1e-2, w, 42).unwrap();
        let b = sample_ppp(1e-2, w, 42).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample_ppp(1e-2, w, 43).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn origin_station_present_exactly_once() {
        let w = SimulationWindow::for_density(1e-2, 10.0);
        let p = sample_ppp(1e-2, w, 7).unwrap();
        assert_eq!(p.points[0], Point2::ORIGIN);
        let n_origin = p
            .points
            .iter()
            .filter(|q| q.x == 0.0 && q.y == 0.0)
            .count();
        assert_eq!(n_origin, 1);
        assert!(p.points.iter().all(|&q| p.window.contains(q)));
    }

    #[test]
    fn mean_count_matches_intensity() {
        let density: f64 = 1e-2;
        let w = SimulationWindow::for_density(density, 10.0);
        let n_seeds = 2000;
        let mean = (0..n_seeds)
            .map(|s| sample_ppp(density, w, s).unwrap().points.len() as f64)
            .sum::<f64>()
            / n_seeds as f64;
        let expected = density * w.area() + 1.0;
        // 3 sigma of the seed average plus slack.
        let tol = 3.0 * (density * w.area()).sqrt() / (n_seeds as f64).sqrt() + 0.1;
        assert!(
            (mean - expected).abs() < tol,
            "mean {mean} vs {expected} (tol {tol})"
        );
    }

    #[test]
    fn undersized_window_rejected() {
        let density: f64 = 1e-2;
        let w = SimulationWindow::new(0.5 * MIN_HALF_WIDTH_SPACINGS / density.sqrt());
        assert!(matches!(
            sample_ppp(density, w, 1),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    fn two_station_process(other: Point2) -> BsProcess {
        BsProcess {
            density: 1e-4,
            window: SimulationWindow::new(1e4),
            points: vec![Point2::ORIGIN, other],
        }
    }

    #[test]
    fn membership_single_station() {
        let p = two_station_process(Point2::new(1e9, 1e9));
        assert!(is_in_jm_cell(Point2::new(50.0, 0.0), Point2::ORIGIN, &p, 100.0));
        assert!(!is_in_jm_cell(Point2::new(101.0, 0.0), Point2::ORIGIN, &p, 100.0));
        // Range boundary is inclusive.
        assert!(is_in_jm_cell(Point2::new(100.0, 0.0), Point2::ORIGIN, &p, 100.0));
    }

    #[test]
    fn membership_respects_closer_station() {
        let other = Point2::new(100.0, 0.0);
        let p = two_station_process(other);
        assert!(is_in_jm_cell(Point2::new(49.0, 0.0), Point2::ORIGIN, &p, 100.0));
        assert!(!is_in_jm_cell(Point2::new(51.0, 0.0), Point2::ORIGIN, &p, 100.0));
        // Equidistant points belong to both cells.
        let mid = Point2::new(50.0, 30.0);
        assert!(is_in_jm_cell(mid, Point2::ORIGIN, &p, 100.0));
        assert!(is_in_jm_cell(mid, other, &p, 100.0));
    }

    #[test]
    fn sampled_user_lies_in_cell() {
        for seed in 0..60 {
            let density = 4e-6;
            let w = SimulationWindow::for_density(density, 10.0);
            let process = sample_ppp(density, w, seed).unwrap();
            let r_c = 400.0;
            let u = sample_uniform_in_jm_cell(Point2::ORIGIN, &process, r_c, seed).unwrap();
            assert!(is_in_jm_cell(u, Point2::ORIGIN, &process, r_c), "seed {seed}");
        }
    }

    #[test]
    fn isolated_cell_sampling_is_uniform_on_disk() {
        let p = two_station_process(Point2::new(1e9, 1e9));
        let r_c = 200.0;
        let n = 100_000;
        let mean_dist = (0..n)
            .map(|s| {
                sample_uniform_in_jm_cell(Point2::ORIGIN, &p, r_c, s)
                    .unwrap()
                    .norm()
            })
            .sum::<f64>()
            / n as f64;
        // Uniform disk: E[d] = (2/3) r_c, sd(d) = r_c / sqrt(18).
        let se = r_c / 18f64.sqrt() / (n as f64).sqrt();
        assert!(
            (mean_dist - 2.0 / 3.0 * r_c).abs() < 4.0 * se,
            "mean {mean_dist}"
        );
    }

    #[test]
    fn isolated_cell_area_is_disk_area() {
        let p = two_station_process(Point2::new(1e9, 1e9));
        let est = estimate_cell_area(Point2::ORIGIN, &p, 150.0, 4096, 3);
        assert_relative_eq!(est, PI * 150.0 * 150.0, max_relative = 1e-12);
    }

    #[test]
    fn halfplane_cut_area_matches_geometry() {
        let r = 100.0;
        let a = 50.0;
        let p = two_station_process(Point2::new(2.0 * a, 0.0));
        let est = estimate_cell_area(Point2::ORIGIN, &p, r, 4096, 11);
        // Disk cut by the perpendicular bisector at x = a.
        let exact = PI * r * r - r * r * (a / r).acos() + a * (r * r - a * a).sqrt();
        let h = exact / (PI * r * r);
        let sigma = PI * r * r * (h * (1.0 - h) / 4096.0).sqrt();
        assert!(
            (est - exact).abs() < 3.5 * sigma,
            "est {est} vs {exact} (sigma {sigma})"
        );
    }

    #[test]
    fn probe_estimates_are_deterministic() {
        let density = 4e-6;
        let w = SimulationWindow::for_density(density, 10.0);
        let process = sample_ppp(density, w, 9).unwrap();
        let a = estimate_cell_area(Point2::ORIGIN, &process, 300.0, 4096, 5);
        let b = estimate_cell_area(Point2::ORIGIN, &process, 300.0, 4096, 5);
        assert_eq!(a, b);
    }
}

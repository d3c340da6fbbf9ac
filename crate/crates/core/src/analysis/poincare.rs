//! Poincaré sections through the plane `M_y = 0` and descriptors of the
//! resulting point sets.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::bloch::SpinState;
use crate::integrator::Trajectory;

/// Fewest directed crossings accepted for a section.
pub const MIN_CROSSINGS: usize = 50;

/// Which `M_y` defines the section plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionPlane {
    /// `M_{y,1} + M_{y,2} = 0`.
    #[default]
    Total,
    /// `M_{y,i} = 0` for cell `i` (0 or 1).
    Cell(usize),
}

impl SectionPlane {
    fn my(self, s: &SpinState) -> f64 {
        match self {
            SectionPlane::Total => s.my_total(),
            SectionPlane::Cell(i) => s.0[3 * i + 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareSection {
    /// `(M_x, M_z)` totals at each upward crossing.
    pub points: Vec<[f64; 2]>,
    /// Full interpolated state at each crossing.
    pub crossings: Vec<SpinState>,
    /// Interpolated crossing times, seconds.
    pub times: Vec<f64>,
    pub crossing_count: usize,
    /// Largest side of the trajectory's bounding box in the `(M_x, M_z)`
    /// totals plane.
    pub attractor_extent: f64,
}

pub fn poincare_section(traj: &Trajectory) -> Result<PoincareSection, AnalysisError> {
    poincare_section_with(traj, SectionPlane::Total)
}

/// Directed (negative to positive) crossings of the section plane, located
/// by linear interpolation of all six components between bracketing samples.
pub fn poincare_section_with(traj: &Trajectory, plane: SectionPlane) -> Result<PoincareSection, AnalysisError> {
    let states = traj.states();
    let mut crossings = Vec::new();
    let mut times = Vec::new();
    for (k, pair) in states.windows(2).enumerate() {
        let (a, b) = (plane.my(&pair[0]), plane.my(&pair[1]));
        if a < 0.0 && b >= 0.0 {
            let frac = -a / (b - a);
            let s = SpinState(std::array::from_fn(|i| {
                pair[0].0[i] + frac * (pair[1].0[i] - pair[0].0[i])
            }));
            crossings.push(s);
            times.push(traj.time(k) + frac * traj.dt_sample());
        }
    }
    if crossings.len() < MIN_CROSSINGS {
        return Err(AnalysisError::InsufficientData(format!(
            "{} section crossings, need at least {MIN_CROSSINGS}",
            crossings.len()
        )));
    }
    let points = crossings.iter().map(|s| [s.mx_total(), s.mz_total()]).collect();
    Ok(PoincareSection {
        points,
        crossing_count: crossings.len(),
        crossings,
        times,
        attractor_extent: extent(states.iter().map(|s| [s.mx_total(), s.mz_total()])),
    })
}

fn extent(points: impl Iterator<Item = [f64; 2]>) -> f64 {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (hi[0] - lo[0]).max(hi[1] - lo[1]).max(0.0)
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub centroid: [f64; 2],
    /// Largest distance of a member from the centroid.
    pub radius: f64,
    pub size: usize,
}

/// Leader clustering: each point joins the first cluster whose seed lies
/// within `link` of it, otherwise it seeds a new cluster.
pub fn clusters(points: &[[f64; 2]], link: f64) -> Vec<Cluster> {
    let mut seeds: Vec<[f64; 2]> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        match seeds.iter().position(|s| dist(s, p) <= link) {
            Some(c) => members[c].push(i),
            None => {
                seeds.push(*p);
                members.push(vec![i]);
            }
        }
    }
    members
        .into_iter()
        .map(|idx| {
            let n = idx.len() as f64;
            let centroid = [
                idx.iter().map(|&i| points[i][0]).sum::<f64>() / n,
                idx.iter().map(|&i| points[i][1]).sum::<f64>() / n,
            ];
            let radius = idx.iter().map(|&i| dist(&points[i], &centroid)).fold(0.0, f64::max);
            Cluster {
                centroid,
                radius,
                size: idx.len(),
            }
        })
        .collect()
}

/// Longest edge of the Euclidean minimum spanning tree divided by the total
/// tree length. Points sampled densely along one closed curve give a small
/// value; separated pieces produce one long bridging edge.
pub fn max_gap_fraction(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    // Prim's algorithm on the complete graph.
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let (mut total, mut longest) = (0.0, 0.0_f64);
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut bu = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && best[v] < bu {
                bu = best[v];
                u = v;
            }
        }
        in_tree[u] = true;
        total += bu;
        longest = longest.max(bu);
        for v in 0..n {
            if !in_tree[v] {
                let d = dist(&points[u], &points[v]);
                if d < best[v] {
                    best[v] = d;
                }
            }
        }
    }
    if total > 0.0 {
        longest / total
    } else {
        0.0
    }
}

/// Grassberger–Procaccia correlation dimension: slope of `ln C(r)` against
/// `ln r` for `r` log-spaced over `[r_lo, r_hi]·scale`, where `C(r)` is the
/// fraction of point pairs closer than `r`.
pub fn correlation_dimension(points: &[[f64; 2]], scale: f64, r_lo: f64, r_hi: f64, n_radii: usize) -> f64 {
    if points.len() < 2 || !(scale > 0.0) || n_radii < 2 {
        return 0.0;
    }
    let mut d: Vec<f64> = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d.push(dist(a, b) / scale);
        }
    }
    d.sort_unstable_by(f64::total_cmp);
    let pairs = d.len() as f64;
    let step = (r_hi / r_lo).ln() / (n_radii - 1) as f64;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in 0..n_radii {
        let r = r_lo * (step * k as f64).exp();
        let count = d.partition_point(|&x| x < r);
        if count > 0 {
            xs.push(r.ln());
            ys.push((count as f64 / pairs).ln());
        }
    }
    if xs.len() < 2 {
        return 0.0;
    }
    crate::integrator::least_squares_slope(&xs, &ys)
}

/// Default correlation-dimension estimate of a section, with radii between
/// 0.5% and 5% of the attractor extent.
pub fn section_dimension(section: &PoincareSection) -> f64 {
    correlation_dimension(&section.points, section.attractor_extent, 0.005, 0.05, 10)
}

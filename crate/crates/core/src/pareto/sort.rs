//! Dominance, non-dominated sorting, crowding distance and 2-D hypervolume.
//!
//! Everything here works on minimized objective pairs `[f64; 2]` except
//! [`dominates`], which takes tennis outcomes directly.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// A game outcome: probability of winning the game and expected points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub win_probability: f64,
    pub expected_points: f64,
}

impl Outcome {
    pub fn new(win_probability: f64, expected_points: f64) -> Self {
        Outcome { win_probability, expected_points }
    }

    /// Internal minimization form.
    pub fn objectives(self) -> [f64; 2] {
        [-self.win_probability, self.expected_points]
    }
}

/// `a` dominates `b`: at least the win probability, at most the points, and
/// strictly better on one of them.
pub fn dominates(a: Outcome, b: Outcome) -> bool {
    dominates_min(&a.objectives(), &b.objectives())
}

/// Pareto dominance for minimized objectives.
pub fn dominates_min(a: &[f64; 2], b: &[f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// Deb's fast non-dominated sort. Each front lists indices in ascending order.
pub fn fast_nondominated_sort(objs: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates_min(&objs[i], &objs[j]) {
                dominated_by[i].push(j);
                count[j] += 1;
            } else if dominates_min(&objs[j], &objs[i]) {
                dominated_by[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance within one front. Extremes on either objective get
/// infinity; interior points sum normalized neighbour gaps. Exact duplicates
/// share one slot: the first copy gets the distance, later copies get 0.
pub fn crowding_distance(objs: &[[f64; 2]]) -> Vec<f64> {
    let n = objs.len();
    let mut out = vec![0.0; n];
    // Unique representatives, in index order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_pair(&objs[a], &objs[b]).then(a.cmp(&b)));
    let mut reps = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        if k == 0 || objs[order[k - 1]] != objs[i] {
            reps.push(i);
        }
    }
    reps.sort_unstable();
    let m = reps.len();
    if m <= 2 {
        for &i in &reps {
            out[i] = f64::INFINITY;
        }
        return out;
    }
    for obj in 0..2 {
        let mut sorted = reps.clone();
        sorted.sort_by(|&a, &b| objs[a][obj].total_cmp(&objs[b][obj]).then(a.cmp(&b)));
        let lo = objs[sorted[0]][obj];
        let hi = objs[sorted[m - 1]][obj];
        out[sorted[0]] = f64::INFINITY;
        out[sorted[m - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..m - 1 {
            let i = sorted[k];
            if out[i].is_finite() {
                out[i] += (objs[sorted[k + 1]][obj] - objs[sorted[k - 1]][obj]) / range;
            }
        }
    }
    out
}

fn cmp_pair(a: &[f64; 2], b: &[f64; 2]) -> Ordering {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
}

/// Area dominated by `objs` (minimized) and bounded by `reference`. Points
/// not strictly better than the reference on both objectives contribute
/// nothing.
pub fn hypervolume_2d(objs: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut pts: Vec<[f64; 2]> = objs.iter().copied().filter(|p| p[0] < reference[0] && p[1] < reference[1]).collect();
    pts.sort_by(cmp_pair);
    let mut hv = 0.0;
    let mut last_f2 = reference[1];
    for p in pts {
        if p[1] < last_f2 {
            hv += (reference[0] - p[0]) * (last_f2 - p[1]);
            last_f2 = p[1];
        }
    }
    hv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_examples() {
        let a = Outcome::new(0.70, 6.0);
        assert!(dominates(a, Outcome::new(0.60, 6.5)));
        assert!(!dominates(a, a));
        let (x, y) = (Outcome::new(0.70, 6.5), Outcome::new(0.60, 6.0));
        assert!(!dominates(x, y) && !dominates(y, x));
    }

    #[test]
    fn four_point_grid() {
        let fronts = fast_nondominated_sort(&[[1.0, 1.0], [1.0, 2.0], [2.0, 1.0], [2.0, 2.0]]);
        assert_eq!(fronts, vec![vec![0], vec![1, 2], vec![3]]);
    }

    #[test]
    fn identical_points_and_chains() {
        assert_eq!(fast_nondominated_sort(&[[1.0, 1.0]; 4]), vec![vec![0, 1, 2, 3]]);
        let fronts = fast_nondominated_sort(&[[3.0, 3.0], [1.0, 1.0], [2.0, 2.0]]);
        assert_eq!(fronts, vec![vec![1], vec![2], vec![0]]);
    }

    #[test]
    fn crowding_examples() {
        assert_eq!(crowding_distance(&[[0.0, 1.0], [1.0, 0.0]]), vec![f64::INFINITY; 2]);
        let d = crowding_distance(&[[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]]);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-15);
        let d = crowding_distance(&[[0.0, 4.0], [1.0, 3.0], [2.0, 2.0], [2.0, 2.0], [4.0, 0.0]]);
        assert_eq!(d[3], 0.0);
        assert!(d[2] > 0.0 && d[2].is_finite());
        assert!(d.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn hypervolume_of_a_staircase() {
        let hv = hypervolume_2d(&[[1.0, 3.0], [2.0, 2.0], [3.0, 1.0], [3.5, 3.5]], [4.0, 4.0]);
        // Bands of height 1 with widths 3, 2, 1.
        assert!((hv - 6.0).abs() < 1e-12);
        assert_eq!(hypervolume_2d(&[[5.0, 0.0]], [4.0, 4.0]), 0.0);
    }
}

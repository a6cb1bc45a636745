#![allow(dead_code)]

//! Independent oracles shared by the integration tests.

use std::f64::consts::PI;

/// Grid of `[0, A]^n` at spacing `A / steps`, in integer units, with exact
/// integer distance tests. Brackets the size of a saturated packing:
/// `min_saturated() <= M <= max_packing()`.
pub struct GridOracle {
    points: Vec<Vec<i64>>,
    /// `(2 r0)^2` in grid units squared, rounded up.
    min_sq: i64,
}

impl GridOracle {
    pub fn new(n: usize, steps: i64, amplitude: f64, r0: f64) -> Self {
        let unit = amplitude / steps as f64;
        let sep = 2.0 * r0 / unit;
        let min_sq = (sep * sep - 1e-9).ceil() as i64;
        let mut points = vec![vec![]];
        for _ in 0..n {
            points = points
                .into_iter()
                .flat_map(|p| {
                    (0..=steps).map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        Self { points, min_sq }
    }

    fn far(&self, i: usize, j: usize) -> bool {
        let d: i64 = self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d >= self.min_sq
    }

    fn packing_of_size(&self, k: usize, chosen: &mut Vec<usize>, from: usize) -> bool {
        if chosen.len() == k {
            return true;
        }
        for c in from..self.points.len() {
            if chosen.iter().all(|&p| self.far(p, c)) {
                chosen.push(c);
                if self.packing_of_size(k, chosen, c + 1) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    /// Largest number of grid points with pairwise distance at least `2 r0`.
    pub fn max_packing(&self) -> usize {
        let mut k = 1;
        while self.packing_of_size(k + 1, &mut Vec::new(), 0) {
            k += 1;
        }
        k
    }

    fn saturated_of_size(&self, k: usize, chosen: &mut Vec<usize>, from: usize) -> bool {
        if chosen.len() == k {
            return (0..self.points.len()).all(|q| chosen.iter().any(|&p| !self.far(p, q)));
        }
        for c in from..self.points.len() {
            if chosen.iter().all(|&p| self.far(p, c)) {
                chosen.push(c);
                if self.saturated_of_size(k, chosen, c + 1) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    /// Smallest packing to which no grid point can be added.
    pub fn min_saturated(&self) -> usize {
        let mut k = 1;
        while !self.saturated_of_size(k, &mut Vec::new(), 0) {
            k += 1;
        }
        k
    }
}

/// `log2` volume of an `n`-ball by the recursion `V_n = 2 pi r^2 V_{n-2} / n`,
/// independent of log-gamma.
pub fn ball_log2_volume(n: usize, r: f64) -> f64 {
    let mut lv = if n.is_multiple_of(2) {
        0.0
    } else {
        (2.0 * r).log2()
    };
    let mut k = if n.is_multiple_of(2) { 2 } else { 3 };
    while k <= n {
        lv += (2.0 * PI * r * r / k as f64).log2();
        k += 2;
    }
    lv
}

//! Knot vectors.

use serde::{Deserialize, Serialize};

/// End of `[a, b]` a graded mesh clusters toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Start,
    End,
}

/// How the initial mesh is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Grading {
    Uniform,
    /// Geometric clustering: consecutive interval lengths grow by `ratio`
    /// moving away from `toward`.
    Geometric { ratio: f64, toward: Endpoint },
}

impl Grading {
    pub fn knots(&self, a: f64, b: f64, intervals: usize) -> Vec<f64> {
        match *self {
            Grading::Uniform => uniform_mesh(a, b, intervals),
            Grading::Geometric { ratio, toward } => graded_mesh(a, b, intervals, ratio, toward),
        }
    }
}

pub fn uniform_mesh(a: f64, b: f64, intervals: usize) -> Vec<f64> {
    assert!(intervals >= 1);
    let h = (b - a) / intervals as f64;
    let mut knots: Vec<f64> = (0..=intervals).map(|i| a + h * i as f64).collect();
    knots[intervals] = b;
    knots
}

/// Interval lengths `h0 * ratio^j`, `j = 0..intervals`, starting at the
/// clustered end.
pub fn graded_mesh(a: f64, b: f64, intervals: usize, ratio: f64, toward: Endpoint) -> Vec<f64> {
    assert!(intervals >= 1 && ratio > 0.0);
    if ratio == 1.0 {
        return uniform_mesh(a, b, intervals);
    }
    let len = b - a;
    let total: f64 = (0..intervals).map(|j| ratio.powi(j as i32)).sum();
    let h0 = len / total;
    let mut offsets = Vec::with_capacity(intervals + 1);
    offsets.push(0.0);
    let mut acc = 0.0;
    for j in 0..intervals {
        acc += h0 * ratio.powi(j as i32);
        offsets.push(acc);
    }
    let mut knots: Vec<f64> = match toward {
        Endpoint::Start => offsets.iter().map(|o| a + o).collect(),
        Endpoint::End => offsets.iter().rev().map(|o| b - o).collect(),
    };
    knots[0] = a;
    knots[intervals] = b;
    knots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_mesh_ratio_two() {
        let k = graded_mesh(0.0, 1.0, 4, 2.0, Endpoint::Start);
        let expect = [0.0, 1.0 / 15.0, 3.0 / 15.0, 7.0 / 15.0, 1.0];
        for (a, b) in k.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let k = graded_mesh(0.0, 1.0, 4, 2.0, Endpoint::End);
        assert!((k[3] - 14.0 / 15.0).abs() < 1e-15);
        assert!(k.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn uniform_endpoints_exact() {
        let k = uniform_mesh(0.1, 0.7, 3);
        assert_eq!(k[0], 0.1);
        assert_eq!(k[3], 0.7);
    }
}

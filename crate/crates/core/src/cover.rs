//! Covering numbers: greedy epsilon-nets and the volumetric upper bound.

use crate::error::{CoreError, Result};

/// An epsilon-net over a finite point cloud; `centers` index into the cloud.
#[derive(Debug, Clone)]
pub struct EpsNet {
    pub epsilon: f64,
    pub centers: Vec<usize>,
    pub covered_radius: f64,
}

fn dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Farthest-point greedy selection until every cloud point lies within
/// `epsilon` of a center. The center count is a valid upper bound on the
/// covering number of the cloud (greedy is a 2-approximation).
pub fn greedy_eps_net(cloud: &[Vec<f64>], epsilon: f64) -> Result<EpsNet> {
    if cloud.is_empty() {
        return Err(CoreError::EmptyInput("empty point cloud".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(CoreError::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
    }
    let n = cloud.len();
    let mut centers = vec![0usize];
    let mut nearest: Vec<f64> = cloud.iter().map(|p| dist(p, &cloud[0])).collect();
    loop {
        let (far_idx, far_dist) = nearest
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |acc, (i, &d)| {
                if d > acc.1 {
                    (i, d)
                } else {
                    acc
                }
            });
        if far_dist <= epsilon {
            return Ok(EpsNet {
                epsilon,
                centers,
                covered_radius: far_dist.max(0.0),
            });
        }
        centers.push(far_idx);
        for i in 0..n {
            let d = dist(&cloud[i], &cloud[far_idx]);
            if d < nearest[i] {
                nearest[i] = d;
            }
        }
    }
}

/// Greedy maximal `2*epsilon`-separated subset; its size lower-bounds the
/// covering number, giving an independent check on the greedy net.
pub fn greedy_packing_lower_bound(cloud: &[Vec<f64>], epsilon: f64) -> usize {
    let mut picked: Vec<usize> = Vec::new();
    for (i, p) in cloud.iter().enumerate() {
        if picked.iter().all(|&j| dist(p, &cloud[j]) > 2.0 * epsilon) {
            picked.push(i);
        }
    }
    picked.len()
}

/// Volumetric covering bound `(s_const * radius / epsilon)^d` for a set
/// contained in a Euclidean ball of the given radius. The universal constant
/// is left as a parameter (default 2 in the experiment configs).
pub fn volumetric_covering_bound(
    d: usize,
    radius: f64,
    epsilon: f64,
    s_const: f64,
) -> Result<f64> {
    if d == 0 || !(radius > 0.0) || !(epsilon > 0.0) || !(s_const > 0.0) {
        return Err(CoreError::InvalidParameter(
            "volumetric bound arguments must be positive".into(),
        ));
    }
    let log_value = d as f64 * (s_const * radius / epsilon).ln();
    if log_value >= f64::MAX.ln() {
        return Err(CoreError::Overflow(format!(
            "covering bound exponent {log_value} exceeds f64 range"
        )));
    }
    Ok(log_value.exp())
}

/// Uniform tensor grid with `points_per_axis` points per axis on
/// `[lo, hi]^d`, endpoints included.
pub fn tensor_grid(d: usize, points_per_axis: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    assert!(points_per_axis >= 2, "need at least two points per axis");
    let step = (hi - lo) / (points_per_axis - 1) as f64;
    let axis: Vec<f64> = (0..points_per_axis).map(|i| lo + i as f64 * step).collect();
    let mut grid = vec![vec![0.0; d]];
    for coord in 0..d {
        let mut next = Vec::with_capacity(grid.len() * points_per_axis);
        for point in &grid {
            for &v in &axis {
                let mut p = point.clone();
                p[coord] = v;
                next.push(p);
            }
        }
        grid = next;
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_needs_one_center() {
        let net = greedy_eps_net(&[vec![3.0, 4.0]], 0.1).unwrap();
        assert_eq!(net.centers, vec![0]);
        assert_eq!(net.covered_radius, 0.0);
    }

    #[test]
    fn two_distant_points_need_two_centers() {
        let net = greedy_eps_net(&[vec![0.0], vec![3.0]], 1.0).unwrap();
        assert_eq!(net.centers.len(), 2);
    }

    #[test]
    fn grid_net_is_valid_and_sized_between_packing_and_volumetric() {
        let cloud = tensor_grid(2, 10, 0.0, 1.0);
        let eps = 0.25;
        let net = greedy_eps_net(&cloud, eps).unwrap();
        assert!(net.covered_radius <= eps);
        // validity: every point within eps of some center
        for p in &cloud {
            let nearest = net
                .centers
                .iter()
                .map(|&c| dist(p, &cloud[c]))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= eps);
        }
        let lower = greedy_packing_lower_bound(&cloud, eps);
        assert!(lower >= 4, "packing bound {lower}");
        assert!(net.centers.len() >= lower);
        // [0,1]^2 sits in a ball of radius sqrt(2)/2 around its center.
        let upper = volumetric_covering_bound(2, 0.5f64 * 2.0f64.sqrt() * 2.0, eps, 2.0).unwrap();
        assert!(
            (net.centers.len() as f64) <= upper,
            "{} centers vs bound {upper}",
            net.centers.len()
        );
    }

    #[test]
    fn volumetric_bound_direct_values() {
        assert_eq!(volumetric_covering_bound(1, 1.0, 1.0, 2.0).unwrap(), 2.0);
        let v = volumetric_covering_bound(2, 1.0, 0.5, 2.0).unwrap();
        assert!((v - 16.0).abs() < 1e-9);
    }

    #[test]
    fn volumetric_bound_grows_as_epsilon_shrinks() {
        let coarse = volumetric_covering_bound(3, 2.0, 0.5, 2.0).unwrap();
        let fine = volumetric_covering_bound(3, 2.0, 0.1, 2.0).unwrap();
        assert!(fine > coarse);
    }

    #[test]
    fn volumetric_bound_overflow_is_reported() {
        assert!(matches!(
            volumetric_covering_bound(4000, 1e6, 1e-6, 2.0),
            Err(CoreError::Overflow(_))
        ));
    }

    #[test]
    fn tensor_grid_shape() {
        let g = tensor_grid(2, 3, -1.0, 1.0);
        assert_eq!(g.len(), 9);
        assert!(g.contains(&vec![-1.0, -1.0]));
        assert!(g.contains(&vec![0.0, 1.0]));
    }
}

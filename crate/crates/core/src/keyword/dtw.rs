use serde::{Deserialize, Serialize};

use crate::audio::{FeatureMatrix, LOG_FLOOR_DB};
use crate::error::{arg_err, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtwAlignment {
    /// Accumulated local cost divided by path length.
    pub distance: f64,
    /// Monotone `(row of a, row of b)` pairs from `(0, 0)` to the last rows.
    pub path: Vec<(usize, usize)>,
}

/// Feature rows shifted so the log floor maps to zero, with cached norms.
pub(crate) struct ShiftedRows {
    data: Vec<f64>,
    norms: Vec<f64>,
    dim: usize,
}

impl ShiftedRows {
    pub(crate) fn new(m: &FeatureMatrix) -> Self {
        let dim = m.dim();
        let data: Vec<f64> = m
            .rows()
            .flat_map(|r| r.iter().map(|v| (v - LOG_FLOOR_DB).max(0.0)))
            .collect();
        let norms = data
            .chunks_exact(dim)
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        Self { data, norms, dim }
    }

    pub(crate) fn len(&self) -> usize {
        self.norms.len()
    }

    pub(crate) fn cost(&self, i: usize, other: &ShiftedRows, j: usize) -> f64 {
        let (na, nb) = (self.norms[i], other.norms[j]);
        if na == 0.0 || nb == 0.0 {
            return if na == nb { 0.0 } else { 1.0 };
        }
        let a = &self.data[i * self.dim..(i + 1) * self.dim];
        let b = &other.data[j * other.dim..(j + 1) * other.dim];
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        (1.0 - dot / (na * nb)).clamp(0.0, 2.0)
    }
}

/// Cosine distance between two feature rows after shifting by the log floor.
/// Two all-floor rows cost 0; an all-floor row against anything else costs 1.
pub fn local_cost(u: &[f64], v: &[f64]) -> f64 {
    let shift = |x: &f64| (x - LOG_FLOOR_DB).max(0.0);
    let nu = u.iter().map(|x| shift(x).powi(2)).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| shift(x).powi(2)).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return if nu == nv { 0.0 } else { 1.0 };
    }
    let dot: f64 = u.iter().zip(v).map(|(x, y)| shift(x) * shift(y)).sum();
    (1.0 - dot / (nu * nv)).clamp(0.0, 2.0)
}

/// Accumulated cost and path length; ordered by cost, then by length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Acc {
    pub cost: f64,
    pub len: u32,
}

impl Acc {
    pub(crate) const INF: Acc = Acc {
        cost: f64::INFINITY,
        len: u32::MAX,
    };

    pub(crate) fn better_than(self, other: Acc) -> bool {
        self.cost < other.cost || (self.cost == other.cost && self.len < other.len)
    }

    pub(crate) fn step(self, cost: f64) -> Acc {
        Acc {
            cost: self.cost + cost,
            len: self.len + 1,
        }
    }

    pub(crate) fn normalized(self) -> f64 {
        self.cost / self.len as f64
    }
}

const DIAG: u8 = 0;
const UP: u8 = 1; // from (i-1, j)
const LEFT: u8 = 2; // from (i, j-1)

/// Classic DTW with steps (1,0), (0,1), (1,1) and cosine local cost.
///
/// Among equal-cost alignments the shorter path wins, which keeps the
/// normalized distance symmetric in its arguments.
pub fn dtw_distance(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<DtwAlignment> {
    if a.dim() != b.dim() {
        return arg_err(format!(
            "feature dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        ));
    }
    let (ra, rb) = (ShiftedRows::new(a), ShiftedRows::new(b));
    let (n, m) = (ra.len(), rb.len());
    let mut acc = vec![Acc::INF; n * m];
    let mut from = vec![DIAG; n * m];
    for i in 0..n {
        for j in 0..m {
            let c = ra.cost(i, &rb, j);
            if i == 0 && j == 0 {
                acc[0] = Acc { cost: c, len: 1 };
                continue;
            }
            let mut best = Acc::INF;
            let mut dir = DIAG;
            if i > 0 && j > 0 {
                best = acc[(i - 1) * m + j - 1];
            }
            if i > 0 && acc[(i - 1) * m + j].better_than(best) {
                best = acc[(i - 1) * m + j];
                dir = UP;
            }
            if j > 0 && acc[i * m + j - 1].better_than(best) {
                best = acc[i * m + j - 1];
                dir = LEFT;
            }
            acc[i * m + j] = best.step(c);
            from[i * m + j] = dir;
        }
    }
    let mut path = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n - 1, m - 1);
    path.push((i, j));
    while i > 0 || j > 0 {
        match from[i * m + j] {
            DIAG => {
                i -= 1;
                j -= 1;
            }
            UP => i -= 1,
            _ => j -= 1,
        }
        path.push((i, j));
    }
    path.reverse();
    Ok(DtwAlignment {
        distance: acc[n * m - 1].normalized(),
        path,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows, 25.0, 10.0, 16000).unwrap()
    }

    fn random_matrix(rows: usize, dim: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix {
        matrix(
            (0..rows)
                .map(|_| (0..dim).map(|_| rng.gen_range(-80.0..0.0)).collect())
                .collect(),
        )
    }

    /// Exhaustive minimum of mean cost over every monotone path (small sizes only).
    fn brute_force(a: &FeatureMatrix, b: &FeatureMatrix) -> f64 {
        fn walk(a: &FeatureMatrix, b: &FeatureMatrix, i: usize, j: usize, cost: f64, len: usize, best: &mut (f64, usize)) {
            let cost = cost + local_cost(a.row(i), b.row(j));
            let len = len + 1;
            if i + 1 == a.num_rows() && j + 1 == b.num_rows() {
                if cost < best.0 || (cost == best.0 && len < best.1) {
                    *best = (cost, len);
                }
                return;
            }
            if i + 1 < a.num_rows() {
                walk(a, b, i + 1, j, cost, len, best);
            }
            if j + 1 < b.num_rows() {
                walk(a, b, i, j + 1, cost, len, best);
            }
            if i + 1 < a.num_rows() && j + 1 < b.num_rows() {
                walk(a, b, i + 1, j + 1, cost, len, best);
            }
        }
        let mut best = (f64::INFINITY, usize::MAX);
        walk(a, b, 0, 0, 0.0, 0, &mut best);
        best.0 / best.1 as f64
    }

    #[test]
    fn identical_matrices_align_on_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(12, 8, &mut rng);
        let r = dtw_distance(&a, &a).unwrap();
        assert!(r.distance.abs() < 1e-12);
        assert_eq!(r.path, (0..12).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn stretched_copies_cost_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(10, 6, &mut rng);
        for factor in [2, 3] {
            let rows: Vec<Vec<f64>> = a
                .rows()
                .flat_map(|r| std::iter::repeat(r.to_vec()).take(factor))
                .collect();
            let b = matrix(rows);
            assert!(dtw_distance(&a, &b).unwrap().distance.abs() < 1e-12);
            assert!(dtw_distance(&b, &a).unwrap().distance.abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_rows_cost_one() {
        let a = matrix(vec![vec![0.0, -80.0]; 4]);
        let b = matrix(vec![vec![-80.0, -20.0]; 6]);
        let r = dtw_distance(&a, &b).unwrap();
        assert!((r.distance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn floor_rows_convention() {
        let floor = vec![-80.0; 4];
        assert_eq!(local_cost(&floor, &floor), 0.0);
        assert_eq!(local_cost(&floor, &[-10.0, -80.0, -80.0, -80.0]), 1.0);
    }

    #[test]
    fn path_is_monotone_and_anchored() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(9, 5, &mut rng);
        let b = random_matrix(14, 5, &mut rng);
        let r = dtw_distance(&a, &b).unwrap();
        assert_eq!(r.path[0], (0, 0));
        assert_eq!(*r.path.last().unwrap(), (8, 13));
        for w in r.path.windows(2) {
            let (di, dj) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            assert!(matches!((di, dj), (1, 0) | (0, 1) | (1, 1)));
        }
        let recomputed: f64 = r
            .path
            .iter()
            .map(|&(i, j)| local_cost(a.row(i), b.row(j)))
            .sum::<f64>()
            / r.path.len() as f64;
        assert!((recomputed - r.distance).abs() < 1e-12);
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a = random_matrix(rng.gen_range(2..6), 4, &mut rng);
            let b = random_matrix(rng.gen_range(2..6), 4, &mut rng);
            let dp = dtw_distance(&a, &b).unwrap().distance;
            assert!((dp - brute_force(&a, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = matrix(vec![vec![0.0; 3]]);
        let b = matrix(vec![vec![0.0; 4]]);
        assert!(dtw_distance(&a, &b).is_err());
    }

    proptest! {
        #[test]
        fn symmetric(seed in any::<u64>(), n in 1usize..15, m in 1usize..15) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(n, 6, &mut rng);
            let b = random_matrix(m, 6, &mut rng);
            let ab = dtw_distance(&a, &b).unwrap().distance;
            let ba = dtw_distance(&b, &a).unwrap().distance;
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!((0.0..=2.0).contains(&ab));
        }
    }
}

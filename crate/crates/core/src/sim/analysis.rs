//! Descriptive statistics: effect sizes, k-means and partition agreement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KMEANS_MAX_ITERATIONS: usize = 300;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n − 1) variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standardized mean difference `(mean_a − mean_b) / pooled_sd`.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::validation("cohen's d needs at least two values per group"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0)).sqrt();
    if pooled == 0.0 || !pooled.is_finite() {
        return Err(Error::UndefinedEffect);
    }
    Ok((mean(a) - mean(b)) / pooled)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeans<const D: usize> {
    pub assignments: Vec<usize>,
    #[serde(with = "centroid_serde")]
    pub centroids: Vec<[f64; D]>,
    pub iterations: usize,
    pub converged: bool,
}

mod centroid_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const D: usize>(c: &[[f64; D]], s: S) -> Result<S::Ok, S::Error> {
        c.iter().map(|p| p.to_vec()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, De: Deserializer<'de>, const D: usize>(d: De) -> Result<Vec<[f64; D]>, De::Error> {
        let raw = Vec::<Vec<f64>>::deserialize(d)?;
        raw.into_iter()
            .map(|v| {
                let n = v.len();
                <[f64; D]>::try_from(v).map_err(|_| serde::de::Error::invalid_length(n, &"a centroid of the point dimension"))
            })
            .collect()
    }
}

fn dist2<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn nearest<const D: usize>(p: &[f64; D], centroids: &[[f64; D]]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn plus_plus_seed<const D: usize>(points: &[[f64; D]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; D]> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())]];
    while centroids.len() < k {
        let weights: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[nearest(p, &centroids)])).collect();
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..points.len())
        };
        centroids.push(points[next]);
    }
    centroids
}

/// Lloyd's algorithm from k-means++ seeding. Ties go to the lower cluster
/// index; an empty cluster is re-seeded to the point farthest from its
/// current centroid.
pub fn kmeans<const D: usize>(points: &[[f64; D]], k: usize, seed: u64) -> Result<KMeans<D>> {
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    if points.len() < k {
        return Err(Error::validation(format!("{} points cannot form {k} clusters", points.len())));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::validation("points must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_seed(points, k, &mut rng);
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < KMEANS_MAX_ITERATIONS {
        iterations += 1;
        let mut sums = vec![[0.0; D]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].map(|s| s / counts[c] as f64);
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..points.len())
                    .max_by(|&i, &j| {
                        let di = dist2(&points[i], &centroids[assignments[i]]);
                        let dj = dist2(&points[j], &centroids[assignments[j]]);
                        di.total_cmp(&dj).then(j.cmp(&i))
                    })
                    .expect("points are non-empty");
                centroids[c] = points[far];
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
    }
    Ok(KMeans { assignments, centroids, iterations, converged })
}

fn choose2(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::validation("labelings differ in length"));
    }
    let n = a.len();
    if n < 2 {
        return Ok(1.0);
    }
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0usize; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let index: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..kb).map(|j| choose2(table.iter().map(|r| r[j]).sum())).sum();
    let expected = rows * cols / choose2(n);
    let max = (rows + cols) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cohens_d_fixtures() {
        let d = cohens_d(&[2.0, 4.0], &[1.0, 3.0]).unwrap();
        assert!((d - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(matches!(cohens_d(&[1.0, 1.0], &[1.0, 1.0]), Err(Error::UndefinedEffect)));
        assert!(matches!(cohens_d(&[1.0], &[1.0, 2.0]), Err(Error::Validation(_))));
    }

    #[test]
    fn k1_centroid_is_mean() {
        let pts = [[0.0, 1.0, 2.0], [2.0, 3.0, 4.0], [4.0, 5.0, 0.0]];
        let r = kmeans(&pts, 1, 3).unwrap();
        assert_eq!(r.assignments, vec![0, 0, 0]);
        let c = r.centroids[0];
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] - 3.0).abs() < 1e-12 && (c[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identical_points_reseed_empty_cluster() {
        let pts = vec![[1.0, 1.0, 1.0]; 5];
        let r = kmeans(&pts, 2, 0).unwrap();
        assert!(r.converged);
        assert_eq!(r.centroids.len(), 2);
        for c in &r.centroids {
            assert_eq!(*c, [1.0, 1.0, 1.0]);
        }
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(kmeans(&[[0.0; 3]], 2, 0), Err(Error::Validation(_))));
        assert!(kmeans(&[[0.0; 3]], 0, 0).is_err());
    }

    #[test]
    fn ari_known_values() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        // Standard worked example: ARI = 0.24242...
        let a = [0, 0, 0, 1, 1, 1];
        let b = [0, 0, 1, 1, 2, 2];
        let ari = adjusted_rand_index(&a, &b).unwrap();
        assert!((ari - 0.242_424_242_424_242_4).abs() < 1e-12, "{ari}");
        assert!(adjusted_rand_index(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn kmeans_serializes() {
        let r = kmeans(&[[0.0, 0.0], [5.0, 5.0]], 2, 1).unwrap();
        let back: KMeans<2> = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #[test]
        fn cohens_d_antisymmetric(a in prop::collection::vec(-10.0f64..10.0, 2..8), b in prop::collection::vec(-10.0f64..10.0, 2..8)) {
            if let (Ok(x), Ok(y)) = (cohens_d(&a, &b), cohens_d(&b, &a)) {
                prop_assert!((x + y).abs() < 1e-9);
            }
        }

        #[test]
        fn ari_invariant_under_relabeling(labels in prop::collection::vec(0usize..3, 2..30)) {
            let relabeled: Vec<usize> = labels.iter().map(|l| (l + 1) % 3).collect();
            prop_assert!((adjusted_rand_index(&labels, &relabeled).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn kmeans_deterministic_and_complete(pts in prop::collection::vec(prop::array::uniform3(-5.0f64..5.0), 3..40), k in 1usize..4, seed: u64) {
            let a = kmeans(&pts, k, seed).unwrap();
            let b = kmeans(&pts, k, seed).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.assignments.len(), pts.len());
            prop_assert!(a.assignments.iter().all(|&c| c < k));
            prop_assert!(a.iterations <= KMEANS_MAX_ITERATIONS);
        }
    }
}

//! Instance-based families: k-nearest neighbors and nearest centroid.

use super::{ModelParams, ModelSpec};

pub(crate) fn fit_knn(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> ModelParams {
    let k = spec.param_usize("k", 5).clamp(1, x.len());
    ModelParams::Knn {
        x: x.to_vec(),
        y: y.to_vec(),
        k,
    }
}

/// Fraction of positive labels among the k nearest training rows
/// (squared-Euclidean distance, distance ties to the lower training index).
pub(crate) fn knn_score(x: &[Vec<f64>], y: &[u8], k: usize, row: &[f64]) -> f64 {
    let mut dists: Vec<(f64, usize)> = x
        .iter()
        .enumerate()
        .map(|(i, train_row)| {
            let d2: f64 = train_row
                .iter()
                .zip(row)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d2, i)
        })
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let positives = dists[..k].iter().filter(|&&(_, i)| y[i] == 1).count();
    positives as f64 / k as f64
}

pub(crate) fn fit_nearest_centroid(x: &[Vec<f64>], y: &[u8]) -> ModelParams {
    let d = x[0].len();
    let mut centroids = [vec![0.0; d], vec![0.0; d]];
    let mut counts = [0usize; 2];
    for (row, &label) in x.iter().zip(y) {
        counts[label as usize] += 1;
        for j in 0..d {
            centroids[label as usize][j] += row[j];
        }
    }
    for c in 0..2 {
        for v in &mut centroids[c] {
            *v /= counts[c] as f64;
        }
    }
    ModelParams::NearestCentroid { centroids }
}

/// Signed margin `dist(x, c0) - dist(x, c1)`: positive when the row sits
/// closer to the class-1 centroid.
pub(crate) fn centroid_score(centroids: &[Vec<f64>; 2], row: &[f64]) -> f64 {
    let dist = |c: &[f64]| -> f64 {
        c.iter()
            .zip(row)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    dist(&centroids[0]) - dist(&centroids[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit, ModelFamily, ModelParams};

    #[test]
    fn centroids_are_class_means() {
        let x = vec![vec![0.0, 0.0], vec![2.0, 4.0], vec![10.0, 10.0]];
        let y = vec![0, 0, 1];
        let ModelParams::NearestCentroid { centroids } = fit_nearest_centroid(&x, &y) else {
            panic!()
        };
        assert_eq!(centroids[0], vec![1.0, 2.0]);
        assert_eq!(centroids[1], vec![10.0, 10.0]);
    }

    #[test]
    fn nearest_centroid_prefers_closer_class() {
        let x = vec![vec![0.0, 0.0], vec![10.0, 10.0]];
        let y = vec![0, 1];
        let model = fit(&ModelSpec::new(ModelFamily::NearestCentroid), &x, &y).unwrap();
        assert_eq!(model.predict(&[vec![1.0, 1.0]]).unwrap(), vec![0]);
        assert_eq!(model.predict(&[vec![9.0, 9.0]]).unwrap(), vec![1]);
    }

    #[test]
    fn knn_k1_memorizes_training_data() {
        let x: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let y: Vec<u8> = (0..9).map(|i| (i % 2) as u8).collect();
        let spec = ModelSpec::new(ModelFamily::Knn).with_param("k", 1.0);
        let model = fit(&spec, &x, &y).unwrap();
        assert!((model.accuracy(&x, &y).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn knn_score_counts_positive_neighbors() {
        // query at the origin: the 5 nearest are 3 positives and 2 negatives
        let x = vec![
            vec![1.0],
            vec![-1.0],
            vec![2.0],
            vec![-2.0],
            vec![3.0],
            vec![50.0],
        ];
        let y = vec![1, 1, 1, 0, 0, 0];
        assert!((knn_score(&x, &y, 5, &[0.0]) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn knn_distance_tie_prefers_lower_index() {
        // rows 0 and 1 are equidistant from the query; k=1 must take row 0
        let x = vec![vec![1.0], vec![-1.0]];
        let y = vec![1, 0];
        assert_eq!(knn_score(&x, &y, 1, &[0.0]), 1.0);
    }
}

//! Fréchet distance between Gaussian summaries of two feature sets.

use std::path::Path;

use nalgebra::{DMatrix, DVector, RealField, SymmetricEigen};
use num_traits::Float;

use super::MetricError;
use crate::scalar::Scalar;

/// Eigenvalues down to this negative value are clamped to zero.
pub const PSD_TOLERANCE: f64 = 1e-6;

/// Mean and covariance of `rows` feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<T: Scalar + RealField> {
    rows: usize,
    mean: DVector<T>,
    cov: DMatrix<T>,
}

fn symmetrize<T: Scalar + RealField>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

impl<T: Scalar + RealField> FeatureSet<T> {
    /// Sample mean and unbiased covariance of at least two rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, MetricError> {
        if rows.len() < 2 {
            return Err(MetricError::DegenerateInput("at least two feature rows are required".into()));
        }
        let f = rows[0].len();
        if rows.iter().any(|r| r.len() != f) {
            return Err(MetricError::DimensionMismatch);
        }
        let x = DMatrix::from_fn(rows.len(), f, |i, j| rows[i][j]);
        let s = T::lit(rows.len() as f64);
        let mean = DVector::from_fn(f, |j, _| x.column(j).iter().copied().sum::<T>() / s);
        let centered = DMatrix::from_fn(rows.len(), f, |i, j| x[(i, j)] - mean[j]);
        let cov = centered.transpose() * &centered / (s - T::one());
        Ok(Self { rows: rows.len(), mean, cov: symmetrize(&cov) })
    }

    /// Summary from known moments; the covariance is symmetrized.
    pub fn from_moments(mean: Vec<T>, cov: Vec<T>) -> Result<Self, MetricError> {
        let f = mean.len();
        if cov.len() != f * f {
            return Err(MetricError::DimensionMismatch);
        }
        Ok(Self { rows: 0, mean: DVector::from_vec(mean), cov: symmetrize(&DMatrix::from_row_slice(f, f, &cov)) })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Number of rows summarized; zero for sets built from moments.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<T> {
        &self.cov
    }
}

impl FeatureSet<f64> {
    /// Reads a CSV with header `f0,f1,…` and one row per image.
    pub fn load_csv(path: &Path) -> Result<Self, MetricError> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| MetricError::Io(format!("{}: {e}", path.display())))?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| MetricError::Io(format!("{}: {e}", path.display())))?;
            let row = rec
                .iter()
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| MetricError::Io(format!("{}: {e}", path.display())))?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }
}

/// Eigenvalues of a symmetric matrix with small negatives clamped to zero.
fn clamped_eigen<T: Scalar + RealField>(m: DMatrix<T>) -> Result<SymmetricEigen<T, nalgebra::Dyn>, MetricError> {
    let mut e = SymmetricEigen::new(symmetrize(&m));
    for v in e.eigenvalues.iter_mut() {
        if *v < T::lit(-PSD_TOLERANCE) {
            return Err(MetricError::NonPsdCovariance(v.as_f64()));
        }
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    Ok(e)
}

/// `‖μr − μg‖² + Tr(Σr + Σg − 2 (Σr Σg)^{1/2})`.
///
/// The trace of the product square root is computed as the trace of
/// `(Σg^{1/2} Σr Σg^{1/2})^{1/2}`, which has the same eigenvalues and is
/// symmetric.
pub fn frechet_distance<T: Scalar + RealField>(real: &FeatureSet<T>, gen: &FeatureSet<T>) -> Result<T, MetricError> {
    if real.dim() != gen.dim() {
        return Err(MetricError::DimensionMismatch);
    }
    let eg = clamped_eigen(gen.cov.clone())?;
    let root = eg.eigenvalues.map(|v| Float::sqrt(v));
    let sqrt_g = &eg.eigenvectors * DMatrix::from_diagonal(&root) * eg.eigenvectors.transpose();
    let inner = clamped_eigen(&sqrt_g * &real.cov * &sqrt_g)?;
    let tr_sqrt: T = inner.eigenvalues.iter().map(|&v| Float::sqrt(v)).sum();
    let diff = &real.mean - &gen.mean;
    let d = diff.dot(&diff) + real.cov.trace() + gen.cov.trace() - T::lit(2.0) * tr_sqrt;
    Ok(Float::max(d, T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_1d(mu: f64, var: f64) -> FeatureSet<f64> {
        FeatureSet::from_moments(vec![mu], vec![var]).unwrap()
    }

    #[test]
    fn one_dimensional_closed_form() {
        let d = frechet_distance(&gaussian_1d(0.0, 1.0), &gaussian_1d(3.0, 1.0)).unwrap();
        assert!((d - 9.0).abs() < 1e-6);
        let d = frechet_distance(&gaussian_1d(0.0, 1.0), &gaussian_1d(0.0, 9.0)).unwrap();
        assert!((d - 4.0).abs() < 1e-6);
    }

    #[test]
    fn rows_give_unbiased_moments() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 4.0]];
        let f = FeatureSet::from_rows(&rows).unwrap();
        assert_eq!(f.mean().as_slice(), &[3.0, 4.0]);
        assert_eq!(f.cov()[(0, 0)], 4.0);
        assert_eq!(f.cov()[(0, 1)], 2.0);
        assert_eq!(f.cov()[(1, 1)], 4.0);
        assert!(frechet_distance(&f, &f).unwrap().abs() <= 1e-6);
    }

    /// Square root of a general matrix by the Denman–Beavers iteration.
    fn denman_beavers(a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y = a.clone();
        let mut z = DMatrix::identity(a.nrows(), a.ncols());
        for _ in 0..60 {
            let yi = y.clone().try_inverse().unwrap();
            let zi = z.clone().try_inverse().unwrap();
            y = (&y + zi) * 0.5;
            z = (&z + yi) * 0.5;
        }
        y
    }

    #[test]
    fn agrees_with_product_square_root() {
        let a =
            FeatureSet::from_moments(vec![0.5, -1.0, 2.0], vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]).unwrap();
        let b =
            FeatureSet::from_moments(vec![0.0, 1.0, 1.5], vec![2.0, -0.4, 0.1, -0.4, 1.5, 0.3, 0.1, 0.3, 1.0]).unwrap();
        let root = denman_beavers(&(a.cov() * b.cov()));
        let diff = a.mean() - b.mean();
        let oracle = diff.dot(&diff) + a.cov().trace() + b.cov().trace() - 2.0 * root.trace();
        assert!((frechet_distance(&a, &b).unwrap() - oracle).abs() < 1e-9);
        assert!((frechet_distance(&b, &a).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn f32_sets() {
        let a = FeatureSet::<f32>::from_moments(vec![0.0], vec![1.0]).unwrap();
        let b = FeatureSet::<f32>::from_moments(vec![3.0], vec![1.0]).unwrap();
        assert!((frechet_distance(&a, &b).unwrap() - 9.0).abs() < 1e-5);
    }

    #[test]
    fn errors() {
        let a = gaussian_1d(0.0, 1.0);
        let b = FeatureSet::from_moments(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(frechet_distance(&a, &b), Err(MetricError::DimensionMismatch));
        assert!(matches!(frechet_distance(&a, &gaussian_1d(0.0, -1.0)), Err(MetricError::NonPsdCovariance(_))));
        assert!(FeatureSet::<f64>::from_rows(&[vec![1.0]]).is_err());
        // clamped tiny negative
        assert!(frechet_distance(&a, &gaussian_1d(0.0, -1e-9)).is_ok());
    }

    #[test]
    fn csv_ingest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        std::fs::write(&p, "f0,f1\n1,2\n3,6\n5,4\n").unwrap();
        let f = FeatureSet::load_csv(&p).unwrap();
        assert_eq!(f.rows(), 3);
        assert_eq!(f.mean().as_slice(), &[3.0, 4.0]);
    }
}

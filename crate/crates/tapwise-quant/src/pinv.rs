use nalgebra::DMatrix;
use winograd_core::Mat;

/// Moore-Penrose pseudoinverse via SVD.
///
/// Singular values below 1e-12 · σ_max are treated as zero, so rank-deficient
/// and all-zero matrices are handled.
pub fn pseudo_inverse(m: &Mat<f64>) -> Mat<f64> {
    let dm = DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)]);
    let pinv = dm
        .svd(true, true)
        .pseudo_inverse(1e-12)
        .expect("eps is non-negative");
    Mat::from_flat(
        m.cols(),
        m.rows(),
        (0..m.cols())
            .flat_map(|i| (0..m.rows()).map(move |j| (i, j)))
            .map(|(i, j)| pinv[(i, j)])
            .collect(),
    )
}

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::RepsError;

/// Time-varying linear-Gaussian policy `a_t ~ N(K_t s_t + k_t, Σ_t)`.
///
/// The gains `K_t` are fixed; only the feed-forward terms and covariances are
/// learned. Every covariance is symmetric with eigenvalues at least
/// `sigma_floor²`, and its Cholesky factor is cached for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianPolicy {
    gains: Vec<DMatrix<f64>>,
    feedforward: Vec<DVector<f64>>,
    covariance: Vec<DMatrix<f64>>,
    cholesky: Vec<DMatrix<f64>>,
    sigma_floor: f64,
}

impl LinearGaussianPolicy {
    /// Zero gains, zero feed-forward and isotropic covariance `sigma0² I`.
    pub fn initial(
        horizon: usize,
        state_dim: usize,
        action_dim: usize,
        sigma0: f64,
        sigma_floor: f64,
    ) -> Result<Self, RepsError> {
        let gains = vec![DMatrix::zeros(action_dim, state_dim); horizon];
        Self::with_gains(gains, action_dim, sigma0, sigma_floor)
    }

    /// User-supplied gains with zero feed-forward and `sigma0² I` covariance.
    pub fn with_gains(
        gains: Vec<DMatrix<f64>>,
        action_dim: usize,
        sigma0: f64,
        sigma_floor: f64,
    ) -> Result<Self, RepsError> {
        if !(sigma0.is_finite() && sigma0 > 0.0) {
            return Err(RepsError::InvalidConfig(format!("sigma0 must be positive, got {sigma0}")));
        }
        let horizon = gains.len();
        let cov = DMatrix::identity(action_dim, action_dim) * (sigma0 * sigma0);
        Self::new(
            gains,
            vec![DVector::zeros(action_dim); horizon],
            vec![cov; horizon],
            sigma_floor,
        )
    }

    /// Validates dimensions and floors every covariance.
    pub fn new(
        gains: Vec<DMatrix<f64>>,
        feedforward: Vec<DVector<f64>>,
        covariance: Vec<DMatrix<f64>>,
        sigma_floor: f64,
    ) -> Result<Self, RepsError> {
        if !(sigma_floor.is_finite() && sigma_floor > 0.0) {
            return Err(RepsError::InvalidConfig(format!(
                "sigma_floor must be positive, got {sigma_floor}"
            )));
        }
        let horizon = gains.len();
        if horizon == 0 {
            return Err(RepsError::Dimension("policy horizon must be positive".into()));
        }
        if feedforward.len() != horizon || covariance.len() != horizon {
            return Err(RepsError::Dimension(format!(
                "horizon mismatch: {} gains, {} feed-forward terms, {} covariances",
                horizon,
                feedforward.len(),
                covariance.len()
            )));
        }
        let (action_dim, state_dim) = gains[0].shape();
        if action_dim == 0 {
            return Err(RepsError::Dimension("action dimension must be positive".into()));
        }
        for t in 0..horizon {
            if gains[t].shape() != (action_dim, state_dim)
                || feedforward[t].len() != action_dim
                || covariance[t].shape() != (action_dim, action_dim)
            {
                return Err(RepsError::Dimension(format!("inconsistent shapes at step {t}")));
            }
            let finite = gains[t].iter().chain(feedforward[t].iter()).chain(covariance[t].iter());
            if !finite.into_iter().all(|v| v.is_finite()) {
                return Err(RepsError::NonFinite(format!("policy parameters at step {t}")));
            }
        }
        let floor = sigma_floor * sigma_floor;
        let covariance: Vec<_> = covariance.iter().map(|c| floor_covariance(c, floor)).collect();
        let cholesky = covariance
            .iter()
            .map(|c| {
                c.clone()
                    .cholesky()
                    .map(|ch| ch.l())
                    .ok_or_else(|| RepsError::NonFinite("covariance is not positive definite".into()))
            })
            .collect::<Result<_, _>>()?;
        Ok(LinearGaussianPolicy {
            gains,
            feedforward,
            covariance,
            cholesky,
            sigma_floor,
        })
    }

    pub fn horizon(&self) -> usize {
        self.gains.len()
    }

    pub fn state_dim(&self) -> usize {
        self.gains[0].ncols()
    }

    pub fn action_dim(&self) -> usize {
        self.gains[0].nrows()
    }

    pub fn sigma_floor(&self) -> f64 {
        self.sigma_floor
    }

    pub fn gain(&self, t: usize) -> &DMatrix<f64> {
        &self.gains[t]
    }

    pub fn feedforward(&self, t: usize) -> &DVector<f64> {
        &self.feedforward[t]
    }

    pub fn covariance(&self, t: usize) -> &DMatrix<f64> {
        &self.covariance[t]
    }

    pub fn gains(&self) -> &[DMatrix<f64>] {
        &self.gains
    }

    /// Lower Cholesky factor of `Σ_t`.
    pub fn cholesky(&self, t: usize) -> &DMatrix<f64> {
        &self.cholesky[t]
    }

    /// Smallest eigenvalue over all covariances.
    pub fn min_covariance_eigenvalue(&self) -> f64 {
        self.covariance
            .iter()
            .map(|c| SymmetricEigen::new(c.clone()).eigenvalues.min())
            .fold(f64::INFINITY, f64::min)
    }

    /// Same gains and floor with new feed-forward terms and covariances.
    pub fn replace_parameters(
        &self,
        feedforward: Vec<DVector<f64>>,
        covariance: Vec<DMatrix<f64>>,
    ) -> Result<Self, RepsError> {
        Self::new(self.gains.clone(), feedforward, covariance, self.sigma_floor)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<(), RepsError> {
        serde_json::to_writer_pretty(writer, &Checkpoint::from(self))?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self, RepsError> {
        let ckpt: Checkpoint = serde_json::from_reader(reader)?;
        ckpt.into_policy()
    }
}

/// Symmetrizes `cov` and raises every eigenvalue to at least `floor`.
/// Matrices already above the floor are returned unchanged.
pub fn floor_covariance(cov: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().all(|&l| l >= floor) {
        return sym;
    }
    let clipped = eig.eigenvalues.map(|l| l.max(floor));
    let v = &eig.eigenvectors;
    let rebuilt = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    (&rebuilt + rebuilt.transpose()) * 0.5
}

const CHECKPOINT_FORMAT: &str = "tltl-lab/linear-gaussian-policy";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    horizon: usize,
    state_dim: usize,
    action_dim: usize,
    sigma_floor: f64,
    steps: Vec<CheckpointStep>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointStep {
    gain: Vec<Vec<f64>>,
    feedforward: Vec<f64>,
    covariance: Vec<Vec<f64>>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>, RepsError> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(RepsError::Dimension(format!("expected a {nrows}x{ncols} matrix")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl From<&LinearGaussianPolicy> for Checkpoint {
    fn from(p: &LinearGaussianPolicy) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            horizon: p.horizon(),
            state_dim: p.state_dim(),
            action_dim: p.action_dim(),
            sigma_floor: p.sigma_floor,
            steps: (0..p.horizon())
                .map(|t| CheckpointStep {
                    gain: rows(&p.gains[t]),
                    feedforward: p.feedforward[t].iter().copied().collect(),
                    covariance: rows(&p.covariance[t]),
                })
                .collect(),
        }
    }
}

impl Checkpoint {
    fn into_policy(self) -> Result<LinearGaussianPolicy, RepsError> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(RepsError::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        if self.steps.len() != self.horizon {
            return Err(RepsError::Dimension(format!(
                "checkpoint declares horizon {} but holds {} steps",
                self.horizon,
                self.steps.len()
            )));
        }
        let (a, s) = (self.action_dim, self.state_dim);
        let mut gains = Vec::with_capacity(self.horizon);
        let mut feedforward = Vec::with_capacity(self.horizon);
        let mut covariance = Vec::with_capacity(self.horizon);
        for step in &self.steps {
            gains.push(from_rows(&step.gain, a, s)?);
            if step.feedforward.len() != a {
                return Err(RepsError::Dimension("feed-forward length".into()));
            }
            feedforward.push(DVector::from_vec(step.feedforward.clone()));
            covariance.push(from_rows(&step.covariance, a, a)?);
        }
        LinearGaussianPolicy::new(gains, feedforward, covariance, self.sigma_floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_policy_shapes() {
        let p = LinearGaussianPolicy::initial(4, 8, 3, 0.5, 1e-3).unwrap();
        assert_eq!((p.horizon(), p.state_dim(), p.action_dim()), (4, 8, 3));
        assert_eq!(p.covariance(2)[(1, 1)], 0.25);
        assert_eq!(p.gain(0).shape(), (3, 8));
        assert!((p.min_covariance_eigenvalue() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn covariance_is_floored() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let floored = floor_covariance(&cov, 1e-4);
        let eig = SymmetricEigen::new(floored.clone()).eigenvalues;
        assert!(eig.min() >= 1e-4 * (1.0 - 1e-9));
        assert!((eig.max() - 2.0).abs() < 1e-12);
        // idempotent once above the floor
        let again = floor_covariance(&floored, 1e-4 * (1.0 - 1e-6));
        assert_eq!(again, floored);
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        let gains = vec![DMatrix::zeros(2, 3), DMatrix::zeros(1, 3)];
        assert!(LinearGaussianPolicy::with_gains(gains, 2, 0.5, 1e-3).is_err());
        assert!(LinearGaussianPolicy::initial(0, 1, 1, 0.5, 1e-3).is_err());
        assert!(LinearGaussianPolicy::initial(3, 1, 1, 0.5, 0.0).is_err());
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let p = LinearGaussianPolicy::initial(3, 2, 2, 0.3, 1e-3).unwrap();
        let ff = vec![
            DVector::from_vec(vec![0.1, -1.0 / 3.0]),
            DVector::from_vec(vec![std::f64::consts::PI, 1e-300]),
            DVector::from_vec(vec![-7.25, 2.0f64.sqrt()]),
        ];
        let cov = vec![
            DMatrix::from_row_slice(2, 2, &[0.7, 0.1, 0.1, 0.3]),
            DMatrix::identity(2, 2) * 0.123456789,
            DMatrix::from_row_slice(2, 2, &[1.0 / 7.0, -0.01, -0.01, 0.5]),
        ];
        let p = p.replace_parameters(ff, cov).unwrap();
        let mut buf = Vec::new();
        p.write_json(&mut buf).unwrap();
        let back = LinearGaussianPolicy::read_json(buf.as_slice()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn checkpoint_rejects_wrong_version() {
        let p = LinearGaussianPolicy::initial(1, 1, 1, 0.3, 1e-3).unwrap();
        let mut buf = Vec::new();
        p.write_json(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            LinearGaussianPolicy::read_json(text.as_bytes()),
            Err(RepsError::Checkpoint(_))
        ));
    }
}

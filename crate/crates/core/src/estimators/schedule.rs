//! Block-size schedules for the block power methods.

use super::EstimatorError;

/// Inputs of the analytic DBPCA block-size formula.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleParams {
    /// `lambda_k`.
    pub lambda_k: f64,
    /// `lambda_{k+1}`.
    pub lambda_k1: f64,
    /// Total failure budget `delta_0`.
    pub delta0: f64,
    pub d: usize,
    pub k: usize,
    /// Leading constant of the concentration bound.
    pub chernoff_c: f64,
    /// Initialization constant; `epsilon_0 = sqrt(cbar / (k d))`.
    pub cbar: f64,
}

/// Quantities derived once from [`ScheduleParams`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleConstants {
    /// `max(lambda_{k+1}, lambda_k / 4)`.
    pub lambda_tilde: f64,
    /// `(lambda_tilde / lambda_k)^(1/4)`, the per-block contraction of the error bound.
    pub gamma: f64,
    /// `(lambda_k - lambda_tilde) / 4`.
    pub delta_gap: f64,
    /// `sqrt(cbar / (k d))`.
    pub eps0: f64,
}

impl ScheduleParams {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        let bad = |m: &str| Err(EstimatorError::InvalidArgument(m.to_string()));
        if !(self.lambda_k.is_finite() && self.lambda_k1.is_finite()) {
            return bad("eigenvalues must be finite");
        }
        if !(self.lambda_k > self.lambda_k1) {
            return bad("schedule needs lambda_k > lambda_(k+1)");
        }
        if self.lambda_k1 < 0.0 {
            return bad("lambda_(k+1) must be nonnegative");
        }
        if !(self.delta0 > 0.0 && self.delta0 < 1.0) {
            return bad("delta0 must lie in (0, 1)");
        }
        if self.d == 0 || self.k == 0 {
            return bad("d and k must be positive");
        }
        if !(self.chernoff_c > 0.0 && self.chernoff_c.is_finite()) {
            return bad("chernoff_c must be positive");
        }
        if !(self.cbar > 0.0 && self.cbar.is_finite()) {
            return bad("cbar must be positive");
        }
        Ok(())
    }

    pub fn constants(&self) -> Result<ScheduleConstants, EstimatorError> {
        self.validate()?;
        let lambda_tilde = self.lambda_k1.max(self.lambda_k / 4.0);
        Ok(ScheduleConstants {
            lambda_tilde,
            gamma: (lambda_tilde / self.lambda_k).powf(0.25),
            delta_gap: (self.lambda_k - lambda_tilde) / 4.0,
            eps0: (self.cbar / (self.k as f64 * self.d as f64)).sqrt(),
        })
    }
}

/// Size `|I_i|` of block `i >= 1` under the analytic schedule:
/// `ceil(c / (Delta beta_i)^2 * ln(d / delta_i))` with `delta_i = delta_0 / (2 i^2)`,
/// `beta_i = min(gamma / sqrt(1 + eps_{i-1}^2), gamma eps_{i-1})` and
/// `eps_j = eps_0 gamma^j`.
pub fn theoretical_block_size(i: u64, params: &ScheduleParams) -> Result<u64, EstimatorError> {
    if i == 0 {
        return Err(EstimatorError::InvalidArgument("block index starts at 1".into()));
    }
    let ScheduleConstants {
        gamma,
        delta_gap,
        eps0,
        ..
    } = params.constants()?;
    let eps_prev = eps0 * gamma.powf((i - 1) as f64);
    let beta = (gamma / (1.0 + eps_prev * eps_prev).sqrt()).min(gamma * eps_prev);
    let i = i as f64;
    let delta_i = params.delta0 / (2.0 * i * i);
    let size = params.chernoff_c / (delta_gap * beta).powi(2) * (params.d as f64 / delta_i).ln();
    if !size.is_finite() || size >= u64::MAX as f64 {
        return Err(EstimatorError::InvalidArgument(format!(
            "block {i} size {size} is not representable"
        )));
    }
    Ok((size.ceil() as u64).max(1))
}

/// Next DBPCA block size, `ceil(size / gamma_sq)`.
///
/// Quotients within a few ulps of an integer are taken as that integer, so
/// ratios written as decimals (`0.7`) behave as the decimal, not as its
/// nearest binary double.
pub fn next_geometric_block(size: u64, gamma_sq: f64) -> u64 {
    let q = size as f64 / gamma_sq;
    let nearest = q.round();
    let next = if (q - nearest).abs() <= 16.0 * f64::EPSILON * q { nearest } else { q.ceil() };
    (next as u64).max(size + 1)
}

/// Fixed BPCA block `floor(N / T)` with `T = floor(L ln d)` blocks.
pub fn bpca_block_from_corpus(total: u64, d: usize, multiplier: f64) -> Result<u64, EstimatorError> {
    bpca_block_with_log_base(total, d, multiplier, std::f64::consts::E)
}

/// As [`bpca_block_from_corpus`] with `T = floor(L log_base(d))`.
pub fn bpca_block_with_log_base(total: u64, d: usize, multiplier: f64, base: f64) -> Result<u64, EstimatorError> {
    if total == 0 || d < 2 {
        return Err(EstimatorError::InvalidArgument("need N >= 1 and d >= 2".into()));
    }
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(EstimatorError::InvalidArgument("L must be positive".into()));
    }
    if !(base > 1.0 && base.is_finite()) {
        return Err(EstimatorError::InvalidArgument("log base must exceed 1".into()));
    }
    let d = d as f64;
    let log_d = if base == 2.0 {
        d.log2()
    } else if base == 10.0 {
        d.log10()
    } else if base == std::f64::consts::E {
        d.ln()
    } else {
        d.ln() / base.ln()
    };
    let blocks = (multiplier * log_d).floor();
    if blocks < 1.0 {
        return Err(EstimatorError::InvalidArgument(format!(
            "T = floor(L log d) is 0 for L = {multiplier}, d = {d}"
        )));
    }
    let block = (total as f64 / blocks).floor() as u64;
    if block == 0 {
        return Err(EstimatorError::InvalidArgument(format!(
            "{blocks} blocks exceed the {total} available points"
        )));
    }
    Ok(block)
}

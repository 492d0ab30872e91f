#pragma once

#include <Eigen/Core>
#include <vector>

namespace cmrf {

/// Potential scale reduction factor over >= 2 equal-length scalar chains.
/// W is the plain mean of the unbiased within-chain variances; setting
/// squared_intra_variance replaces W by the mean of their squares (an
/// alternative convention, selectable for auditability).
double psrf(const std::vector<Eigen::VectorXd>& chains,
            bool squared_intra_variance = false);

/// Component-wise PSRF across multi-component chains (rows = samples).
Eigen::VectorXd psrf_components(const std::vector<Eigen::MatrixXd>& chains,
                                bool squared_intra_variance = false);

/// Biased (1/N) normalized sample autocorrelation, lags 0..max_lag.
Eigen::VectorXd autocorr(const Eigen::VectorXd& chain, int max_lag);

/// Effective sample size N / (1 + 2 sum rho_k), truncated at the first
/// non-positive autocorrelation; the reported value is clamped to 10 N.
double ess(const Eigen::VectorXd& chain);

/// Gaussian-kernel density estimate at the evaluation points. A
/// non-positive bandwidth selects Silverman's rule 1.06 sigma N^(-1/5).
Eigen::VectorXd kde(const Eigen::VectorXd& samples, const Eigen::VectorXd& eval_points,
                    double bandwidth = 0.0);

struct DiagnosticsReport {
  Eigen::VectorXd psrf;  // per component
  Eigen::VectorXd ess;   // per component, summed over chains
  Eigen::MatrixXd acf;   // component x lag, first chain
};

DiagnosticsReport diagnose(const std::vector<Eigen::MatrixXd>& chains, int max_lag,
                           bool squared_intra_variance = false);

}  // namespace cmrf

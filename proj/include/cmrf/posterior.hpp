#pragma once

#include <Eigen/Core>

#include "cmrf/forward.hpp"
#include "cmrf/lattice.hpp"
#include "cmrf/prior.hpp"

namespace cmrf {

/// Log posterior log pi(u|y) = log likelihood + log prior (both unnormalized).
struct Posterior {
  ForwardOperator op;
  Eigen::VectorXd y;
  double sigma = 1.0;
  PriorSpec prior;

  int dim() const { return op.cols(); }
  const Lattice& lattice() const { return op.recon_grid; }
  void validate() const;
};

double log_post(const Posterior& p, const Field& u);
Field grad_log_post(const Posterior& p, const Field& u);

/// Mutable per-chain evaluation state: current field, cached residual
/// y - F u, and cached log terms. Single-site updates cost O(nnz of the
/// touched operator column); a full refresh runs every 10^4 commits to keep
/// the accumulated float drift below 1e-9.
class CachedState {
 public:
  CachedState(const Posterior& p, Field u0);

  const Field& field() const { return u_; }
  const Eigen::VectorXd& residual() const { return residual_; }
  double log_likelihood_value() const { return loglik_; }
  double log_prior_value() const { return logprior_; }
  double log_post_value() const { return loglik_ + logprior_; }

  /// log pi(u with site=v) - log pi(u); no state mutation.
  double delta_log_post(int site, double v) const;
  /// Same for a joint update of several sites.
  double delta_log_post_block(const IndexSet& sites, const Eigen::VectorXd& vals);

  void commit(int site, double v);
  void commit_block(const IndexSet& sites, const Eigen::VectorXd& vals);

  void refresh();

 private:
  double delta_loglik(int site, double v) const;

  const Posterior* post_;
  Field u_;
  Eigen::VectorXd residual_;
  Eigen::VectorXd scratch_;  // data-space accumulator for block deltas
  double loglik_ = 0.0;
  double logprior_ = 0.0;
  long commits_since_refresh_ = 0;
  static constexpr long kRefreshEvery = 10000;
};

/// Free-function forms.
double delta_log_post(const CachedState& state, int site, double v);

}  // namespace cmrf

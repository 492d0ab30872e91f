#pragma once

#include <Eigen/Core>
#include <memory>

#include "cmrf/lattice.hpp"
#include "cmrf/posterior.hpp"

namespace cmrf {

/// Per-chain mutable view of a target density used by the Gibbs-style
/// samplers: holds the current point and answers single-site (or block)
/// density-ratio queries against it.
class TargetState {
 public:
  virtual ~TargetState() = default;
  virtual const Eigen::VectorXd& value() const = 0;
  virtual double log_density() const = 0;
  virtual double delta(int site, double v) = 0;
  virtual double delta_block(const IndexSet& sites, const Eigen::VectorXd& vals) = 0;
  virtual void commit(int site, double v) = 0;
  virtual void commit_block(const IndexSet& sites, const Eigen::VectorXd& vals) = 0;
};

/// Sampling target: an unnormalized log density over R^dim, optionally with
/// a gradient (required by the Hamiltonian sampler).
class Target {
 public:
  virtual ~Target() = default;
  virtual int dim() const = 0;
  virtual double log_density(const Eigen::VectorXd& u) const = 0;
  virtual bool has_gradient() const { return false; }
  virtual void grad_log_density(const Eigen::VectorXd& u, Eigen::VectorXd& g) const;
  /// State factory; the default recomputes the full density per query.
  virtual std::unique_ptr<TargetState> make_state(const Eigen::VectorXd& u0) const;
};

/// Posterior adapter with O(column) single-site updates via CachedState.
class PosteriorTarget final : public Target {
 public:
  explicit PosteriorTarget(const Posterior& p) : post_(&p) { p.validate(); }
  int dim() const override { return post_->dim(); }
  double log_density(const Eigen::VectorXd& u) const override;
  bool has_gradient() const override { return true; }
  void grad_log_density(const Eigen::VectorXd& u, Eigen::VectorXd& g) const override;
  std::unique_ptr<TargetState> make_state(const Eigen::VectorXd& u0) const override;
  const Posterior& posterior() const { return *post_; }

 private:
  const Posterior* post_;
};

}  // namespace cmrf

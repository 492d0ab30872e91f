#include "cmrf/target.hpp"

#include <stdexcept>

namespace cmrf {

namespace {

class GenericState final : public TargetState {
 public:
  GenericState(const Target& t, Eigen::VectorXd u0)
      : target_(&t), u_(std::move(u0)), logd_(t.log_density(u_)) {}

  const Eigen::VectorXd& value() const override { return u_; }
  double log_density() const override { return logd_; }

  double delta(int site, double v) override {
    const double old = u_[site];
    u_[site] = v;
    const double after = target_->log_density(u_);
    u_[site] = old;
    return after - logd_;
  }

  double delta_block(const IndexSet& sites, const Eigen::VectorXd& vals) override {
    std::vector<double> saved(sites.size());
    for (std::size_t k = 0; k < sites.size(); ++k) {
      saved[k] = u_[sites[k]];
      u_[sites[k]] = vals[static_cast<int>(k)];
    }
    const double after = target_->log_density(u_);
    for (std::size_t k = 0; k < sites.size(); ++k) u_[sites[k]] = saved[k];
    return after - logd_;
  }

  void commit(int site, double v) override {
    logd_ += delta(site, v);
    u_[site] = v;
  }

  void commit_block(const IndexSet& sites, const Eigen::VectorXd& vals) override {
    logd_ += delta_block(sites, vals);
    for (std::size_t k = 0; k < sites.size(); ++k) u_[sites[k]] = vals[static_cast<int>(k)];
  }

 private:
  const Target* target_;
  Eigen::VectorXd u_;
  double logd_;
};

class PosteriorState final : public TargetState {
 public:
  PosteriorState(const Posterior& p, Eigen::VectorXd u0)
      : state_(p, Field(p.lattice(), std::move(u0))) {}

  const Eigen::VectorXd& value() const override { return state_.field().values; }
  double log_density() const override { return state_.log_post_value(); }
  double delta(int site, double v) override { return state_.delta_log_post(site, v); }
  double delta_block(const IndexSet& sites, const Eigen::VectorXd& vals) override {
    return state_.delta_log_post_block(sites, vals);
  }
  void commit(int site, double v) override { state_.commit(site, v); }
  void commit_block(const IndexSet& sites, const Eigen::VectorXd& vals) override {
    state_.commit_block(sites, vals);
  }

 private:
  CachedState state_;
};

}  // namespace

void Target::grad_log_density(const Eigen::VectorXd&, Eigen::VectorXd&) const {
  throw std::logic_error("target does not provide a gradient");
}

std::unique_ptr<TargetState> Target::make_state(const Eigen::VectorXd& u0) const {
  return std::make_unique<GenericState>(*this, u0);
}

double PosteriorTarget::log_density(const Eigen::VectorXd& u) const {
  return log_post(*post_, Field(post_->lattice(), u));
}

void PosteriorTarget::grad_log_density(const Eigen::VectorXd& u,
                                       Eigen::VectorXd& g) const {
  g = grad_log_post(*post_, Field(post_->lattice(), u)).values;
}

std::unique_ptr<TargetState> PosteriorTarget::make_state(
    const Eigen::VectorXd& u0) const {
  return std::make_unique<PosteriorState>(*post_, u0);
}

}  // namespace cmrf

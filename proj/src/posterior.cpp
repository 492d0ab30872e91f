#include "cmrf/posterior.hpp"

#include <stdexcept>

namespace cmrf {

void Posterior::validate() const {
  if (y.size() != op.rows())
    throw std::invalid_argument("posterior: measurement length != operator rows");
  if (!(sigma > 0.0)) throw std::invalid_argument("posterior: sigma must be positive");
  validate_prior(prior, op.recon_grid);
}

double log_post(const Posterior& p, const Field& u) {
  return log_likelihood(p.op, p.y, u, p.sigma) + log_prior(p.prior, u);
}

Field grad_log_post(const Posterior& p, const Field& u) {
  Field g = grad_log_likelihood(p.op, p.y, u, p.sigma);
  Eigen::VectorXd gp;
  grad_log_prior(p.prior, u, gp);
  g.values += gp;
  return g;
}

CachedState::CachedState(const Posterior& p, Field u0) : post_(&p), u_(std::move(u0)) {
  p.validate();
  if (u_.size() != p.dim())
    throw std::invalid_argument("cached state: field length != operator columns");
  scratch_ = Eigen::VectorXd::Zero(p.op.rows());
  refresh();
}

void CachedState::refresh() {
  residual_ = post_->y - post_->op.F * u_.values;
  loglik_ = -residual_.squaredNorm() / (2.0 * post_->sigma * post_->sigma);
  logprior_ = log_prior(post_->prior, u_);
  commits_since_refresh_ = 0;
}

double CachedState::delta_loglik(int site, double v) const {
  const double du = v - u_.values[site];
  double dot = 0.0, col_norm2 = 0.0;
  for (Eigen::SparseMatrix<double>::InnerIterator it(post_->op.F, site); it; ++it) {
    dot += it.value() * residual_[it.row()];
    col_norm2 += it.value() * it.value();
  }
  return (2.0 * du * dot - du * du * col_norm2) /
         (2.0 * post_->sigma * post_->sigma);
}

double CachedState::delta_log_post(int site, double v) const {
  if (site < 0 || site >= u_.size()) throw std::out_of_range("site out of range");
  return delta_loglik(site, v) + delta_log_prior(post_->prior, u_, site, v);
}

double CachedState::delta_log_post_block(const IndexSet& sites,
                                         const Eigen::VectorXd& vals) {
  if (sites.size() == 1) return delta_log_post(sites[0], vals[0]);
  // Likelihood part through the residual: r' = r - d with d = sum_k F[:,s_k] du_k.
  scratch_.setZero();
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const double du = vals[static_cast<int>(k)] - u_.values[sites[k]];
    for (Eigen::SparseMatrix<double>::InnerIterator it(post_->op.F, sites[k]); it; ++it)
      scratch_[it.row()] += it.value() * du;
  }
  const double dll = (2.0 * scratch_.dot(residual_) - scratch_.squaredNorm()) /
                     (2.0 * post_->sigma * post_->sigma);
  // Prior part by chained single-site deltas on a temporarily mutated field.
  double dlp = 0.0;
  std::vector<double> saved(sites.size());
  for (std::size_t k = 0; k < sites.size(); ++k) {
    saved[k] = u_.values[sites[k]];
    dlp += delta_log_prior(post_->prior, u_, sites[k], vals[static_cast<int>(k)]);
    u_.values[sites[k]] = vals[static_cast<int>(k)];
  }
  for (std::size_t k = 0; k < sites.size(); ++k) u_.values[sites[k]] = saved[k];
  return dll + dlp;
}

void CachedState::commit(int site, double v) {
  if (site < 0 || site >= u_.size()) throw std::out_of_range("site out of range");
  loglik_ += delta_loglik(site, v);
  logprior_ += delta_log_prior(post_->prior, u_, site, v);
  const double du = v - u_.values[site];
  for (Eigen::SparseMatrix<double>::InnerIterator it(post_->op.F, site); it; ++it)
    residual_[it.row()] -= it.value() * du;
  u_.values[site] = v;
  if (++commits_since_refresh_ >= kRefreshEvery) refresh();
}

void CachedState::commit_block(const IndexSet& sites, const Eigen::VectorXd& vals) {
  for (std::size_t k = 0; k < sites.size(); ++k)
    commit(sites[k], vals[static_cast<int>(k)]);
}

double delta_log_post(const CachedState& state, int site, double v) {
  return state.delta_log_post(site, v);
}

}  // namespace cmrf

#include "cmrf/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace cmrf {

namespace {

double unbiased_variance(const Eigen::VectorXd& x) {
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace

double psrf(const std::vector<Eigen::VectorXd>& chains, bool squared_intra_variance) {
  const int nc = static_cast<int>(chains.size());
  if (nc < 2) throw std::invalid_argument("psrf needs at least 2 chains");
  const Eigen::Index ns = chains[0].size();
  if (ns < 2) throw std::invalid_argument("psrf needs at least 2 samples per chain");
  for (const auto& c : chains)
    if (c.size() != ns) throw std::invalid_argument("psrf needs equal-length chains");

  double w = 0.0;
  Eigen::VectorXd means(nc);
  for (int i = 0; i < nc; ++i) {
    means[i] = chains[i].mean();
    const double v = unbiased_variance(chains[i]);
    w += squared_intra_variance ? v * v : v;
  }
  w /= nc;
  if (!(w > 0.0)) throw std::invalid_argument("psrf: degenerate (constant) chains");

  const double grand = means.mean();
  const double k = static_cast<double>(ns) / (nc - 1) *
                   (means.array() - grand).square().sum();
  const double n = static_cast<double>(ns);
  return std::sqrt(((n - 1.0) / n * w + k / n) / w);
}

Eigen::VectorXd psrf_components(const std::vector<Eigen::MatrixXd>& chains,
                                bool squared_intra_variance) {
  if (chains.size() < 2) throw std::invalid_argument("psrf needs at least 2 chains");
  const Eigen::Index dim = chains[0].cols();
  Eigen::VectorXd out(dim);
  std::vector<Eigen::VectorXd> comp(chains.size());
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (std::size_t i = 0; i < chains.size(); ++i) comp[i] = chains[i].col(c);
    out[c] = psrf(comp, squared_intra_variance);
  }
  return out;
}

Eigen::VectorXd autocorr(const Eigen::VectorXd& chain, int max_lag) {
  const Eigen::Index n = chain.size();
  if (max_lag < 0 || n <= max_lag)
    throw std::invalid_argument("autocorr needs length > max_lag");
  const double mean = chain.mean();
  const Eigen::VectorXd centered = chain.array() - mean;
  const double denom = centered.squaredNorm();
  if (!(denom > 0.0)) throw std::invalid_argument("autocorr: constant chain");
  Eigen::VectorXd rho(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k)
    rho[k] = centered.head(n - k).dot(centered.tail(n - k)) / denom;
  return rho;
}

double ess(const Eigen::VectorXd& chain) {
  const Eigen::Index n = chain.size();
  if (n < 2) throw std::invalid_argument("ess needs at least 2 samples");
  const Eigen::VectorXd rho = autocorr(chain, static_cast<int>(n - 1));
  double tail = 0.0;
  for (Eigen::Index k = 1; k < rho.size(); ++k) {
    if (rho[k] <= 0.0) break;
    tail += rho[k];
  }
  const double value = static_cast<double>(n) / (1.0 + 2.0 * tail);
  return std::min(value, 10.0 * static_cast<double>(n));
}

Eigen::VectorXd kde(const Eigen::VectorXd& samples, const Eigen::VectorXd& eval_points,
                    double bandwidth) {
  const Eigen::Index n = samples.size();
  if (n < 1) throw std::invalid_argument("kde needs samples");
  double b = bandwidth;
  if (!(b > 0.0)) {
    if (n < 2) throw std::invalid_argument("kde: bandwidth required for one sample");
    const double sd = std::sqrt(unbiased_variance(samples));
    if (!(sd > 0.0))
      throw std::invalid_argument("kde: all samples equal, bandwidth required");
    b = 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
  }
  const double norm = 1.0 / (static_cast<double>(n) * b * std::sqrt(2.0 * M_PI));
  Eigen::VectorXd out(eval_points.size());
  for (Eigen::Index i = 0; i < eval_points.size(); ++i) {
    const Eigen::ArrayXd z = (samples.array() - eval_points[i]) / b;
    out[i] = norm * (-0.5 * z.square()).exp().sum();
  }
  return out;
}

DiagnosticsReport diagnose(const std::vector<Eigen::MatrixXd>& chains, int max_lag,
                           bool squared_intra_variance) {
  DiagnosticsReport rep;
  rep.psrf = psrf_components(chains, squared_intra_variance);
  const Eigen::Index dim = chains[0].cols();
  rep.ess.resize(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    double total = 0.0;
    for (const auto& ch : chains) total += ess(ch.col(c));
    rep.ess[c] = total;
  }
  const int lags = std::min<int>(max_lag, static_cast<int>(chains[0].rows() - 1));
  rep.acf.resize(dim, lags + 1);
  for (Eigen::Index c = 0; c < dim; ++c)
    rep.acf.row(c) = autocorr(chains[0].col(c), lags).transpose();
  return rep;
}

}  // namespace cmrf

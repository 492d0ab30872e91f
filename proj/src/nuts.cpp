#include <cmath>
#include <stdexcept>

#include "cmrf/rng.hpp"
#include "cmrf/samplers.hpp"

namespace cmrf {

bool u_turn_generalized(const Eigen::VectorXd& p_minus, const Eigen::VectorXd& p_plus,
                        const Eigen::VectorXd& momentum_sum,
                        const Eigen::VectorXd& metric_diag) {
  double dot_minus = 0.0, dot_plus = 0.0;
  for (int i = 0; i < momentum_sum.size(); ++i) {
    dot_minus += p_minus[i] / metric_diag[i] * momentum_sum[i];
    dot_plus += p_plus[i] / metric_diag[i] * momentum_sum[i];
  }
  return dot_minus < 0.0 || dot_plus < 0.0;
}

bool u_turn_original(const Eigen::VectorXd& u_minus, const Eigen::VectorXd& u_plus,
                     const Eigen::VectorXd& p_minus, const Eigen::VectorXd& p_plus) {
  const Eigen::VectorXd span = u_plus - u_minus;
  return span.dot(p_minus) < 0.0 || span.dot(p_plus) < 0.0;
}

void leapfrog_step(Eigen::VectorXd& u, Eigen::VectorXd& p, double eps,
                   const Eigen::VectorXd& metric_diag,
                   const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& grad) {
  Eigen::VectorXd g(u.size());
  grad(u, g);
  p += 0.5 * eps * g;
  u.array() += eps * (p.array() / metric_diag.array());
  grad(u, g);
  p += 0.5 * eps * g;
}

namespace {

struct Phase {
  Eigen::VectorXd u, p, grad;
  double logd = 0.0;
};

double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

class NutsRun {
 public:
  NutsRun(const Target& target, const SamplerConfig& cfg, Rng& rng)
      : target_(&target), cfg_(&cfg), rng_(&rng) {}

  Eigen::VectorXd metric;  // diagonal M

  double hamiltonian(const Phase& ph) const {
    return -ph.logd + 0.5 * (ph.p.array().square() / metric.array()).sum();
  }

  void eval(Phase& ph) const {
    ph.logd = target_->log_density(ph.u);
    target_->grad_log_density(ph.u, ph.grad);
  }

  // One integrator step using the cached gradient; refreshes the cache.
  void step(Phase& ph, double eps) const {
    ph.p += 0.5 * eps * ph.grad;
    ph.u.array() += eps * (ph.p.array() / metric.array());
    eval(ph);
    ph.p += 0.5 * eps * ph.grad;
  }

  struct Tree {
    Phase left, right;
    Eigen::VectorXd p_sum;
    double log_weight = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd proposal;
    long n_states = 0;
    bool turned = false;
    bool divergent = false;
  };

  bool turned(const Tree& t) const {
    if (cfg_->use_original_uturn)
      return u_turn_original(t.left.u, t.right.u, t.left.p, t.right.p);
    return u_turn_generalized(t.left.p, t.right.p, t.p_sum, metric);
  }

  Tree build_tree(const Phase& from, int direction, int depth, double eps, double h0) {
    if (depth == 0) {
      Tree t;
      t.left = from;
      step(t.left, direction * eps);
      const double h = hamiltonian(t.left);
      const double dh = h0 - h;
      accept_sum_ += std::isfinite(dh) ? std::min(1.0, std::exp(dh)) : 0.0;
      accept_n_ += 1;
      t.divergent = !std::isfinite(h) || std::abs(h - h0) > cfg_->divergence_threshold;
      t.right = t.left;
      t.p_sum = t.left.p;
      t.log_weight = t.divergent ? -std::numeric_limits<double>::infinity() : dh;
      t.proposal = t.left.u;
      t.n_states = 1;
      return t;
    }
    Tree first = build_tree(from, direction, depth - 1, eps, h0);
    if (first.turned || first.divergent) return first;
    Tree second = build_tree(direction > 0 ? first.right : first.left, direction,
                             depth - 1, eps, h0);
    Tree t;
    t.left = direction > 0 ? std::move(first.left) : std::move(second.left);
    t.right = direction > 0 ? std::move(second.right) : std::move(first.right);
    t.p_sum = first.p_sum + second.p_sum;
    t.log_weight = logaddexp(first.log_weight, second.log_weight);
    t.proposal = std::log(rng_->uniform()) <= second.log_weight - t.log_weight
                     ? std::move(second.proposal)
                     : std::move(first.proposal);
    t.n_states = first.n_states + second.n_states;
    t.divergent = second.divergent;
    t.turned = second.turned || t.divergent || this->turned(t);
    return t;
  }

  // One transition; returns the selected point and merge statistics.
  struct Transition {
    Eigen::VectorXd u;
    double accept_stat = 0.0;
    bool diverged = false;
    long n_states = 1;
  };

  Transition transition(const Eigen::VectorXd& u_cur, double eps) {
    Phase cur;
    cur.u = u_cur;
    cur.p.resize(u_cur.size());
    for (int i = 0; i < u_cur.size(); ++i)
      cur.p[i] = std::sqrt(metric[i]) * rng_->normal();
    eval(cur);
    const double h0 = hamiltonian(cur);

    accept_sum_ = 0.0;
    accept_n_ = 0;

    Tree traj;
    traj.left = cur;
    traj.right = cur;
    traj.p_sum = cur.p;
    traj.log_weight = 0.0;  // weights are relative to exp(-h0)
    traj.proposal = cur.u;
    traj.n_states = 1;

    Transition out;
    for (int depth = 0; depth < cfg_->max_tree_depth; ++depth) {
      const int direction = rng_->uniform() < 0.5 ? -1 : 1;
      Tree sub = build_tree(direction > 0 ? traj.right : traj.left, direction, depth,
                            eps, h0);
      if (sub.divergent) {
        out.diverged = true;
        break;
      }
      if (sub.turned) break;
      const double lw = logaddexp(traj.log_weight, sub.log_weight);
      if (std::log(rng_->uniform()) <= sub.log_weight - lw)
        traj.proposal = std::move(sub.proposal);
      traj.log_weight = lw;
      if (direction > 0)
        traj.right = std::move(sub.right);
      else
        traj.left = std::move(sub.left);
      traj.p_sum += sub.p_sum;
      traj.n_states += sub.n_states;
      if (turned(traj)) break;
    }
    out.u = std::move(traj.proposal);
    out.accept_stat = accept_n_ > 0 ? accept_sum_ / accept_n_ : 0.0;
    out.n_states = traj.n_states;
    return out;
  }

  double find_initial_step(const Eigen::VectorXd& u0) {
    // Double or halve until one step crosses acceptance 1/2.
    Phase ph;
    ph.u = u0;
    ph.p.resize(u0.size());
    for (int i = 0; i < u0.size(); ++i) ph.p[i] = std::sqrt(metric[i]) * rng_->normal();
    eval(ph);
    const double h0 = hamiltonian(ph);
    double eps = 1.0;
    Phase trial = ph;
    step(trial, eps);
    double dh = h0 - hamiltonian(trial);
    const double dir = (std::isfinite(dh) && dh > std::log(0.5)) ? 1.0 : -1.0;
    for (int it = 0; it < 50; ++it) {
      eps *= dir > 0 ? 2.0 : 0.5;
      trial = ph;
      step(trial, eps);
      dh = h0 - hamiltonian(trial);
      const bool above = std::isfinite(dh) && dh > std::log(0.5);
      if ((dir > 0 && !above) || (dir < 0 && above)) break;
    }
    return eps;
  }

 private:
  const Target* target_;
  const SamplerConfig* cfg_;
  Rng* rng_;
  double accept_sum_ = 0.0;
  long accept_n_ = 0;
};

}  // namespace

Chain nuts_sample(const Target& target, const Eigen::VectorXd& u0,
                  const SamplerConfig& cfg) {
  const int n = target.dim();
  if (u0.size() != n) throw std::invalid_argument("u0 length != target dim");
  if (!target.has_gradient())
    throw std::invalid_argument("nuts requires a target gradient");
  if (cfg.max_tree_depth < 1) throw std::invalid_argument("max_tree_depth must be >= 1");
  if (!(cfg.target_accept > 0.0 && cfg.target_accept < 1.0))
    throw std::invalid_argument("target_accept must lie in (0,1)");
  if (cfg.n_samples < 1 || cfg.thin < 1 || cfg.n_adapt < 0)
    throw std::invalid_argument("invalid sampler budget");

  Rng rng(cfg.seed);
  NutsRun run(target, cfg, rng);
  if (cfg.metric.size() == 0)
    run.metric = Eigen::VectorXd::Ones(n);
  else if (cfg.metric.size() == n && (cfg.metric.array() > 0.0).all())
    run.metric = cfg.metric;
  else
    throw std::invalid_argument("metric must be positive with target dimension");

  Chain chain;
  chain.algorithm = SamplerAlgorithm::nuts;
  chain.samples.resize(cfg.n_samples, n);
  chain.thin = cfg.thin;
  chain.seed = cfg.seed;
  chain.n_adapt = cfg.n_adapt;

  double eps = cfg.step_size > 0.0 ? cfg.step_size : run.find_initial_step(u0);

  // Dual averaging toward the target acceptance statistic.
  const double mu = std::log(10.0 * eps);
  const double da_gamma = 0.05, da_t0 = 10.0, da_kappa = 0.75;
  double h_bar = 0.0, log_eps_bar = std::log(eps);

  // Welford moments of the warmup iterates for the diagonal metric.
  Eigen::VectorXd w_mean = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w_m2 = Eigen::VectorXd::Zero(n);
  long w_n = 0;
  const long metric_warmup_delay = 20;

  Eigen::VectorXd u = u0;
  const long total = cfg.n_adapt + cfg.n_samples * static_cast<long>(cfg.thin);
  double accept_acc = 0.0;
  long accept_cnt = 0;
  long row = 0;
  for (long it = 1; it <= total; ++it) {
    const bool adapting = it <= cfg.n_adapt;
    NutsRun::Transition tr = run.transition(u, eps);
    u = std::move(tr.u);
    if (tr.diverged) ++chain.divergences;
    chain.max_tree_states = std::max(chain.max_tree_states, tr.n_states);

    if (adapting) {
      const double m = static_cast<double>(it);
      h_bar = (1.0 - 1.0 / (m + da_t0)) * h_bar +
              (cfg.target_accept - tr.accept_stat) / (m + da_t0);
      const double log_eps = mu - std::sqrt(m) / da_gamma * h_bar;
      const double w = std::pow(m, -da_kappa);
      log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
      eps = std::exp(log_eps);

      ++w_n;
      const Eigen::VectorXd d = u - w_mean;
      w_mean += d / static_cast<double>(w_n);
      w_m2.array() += d.array() * (u - w_mean).array();
      if (w_n > metric_warmup_delay) {
        const double nn = static_cast<double>(w_n);
        // Shrunk variance estimate as the inverse metric.
        const Eigen::ArrayXd var =
            (nn / (nn + 5.0)) * (w_m2.array() / (nn - 1.0)) + 1e-3 * (5.0 / (nn + 5.0));
        run.metric = (1.0 / var).matrix();
      }
      if (it == cfg.n_adapt) eps = std::exp(log_eps_bar);
    } else {
      accept_acc += tr.accept_stat;
      ++accept_cnt;
      const long post = it - cfg.n_adapt;
      if (post % cfg.thin == 0) chain.samples.row(row++) = u;
    }
    if (cfg.record_adapt_trace) chain.adapt_trace.push_back(eps);
  }

  chain.acceptance_rate = accept_cnt > 0 ? accept_acc / accept_cnt : 0.0;
  chain.final_step_size = eps;
  chain.final_metric = run.metric;
  return chain;
}

Chain nuts_sample(const Posterior& p, const Field& u0, const SamplerConfig& cfg) {
  PosteriorTarget t(p);
  return nuts_sample(t, u0.values, cfg);
}

}  // namespace cmrf

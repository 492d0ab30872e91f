#include "cmrf/optimize.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace cmrf {

namespace {

struct Pair {
  Eigen::VectorXd s, y;
  double rho;
};

// Strong-Wolfe line search (bracket + zoom with quadratic interpolation).
// Returns the accepted step or 0 on failure; on success x, f, g hold the
// accepted point.
double line_search(const Objective& func, const Eigen::VectorXd& x0, double f0,
                   const Eigen::VectorXd& g0, const Eigen::VectorXd& d,
                   Eigen::VectorXd& x, double& f, Eigen::VectorXd& g,
                   const OptimizerConfig& cfg) {
  const double dg0 = g0.dot(d);
  if (!(dg0 < 0.0)) return 0.0;

  auto phi = [&](double t, double& dphi) {
    x = x0 + t * d;
    const double val = func(x, g);
    dphi = g.dot(d);
    return val;
  };

  auto zoom = [&](double lo, double f_lo, double dphi_lo, double hi, double f_hi) {
    for (int k = 0; k < cfg.max_line_search; ++k) {
      // Quadratic model through (lo, f_lo, dphi_lo) and (hi, f_hi),
      // safeguarded toward the midpoint.
      double t = lo - 0.5 * dphi_lo * (hi - lo) * (hi - lo) /
                          (f_hi - f_lo - dphi_lo * (hi - lo));
      const double span = hi - lo;
      if (!std::isfinite(t) || t <= std::min(lo, hi) + 0.1 * std::abs(span) ||
          t >= std::max(lo, hi) - 0.1 * std::abs(span))
        t = 0.5 * (lo + hi);
      double dphi_t;
      const double f_t = phi(t, dphi_t);
      if (!std::isfinite(f_t) || f_t > f0 + cfg.c1 * t * dg0 || f_t >= f_lo) {
        hi = t;
        f_hi = f_t;
        continue;
      }
      if (std::abs(dphi_t) <= -cfg.c2 * dg0) {
        f = f_t;
        return t;
      }
      if (dphi_t * (hi - lo) >= 0.0) {
        hi = lo;
        f_hi = f_lo;
      }
      lo = t;
      f_lo = f_t;
      dphi_lo = dphi_t;
      if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
    }
    // The bracket collapsed before the curvature condition held; near the
    // rounding floor a sufficient-decrease point is still a usable step.
    if (lo > 0.0 && f_lo < f0) {
      double dphi_t;
      f = phi(lo, dphi_t);
      return lo;
    }
    return 0.0;
  };

  double t_prev = 0.0, f_prev = f0, dphi_prev = dg0;
  double t = 1.0;
  for (int it = 0; it < cfg.max_line_search; ++it) {
    double dphi_t;
    const double f_t = phi(t, dphi_t);
    if (!std::isfinite(f_t) || f_t > f0 + cfg.c1 * t * dg0 || (it > 0 && f_t >= f_prev))
      return zoom(t_prev, f_prev, dphi_prev, t, f_t);
    if (std::abs(dphi_t) <= -cfg.c2 * dg0) {
      f = f_t;
      return t;
    }
    if (dphi_t >= 0.0) return zoom(t, f_t, dphi_t, t_prev, f_prev);
    t_prev = t;
    f_prev = f_t;
    dphi_prev = dphi_t;
    t *= 2.0;
  }
  return 0.0;
}

}  // namespace

MinimizeResult lbfgs_minimize(const Objective& func, Eigen::VectorXd x0,
                              const OptimizerConfig& cfg) {
  if (cfg.memory < 1) throw std::invalid_argument("memory must be >= 1");
  if (!(cfg.c1 > 0.0 && cfg.c1 < cfg.c2 && cfg.c2 < 1.0))
    throw std::invalid_argument("need 0 < c1 < c2 < 1");

  const int n = static_cast<int>(x0.size());
  MinimizeResult res;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(n);
  double f = func(x, g);
  const double tol = cfg.grad_tol > 0.0 ? cfg.grad_tol : 1e-6 * (1.0 + std::abs(f));

  res.grad_norm_trace.push_back(g.norm());

  std::deque<Pair> mem;
  Eigen::VectorXd q(n), d(n), x_new(n), g_new(n);
  bool restarted_once = false;

  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    if (g.norm() <= tol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion for d = -H g.
    q = g;
    std::vector<double> alpha(mem.size());
    for (int k = static_cast<int>(mem.size()) - 1; k >= 0; --k) {
      alpha[k] = mem[k].rho * mem[k].s.dot(q);
      q -= alpha[k] * mem[k].y;
    }
    if (!mem.empty()) {
      const Pair& last = mem.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double beta = mem[k].rho * mem[k].y.dot(q);
      q += (alpha[k] - beta) * mem[k].s;
    }
    d = -q;
    if (!(g.dot(d) < 0.0)) {
      mem.clear();
      d = -g;
    }

    double f_new = f;
    x_new = x;
    g_new = g;
    const double step = line_search(func, x, f, g, d, x_new, f_new, g_new, cfg);
    if (step == 0.0) {
      if (!restarted_once && !mem.empty()) {
        // Heavy-tailed objectives can defeat the low-rank curvature model;
        // drop the memory and retry from the same point.
        restarted_once = true;
        mem.clear();
        continue;
      }
      break;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-10 * s.norm() * yv.norm())
      mem.push_back({s, yv, 1.0 / sy});
    while (static_cast<int>(mem.size()) > cfg.memory) mem.pop_front();

    x = x_new;
    f = f_new;
    g = g_new;
    res.grad_norm_trace.push_back(g.norm());
  }

  if (!res.converged && g.norm() <= tol) res.converged = true;
  res.x = std::move(x);
  res.iterations = it;
  res.objective = f;
  return res;
}

MapResult lbfgs_map(const Posterior& p, const Field& u0, const OptimizerConfig& cfg) {
  p.validate();
  const Lattice lat = p.lattice();
  Eigen::VectorXd gp;
  Objective neg_log_post = [&p, lat, &gp](const Eigen::VectorXd& x,
                                          Eigen::VectorXd& g) mutable {
    Field u(lat, x);
    g = -grad_log_likelihood(p.op, p.y, u, p.sigma).values;
    grad_log_prior(p.prior, u, gp);
    g -= gp;
    return -log_likelihood(p.op, p.y, u, p.sigma) - log_prior(p.prior, u);
  };
  MinimizeResult r = lbfgs_minimize(neg_log_post, u0.values, cfg);
  MapResult out;
  out.u_map = Field(lat, std::move(r.x));
  out.grad_norm_trace = std::move(r.grad_norm_trace);
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.neg_log_post = r.objective;
  return out;
}

}  // namespace cmrf

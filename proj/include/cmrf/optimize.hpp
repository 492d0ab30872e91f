#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "cmrf/posterior.hpp"

namespace cmrf {

struct OptimizerConfig {
  int memory = 10;
  int max_iter = 10000;
  double grad_tol = 0.0;  // 0 selects 1e-6 * (1 + |f(u0)|)
  double c1 = 1e-4;       // sufficient decrease
  double c2 = 0.9;        // curvature
  int max_line_search = 50;

  bool operator==(const OptimizerConfig&) const = default;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  std::vector<double> grad_norm_trace;  // per accepted iterate, initial included
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
};

struct MapResult {
  Field u_map;
  std::vector<double> grad_norm_trace;
  int iterations = 0;
  bool converged = false;
  double neg_log_post = 0.0;
};

/// Objective callback: returns f(x) and fills the gradient.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Limited-memory quasi-Newton minimization (two-loop recursion) with a
/// strong-Wolfe line search. On a line-search failure the memory is reset
/// once; a second failure returns the best iterate with converged = false.
MinimizeResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0,
                              const OptimizerConfig& cfg = {});

/// MAP estimate: minimizes the negative log posterior from u0.
MapResult lbfgs_map(const Posterior& p, const Field& u0, const OptimizerConfig& cfg = {});

}  // namespace cmrf

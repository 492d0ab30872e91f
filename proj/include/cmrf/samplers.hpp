#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cmrf/lattice.hpp"
#include "cmrf/posterior.hpp"
#include "cmrf/target.hpp"

namespace cmrf {

enum class SamplerAlgorithm { mwg, ram, nuts };

const char* to_string(SamplerAlgorithm a);
SamplerAlgorithm sampler_algorithm_from_string(const std::string& name);

struct SamplerConfig {
  SamplerAlgorithm algorithm = SamplerAlgorithm::mwg;
  long n_samples = 1000;  // stored rows after thinning
  long n_adapt = 1000;    // adaptation sweeps / iterations, discarded
  int thin = 1;
  std::uint64_t seed = 0;

  // Gibbs samplers (MwG, RAM). Empty blocks = singleton blocks in
  // lexicographic scan order.
  std::vector<IndexSet> blocks;
  double cov_regularizer = 1e-8;        // delta added to the proposal covariance
  double initial_proposal_scale = 1.0;  // proposal std-dev before adaptation
  int repelling_max_tries = 1000;       // RAM stage-loop cap

  // NUTS.
  double step_size = 0.0;  // <= 0 selects a coarse automatic initial value
  int max_tree_depth = 10;
  double target_accept = 0.8;
  Eigen::VectorXd metric;  // diagonal mass matrix M; empty = identity
  bool use_original_uturn = false;
  double divergence_threshold = 1000.0;

  // Records a per-iteration adaptation witness (step size / first proposal
  // scale) into Chain::adapt_trace.
  bool record_adapt_trace = false;

  bool operator==(const SamplerConfig& o) const {
    return algorithm == o.algorithm && n_samples == o.n_samples &&
           n_adapt == o.n_adapt && thin == o.thin && seed == o.seed &&
           blocks == o.blocks && cov_regularizer == o.cov_regularizer &&
           initial_proposal_scale == o.initial_proposal_scale &&
           repelling_max_tries == o.repelling_max_tries && step_size == o.step_size &&
           max_tree_depth == o.max_tree_depth && target_accept == o.target_accept &&
           metric.size() == o.metric.size() &&
           (metric.size() == 0 || metric == o.metric) &&
           use_original_uturn == o.use_original_uturn &&
           divergence_threshold == o.divergence_threshold &&
           record_adapt_trace == o.record_adapt_trace;
  }
};

struct Chain {
  Eigen::MatrixXd samples;  // rows = stored samples
  SamplerAlgorithm algorithm = SamplerAlgorithm::mwg;
  std::uint64_t seed = 0;
  int thin = 1;
  long n_adapt = 0;  // adaptation_stopped_at
  double acceptance_rate = 0.0;
  Eigen::VectorXd block_acceptance;  // per block (MwG/RAM)
  long divergences = 0;              // NUTS
  long ram_fallbacks = 0;            // capped repelling/attracting loops
  long cholesky_retries = 0;
  long max_tree_states = 0;          // largest trajectory built (NUTS)
  double final_step_size = 0.0;      // NUTS
  Eigen::VectorXd final_metric;      // NUTS
  std::vector<double> adapt_trace;

  int n_stored() const { return static_cast<int>(samples.rows()); }
  int dim() const { return static_cast<int>(samples.cols()); }
};

/// Blockwise random-walk Metropolis within a lexicographic Gibbs scan, with
/// proposal-covariance adaptation frozen after n_adapt sweeps.
Chain mwg_sample(const Target& target, const Eigen::VectorXd& u0, const SamplerConfig& cfg);
Chain mwg_sample(const Posterior& p, const Field& u0, const SamplerConfig& cfg);

/// Repelling-attracting Metropolis within Gibbs: a forced downhill stage, a
/// forced uphill stage and an auxiliary downhill stage feed a pseudo-marginal
/// Metropolis test.
Chain ram_sample(const Target& target, const Eigen::VectorXd& u0, const SamplerConfig& cfg);
Chain ram_sample(const Posterior& p, const Field& u0, const SamplerConfig& cfg);

/// Multinomial no-U-turn sampler with dual-averaging step size and diagonal
/// metric adaptation.
Chain nuts_sample(const Target& target, const Eigen::VectorXd& u0, const SamplerConfig& cfg);
Chain nuts_sample(const Posterior& p, const Field& u0, const SamplerConfig& cfg);

/// Generalized U-turn test: fires when the trajectory momentum sum opposes
/// either end momentum in the metric inner product (strict inequality).
bool u_turn_generalized(const Eigen::VectorXd& p_minus, const Eigen::VectorXd& p_plus,
                        const Eigen::VectorXd& momentum_sum,
                        const Eigen::VectorXd& metric_diag);

/// Position-based test from the original formulation.
bool u_turn_original(const Eigen::VectorXd& u_minus, const Eigen::VectorXd& u_plus,
                     const Eigen::VectorXd& p_minus, const Eigen::VectorXd& p_plus);

/// One Stoermer-Verlet step: half kick, drift with M^{-1} p, half kick.
/// grad fills g with the gradient of the log density at u.
void leapfrog_step(Eigen::VectorXd& u, Eigen::VectorXd& p, double eps,
                   const Eigen::VectorXd& metric_diag,
                   const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& grad);

}  // namespace cmrf

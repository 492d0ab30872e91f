#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cmrf/forward.hpp"
#include "cmrf/optimize.hpp"
#include "cmrf/posterior.hpp"
#include "cmrf/prior.hpp"
#include "cmrf/samplers.hpp"

namespace cmrf {

inline constexpr const char* kVersion = "0.1.0";

/// Configuration or input-validation problems; the CLI maps these to exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Numeric failures (solver breakdown, non-finite results); exit 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { deconv1d, deconv2d };

struct RealizeConfig {
  int n = 200;
  double ell = 0.015 * 0.015;
  double cauchy_scale = 1.0;
  double gauss_scale = 1.0;
  std::uint64_t seed = 1;
  bool normalize = true;

  bool operator==(const RealizeConfig&) const = default;
};

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::deconv1d;
  std::uint64_t master_seed = 2024;
  double kernel_s = 1.0 / 500.0;
  double noise_sigma = 0.01;
  double eps_trunc = 1e-8;
  Lattice data_grid = Lattice::line(67);
  Lattice recon_grid = Lattice::line(200);
  Lattice sim_grid = Lattice::line(2);  // used by 2D simulation only
  PriorSpec prior;
  OptimizerConfig optimizer;
  SamplerConfig sampler;
  int n_chains = 4;
  std::vector<int> kde_nodes;
  std::string output_dir = "out";
  RealizeConfig realize;

  bool operator==(const ExperimentConfig&) const = default;
  void validate() const;  // throws ConfigError
};

nlohmann::json prior_to_json(const PriorSpec& spec);
PriorSpec prior_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Orchestration commands; each is a pure function of (config, input files)
/// and rewrites its outputs deterministically.
void cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
MapResult cmd_map(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void cmd_sample(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void cmd_diagnose(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void cmd_realize(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Posterior assembled from the stored measurement and the config's grids.
Posterior build_posterior(const ExperimentConfig& cfg, const Measurement& m);

}  // namespace cmrf

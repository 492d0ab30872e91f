#include "cmrf/experiment.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>
#include <vector>

#include "cmrf/diagnostics.hpp"
#include "cmrf/io.hpp"
#include "cmrf/realizations.hpp"

namespace cmrf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json lattice_to_json(const Lattice& lat) {
  json j;
  j["dims"] = lat.dims;
  j["nx"] = lat.nx;
  if (lat.dims == 2) j["ny"] = lat.ny;
  return j;
}

Lattice lattice_from_json(const json& j) {
  const int dims = j.at("dims").get<int>();
  if (dims == 1) return Lattice::line(j.at("nx").get<int>());
  return Lattice::grid(j.at("nx").get<int>(), j.at("ny").get<int>());
}

const char* to_string(ProblemKind p) {
  return p == ProblemKind::deconv1d ? "deconv1d" : "deconv2d";
}

ProblemKind problem_from_string(const std::string& s) {
  if (s == "deconv1d") return ProblemKind::deconv1d;
  if (s == "deconv2d") return ProblemKind::deconv2d;
  throw ConfigError("unknown problem: " + s);
}

void write_manifest(const ExperimentConfig& cfg, const fs::path& out_dir,
                    const std::string& command) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["config_hash"] = config_hash(cfg);
  j["master_seed"] = cfg.master_seed;
  if (command == "sample") {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < cfg.n_chains; ++i)
      seeds.push_back(cfg.master_seed + static_cast<std::uint64_t>(i));
    j["chain_seeds"] = seeds;
  }
  write_text_file(out_dir / ("manifest_" + command + ".json"), j.dump(2) + "\n");
}

Field read_field_csv_1d(const fs::path& path, const Lattice& lat) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing input file: " + path.string());
  std::string line;
  std::getline(in, line);  // header
  Field f = Field::zero(lat);
  for (int i = 0; i < lat.nx; ++i) {
    if (!std::getline(in, line))
      throw ConfigError("truncated field csv: " + path.string());
    const auto comma = line.find(',');
    f.values[i] = std::stod(line.substr(comma + 1));
  }
  return f;
}

Field read_field_csv_2d(const fs::path& path, const Lattice& lat) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing input file: " + path.string());
  Field f = Field::zero(lat);
  std::string line;
  for (int i = 0; i < lat.nx; ++i) {
    if (!std::getline(in, line))
      throw ConfigError("truncated field csv: " + path.string());
    std::size_t pos = 0;
    for (int j = 0; j < lat.ny; ++j) {
      const std::size_t next = line.find(',', pos);
      f.values[lat.index(i, j)] = std::stod(line.substr(pos, next - pos));
      pos = next == std::string::npos ? line.size() : next + 1;
    }
  }
  return f;
}

Field read_field_csv(const fs::path& path, const Lattice& lat) {
  return lat.dims == 1 ? read_field_csv_1d(path, lat) : read_field_csv_2d(path, lat);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_chains < 1) throw ConfigError("n_chains must be >= 1");
  if (!(kernel_s > 0.0)) throw ConfigError("kernel_s must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be nonnegative");
  if (!(eps_trunc > 0.0 && eps_trunc < 1.0)) throw ConfigError("eps_trunc in (0,1)");
  const int want = problem == ProblemKind::deconv1d ? 1 : 2;
  if (data_grid.dims != want || recon_grid.dims != want)
    throw ConfigError("grid dimensionality does not match the problem");
  try {
    validate_prior(prior, recon_grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("prior: ") + e.what());
  }
  for (int node : kde_nodes)
    if (node < 0 || node >= recon_grid.size()) throw ConfigError("kde node out of range");
}

json prior_to_json(const PriorSpec& s) {
  json j;
  j["variant"] = to_string(s.variant);
  j["lambda"] = s.lambda;
  j["gamma"] = s.gamma;
  j["gamma_prime"] = s.gamma_prime;
  j["ell"] = s.ell;
  j["xi"] = s.xi;
  j["sigma0"] = s.sigma0;
  j["sigma1"] = s.sigma1;
  j["sigma2"] = s.sigma2;
  j["sigma_w"] = s.sigma_w;
  j["zeta"] = s.zeta;
  j["zeta_prime"] = s.zeta_prime;
  j["psi"] = s.psi;
  j["delta"] = s.delta;
  j["h_spde"] = s.h_spde;
  return j;
}

PriorSpec prior_from_json(const json& j) {
  PriorSpec s;
  s.variant = prior_variant_from_string(j.at("variant").get<std::string>());
  s.lambda = j.value("lambda", s.lambda);
  s.gamma = j.value("gamma", s.gamma);
  s.gamma_prime = j.value("gamma_prime", s.gamma_prime);
  s.ell = j.value("ell", s.ell);
  s.xi = j.value("xi", s.xi);
  s.sigma0 = j.value("sigma0", s.sigma0);
  s.sigma1 = j.value("sigma1", s.sigma1);
  s.sigma2 = j.value("sigma2", s.sigma2);
  s.sigma_w = j.value("sigma_w", s.sigma_w);
  s.zeta = j.value("zeta", s.zeta);
  s.zeta_prime = j.value("zeta_prime", s.zeta_prime);
  s.psi = j.value("psi", s.psi);
  s.delta = j.value("delta", s.delta);
  s.h_spde = j.value("h_spde", s.h_spde);
  return s;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["problem"] = to_string(cfg.problem);
  j["master_seed"] = cfg.master_seed;
  j["kernel_s"] = cfg.kernel_s;
  j["noise_sigma"] = cfg.noise_sigma;
  j["eps_trunc"] = cfg.eps_trunc;
  j["data_grid"] = lattice_to_json(cfg.data_grid);
  j["recon_grid"] = lattice_to_json(cfg.recon_grid);
  if (cfg.problem == ProblemKind::deconv2d) j["sim_grid"] = lattice_to_json(cfg.sim_grid);
  j["prior"] = prior_to_json(cfg.prior);
  j["optimizer"] = {{"memory", cfg.optimizer.memory},
                    {"max_iter", cfg.optimizer.max_iter},
                    {"grad_tol", cfg.optimizer.grad_tol},
                    {"c1", cfg.optimizer.c1},
                    {"c2", cfg.optimizer.c2},
                    {"max_line_search", cfg.optimizer.max_line_search}};
  json s;
  s["algorithm"] = to_string(cfg.sampler.algorithm);
  s["n_samples"] = cfg.sampler.n_samples;
  s["n_adapt"] = cfg.sampler.n_adapt;
  s["thin"] = cfg.sampler.thin;
  s["cov_regularizer"] = cfg.sampler.cov_regularizer;
  s["initial_proposal_scale"] = cfg.sampler.initial_proposal_scale;
  s["repelling_max_tries"] = cfg.sampler.repelling_max_tries;
  s["step_size"] = cfg.sampler.step_size;
  s["max_tree_depth"] = cfg.sampler.max_tree_depth;
  s["target_accept"] = cfg.sampler.target_accept;
  s["use_original_uturn"] = cfg.sampler.use_original_uturn;
  if (!cfg.sampler.blocks.empty()) s["blocks"] = cfg.sampler.blocks;
  j["sampler"] = s;
  j["n_chains"] = cfg.n_chains;
  if (!cfg.kde_nodes.empty()) j["kde_nodes"] = cfg.kde_nodes;
  j["output_dir"] = cfg.output_dir;
  j["realize"] = {{"n", cfg.realize.n},
                  {"ell", cfg.realize.ell},
                  {"cauchy_scale", cfg.realize.cauchy_scale},
                  {"gauss_scale", cfg.realize.gauss_scale},
                  {"seed", cfg.realize.seed},
                  {"normalize", cfg.realize.normalize}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.problem = problem_from_string(j.at("problem").get<std::string>());
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.kernel_s = j.value("kernel_s", cfg.kernel_s);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    cfg.eps_trunc = j.value("eps_trunc", cfg.eps_trunc);
    if (j.contains("data_grid")) cfg.data_grid = lattice_from_json(j["data_grid"]);
    if (j.contains("recon_grid")) cfg.recon_grid = lattice_from_json(j["recon_grid"]);
    if (j.contains("sim_grid")) cfg.sim_grid = lattice_from_json(j["sim_grid"]);
    if (j.contains("prior")) cfg.prior = prior_from_json(j["prior"]);
    if (j.contains("optimizer")) {
      const json& o = j["optimizer"];
      cfg.optimizer.memory = o.value("memory", cfg.optimizer.memory);
      cfg.optimizer.max_iter = o.value("max_iter", cfg.optimizer.max_iter);
      cfg.optimizer.grad_tol = o.value("grad_tol", cfg.optimizer.grad_tol);
      cfg.optimizer.c1 = o.value("c1", cfg.optimizer.c1);
      cfg.optimizer.c2 = o.value("c2", cfg.optimizer.c2);
      cfg.optimizer.max_line_search =
          o.value("max_line_search", cfg.optimizer.max_line_search);
    }
    if (j.contains("sampler")) {
      const json& s = j["sampler"];
      cfg.sampler.algorithm =
          sampler_algorithm_from_string(s.value("algorithm", std::string("mwg")));
      cfg.sampler.n_samples = s.value("n_samples", cfg.sampler.n_samples);
      cfg.sampler.n_adapt = s.value("n_adapt", cfg.sampler.n_adapt);
      cfg.sampler.thin = s.value("thin", cfg.sampler.thin);
      cfg.sampler.cov_regularizer =
          s.value("cov_regularizer", cfg.sampler.cov_regularizer);
      cfg.sampler.initial_proposal_scale =
          s.value("initial_proposal_scale", cfg.sampler.initial_proposal_scale);
      cfg.sampler.repelling_max_tries =
          s.value("repelling_max_tries", cfg.sampler.repelling_max_tries);
      cfg.sampler.step_size = s.value("step_size", cfg.sampler.step_size);
      cfg.sampler.max_tree_depth = s.value("max_tree_depth", cfg.sampler.max_tree_depth);
      cfg.sampler.target_accept = s.value("target_accept", cfg.sampler.target_accept);
      cfg.sampler.use_original_uturn =
          s.value("use_original_uturn", cfg.sampler.use_original_uturn);
      if (s.contains("blocks")) cfg.sampler.blocks = s["blocks"].get<std::vector<IndexSet>>();
    }
    cfg.n_chains = j.value("n_chains", cfg.n_chains);
    if (j.contains("kde_nodes")) cfg.kde_nodes = j["kde_nodes"].get<std::vector<int>>();
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    if (j.contains("realize")) {
      const json& r = j["realize"];
      cfg.realize.n = r.value("n", cfg.realize.n);
      cfg.realize.ell = r.value("ell", cfg.realize.ell);
      cfg.realize.cauchy_scale = r.value("cauchy_scale", cfg.realize.cauchy_scale);
      cfg.realize.gauss_scale = r.value("gauss_scale", cfg.realize.gauss_scale);
      cfg.realize.seed = r.value("seed", cfg.realize.seed);
      cfg.realize.normalize = r.value("normalize", cfg.realize.normalize);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return config_from_json(j);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string dump = config_to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Posterior build_posterior(const ExperimentConfig& cfg, const Measurement& m) {
  Posterior p;
  p.op = build_operator(m.data_grid, cfg.recon_grid, cfg.kernel_s, cfg.eps_trunc);
  p.y = m.y;
  p.sigma = m.sigma > 0.0 ? m.sigma : cfg.noise_sigma;
  p.prior = cfg.prior;
  p.validate();
  return p;
}

void cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  Measurement m;
  if (cfg.problem == ProblemKind::deconv1d) {
    m = simulate_data_1d(cfg.data_grid, cfg.kernel_s, cfg.noise_sigma, cfg.master_seed);
    Field truth = Field::zero(cfg.recon_grid);
    for (int i = 0; i < cfg.recon_grid.nx; ++i)
      truth.values[i] = test_function_1d(cfg.recon_grid.x(i));
    write_field_csv(out_dir / "phantom.csv", truth);
  } else {
    if (cfg.sim_grid.dims != 2) throw ConfigError("deconv2d needs a 2D sim_grid");
    const Field fine = phantom_2d(cfg.sim_grid);
    m = simulate_data_2d(fine, cfg.data_grid, cfg.kernel_s, cfg.noise_sigma,
                         cfg.master_seed, cfg.eps_trunc);
    write_field_csv(out_dir / "phantom.csv", phantom_2d(cfg.recon_grid));
  }
  write_measurement_json(out_dir / "measurement.json", m);
  write_manifest(cfg, out_dir, "simulate");
}

MapResult cmd_map(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const Measurement m = read_measurement_json(out_dir / "measurement.json");
  const Posterior post = build_posterior(cfg, m);
  const MapResult res = lbfgs_map(post, Field::zero(cfg.recon_grid), cfg.optimizer);
  if (!res.u_map.values.allFinite()) throw NumericError("MAP estimate is not finite");
  write_field_csv(out_dir / "u_map.csv", res.u_map);
  Eigen::VectorXd iters(res.grad_norm_trace.size()), norms(res.grad_norm_trace.size());
  for (std::size_t k = 0; k < res.grad_norm_trace.size(); ++k) {
    iters[static_cast<Eigen::Index>(k)] = static_cast<double>(k);
    norms[static_cast<Eigen::Index>(k)] = res.grad_norm_trace[k];
  }
  write_columns_csv(out_dir / "grad_trace.csv", {"iter", "grad_norm"}, {iters, norms});
  write_manifest(cfg, out_dir, "map");
  return res;
}

void cmd_sample(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const Measurement m = read_measurement_json(out_dir / "measurement.json");
  const Posterior post = build_posterior(cfg, m);
  const Field u0 = read_field_csv(out_dir / "u_map.csv", cfg.recon_grid);

  std::vector<Chain> chains(cfg.n_chains);
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(cfg.n_chains));
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.n_chains) return;
      SamplerConfig sc = cfg.sampler;
      sc.seed = cfg.master_seed + static_cast<std::uint64_t>(i);
      switch (sc.algorithm) {
        case SamplerAlgorithm::mwg:
          chains[i] = mwg_sample(post, u0, sc);
          break;
        case SamplerAlgorithm::ram:
          chains[i] = ram_sample(post, u0, sc);
          break;
        case SamplerAlgorithm::nuts:
          chains[i] = nuts_sample(post, u0, sc);
          break;
      }
    }
  };
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (int i = 0; i < cfg.n_chains; ++i)
    write_chain(out_dir / ("chain_" + std::to_string(i) + ".bin"), chains[i]);
  write_manifest(cfg, out_dir, "sample");
}

void cmd_diagnose(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  if (cfg.n_chains < 2) throw ConfigError("diagnose needs at least 2 chains");
  std::vector<Eigen::MatrixXd> samples(cfg.n_chains);
  std::vector<Chain> chains(cfg.n_chains);
  for (int i = 0; i < cfg.n_chains; ++i) {
    chains[i] = read_chain(out_dir / ("chain_" + std::to_string(i) + ".bin"));
    samples[i] = chains[i].samples;
  }

  const int max_lag = std::min<int>(200, static_cast<int>(samples[0].rows()) - 1);
  const DiagnosticsReport rep = diagnose(samples, max_lag);

  // Estimation uses the first chain; the remaining chains back the PSRF.
  const Eigen::MatrixXd& first = samples[0];
  const Eigen::Index dim = first.cols();
  Eigen::VectorXd comp(dim), cm(dim), var(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    comp[c] = static_cast<double>(c);
    cm[c] = first.col(c).mean();
    var[c] = (first.col(c).array() - cm[c]).square().sum() /
             static_cast<double>(first.rows() - 1);
  }
  write_columns_csv(out_dir / "report.csv", {"component", "psrf", "ess", "cm", "variance"},
                    {comp, rep.psrf, rep.ess, cm, var});

  for (int node : cfg.kde_nodes) {
    const Eigen::VectorXd s = first.col(node);
    const double sd = std::sqrt((s.array() - s.mean()).square().sum() /
                                static_cast<double>(s.size() - 1));
    const double bw = 1.06 * sd * std::pow(static_cast<double>(s.size()), -0.2);
    const double lo = s.minCoeff() - 3.0 * bw, hi = s.maxCoeff() + 3.0 * bw;
    Eigen::VectorXd grid(401);
    for (int k = 0; k < 401; ++k) grid[k] = lo + (hi - lo) * k / 400.0;
    write_columns_csv(out_dir / ("kde_node_" + std::to_string(node) + ".csv"),
                      {"x", "density"}, {grid, kde(s, grid)});
  }

  json j;
  j["max_psrf"] = rep.psrf.maxCoeff();
  j["min_ess"] = rep.ess.minCoeff();
  j["mean_acceptance"] = [&] {
    double acc = 0.0;
    for (const auto& c : chains) acc += c.acceptance_rate;
    return acc / static_cast<double>(chains.size());
  }();
  long divergences = 0;
  for (const auto& c : chains) divergences += c.divergences;
  j["divergences"] = divergences;
  write_text_file(out_dir / "report.json", j.dump(2) + "\n");
  write_manifest(cfg, out_dir, "diagnose");
}

void cmd_realize(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const RealizeConfig& rc = cfg.realize;
  const Lattice lat = Lattice::line(rc.n);
  const double h = lat.h();
  auto maybe_norm = [&](Field f) { return rc.normalize ? normalize_max_abs(f) : f; };

  Eigen::VectorXd x(rc.n);
  for (int i = 0; i < rc.n; ++i) x[i] = lat.x(i);

  for (int order : {1, 2}) {
    const Field cw = maybe_norm(random_walk_1d(
        order, {NoiseFamily::cauchy, rc.cauchy_scale, rc.seed}, rc.n, h));
    const Field gw = maybe_norm(random_walk_1d(
        order, {NoiseFamily::gaussian, rc.gauss_scale, rc.seed}, rc.n, h));
    write_columns_csv(out_dir / ("walk" + std::to_string(order) + ".csv"),
                      {"x", "cauchy", "gauss"}, {x, cw.values, gw.values});
  }
  const Field cs = maybe_norm(
      spde_realization(lat, rc.ell, {NoiseFamily::cauchy, rc.cauchy_scale, rc.seed}));
  const Field gs = maybe_norm(
      spde_realization(lat, rc.ell, {NoiseFamily::gaussian, rc.gauss_scale, rc.seed}));
  write_columns_csv(out_dir / "spde.csv", {"x", "cauchy", "gauss"},
                    {x, cs.values, gs.values});
  write_manifest(cfg, out_dir, "realize");
}

}  // namespace cmrf

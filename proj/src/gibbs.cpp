#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "cmrf/rng.hpp"
#include "cmrf/samplers.hpp"

namespace cmrf {

const char* to_string(SamplerAlgorithm a) {
  switch (a) {
    case SamplerAlgorithm::mwg: return "mwg";
    case SamplerAlgorithm::ram: return "ram";
    case SamplerAlgorithm::nuts: return "nuts";
  }
  throw std::logic_error("unknown algorithm");
}

SamplerAlgorithm sampler_algorithm_from_string(const std::string& name) {
  if (name == "mwg") return SamplerAlgorithm::mwg;
  if (name == "ram") return SamplerAlgorithm::ram;
  if (name == "nuts") return SamplerAlgorithm::nuts;
  throw std::invalid_argument("unknown sampler algorithm: " + name);
}

namespace {

constexpr double kProposalScaling = 2.38 * 2.38;

std::vector<IndexSet> resolve_blocks(const SamplerConfig& cfg, int n) {
  if (cfg.blocks.empty()) {
    std::vector<IndexSet> singletons(n);
    for (int i = 0; i < n; ++i) singletons[i] = {i};
    return singletons;
  }
  std::vector<bool> seen(n, false);
  for (const IndexSet& b : cfg.blocks) {
    if (!is_index_set(b, n)) throw std::invalid_argument("invalid block index set");
    for (int i : b) {
      if (seen[i]) throw std::invalid_argument("blocks must partition the indices");
      seen[i] = true;
    }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw std::invalid_argument("blocks must cover every index");
  return cfg.blocks;
}

// Streaming proposal-covariance adaptation for one block: Welford moments of
// the block's chain values, refreshed into Q = chol(2.38^2/d (f*cov + reg I)).
struct BlockAdapt {
  IndexSet sites;
  int d = 1;
  double cov_factor = 1.0;  // 1 for MwG, 1/2 for RAM
  double reg = 1e-8;
  long n = 0;
  Eigen::VectorXd mean, dtmp;
  Eigen::MatrixXd m2;
  Eigen::MatrixXd Q;
  long chol_retries = 0;
  double accepted = 0.0, proposed = 0.0;

  void init(IndexSet s, double factor, double reg0, double init_scale) {
    sites = std::move(s);
    d = static_cast<int>(sites.size());
    cov_factor = factor;
    reg = reg0;
    mean.setZero(d);
    dtmp.setZero(d);
    m2.setZero(d, d);
    Q = init_scale * Eigen::MatrixXd::Identity(d, d);
  }

  void push(const Eigen::VectorXd& x) {
    ++n;
    dtmp = x - mean;
    mean += dtmp / static_cast<double>(n);
    m2.noalias() += dtmp * (x - mean).transpose();
  }

  void update_Q() {
    if (n < 2) return;
    if (d == 1) {
      const double var = m2(0, 0) / static_cast<double>(n - 1);
      Q(0, 0) = std::sqrt(kProposalScaling * (cov_factor * var + reg));
      return;
    }
    for (;;) {
      Eigen::MatrixXd cov = (kProposalScaling / d) *
                            (cov_factor * (m2 / static_cast<double>(n - 1)) +
                             reg * Eigen::MatrixXd::Identity(d, d));
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() == Eigen::Success) {
        Q = llt.matrixL();
        return;
      }
      reg *= 10.0;
      ++chol_retries;
    }
  }
};

struct GibbsRun {
  std::vector<BlockAdapt> blocks;
  long total_sweeps = 0;
  long sampling_sweeps = 0;
};

GibbsRun prepare(const SamplerConfig& cfg, int n, double cov_factor) {
  if (cfg.n_samples < 1 || cfg.thin < 1 || cfg.n_adapt < 0)
    throw std::invalid_argument("invalid sampler budget");
  GibbsRun run;
  auto sets = resolve_blocks(cfg, n);
  run.blocks.resize(sets.size());
  for (std::size_t k = 0; k < sets.size(); ++k)
    run.blocks[k].init(sets[k], cov_factor, cfg.cov_regularizer,
                       cfg.initial_proposal_scale);
  run.sampling_sweeps = cfg.n_samples * cfg.thin;
  run.total_sweeps = cfg.n_adapt + run.sampling_sweeps;
  return run;
}

void extract(const Eigen::VectorXd& u, const IndexSet& sites, Eigen::VectorXd& out) {
  out.resize(sites.size());
  for (std::size_t k = 0; k < sites.size(); ++k) out[static_cast<int>(k)] = u[sites[k]];
}

void finalize(Chain& chain, GibbsRun& run, const SamplerConfig& cfg) {
  chain.thin = cfg.thin;
  chain.seed = cfg.seed;
  chain.n_adapt = cfg.n_adapt;
  chain.block_acceptance.resize(run.blocks.size());
  double acc = 0.0;
  long retries = 0;
  for (std::size_t k = 0; k < run.blocks.size(); ++k) {
    const BlockAdapt& b = run.blocks[k];
    chain.block_acceptance[static_cast<int>(k)] =
        b.proposed > 0 ? b.accepted / b.proposed : 0.0;
    acc += chain.block_acceptance[static_cast<int>(k)];
    retries += b.chol_retries;
  }
  chain.acceptance_rate = acc / static_cast<double>(run.blocks.size());
  chain.cholesky_retries = retries;
}

}  // namespace

Chain mwg_sample(const Target& target, const Eigen::VectorXd& u0,
                 const SamplerConfig& cfg) {
  const int n = target.dim();
  if (u0.size() != n) throw std::invalid_argument("u0 length != target dim");
  GibbsRun run = prepare(cfg, n, 1.0);
  Rng rng(cfg.seed);
  auto state = target.make_state(u0);

  Chain chain;
  chain.algorithm = SamplerAlgorithm::mwg;
  chain.samples.resize(cfg.n_samples, n);

  Eigen::VectorXd cur, prop, r;
  long row = 0;
  for (long sweep = 1; sweep <= run.total_sweeps; ++sweep) {
    const bool adapting = sweep <= cfg.n_adapt;
    for (BlockAdapt& blk : run.blocks) {
      extract(state->value(), blk.sites, cur);
      r.resize(blk.d);
      for (int i = 0; i < blk.d; ++i) r[i] = rng.normal();
      prop = cur + blk.Q * r;

      const double dlp = blk.d == 1 ? state->delta(blk.sites[0], prop[0])
                                    : state->delta_block(blk.sites, prop);
      const bool accept = std::log(rng.uniform()) <= dlp;
      if (accept) {
        if (blk.d == 1)
          state->commit(blk.sites[0], prop[0]);
        else
          state->commit_block(blk.sites, prop);
      }
      if (adapting) {
        extract(state->value(), blk.sites, cur);
        blk.push(cur);
        blk.update_Q();
      } else {
        blk.proposed += 1.0;
        blk.accepted += accept ? 1.0 : 0.0;
      }
    }
    if (cfg.record_adapt_trace) chain.adapt_trace.push_back(run.blocks[0].Q(0, 0));
    if (!adapting) {
      const long post = sweep - cfg.n_adapt;
      if (post % cfg.thin == 0) chain.samples.row(row++) = state->value();
    }
  }

  finalize(chain, run, cfg);
  return chain;
}

Chain mwg_sample(const Posterior& p, const Field& u0, const SamplerConfig& cfg) {
  PosteriorTarget t(p);
  return mwg_sample(t, u0.values, cfg);
}

namespace {

// One forced stage of the repelling-attracting proposal. Repeats
// prop = anchor + Q r until log(z) <= min(0, sign*(delta(prop) - ref)), i.e.
// a downhill (sign = -1) or uphill (sign = +1) move is accepted. Falls back
// to the last proposal when the try budget runs out.
struct StageResult {
  Eigen::VectorXd v;
  double delta = 0.0;
  bool capped = false;
};

template <class DeltaFn>
StageResult ram_stage(Rng& rng, const Eigen::MatrixXd& Q, const Eigen::VectorXd& anchor,
                      double ref_delta, double sign, int max_tries, DeltaFn&& deltaf) {
  const int d = static_cast<int>(anchor.size());
  StageResult out;
  Eigen::VectorXd r(d);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    for (int i = 0; i < d; ++i) r[i] = rng.normal();
    out.v = anchor + Q * r;
    out.delta = deltaf(out.v);
    const double la = std::min(0.0, sign * (out.delta - ref_delta));
    if (std::log(rng.uniform()) <= la) return out;
  }
  out.capped = true;
  return out;
}

}  // namespace

Chain ram_sample(const Target& target, const Eigen::VectorXd& u0,
                 const SamplerConfig& cfg) {
  const int n = target.dim();
  if (u0.size() != n) throw std::invalid_argument("u0 length != target dim");
  if (cfg.repelling_max_tries < 1)
    throw std::invalid_argument("repelling_max_tries must be >= 1");
  GibbsRun run = prepare(cfg, n, 0.5);
  Rng rng(cfg.seed);
  auto state = target.make_state(u0);
  Eigen::VectorXd w = u0;  // auxiliary chain starts at the initial point

  Chain chain;
  chain.algorithm = SamplerAlgorithm::ram;
  chain.samples.resize(cfg.n_samples, n);

  Eigen::VectorXd cur, w_cur;
  long row = 0;
  for (long sweep = 1; sweep <= run.total_sweeps; ++sweep) {
    const bool adapting = sweep <= cfg.n_adapt;
    for (BlockAdapt& blk : run.blocks) {
      extract(state->value(), blk.sites, cur);
      extract(w, blk.sites, w_cur);
      auto deltaf = [&](const Eigen::VectorXd& v) {
        return blk.d == 1 ? state->delta(blk.sites[0], v[0])
                          : state->delta_block(blk.sites, v);
      };

      // Downhill from the current point, uphill from there, then an
      // auxiliary downhill stage from the candidate.
      StageResult rep =
          ram_stage(rng, blk.Q, cur, 0.0, -1.0, cfg.repelling_max_tries, deltaf);
      StageResult att = ram_stage(rng, blk.Q, rep.v, rep.delta, +1.0,
                                  cfg.repelling_max_tries, deltaf);
      StageResult aux = ram_stage(rng, blk.Q, att.v, att.delta, -1.0,
                                  cfg.repelling_max_tries, deltaf);
      if (rep.capped || att.capped || aux.capped) ++chain.ram_fallbacks;

      const double delta_wp = deltaf(w_cur);
      const double log_alpha = att.delta + std::min(0.0, -delta_wp) -
                               std::min(0.0, att.delta - aux.delta);
      const bool accept = std::log(rng.uniform()) <= log_alpha;
      if (accept) {
        if (blk.d == 1) {
          state->commit(blk.sites[0], att.v[0]);
          w[blk.sites[0]] = aux.v[0];
        } else {
          state->commit_block(blk.sites, att.v);
          for (std::size_t k = 0; k < blk.sites.size(); ++k)
            w[blk.sites[k]] = aux.v[static_cast<int>(k)];
        }
      }
      if (adapting) {
        extract(state->value(), blk.sites, cur);
        blk.push(cur);
        blk.update_Q();
      } else {
        blk.proposed += 1.0;
        blk.accepted += accept ? 1.0 : 0.0;
      }
    }
    if (cfg.record_adapt_trace) chain.adapt_trace.push_back(run.blocks[0].Q(0, 0));
    if (!adapting) {
      const long post = sweep - cfg.n_adapt;
      if (post % cfg.thin == 0) chain.samples.row(row++) = state->value();
    }
  }

  finalize(chain, run, cfg);
  return chain;
}

Chain ram_sample(const Posterior& p, const Field& u0, const SamplerConfig& cfg) {
  PosteriorTarget t(p);
  return ram_sample(t, u0.values, cfg);
}

}  // namespace cmrf

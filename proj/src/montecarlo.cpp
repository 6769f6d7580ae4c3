#include "firesale/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "firesale/network.hpp"

namespace firesale {

namespace {

struct RunOutcome {
  bool global = false;
  double failed_fraction = 0.0;
};

void check_config(const ExperimentConfig& cfg) {
  if (cfg.n_banks < 1 || cfg.n_assets < 1)
    throw std::invalid_argument("run_ensemble: n_banks and n_assets must be >= 1");
  if (!(cfg.mean_bank_degree >= 0.0) || cfg.mean_bank_degree > cfg.n_assets)
    throw std::invalid_argument("run_ensemble: mean_bank_degree must be in [0, n_assets]");
  if (!(cfg.leverage > 0.0)) throw std::invalid_argument("run_ensemble: leverage must be > 0");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("run_ensemble: alpha must be > 0");
  if (cfg.shock.kind == ShockKind::AssetDevaluation &&
      !(cfg.shock.magnitude > 0.0 && cfg.shock.magnitude <= 1.0))
    throw std::invalid_argument("run_ensemble: shock magnitude must be in (0, 1]");
  if (cfg.runs < 1) throw std::invalid_argument("run_ensemble: runs must be >= 1");
  if (!(cfg.global_threshold > 0.0 && cfg.global_threshold <= 1.0))
    throw std::invalid_argument("run_ensemble: global_threshold must be in (0, 1]");
}

RunOutcome single_run(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  auto net = gen_poisson_bipartite(cfg.n_banks, cfg.n_assets, cfg.mean_bank_degree, rng);
  auto sys = build_uniform_system(std::move(net), cfg.leverage, cfg.alpha);
  Shock shock;
  shock.kind = cfg.shock.kind;
  shock.magnitude = cfg.shock.magnitude;
  const std::uint64_t domain = shock.kind == ShockKind::AssetDevaluation
                                   ? static_cast<std::uint64_t>(cfg.n_assets)
                                   : static_cast<std::uint64_t>(cfg.n_banks);
  shock.target = static_cast<int>(uniform_below(rng, domain));
  const auto result = run_cascade(sys, shock, cfg.global_threshold);
  return {result.is_global, result.failed_fraction};
}

}  // namespace

EnsembleStats run_ensemble(const ExperimentConfig& cfg) {
  check_config(cfg);
  std::vector<RunOutcome> outcomes(cfg.runs);

  const int workers = std::max(1, cfg.threads);
  if (workers == 1) {
    for (int r = 0; r < cfg.runs; ++r)
      outcomes[r] = single_run(cfg, derive_seed(cfg.base_seed, {static_cast<std::uint64_t>(r)}));
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < cfg.runs; r = next.fetch_add(1))
          outcomes[r] =
              single_run(cfg, derive_seed(cfg.base_seed, {static_cast<std::uint64_t>(r)}));
      });
    }
    for (auto& th : pool) th.join();
  }

  // Aggregated in run order: identical output for any worker count.
  EnsembleStats stats;
  double extent_sum = 0.0;
  for (const auto& o : outcomes) {
    if (!o.global) continue;
    ++stats.conditional_extent_count;
    extent_sum += o.failed_fraction;
  }
  const double p = static_cast<double>(stats.conditional_extent_count) / cfg.runs;
  stats.contagion_probability = p;
  stats.probability_stderr = std::sqrt(p * (1.0 - p) / cfg.runs);
  stats.conditional_extent_mean =
      stats.conditional_extent_count > 0 ? extent_sum / stats.conditional_extent_count : 0.0;
  return stats;
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::MeanBankDegree: return "mean_bank_degree";
    case SweepAxis::Leverage: return "leverage";
    case SweepAxis::Alpha: return "alpha";
    case SweepAxis::Crowding: return "crowding";
  }
  return "?";
}

std::optional<SweepAxis> axis_from_name(const std::string& name) {
  if (name == "mean_bank_degree") return SweepAxis::MeanBankDegree;
  if (name == "leverage") return SweepAxis::Leverage;
  if (name == "alpha") return SweepAxis::Alpha;
  if (name == "crowding") return SweepAxis::Crowding;
  return std::nullopt;
}

namespace {

ExperimentConfig at_axis_value(const ExperimentConfig& cfg, SweepAxis axis, double value) {
  ExperimentConfig point = cfg;
  switch (axis) {
    case SweepAxis::MeanBankDegree:
      point.mean_bank_degree = value;
      break;
    case SweepAxis::Leverage:
      point.leverage = value;
      break;
    case SweepAxis::Alpha:
      point.alpha = value;
      break;
    case SweepAxis::Crowding: {
      if (!(value > 0.0)) throw std::invalid_argument("sweep: crowding values must be > 0");
      const long m = std::lround(cfg.n_banks / value);
      if (m < 1) throw std::invalid_argument("sweep: crowding value leaves no assets");
      point.n_assets = static_cast<int>(m);
      break;
    }
  }
  return point;
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, SweepAxis axis,
                            const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
  std::vector<SweepRow> table;
  table.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow row;
    row.axis = axis;
    row.value = values[i];
    row.cfg = at_axis_value(cfg, axis, values[i]);
    row.cfg.base_seed = derive_seed(cfg.base_seed, {static_cast<std::uint64_t>(i)});
    row.stats = run_ensemble(row.cfg);
    table.push_back(std::move(row));
  }
  return table;
}

std::optional<std::pair<double, double>> estimate_transition(
    const std::vector<SweepRow>& table, double noise_sigmas) {
  std::optional<double> first, last;
  for (const auto& row : table) {
    if (row.stats.contagion_probability > noise_sigmas * row.stats.probability_stderr &&
        row.stats.contagion_probability > 0.0) {
      if (!first) first = row.value;
      last = row.value;
    }
  }
  if (!first) return std::nullopt;
  return std::make_pair(*first, *last);
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& table) {
  out << "axis,value,mu_b,n,lambda,alpha,shock_kind,runs,p_contagion,p_stderr,"
         "cond_extent,cond_count,base_seed\n";
  for (const auto& row : table) {
    const auto& cfg = row.cfg;
    const double n = static_cast<double>(cfg.n_banks) / cfg.n_assets;
    out << axis_name(row.axis) << ',' << format_double(row.value) << ','
        << format_double(cfg.mean_bank_degree) << ',' << format_double(n) << ','
        << format_double(cfg.leverage) << ',' << format_double(cfg.alpha) << ','
        << (cfg.shock.kind == ShockKind::AssetDevaluation ? "asset" : "bank") << ','
        << cfg.runs << ',' << format_double(row.stats.contagion_probability) << ','
        << format_double(row.stats.probability_stderr) << ','
        << format_double(row.stats.conditional_extent_mean) << ','
        << row.stats.conditional_extent_count << ',' << cfg.base_seed << '\n';
  }
}

}  // namespace firesale

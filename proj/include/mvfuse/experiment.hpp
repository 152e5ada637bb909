#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "mvfuse/analysis.hpp"
#include "mvfuse/baselines.hpp"
#include "mvfuse/errors.hpp"
#include "mvfuse/fusion_global.hpp"
#include "mvfuse/fusion_local.hpp"
#include "mvfuse/io.hpp"
#include "mvfuse/kernel.hpp"
#include "mvfuse/metrics.hpp"
#include "mvfuse/partition.hpp"
#include "mvfuse/rng.hpp"

namespace mvfuse {

enum class Algorithm { AMkkm, SbKkm, Mkkm, LfGam, LfLam };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::AMkkm: return "a_mkkm";
    case Algorithm::SbKkm: return "sb_kkm";
    case Algorithm::Mkkm: return "mkkm";
    case Algorithm::LfGam: return "lf_gam";
    case Algorithm::LfLam: return "lf_lam";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& name) {
  if (name == "a_mkkm") return Algorithm::AMkkm;
  if (name == "sb_kkm") return Algorithm::SbKkm;
  if (name == "mkkm") return Algorithm::Mkkm;
  if (name == "lf_gam") return Algorithm::LfGam;
  if (name == "lf_lam") return Algorithm::LfLam;
  throw Error(ErrorCode::ConfigError,
              "unknown algorithm '" + name +
                  "' (expected a_mkkm, sb_kkm, mkkm, lf_gam or lf_lam)");
}

inline std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int e = -5; e <= 5; ++e) grid.push_back(std::ldexp(1.0, e));
  return grid;
}

struct ExperimentConfig {
  std::vector<std::string> feature_files;
  std::vector<std::string> kernel_files;
  std::string label_file;
  std::vector<KernelSpec> kernel_specs;  // one per feature view, or one broadcast to all
  std::string algorithm = "lf_lam";
  std::vector<double> lambda_grid = default_lambda_grid();
  std::vector<double> tau_fraction_grid = {0.5};
  int restarts = 50;
  double eps0 = 1e-4;
  int max_iter = 100;
  std::uint64_t seed = 0;
  bool preprocess = true;
  bool retain_iterates = false;
  bool row_normalize = true;
};

// grid and solver parameters only; file-related checks live in
// validate_experiment_config so in-memory runs need no paths
inline void validate_solver_config(const ExperimentConfig& config) {
  const Algorithm alg = parse_algorithm(config.algorithm);
  if (config.restarts < 1) throw Error(ErrorCode::ConfigError, "restarts must be >= 1");
  if (!(config.eps0 > 0.0)) throw Error(ErrorCode::ConfigError, "eps0 must be > 0");
  if (config.max_iter < 1) throw Error(ErrorCode::ConfigError, "max_iter must be >= 1");
  if (alg == Algorithm::LfGam || alg == Algorithm::LfLam) {
    if (config.lambda_grid.empty()) throw Error(ErrorCode::ConfigError, "lambda_grid is empty");
    for (const double v : config.lambda_grid)
      if (!(v >= 0.0)) throw Error(ErrorCode::ConfigError, "lambda values must be >= 0");
  }
  if (alg == Algorithm::LfLam) {
    if (config.tau_fraction_grid.empty())
      throw Error(ErrorCode::ConfigError, "tau_fraction_grid is empty");
    for (const double v : config.tau_fraction_grid)
      if (!(v > 0.0 && v <= 1.0))
        throw Error(ErrorCode::ConfigError, "tau fractions must be in (0, 1]");
  }
}

inline void validate_experiment_config(const ExperimentConfig& config) {
  validate_solver_config(config);
  if (config.feature_files.empty() == config.kernel_files.empty())
    throw Error(ErrorCode::ConfigError,
                "exactly one of feature_files and kernel_files must be given");
  if (config.label_file.empty()) throw Error(ErrorCode::ConfigError, "label_file is required");
  if (!config.feature_files.empty()) {
    if (config.kernel_specs.empty())
      throw Error(ErrorCode::ConfigError, "kernel_specs required with feature_files");
    if (config.kernel_specs.size() != 1 &&
        config.kernel_specs.size() != config.feature_files.size())
      throw Error(ErrorCode::ConfigError, "kernel_specs must have one entry or one per view");
    for (const KernelSpec& spec : config.kernel_specs) validate_kernel_spec(spec);
  }
}

namespace detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

template <typename T>
T json_get(const json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "bad value for '" + key + "': " + e.what());
  }
}

inline void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const std::string& key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw Error(ErrorCode::ConfigError, "unknown key '" + item.key() + "' in " + where);
  }
}

inline KernelSpec kernel_spec_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "kernel spec must be an object");
  reject_unknown_keys(j, {"kind", "degree", "sigma", "gamma", "theta"}, "kernel spec");
  if (!j.contains("kind")) throw Error(ErrorCode::ConfigError, "kernel spec needs a 'kind'");
  KernelSpec spec;
  spec.kind = parse_kernel_kind(json_get<std::string>(j, "kind", ""));
  spec.degree = json_get<int>(j, "degree", spec.degree);
  spec.sigma = json_get<double>(j, "sigma", spec.sigma);
  spec.gamma = json_get<double>(j, "gamma", spec.gamma);
  spec.theta = json_get<double>(j, "theta", spec.theta);
  validate_kernel_spec(spec);
  return spec;
}

inline ordered_json kernel_spec_to_json(const KernelSpec& spec) {
  ordered_json j;
  j["kind"] = kernel_kind_name(spec.kind);
  j["degree"] = spec.degree;
  j["sigma"] = spec.sigma;
  j["gamma"] = spec.gamma;
  j["theta"] = spec.theta;
  return j;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::json_get;
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config root must be an object");
  detail::reject_unknown_keys(
      j,
      {"feature_files", "kernel_files", "label_file", "kernel_specs", "algorithm", "lambda_grid",
       "tau_fraction_grid", "restarts", "eps0", "max_iter", "seed", "preprocess",
       "retain_iterates", "row_normalize"},
      "config");
  ExperimentConfig config;
  config.feature_files = json_get(j, "feature_files", config.feature_files);
  config.kernel_files = json_get(j, "kernel_files", config.kernel_files);
  config.label_file = json_get(j, "label_file", config.label_file);
  if (j.contains("kernel_specs")) {
    if (!j.at("kernel_specs").is_array())
      throw Error(ErrorCode::ConfigError, "kernel_specs must be an array");
    for (const auto& item : j.at("kernel_specs"))
      config.kernel_specs.push_back(detail::kernel_spec_from_json(item));
  }
  config.algorithm = json_get(j, "algorithm", config.algorithm);
  config.lambda_grid = json_get(j, "lambda_grid", config.lambda_grid);
  config.tau_fraction_grid = json_get(j, "tau_fraction_grid", config.tau_fraction_grid);
  config.restarts = json_get(j, "restarts", config.restarts);
  config.eps0 = json_get(j, "eps0", config.eps0);
  config.max_iter = json_get(j, "max_iter", config.max_iter);
  config.seed = json_get(j, "seed", config.seed);
  config.preprocess = json_get(j, "preprocess", config.preprocess);
  config.retain_iterates = json_get(j, "retain_iterates", config.retain_iterates);
  config.row_normalize = json_get(j, "row_normalize", config.row_normalize);
  validate_experiment_config(config);
  return config;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
  return config_from_json(j);
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["feature_files"] = config.feature_files;
  j["kernel_files"] = config.kernel_files;
  j["label_file"] = config.label_file;
  j["kernel_specs"] = nlohmann::ordered_json::array();
  for (const KernelSpec& spec : config.kernel_specs)
    j["kernel_specs"].push_back(detail::kernel_spec_to_json(spec));
  j["algorithm"] = config.algorithm;
  j["lambda_grid"] = config.lambda_grid;
  j["tau_fraction_grid"] = config.tau_fraction_grid;
  j["restarts"] = config.restarts;
  j["eps0"] = config.eps0;
  j["max_iter"] = config.max_iter;
  j["seed"] = config.seed;
  j["preprocess"] = config.preprocess;
  j["retain_iterates"] = config.retain_iterates;
  j["row_normalize"] = config.row_normalize;
  return j;
}

struct Dataset {
  std::vector<KernelMatrix> kernels;
  ClusterLabels truth;
  int k = 0;
};

inline int classes_in(const ClusterLabels& truth) {
  int max_label = -1;
  for (const int label : truth) {
    if (label < 0) throw Error(ErrorCode::InvalidInput, "labels must be nonnegative");
    max_label = std::max(max_label, label);
  }
  if (max_label < 1) throw Error(ErrorCode::InvalidInput, "need at least two classes");
  return max_label + 1;
}

inline Dataset load_dataset(const ExperimentConfig& config) {
  Dataset data;
  if (!config.kernel_files.empty()) {
    for (std::size_t p = 0; p < config.kernel_files.size(); ++p) {
      Matrix raw = read_kernel_file(config.kernel_files[p]);
      data.kernels.push_back(validate_and_symmetrize(raw, static_cast<int>(p)));
    }
  } else {
    for (std::size_t p = 0; p < config.feature_files.size(); ++p) {
      FeatureView view{read_matrix_csv(config.feature_files[p]), static_cast<int>(p)};
      const KernelSpec& spec =
          config.kernel_specs.size() == 1 ? config.kernel_specs[0] : config.kernel_specs[p];
      data.kernels.push_back(compute_kernel(view, spec));
    }
  }
  const Eigen::Index n = data.kernels[0].n();
  for (const KernelMatrix& kernel : data.kernels)
    if (kernel.n() != n) throw Error(ErrorCode::InconsistentViews, "kernel sizes differ");
  data.truth = read_labels_csv(config.label_file);
  if (static_cast<Eigen::Index>(data.truth.size()) != n)
    throw Error(ErrorCode::InconsistentViews,
                "label count " + std::to_string(data.truth.size()) + " does not match n=" +
                    std::to_string(n));
  data.k = classes_in(data.truth);
  if (data.k > n) throw Error(ErrorCode::InvalidInput, "more classes than samples");
  if (config.preprocess)
    for (KernelMatrix& kernel : data.kernels) kernel = preprocess_kernel(kernel);
  return data;
}

struct CellRecord {
  std::size_t index = 0;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double tau_fraction = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t restart_seed = 0;
  double acc = std::numeric_limits<double>::quiet_NaN();
  double nmi = std::numeric_limits<double>::quiet_NaN();
  double purity = std::numeric_limits<double>::quiet_NaN();
  double objective_final = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double wall_time_ms = 0.0;
  std::string error;  // empty when the cell succeeded

  bool ok() const { return error.empty(); }
};

struct RunSummary {
  long long best_by_acc = -1;        // cell index, -1 when every cell failed
  long long best_by_objective = -1;  // direction depends on the algorithm
  double mean_acc = 0.0, std_acc = 0.0;
  double mean_nmi = 0.0, std_nmi = 0.0;
  double mean_purity = 0.0, std_purity = 0.0;
  std::size_t cells_total = 0;
  std::size_t cells_failed = 0;
};

// optimizer trajectory shared by every restart cell of one (lambda, tau) pair
struct ComboTrace {
  std::size_t first_cell = 0;
  std::vector<double> objective;
  std::vector<GapTraceEntry> gaps;  // empty unless iterates were retained
};

struct RunRecord {
  ExperimentConfig config;
  Eigen::Index n = 0;
  int m = 0;
  int k = 0;
  bool objective_maximized = true;
  std::vector<CellRecord> cells;
  std::vector<ComboTrace> traces;
  RunSummary summary;

  bool all_failed() const {
    for (const CellRecord& cell : cells)
      if (cell.ok()) return false;
    return true;
  }
};

namespace detail {

inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads < 1) threads = 1;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (std::thread& t : pool) t.join();
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

inline void fill_summary(RunRecord& rec) {
  RunSummary& s = rec.summary;
  s.cells_total = rec.cells.size();
  s.cells_failed = 0;
  double sum_acc = 0, sum_nmi = 0, sum_pur = 0;
  std::size_t good = 0;
  for (const CellRecord& cell : rec.cells) {
    if (!cell.ok()) {
      ++s.cells_failed;
      continue;
    }
    ++good;
    sum_acc += cell.acc;
    sum_nmi += cell.nmi;
    sum_pur += cell.purity;
    if (s.best_by_acc < 0 || cell.acc > rec.cells[static_cast<std::size_t>(s.best_by_acc)].acc)
      s.best_by_acc = static_cast<long long>(cell.index);
    const bool better =
        s.best_by_objective < 0 ||
        (rec.objective_maximized
             ? cell.objective_final >
                   rec.cells[static_cast<std::size_t>(s.best_by_objective)].objective_final
             : cell.objective_final <
                   rec.cells[static_cast<std::size_t>(s.best_by_objective)].objective_final);
    if (better) s.best_by_objective = static_cast<long long>(cell.index);
  }
  if (good == 0) return;
  const double count = static_cast<double>(good);
  s.mean_acc = sum_acc / count;
  s.mean_nmi = sum_nmi / count;
  s.mean_purity = sum_pur / count;
  double var_acc = 0, var_nmi = 0, var_pur = 0;
  for (const CellRecord& cell : rec.cells) {
    if (!cell.ok()) continue;
    var_acc += (cell.acc - s.mean_acc) * (cell.acc - s.mean_acc);
    var_nmi += (cell.nmi - s.mean_nmi) * (cell.nmi - s.mean_nmi);
    var_pur += (cell.purity - s.mean_purity) * (cell.purity - s.mean_purity);
  }
  s.std_acc = std::sqrt(var_acc / count);
  s.std_nmi = std::sqrt(var_nmi / count);
  s.std_purity = std::sqrt(var_pur / count);
}

}  // namespace detail

// grid runner; cell index ((i_lambda * n_tau) + i_tau) * restarts + r seeds
// every cell independently of thread count, so outputs are reproducible
inline RunRecord run_experiment_on(const ExperimentConfig& config,
                                   const std::vector<KernelMatrix>& kernels,
                                   const ClusterLabels& truth, int threads = 1) {
  validate_solver_config(config);
  if (kernels.empty()) throw Error(ErrorCode::InvalidInput, "no kernels");
  const Eigen::Index n = kernels[0].n();
  for (const KernelMatrix& kernel : kernels)
    if (kernel.n() != n) throw Error(ErrorCode::InconsistentViews, "kernel sizes differ");
  if (static_cast<Eigen::Index>(truth.size()) != n)
    throw Error(ErrorCode::InconsistentViews, "label count does not match kernel size");
  const int k = classes_in(truth);
  if (k > n) throw Error(ErrorCode::InvalidInput, "more classes than samples");

  const Algorithm alg = parse_algorithm(config.algorithm);
  const bool is_fusion = alg == Algorithm::LfGam || alg == Algorithm::LfLam;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> lambdas = is_fusion ? config.lambda_grid : std::vector<double>{nan};
  const std::vector<double> taus =
      alg == Algorithm::LfLam ? config.tau_fraction_grid : std::vector<double>{nan};
  const std::size_t n_combos = lambdas.size() * taus.size();
  const std::size_t restarts = static_cast<std::size_t>(config.restarts);

  RunRecord rec;
  rec.config = config;
  rec.n = n;
  rec.m = static_cast<int>(kernels.size());
  rec.k = k;
  rec.objective_maximized = is_fusion;
  rec.cells.resize(n_combos * restarts);
  for (std::size_t c = 0; c < n_combos; ++c) {
    const std::size_t i_lambda = c / taus.size();
    const std::size_t i_tau = c % taus.size();
    for (std::size_t r = 0; r < restarts; ++r) {
      CellRecord& cell = rec.cells[c * restarts + r];
      cell.index = c * restarts + r;
      cell.lambda = lambdas[i_lambda];
      cell.tau_fraction = taus[i_tau];
      cell.restart_seed = derive_seed(config.seed, cell.index);
    }
  }

  struct Shared {
    std::vector<Partition> base;
    Partition regularizer;
    Partition average;
    MkkmState mkkm_state;
    std::vector<LocalAggregates> per_tau;
  } shared;

  auto fail_all = [&](const std::string& message) {
    for (CellRecord& cell : rec.cells)
      if (cell.error.empty()) cell.error = message;
    detail::fill_summary(rec);
  };

  try {
    switch (alg) {
      case Algorithm::AMkkm:
        shared.average = top_k_eigvecs(average_kernel(kernels), k);
        break;
      case Algorithm::SbKkm:
        shared.base = base_partitions(kernels, k);
        break;
      case Algorithm::Mkkm:
        shared.mkkm_state = mkkm(kernels, k, config.eps0, config.max_iter);
        break;
      case Algorithm::LfGam:
        shared.base = base_partitions(kernels, k);
        shared.regularizer = regularizer_partition(kernels, k);
        break;
      case Algorithm::LfLam:
        shared.base = base_partitions(kernels, k);
        shared.regularizer = regularizer_partition(kernels, k);
        for (const double fraction : taus)
          shared.per_tau.push_back(
              build_local_aggregates(kernels, shared.regularizer, tau_from_fraction(fraction, n)));
        break;
    }
  } catch (const std::exception& e) {
    fail_all(e.what());
    return rec;
  }

  struct ComboResult {
    FusionResult fusion;
    double solve_ms = 0.0;
    std::string error;
  };
  std::vector<ComboResult> combos(n_combos);
  if (is_fusion) {
    detail::parallel_for(n_combos, threads, [&](std::size_t c) {
      const std::size_t i_lambda = c / taus.size();
      const std::size_t i_tau = c % taus.size();
      const auto start = std::chrono::steady_clock::now();
      try {
        if (alg == Algorithm::LfGam)
          combos[c].fusion =
              lf_mvc_gam(shared.base, shared.regularizer, lambdas[i_lambda], config.eps0,
                         config.max_iter, config.retain_iterates);
        else
          combos[c].fusion =
              lf_mvc_lam_with(shared.base, shared.per_tau[i_tau], lambdas[i_lambda], config.eps0,
                              config.max_iter, config.retain_iterates);
      } catch (const std::exception& e) {
        combos[c].error = e.what();
      }
      combos[c].solve_ms = detail::elapsed_ms(start);
    });
  }

  detail::parallel_for(rec.cells.size(), threads, [&](std::size_t idx) {
    CellRecord& cell = rec.cells[idx];
    const std::size_t c = idx / restarts;
    if (is_fusion && !combos[c].error.empty()) {
      cell.error = combos[c].error;
      return;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      ClusterLabels labels;
      switch (alg) {
        case Algorithm::AMkkm: {
          auto rounded =
              lloyd_round(shared.average, k, 1, cell.restart_seed, config.row_normalize);
          labels = std::move(rounded.first);
          cell.objective_final = rounded.second;
          break;
        }
        case Algorithm::SbKkm: {
          SbKkmResult res = sb_kkm_from_partitions(shared.base, k, truth, 1, cell.restart_seed);
          const SbKkmViewResult& best =
              res.per_view[static_cast<std::size_t>(res.best_view)];
          cell.acc = best.acc;
          cell.nmi = best.nmi;
          cell.purity = best.purity;
          cell.objective_final = best.inertia;
          cell.wall_time_ms = detail::elapsed_ms(start);
          return;
        }
        case Algorithm::Mkkm: {
          labels =
              lloyd_round(shared.mkkm_state.h, k, 1, cell.restart_seed, config.row_normalize)
                  .first;
          cell.objective_final = shared.mkkm_state.objective_trace.back();
          cell.iterations = shared.mkkm_state.iterations;
          break;
        }
        case Algorithm::LfGam:
        case Algorithm::LfLam: {
          const FusionResult& fusion = combos[c].fusion;
          labels = lloyd_round(fusion.f, k, 1, cell.restart_seed, config.row_normalize).first;
          cell.objective_final = fusion.objective_trace.back();
          cell.iterations = fusion.iterations;
          break;
        }
      }
      cell.acc = accuracy(labels, truth);
      cell.nmi = nmi(labels, truth);
      cell.purity = purity(labels, truth);
      cell.wall_time_ms = detail::elapsed_ms(start) +
                          (is_fusion ? combos[c].solve_ms / static_cast<double>(restarts) : 0.0);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });

  if (is_fusion && config.retain_iterates) {
    for (std::size_t c = 0; c < n_combos; ++c) {
      if (!combos[c].error.empty()) continue;
      ComboTrace trace;
      trace.first_cell = c * restarts;
      trace.objective = combos[c].fusion.objective_trace;
      const std::size_t i_lambda = c / taus.size();
      trace.gaps =
          gap_trace(combos[c].fusion, shared.base, shared.regularizer, lambdas[i_lambda]).entries;
      rec.traces.push_back(std::move(trace));
    }
  } else if (is_fusion) {
    for (std::size_t c = 0; c < n_combos; ++c) {
      if (!combos[c].error.empty()) continue;
      ComboTrace trace;
      trace.first_cell = c * restarts;
      trace.objective = combos[c].fusion.objective_trace;
      rec.traces.push_back(std::move(trace));
    }
  } else if (alg == Algorithm::Mkkm && !rec.all_failed()) {
    ComboTrace trace;
    trace.first_cell = 0;
    trace.objective = shared.mkkm_state.objective_trace;
    rec.traces.push_back(std::move(trace));
  }

  detail::fill_summary(rec);
  return rec;
}

inline RunRecord run_experiment(const ExperimentConfig& config, int threads = 1) {
  Dataset data = load_dataset(config);
  return run_experiment_on(config, data.kernels, data.truth, threads);
}

namespace detail {

inline std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (const char ch : raw) {
    if (ch == '"') quoted += "\"\"";
    else quoted += ch;
  }
  quoted += '"';
  return quoted;
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  return format_double(v);
}

}  // namespace detail

// writes results.json, cells.csv and one trace_<first cell>.csv per retained
// optimizer trajectory; results.json holds no timings so repeat runs match byte
// for byte
inline void emit_results(const RunRecord& rec, const std::string& out_dir) {
  if (rec.cells.empty())
    throw Error(ErrorCode::InvalidInput, "refusing to emit results for an empty grid");
  std::filesystem::create_directories(out_dir);

  nlohmann::ordered_json root;
  root["config"] = config_to_json(rec.config);
  root["data"] = {{"n", rec.n}, {"views", rec.m}, {"classes", rec.k}};
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const CellRecord& cell : rec.cells) {
    nlohmann::ordered_json c;
    c["index"] = cell.index;
    c["lambda"] = cell.lambda;  // NaN serializes as null for non-fusion algorithms
    c["tau_fraction"] = cell.tau_fraction;
    c["restart_seed"] = cell.restart_seed;
    c["acc"] = cell.acc;
    c["nmi"] = cell.nmi;
    c["purity"] = cell.purity;
    c["objective_final"] = cell.objective_final;
    c["iterations"] = cell.iterations;
    c["error"] = cell.error;
    cells.push_back(std::move(c));
  }
  root["cells"] = std::move(cells);
  nlohmann::ordered_json summary;
  summary["best_by_acc"] = rec.summary.best_by_acc;
  summary["best_by_objective"] = rec.summary.best_by_objective;
  summary["mean_acc"] = rec.summary.mean_acc;
  summary["std_acc"] = rec.summary.std_acc;
  summary["mean_nmi"] = rec.summary.mean_nmi;
  summary["std_nmi"] = rec.summary.std_nmi;
  summary["mean_purity"] = rec.summary.mean_purity;
  summary["std_purity"] = rec.summary.std_purity;
  summary["cells_total"] = rec.summary.cells_total;
  summary["cells_failed"] = rec.summary.cells_failed;
  root["summary"] = std::move(summary);
  root["metadata"] = {{"nmi_normalization", "sqrt"},
                      {"std_convention", "population"},
                      {"objective_direction", rec.objective_maximized ? "max" : "min"}};

  {
    std::ofstream out(out_dir + "/results.json");
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_dir + "/results.json");
    out << root.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for results.json");
  }

  {
    std::ofstream out(out_dir + "/cells.csv");
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_dir + "/cells.csv");
    out << "index,lambda,tau_fraction,restart_seed,acc,nmi,purity,objective_final,iterations,"
           "wall_time_ms,error\n";
    for (const CellRecord& cell : rec.cells) {
      out << cell.index << ',' << detail::csv_number(cell.lambda) << ','
          << detail::csv_number(cell.tau_fraction) << ',' << cell.restart_seed << ','
          << detail::csv_number(cell.acc) << ',' << detail::csv_number(cell.nmi) << ','
          << detail::csv_number(cell.purity) << ',' << detail::csv_number(cell.objective_final)
          << ',' << cell.iterations << ',' << detail::csv_number(cell.wall_time_ms) << ','
          << detail::csv_field(cell.error) << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for cells.csv");
  }

  for (const ComboTrace& trace : rec.traces) {
    const std::string path = out_dir + "/trace_" + std::to_string(trace.first_cell) + ".csv";
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "iteration,objective,obj1,obj2,obj3\n";
    for (std::size_t t = 0; t < trace.objective.size(); ++t) {
      out << t << ',' << detail::format_double(trace.objective[t]);
      if (t < trace.gaps.size())
        out << ',' << detail::format_double(trace.gaps[t].obj1) << ','
            << detail::format_double(trace.gaps[t].obj2) << ','
            << detail::format_double(trace.gaps[t].obj3);
      else
        out << ",,,";
      out << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
  }
}

}  // namespace mvfuse

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mvfuse/mvfuse.hpp"

namespace {

// 2 config trouble, 3 data trouble, 4 solver trouble
int exit_code_for(mvfuse::ErrorCode code) {
  using mvfuse::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidTau:
    case ErrorCode::InvalidDelta:
      return 2;
    case ErrorCode::IoError:
    case ErrorCode::TruncatedFile:
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidShape:
    case ErrorCode::InvalidK:
    case ErrorCode::AsymmetricInput:
    case ErrorCode::DegenerateDiagonal:
    case ErrorCode::InconsistentViews:
      return 3;
    default:
      return 4;
  }
}

struct KernelsArgs {
  std::vector<std::string> features;
  std::string kind = "gaussian";
  int degree = 2;
  double sigma = 1.0;
  double gamma = 1.0;
  double theta = -1.0;
  bool preprocess = false;
  bool binary = false;
  std::string out = "kernels";
};

int run_kernels(const KernelsArgs& args) {
  mvfuse::KernelSpec spec;
  spec.kind = mvfuse::parse_kernel_kind(args.kind);
  spec.degree = args.degree;
  spec.sigma = args.sigma;
  spec.gamma = args.gamma;
  spec.theta = args.theta;
  mvfuse::validate_kernel_spec(spec);
  std::filesystem::create_directories(args.out);
  for (std::size_t p = 0; p < args.features.size(); ++p) {
    mvfuse::FeatureView view{mvfuse::read_matrix_csv(args.features[p]), static_cast<int>(p)};
    mvfuse::KernelMatrix kernel = mvfuse::compute_kernel(view, spec);
    if (args.preprocess) kernel = mvfuse::preprocess_kernel(kernel);
    const std::string path =
        args.out + "/kernel_" + std::to_string(p) + (args.binary ? ".bin" : ".csv");
    if (args.binary)
      mvfuse::write_kernel_binary(path, kernel.values);
    else
      mvfuse::write_matrix_csv(path, kernel.values);
    std::printf("wrote %s (n=%lld)\n", path.c_str(), static_cast<long long>(kernel.n()));
  }
  return 0;
}

struct RunArgs {
  std::string config_path;
  std::string out = "results";
  int threads = 1;
  // overrides, applied only when the flag was passed
  std::string algorithm;
  std::vector<double> lambda_grid;
  std::vector<double> tau_grid;
  int restarts = 0;
  double eps0 = 0.0;
  int max_iter = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool retain_iterates = false;
  bool no_preprocess = false;
};

int run_run(const RunArgs& args) {
  mvfuse::ExperimentConfig config = mvfuse::load_experiment_config(args.config_path);
  if (!args.algorithm.empty()) config.algorithm = args.algorithm;
  if (!args.lambda_grid.empty()) config.lambda_grid = args.lambda_grid;
  if (!args.tau_grid.empty()) config.tau_fraction_grid = args.tau_grid;
  if (args.restarts > 0) config.restarts = args.restarts;
  if (args.eps0 > 0.0) config.eps0 = args.eps0;
  if (args.max_iter > 0) config.max_iter = args.max_iter;
  if (args.seed_set) config.seed = args.seed;
  if (args.retain_iterates) config.retain_iterates = true;
  if (args.no_preprocess) config.preprocess = false;
  mvfuse::validate_experiment_config(config);

  mvfuse::RunRecord rec = mvfuse::run_experiment(config, args.threads);
  mvfuse::emit_results(rec, args.out);
  if (rec.all_failed()) {
    std::fprintf(stderr, "all %zu cells failed; first error: %s\n", rec.cells.size(),
                 rec.cells.front().error.c_str());
    return 4;
  }
  std::printf("algorithm=%s n=%lld views=%d classes=%d cells=%zu failed=%zu\n",
              config.algorithm.c_str(), static_cast<long long>(rec.n), rec.m, rec.k,
              rec.summary.cells_total, rec.summary.cells_failed);
  if (rec.summary.best_by_acc >= 0) {
    const mvfuse::CellRecord& best =
        rec.cells[static_cast<std::size_t>(rec.summary.best_by_acc)];
    std::printf("best-by-acc cell=%zu acc=%.4f nmi=%.4f purity=%.4f\n", best.index, best.acc,
                best.nmi, best.purity);
  }
  std::printf("mean acc=%.4f (std %.4f), nmi=%.4f (std %.4f), purity=%.4f (std %.4f)\n",
              rec.summary.mean_acc, rec.summary.std_acc, rec.summary.mean_nmi,
              rec.summary.std_nmi, rec.summary.mean_purity, rec.summary.std_purity);
  std::printf("results in %s\n", args.out.c_str());
  return 0;
}

struct SynthArgs {
  int n = 300;
  int k = 3;
  int m = 3;
  bool noise_view = false;
  std::uint64_t seed = 0;
  double separation = 6.0;
  double noise_std = 1.0;
  std::string out = "synth";
};

int run_synth(const SynthArgs& args) {
  mvfuse::SyntheticDataset data = mvfuse::make_synthetic(
      args.out, args.n, args.k, args.m, args.noise_view, args.seed, args.separation,
      args.noise_std);
  std::printf("wrote %zu views and labels for n=%d k=%d to %s\n", data.views.size(), args.n,
              args.k, args.out.c_str());
  return 0;
}

struct BoundArgs {
  long long n = 1000;
  int m = 3;
  int k = 5;
  double delta = 0.05;
  double lambda = 1.0;
};

int run_bound(const BoundArgs& args) {
  const double gen = mvfuse::generalization_bound(args.n, args.m, args.k, args.delta);
  const double cap = mvfuse::theorem4_bound(args.m, args.k, args.lambda);
  std::printf("excess clustering risk bound (n=%lld, m=%d, k=%d, delta=%g): %.17g\n", args.n,
              args.m, args.k, args.delta, gen);
  std::printf("alignment objective cap (m=%d, k=%d, lambda=%g): %.17g\n", args.m, args.k,
              args.lambda, cap);
  return 0;
}

struct BenchArgs {
  std::vector<long long> sizes = {500, 1000, 2000, 4000};
  int m = 3;
  int k = 5;
  int iters = 20;
  int repeats = 5;
  std::uint64_t seed = 0;
};

// times the alternating loop itself on synthetic orthonormal partitions; the
// spectral preprocessing is deliberately excluded
int run_bench(const BenchArgs& args) {
  std::vector<double> per_iter_ms;
  for (const long long n : args.sizes) {
    mvfuse::Rng rng(mvfuse::derive_seed(args.seed, static_cast<std::uint64_t>(n)));
    std::vector<mvfuse::Partition> partitions;
    for (int p = 0; p < args.m; ++p)
      partitions.push_back(mvfuse::Partition{
          mvfuse::random_orthonormal(static_cast<Eigen::Index>(n), args.k, rng),
          mvfuse::PartitionKind::Base});
    mvfuse::Partition reg{
        mvfuse::random_orthonormal(static_cast<Eigen::Index>(n), args.k, rng),
        mvfuse::PartitionKind::Regularizer};
    double best_ms = 0.0;
    for (int rep = 0; rep < args.repeats; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      // eps0 small enough that the loop always runs max_iter iterations
      mvfuse::FusionResult res =
          mvfuse::lf_mvc_gam(partitions, reg, 1.0, 1e-300, args.iters, false);
      const double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count() /
                        static_cast<double>(res.iterations);
      if (rep == 0 || ms < best_ms) best_ms = ms;
    }
    per_iter_ms.push_back(best_ms);
    std::printf("n=%lld  per-iteration %.4f ms\n", n, best_ms);
  }
  // least squares of time on n, plus R^2 of the linear fit
  const std::size_t count = args.sizes.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < count; ++i) {
    sx += static_cast<double>(args.sizes[i]);
    sy += per_iter_ms[i];
    sxx += static_cast<double>(args.sizes[i]) * static_cast<double>(args.sizes[i]);
    sxy += static_cast<double>(args.sizes[i]) * per_iter_ms[i];
  }
  const double denom = count * sxx - sx * sx;
  const double slope = (count * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / count;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double fit = slope * static_cast<double>(args.sizes[i]) + intercept;
    ss_res += (per_iter_ms[i] - fit) * (per_iter_ms[i] - fit);
    ss_tot += (per_iter_ms[i] - sy / count) * (per_iter_ms[i] - sy / count);
  }
  const double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  std::printf("linear fit: %.6f ms per sample per iteration, intercept %.4f ms, R^2=%.4f\n",
              slope, intercept, r2);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view kernel clustering via late-fusion alignment"};
  app.require_subcommand(1);

  KernelsArgs kargs;
  CLI::App* kernels = app.add_subcommand("kernels", "build kernel matrices from feature CSVs");
  kernels->add_option("--features", kargs.features, "feature CSV files, one per view")
      ->required()
      ->delimiter(',');
  kernels->add_option("--kind", kargs.kind, "linear|polynomial|gaussian|laplace|sigmoid");
  kernels->add_option("--degree", kargs.degree, "polynomial degree");
  kernels->add_option("--sigma", kargs.sigma, "bandwidth for gaussian/laplace");
  kernels->add_option("--gamma", kargs.gamma, "sigmoid scale");
  kernels->add_option("--theta", kargs.theta, "sigmoid offset (negative)");
  kernels->add_flag("--preprocess", kargs.preprocess, "center then normalize");
  kernels->add_flag("--binary", kargs.binary, "write binary kernels instead of CSV");
  kernels->add_option("--out", kargs.out, "output directory");

  RunArgs rargs;
  CLI::App* run = app.add_subcommand("run", "run a clustering experiment grid");
  run->add_option("--config", rargs.config_path, "experiment config JSON")->required();
  run->add_option("--out", rargs.out, "output directory");
  run->add_option("--threads", rargs.threads, "worker threads");
  run->add_option("--algorithm", rargs.algorithm, "a_mkkm|sb_kkm|mkkm|lf_gam|lf_lam");
  run->add_option("--lambda-grid", rargs.lambda_grid, "regularization grid")->delimiter(',');
  run->add_option("--tau-grid", rargs.tau_grid, "neighborhood fraction grid")->delimiter(',');
  run->add_option("--restarts", rargs.restarts, "rounding restarts per grid point");
  run->add_option("--eps0", rargs.eps0, "convergence threshold");
  run->add_option("--max-iter", rargs.max_iter, "iteration cap");
  CLI::Option* seed_opt = run->add_option("--seed", rargs.seed, "master seed");
  run->add_flag("--retain-iterates", rargs.retain_iterates, "keep per-iteration solver state");
  run->add_flag("--no-preprocess", rargs.no_preprocess, "skip kernel centering/normalization");

  SynthArgs sargs;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic multi-view dataset");
  synth->add_option("--n", sargs.n, "samples");
  synth->add_option("--k", sargs.k, "clusters");
  synth->add_option("--m", sargs.m, "informative views");
  synth->add_flag("--noise-view", sargs.noise_view, "append a label-shuffled view");
  synth->add_option("--seed", sargs.seed, "generator seed");
  synth->add_option("--separation", sargs.separation, "minimum center distance");
  synth->add_option("--noise-std", sargs.noise_std, "within-cluster standard deviation");
  synth->add_option("--out", sargs.out, "output directory");

  BoundArgs bargs;
  CLI::App* bound = app.add_subcommand("bound", "print theoretical bound values");
  bound->add_option("--n", bargs.n, "sample count");
  bound->add_option("--m", bargs.m, "view count");
  bound->add_option("--k", bargs.k, "cluster count");
  bound->add_option("--delta", bargs.delta, "confidence parameter in (0,1)");
  bound->add_option("--lambda", bargs.lambda, "regularization weight");

  BenchArgs benchargs;
  CLI::App* bench = app.add_subcommand("bench", "time the solver loop across sample counts");
  bench->add_option("--sizes", benchargs.sizes, "sample counts")->delimiter(',');
  bench->add_option("--views", benchargs.m, "view count");
  bench->add_option("--k", benchargs.k, "cluster count");
  bench->add_option("--iters", benchargs.iters, "iterations per run");
  bench->add_option("--repeats", benchargs.repeats, "repeats, best taken");
  bench->add_option("--seed", benchargs.seed, "generator seed");

  CLI11_PARSE(app, argc, argv);
  rargs.seed_set = seed_opt->count() > 0;

  try {
    if (kernels->parsed()) return run_kernels(kargs);
    if (run->parsed()) return run_run(rargs);
    if (synth->parsed()) return run_synth(sargs);
    if (bound->parsed()) return run_bound(bargs);
    if (bench->parsed()) return run_bench(benchargs);
  } catch (const mvfuse::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", mvfuse::error_code_name(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}

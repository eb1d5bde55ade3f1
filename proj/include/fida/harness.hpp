#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fida/image.hpp"
#include "fida/operators.hpp"
#include "fida/rng.hpp"
#include "fida/solvers.hpp"

namespace fida {

/// apply(op, img) plus seeded Gaussian noise; no clamping or quantization.
Image degrade(const Image& img, const ForwardOperator& op, double sigma, RngSeed seed);

/// Loads an image source: a PGM/FIDB path, or a synthetic phantom written as
/// `phantom:name=geometric[,size=256]`.
Image load_source(const std::string& source);
/// Short label for tables: the file stem, or the phantom name.
std::string source_label(const std::string& source);

/// One solve as described on the command line.
struct SolveRequest {
  std::string op = "identity";
  std::string method = "ida";  // ida | fida | wvd
  std::string basis = "auto";  // fida/wvd; auto = the diagonalizing basis
  std::string mode = "pinv";
  std::string strategy = "auto";
  std::string denoiser = "wavelet-soft";
  std::optional<double> gamma;
  /// Denoiser threshold for ida/fida; lambda itself for wvd.
  double lambda_gamma = 0.0;
  std::size_t max_iters = 100;
  double rel_tol = 1e-5;
  InitKind init = InitKind::automatic;
  std::optional<std::filesystem::path> cache_dir;
  bool force_exact = false;
};

struct SolveOutcome {
  SolveTrace trace;
  std::string basis_used;  // empty for ida
  std::string operator_used;
};

/// Resolves the descriptors, builds the spectrum when needed and runs the
/// method. `wvd` yields a one-entry trace.
SolveOutcome run_solve(const Image& y, const SolveRequest& req, const std::optional<Image>& truth = std::nullopt);

/// iteration,residual[,psnr] with one row per iteration.
void write_trace_csv(const SolveTrace& trace, const std::filesystem::path& path);

struct MethodSpec {
  std::string label;
  std::string method = "ida";
  std::string basis = "auto";
  std::string mode = "pinv";
  std::string strategy = "auto";
  std::string denoiser = "wavelet-soft";
};

struct ExperimentSpec {
  std::vector<std::string> images;
  std::string op = "blur:sigma=2,radius=7";
  std::vector<double> noise_sigmas;
  std::vector<MethodSpec> methods;
  std::vector<double> lambda_grid;
  std::size_t runs = 10;
  RngSeed base_seed{1};
  std::size_t max_iters = 100;
  double rel_tol = 1e-5;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::filesystem::path> cache_dir;
};

/// `count` points from lo to hi, equally spaced in log scale.
std::vector<double> geometric_grid(double lo, double hi, std::size_t count);

/// JSON layout:
///   { "images": [...], "operator": "blur:sigma=2,radius=7", "noise_sigmas": [...],
///     "methods": [{"label": "W-FIDA", "method": "fida", "basis": "wavelet:taps=6,levels=4",
///                  "mode": "pinv", "denoiser": "wavelet-soft"}, ...],
///     "lambda_grid": [...] or {"lo": .., "hi": .., "count": 15},
///     "runs": 10, "base_seed": 1, "max_iters": 100, "rel_tol": 1e-5, "output_dir": "out" }
/// Relative paths in images/output_dir resolve against the file's directory.
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// Seed of run r for (image, sigma): base ^ FNV-1a(image label, sigma, r).
RngSeed run_seed(RngSeed base, const std::string& image, double sigma, std::size_t run);

struct CellResult {
  std::size_t image = 0, sigma = 0, method = 0, lambda = 0, run = 0;
  std::uint64_t seed = 0;
  double psnr_best = 0.0;
  double psnr_final = 0.0;
  std::size_t best_iteration = 0;
  std::size_t iterations = 0;
  std::vector<double> iterates_psnr;
  std::string error;  // empty on success
};

struct TableRow {
  std::string image, method;
  double sigma = 0.0;
  double best_lambda = 0.0;
  double psnr_mean = 0.0;        // mean best-iterate PSNR at best_lambda
  double psnr_std = 0.0;         // sample standard deviation over runs
  double psnr_final_mean = 0.0;  // mean final-iterate PSNR at best_lambda
  double iterations = 0.0;       // mean iterations run at best_lambda
  std::size_t failed_runs = 0;
  std::vector<double> curve_lambda;     // mean best PSNR per grid point
  std::vector<double> curve_iteration;  // mean PSNR per iteration at best_lambda
};

struct SweepResult {
  std::vector<TableRow> table;
  std::vector<CellResult> cells;
};

/// Runs every (image, sigma, method, lambda, run) cell in a worker pool.
/// The noisy observation depends only on (image, sigma, run), so methods
/// and lambdas are compared on identical data. Cell failures are recorded
/// and the sweep continues. When output_dir is set, writes table.csv,
/// runs.csv and curves/*.csv.
SweepResult run_sweep(const ExperimentSpec& spec);

void write_sweep_outputs(const ExperimentSpec& spec, const SweepResult& result, const std::filesystem::path& dir);

/// Number formatting shared by the CSV writers.
std::string format_psnr(double v);
std::string format_real(double v);

}  // namespace fida

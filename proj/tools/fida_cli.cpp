// Command-line driver: degrade / solve / sweep / psnr / spectrum / denoise / phantom.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fida/descriptors.hpp"
#include "fida/harness.hpp"
#include "fida/io.hpp"
#include "fida/phantom.hpp"
#include "fida/spectrum.hpp"

namespace fs = std::filesystem;
using namespace fida;

namespace {

std::optional<fs::path> cache_dir_from(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  if (const char* env = std::getenv("FIDA_CACHE_DIR"); env && *env) return fs::path(env);
  return std::nullopt;
}

fs::path preview_path(const fs::path& out) {
  fs::path p = out;
  return p.replace_extension(".pgm");
}

InitKind parse_init(const std::string& s) {
  if (s == "auto") return InitKind::automatic;
  if (s == "zeros") return InitKind::zeros;
  if (s == "observation") return InitKind::observation;
  if (s == "adjoint") return InitKind::adjoint_observation;
  throw CLI::ValidationError("--init", "expected auto, zeros, observation or adjoint");
}

Shape parse_shape(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw CLI::ValidationError("--shape", "expected ROWSxCOLS");
  return Shape{std::stoul(s.substr(0, x)), std::stoul(s.substr(x + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("fida"));

  CLI::App app{"Restoration toolkit for y = Ax + noise: IDA, FIDA and WVD solvers with a sweep harness"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Only log errors");

  // degrade
  auto* deg = app.add_subcommand("degrade", "Apply an operator and add Gaussian noise");
  std::string deg_in, deg_out, deg_op = "blur:sigma=2,radius=7", deg_preview;
  double deg_sigma = 0.0;
  std::uint64_t deg_seed = 1;
  deg->add_option("-i,--input", deg_in, "Clean image (PGM, FIDB, or phantom:name=...)")->required();
  deg->add_option("-o,--output", deg_out, "Degraded image (FIDB unless the extension is .pgm)")->required();
  deg->add_option("--op", deg_op, "Operator descriptor")->capture_default_str();
  deg->add_option("--sigma", deg_sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  deg->add_option("--seed", deg_seed, "Noise seed")->capture_default_str();
  deg->add_option("--preview", deg_preview, "8-bit preview PGM (default: output with .pgm extension)");

  // solve
  auto* sol = app.add_subcommand("solve", "Restore one observation");
  SolveRequest req;
  std::string sol_in, sol_out, sol_truth, sol_trace, sol_init = "auto", sol_cache;
  double sol_gamma = 0.0;
  sol->add_option("-i,--input", sol_in, "Observation")->required();
  sol->add_option("-o,--output", sol_out, "Restored image (FIDB; a PGM preview is written next to it)")->required();
  sol->add_option("--op", req.op, "Operator descriptor")->capture_default_str();
  sol->add_option("--method", req.method, "ida | fida | wvd")->capture_default_str();
  sol->add_option("--basis", req.basis, "FIDA/WVD basis descriptor or auto")->capture_default_str();
  sol->add_option("--mode", req.mode, "pinv | wiener:tau=... | mask")->capture_default_str();
  sol->add_option("--strategy", req.strategy, "exact | per-subband | frequency | auto")->capture_default_str();
  sol->add_option("--denoiser", req.denoiser, "Denoiser descriptor")->capture_default_str();
  sol->add_option("--lambda", req.lambda_gamma, "Denoiser threshold lambda_gamma (lambda for wvd)")
      ->check(CLI::NonNegativeNumber);
  sol->add_option("--gamma", sol_gamma, "Step size (default: automatic)")->check(CLI::PositiveNumber);
  sol->add_option("--iters", req.max_iters, "Iteration budget")->capture_default_str();
  sol->add_option("--tol", req.rel_tol, "Relative-change tolerance, 0 disables")->capture_default_str();
  sol->add_option("--init", sol_init, "auto | zeros | observation | adjoint")->capture_default_str();
  sol->add_option("--truth", sol_truth, "Ground truth for PSNR tracking");
  sol->add_option("--trace", sol_trace, "Per-iteration CSV");
  sol->add_option("--cache-dir", sol_cache, "Spectrum cache (default: $FIDA_CACHE_DIR)");
  sol->add_flag("--force", req.force_exact, "Allow the exact delta strategy on large images");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Run an experiment spec (JSON)");
  std::string swp_spec, swp_out, swp_cache;
  std::optional<std::uint64_t> swp_seed;
  std::optional<std::size_t> swp_runs;
  swp->add_option("spec", swp_spec, "Experiment spec file")->required()->check(CLI::ExistingFile);
  swp->add_option("-o,--output-dir", swp_out, "Override the spec's output directory");
  swp->add_option("--seed", swp_seed, "Override the base seed");
  swp->add_option("--runs", swp_runs, "Override the number of runs");
  swp->add_option("--cache-dir", swp_cache, "Spectrum cache (default: $FIDA_CACHE_DIR)");

  // psnr
  auto* ps = app.add_subcommand("psnr", "PSNR of an image against a reference (peak 255)");
  std::string ps_ref, ps_test;
  ps->add_option("reference", ps_ref)->required();
  ps->add_option("test", ps_test)->required();

  // spectrum
  auto* spc = app.add_subcommand("spectrum", "Precompute and cache the deltas for an operator/basis pair");
  std::string spc_op = "blur:sigma=2,radius=7", spc_basis = "wavelet:taps=6,levels=4", spc_strategy = "auto",
              spc_shape = "256x256", spc_cache, spc_out;
  bool spc_force = false;
  spc->add_option("--op", spc_op)->capture_default_str();
  spc->add_option("--basis", spc_basis)->capture_default_str();
  spc->add_option("--strategy", spc_strategy)->capture_default_str();
  spc->add_option("--shape", spc_shape, "ROWSxCOLS")->capture_default_str();
  spc->add_option("--cache-dir", spc_cache, "Cache directory (default: $FIDA_CACHE_DIR)");
  spc->add_option("-o,--output", spc_out, "Also write the deltas here (FIDB, 1 x units)");
  spc->add_flag("--force", spc_force, "Allow the exact strategy on large images");

  // denoise (also usable as an external bridge target)
  auto* den = app.add_subcommand("denoise", "Denoise a file: denoise IN OUT LAMBDA");
  std::string den_in, den_out, den_desc = "wavelet-soft";
  double den_lambda = 0.0;
  den->add_option("input", den_in)->required();
  den->add_option("output", den_out)->required();
  den->add_option("lambda", den_lambda)->required()->check(CLI::NonNegativeNumber);
  den->add_option("--denoiser", den_desc, "Internal denoiser descriptor")->capture_default_str();

  // phantom
  auto* ph = app.add_subcommand("phantom", "Write a synthetic test image");
  std::string ph_name = "geometric", ph_out;
  std::size_t ph_size = 256;
  ph->add_option("--name", ph_name)->capture_default_str();
  ph->add_option("--size", ph_size)->capture_default_str();
  ph->add_option("-o,--output", ph_out)->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::err : spdlog::level::info);

  try {
    if (*deg) {
      const Image clean = load_source(deg_in);
      const ForwardOperator op = make_operator(deg_op, clean.shape());
      const Image y = degrade(clean, op, deg_sigma, RngSeed{deg_seed});
      write_image(y, deg_out);
      const fs::path preview = deg_preview.empty() ? preview_path(deg_out) : fs::path(deg_preview);
      if (preview != fs::path(deg_out)) write_pgm(y, preview);
      spdlog::info("degraded with {} and sigma {} (seed {})", op.describe(), deg_sigma, deg_seed);
    } else if (*sol) {
      const Image y = read_image(sol_in);
      std::optional<Image> truth;
      if (!sol_truth.empty()) truth = load_source(sol_truth);
      if (sol->count("--gamma")) req.gamma = sol_gamma;
      req.init = parse_init(sol_init);
      req.cache_dir = cache_dir_from(sol_cache);
      const SolveOutcome out = run_solve(y, req, truth);
      write_image(out.trace.final, sol_out);
      if (preview_path(sol_out) != fs::path(sol_out)) write_pgm(out.trace.final, preview_path(sol_out));
      if (!sol_trace.empty()) write_trace_csv(out.trace, sol_trace);
      spdlog::info("{} on {}{}: {} iterations{}, gamma {}", req.method, out.operator_used,
                   out.basis_used.empty() ? "" : " in " + out.basis_used, out.trace.iterations_run,
                   out.trace.converged ? " (converged)" : "", out.trace.gamma);
      if (truth)
        std::cout << "final_psnr " << format_psnr(out.trace.iterates_psnr.back()) << "\nbest_psnr "
                  << format_psnr(out.trace.iterates_psnr[out.trace.best_iteration - 1]) << " (iteration "
                  << out.trace.best_iteration << ")\n";
    } else if (*swp) {
      ExperimentSpec spec = load_experiment(swp_spec);
      if (!swp_out.empty()) spec.output_dir = fs::path(swp_out);
      if (!spec.output_dir) spec.output_dir = fs::path(swp_spec).parent_path() / "sweep-out";
      if (swp_seed) spec.base_seed = RngSeed{*swp_seed};
      if (swp_runs) spec.runs = *swp_runs;
      if (auto c = cache_dir_from(swp_cache)) spec.cache_dir = c;
      const SweepResult result = run_sweep(spec);
      std::cout << "image,method,sigma,best_lambda,psnr_mean,psnr_final_mean\n";
      for (const auto& r : result.table)
        std::cout << r.image << "," << r.method << "," << format_real(r.sigma) << "," << format_real(r.best_lambda)
                  << "," << format_psnr(r.psnr_mean) << "," << format_psnr(r.psnr_final_mean) << "\n";
      spdlog::info("wrote {}", spec.output_dir->string());
    } else if (*ps) {
      std::cout << format_psnr(psnr(load_source(ps_ref), load_source(ps_test))) << "\n";
    } else if (*spc) {
      const Shape shape = parse_shape(spc_shape);
      const ForwardOperator op = make_operator(spc_op, shape);
      const OrthoBasis basis = make_basis(parse_descriptor(spc_basis), shape, &op);
      const DeltaStrategy strategy = parse_strategy(spc_strategy).value_or(default_strategy(op, basis));
      const auto cache = cache_dir_from(spc_cache);
      DeltaOptions opts;
      opts.force = spc_force;
      const Spectrum spec = compute_deltas_cached(op, basis, strategy, cache, opts);
      if (cache) std::cout << spectrum_cache_path(*cache, op, basis, strategy).string() << "\n";
      if (!spc_out.empty()) write_spectrum(spec, spc_out, op, basis, strategy);
      std::size_t zeros = 0;
      for (std::size_t u = 0; u < spec.deltas().size(); ++u) zeros += spec.is_zero(u);
      spdlog::info("{} deltas ({}), max {}, {} below threshold", spec.deltas().size(), to_string(strategy),
                   spec.max_delta(), zeros);
    } else if (*den) {
      const Image x = read_image(den_in);
      const Denoiser d = make_denoiser(den_desc, x.shape());
      write_fidb(d.denoise(x, den_lambda), den_out);
    } else if (*ph) {
      write_image(make_phantom(ph_name, Shape{ph_size, ph_size}), ph_out);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}

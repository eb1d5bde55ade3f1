#include "fida/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "fida/denoisers.hpp"
#include "fida/descriptors.hpp"
#include "fida/io.hpp"
#include "fida/parallel.hpp"
#include "fida/phantom.hpp"
#include "fida/spectrum.hpp"

namespace fida {

Image degrade(const Image& img, const ForwardOperator& op, double sigma, RngSeed seed) {
  return add_gaussian_noise(op.apply(img), sigma, seed);
}

namespace {

bool is_phantom(const std::string& source) { return source.rfind("phantom:", 0) == 0; }

Descriptor phantom_descriptor(const std::string& source) {
  Descriptor d = parse_descriptor(source);
  d.allow_only({"name", "size"});
  return d;
}

}  // namespace

Image load_source(const std::string& source) {
  if (!is_phantom(source)) return read_image(source);
  const Descriptor d = phantom_descriptor(source);
  const auto size = d.integer("size", 256);
  if (size <= 0) throw std::invalid_argument("phantom size must be positive");
  const auto n = static_cast<std::size_t>(size);
  return make_phantom(d.text("name", "geometric"), Shape{n, n});
}

std::string source_label(const std::string& source) {
  if (is_phantom(source)) return phantom_descriptor(source).text("name", "geometric");
  return std::filesystem::path(source).stem().string();
}

namespace {

// Everything a solve needs that does not depend on the observation.
struct Prepared {
  ForwardOperator op;
  std::string method;
  std::optional<OrthoBasis> basis;
  std::optional<Spectrum> spec;
  std::optional<Denoiser> denoiser;
  std::string basis_used;
  double gamma = 0.0;
};

struct PrepareArgs {
  std::string method, basis, mode, strategy, denoiser;
  std::optional<double> gamma;
  std::optional<std::filesystem::path> cache_dir;
  bool force_exact = false;
};

Prepared prepare(const ForwardOperator& op, const PrepareArgs& a) {
  Prepared p{op, a.method, std::nullopt, std::nullopt, std::nullopt, "", 0.0};
  const Shape shape = op.input_shape();
  if (a.method != "ida" && a.method != "fida" && a.method != "wvd")
    throw std::invalid_argument("unknown method '" + a.method + "' (expected ida, fida, wvd)");

  if (a.method != "wvd") p.denoiser = make_denoiser(a.denoiser, shape);

  if (a.method == "fida" || a.method == "wvd") {
    std::string basis_text = a.basis;
    if (basis_text == "auto") {
      basis_text = diagonalizing_basis(op);
      spdlog::info("{}: basis auto -> {} (diagonalizing basis for {})", a.method, basis_text, op.describe());
    }
    p.basis = make_basis(parse_descriptor(basis_text), shape, &op);
    p.basis_used = p.basis->describe();
    const auto strategy = parse_strategy(a.strategy).value_or(default_strategy(op, *p.basis));
    DeltaOptions opts;
    opts.force = a.force_exact;
    Spectrum raw = compute_deltas_cached(op, *p.basis, strategy, a.cache_dir, opts);
    p.spec = reweight(raw, parse_mode(a.mode));
  }

  if (a.method == "ida") p.gamma = a.gamma ? *a.gamma : ida_default_gamma(op);
  if (a.method == "fida") p.gamma = a.gamma ? *a.gamma : fida_default_gamma(*p.spec);
  return p;
}

SolveTrace execute(const Prepared& p, const Image& y, double lambda, std::size_t max_iters, double rel_tol,
                   InitKind init, const std::optional<Image>& truth) {
  if (p.method == "wvd") {
    SolveTrace t;
    t.final = wvd_estimate(y, p.op, *p.basis, *p.spec, lambda);
    t.best = t.final;
    t.iterations_run = 1;
    t.best_iteration = 1;
    t.objective_residual.push_back(distance(p.op.apply(t.final), y));
    if (truth) t.iterates_psnr.push_back(psnr(*truth, t.final));
    return t;
  }
  SolverConfig cfg;
  cfg.method = p.method == "ida" ? Method::ida : Method::fida;
  cfg.gamma = p.gamma;
  cfg.lambda_gamma = lambda;
  cfg.max_iters = max_iters;
  cfg.rel_tol = rel_tol;
  cfg.init = init;
  if (cfg.method == Method::ida) return ida_solve(y, p.op, *p.denoiser, cfg, truth);
  return fida_solve(y, p.op, *p.basis, *p.spec, *p.denoiser, cfg, truth);
}

}  // namespace

SolveOutcome run_solve(const Image& y, const SolveRequest& req, const std::optional<Image>& truth) {
  // The operator acts on images of the observation's shape; explicit
  // matrices may map between shapes, in which case the truth (if any)
  // supplies the input shape.
  const Shape shape = truth ? truth->shape() : y.shape();
  const ForwardOperator op = make_operator(req.op, shape);
  const Prepared p = prepare(op, {req.method, req.basis, req.mode, req.strategy, req.denoiser, req.gamma,
                                  req.cache_dir, req.force_exact});
  SolveOutcome out;
  out.trace = execute(p, y, req.lambda_gamma, req.max_iters, req.rel_tol, req.init, truth);
  out.basis_used = p.basis_used;
  out.operator_used = op.describe();
  return out;
}

std::string format_psnr(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_trace_csv(const SolveTrace& trace, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  const bool with_psnr = !trace.iterates_psnr.empty();
  f << "iteration,residual" << (with_psnr ? ",psnr" : "") << "\n";
  for (std::size_t k = 0; k < trace.iterations_run; ++k) {
    f << (k + 1) << "," << format_real(trace.objective_residual[k]);
    if (with_psnr) f << "," << format_psnr(trace.iterates_psnr[k]);
    f << "\n";
  }
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
  if (count == 0) throw std::invalid_argument("grid needs at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("geometric grid needs 0 < lo <= hi");
  if (count == 1) return {lo};
  std::vector<double> g(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read experiment spec " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };

  ExperimentSpec s;
  for (const auto& img : j.at("images")) {
    std::string src = img.get<std::string>();
    s.images.push_back(src.rfind("phantom:", 0) == 0 ? src : resolve(src).string());
  }
  s.op = j.value("operator", s.op);
  s.noise_sigmas = j.at("noise_sigmas").get<std::vector<double>>();
  for (const auto& m : j.at("methods")) {
    MethodSpec ms;
    ms.method = m.value("method", ms.method);
    ms.label = m.value("label", ms.method);
    ms.basis = m.value("basis", ms.basis);
    ms.mode = m.value("mode", ms.mode);
    ms.strategy = m.value("strategy", ms.strategy);
    ms.denoiser = m.value("denoiser", ms.denoiser);
    s.methods.push_back(ms);
  }
  const auto& grid = j.at("lambda_grid");
  if (grid.is_array())
    s.lambda_grid = grid.get<std::vector<double>>();
  else
    s.lambda_grid = geometric_grid(grid.at("lo").get<double>(), grid.at("hi").get<double>(),
                                   grid.value("count", std::size_t{15}));
  s.runs = j.value("runs", s.runs);
  s.base_seed = RngSeed{j.value("base_seed", std::uint64_t{1})};
  s.max_iters = j.value("max_iters", s.max_iters);
  s.rel_tol = j.value("rel_tol", s.rel_tol);
  if (j.contains("output_dir")) s.output_dir = resolve(j.at("output_dir").get<std::string>());
  if (j.contains("cache_dir")) s.cache_dir = resolve(j.at("cache_dir").get<std::string>());
  return s;
}

RngSeed run_seed(RngSeed base, const std::string& image, double sigma, std::size_t run) {
  return RngSeed{base.value ^ Fnv1a().str(image).f64(sigma).u64(run).digest()};
}

namespace {

void validate(const ExperimentSpec& s) {
  if (s.images.empty()) throw std::invalid_argument("sweep: no images");
  if (s.noise_sigmas.empty()) throw std::invalid_argument("sweep: no noise levels");
  if (s.methods.empty()) throw std::invalid_argument("sweep: no methods");
  if (s.lambda_grid.empty()) throw std::invalid_argument("sweep: empty lambda grid");
  if (s.runs == 0) throw std::invalid_argument("sweep: runs must be positive");
  if (s.max_iters == 0) throw std::invalid_argument("sweep: max_iters must be positive");
  for (double v : s.noise_sigmas)
    if (!(v >= 0.0)) throw std::invalid_argument("sweep: noise levels must be nonnegative");
  for (double v : s.lambda_grid)
    if (!(v >= 0.0)) throw std::invalid_argument("sweep: lambda values must be nonnegative");
  std::map<std::string, int> labels;
  for (const auto& m : s.methods)
    if (++labels[m.label] > 1) throw std::invalid_argument("sweep: duplicate method label '" + m.label + "'");
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return s;
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

SweepResult run_sweep(const ExperimentSpec& spec) {
  validate(spec);
  const std::size_t ni = spec.images.size(), ns = spec.noise_sigmas.size(), nm = spec.methods.size(),
                    nl = spec.lambda_grid.size(), nr = spec.runs;

  std::vector<Image> truth;
  std::vector<std::string> labels;
  for (const auto& src : spec.images) {
    truth.push_back(load_source(src));
    labels.push_back(source_label(src));
  }

  // Per (image, method): operator, basis, spectrum, step size.
  std::vector<std::optional<Prepared>> prepared(ni * nm);
  std::vector<std::string> prepare_error(ni * nm);
  std::vector<ForwardOperator> ops;
  for (std::size_t i = 0; i < ni; ++i) {
    ops.push_back(make_operator(spec.op, truth[i].shape()));
    const ForwardOperator& op = ops.back();
    for (std::size_t m = 0; m < nm; ++m) {
      const auto& ms = spec.methods[m];
      try {
        prepared[i * nm + m] =
            prepare(op, {ms.method, ms.basis, ms.mode, ms.strategy, ms.denoiser, std::nullopt, spec.cache_dir, false});
      } catch (const std::exception& e) {
        prepare_error[i * nm + m] = e.what();
        spdlog::error("sweep: {} on {} could not be prepared: {}", ms.label, labels[i], e.what());
      }
    }
  }

  // Observations depend on (image, sigma, run) only.
  std::vector<Image> observed(ni * ns * nr);
  std::vector<std::uint64_t> seeds(ni * ns * nr);
  parallel_for(ni * ns * nr, [&](std::size_t k) {
    const std::size_t i = k / (ns * nr), s = (k / nr) % ns, r = k % nr;
    const RngSeed seed = run_seed(spec.base_seed, labels[i], spec.noise_sigmas[s], r);
    seeds[k] = seed.value;
    observed[k] = degrade(truth[i], ops[i], spec.noise_sigmas[s], seed);
  });

  SweepResult result;
  result.cells.resize(ni * ns * nm * nl * nr);
  parallel_for(result.cells.size(), [&](std::size_t k) {
    CellResult& c = result.cells[k];
    c.run = k % nr;
    c.lambda = (k / nr) % nl;
    c.method = (k / (nr * nl)) % nm;
    c.sigma = (k / (nr * nl * nm)) % ns;
    c.image = k / (nr * nl * nm * ns);
    const std::size_t obs = (c.image * ns + c.sigma) * nr + c.run;
    c.seed = seeds[obs];
    const auto& p = prepared[c.image * nm + c.method];
    if (!p) {
      c.error = prepare_error[c.image * nm + c.method];
      return;
    }
    try {
      SolveTrace t = execute(*p, observed[obs], spec.lambda_grid[c.lambda], spec.max_iters, spec.rel_tol,
                             InitKind::automatic, truth[c.image]);
      c.iterations = t.iterations_run;
      c.best_iteration = t.best_iteration;
      c.psnr_final = t.iterates_psnr.back();
      c.psnr_best = t.iterates_psnr[t.best_iteration - 1];
      c.iterates_psnr = std::move(t.iterates_psnr);
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  });

  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t m = 0; m < nm; ++m) {
      for (std::size_t s = 0; s < ns; ++s) {
        TableRow row;
        row.image = labels[i];
        row.method = spec.methods[m].label;
        row.sigma = spec.noise_sigmas[s];
        auto cell_at = [&](std::size_t l, std::size_t r) -> const CellResult& {
          return result.cells[(((i * ns + s) * nm + m) * nl + l) * nr + r];
        };
        std::size_t best = nl;
        for (std::size_t l = 0; l < nl; ++l) {
          std::vector<double> v;
          for (std::size_t r = 0; r < nr; ++r)
            if (cell_at(l, r).error.empty()) v.push_back(cell_at(l, r).psnr_best);
          const double mean = mean_of(v);
          row.curve_lambda.push_back(mean);
          if (!std::isnan(mean) && (best == nl || mean > row.curve_lambda[best])) best = l;
        }
        if (best == nl) {
          row.best_lambda = std::numeric_limits<double>::quiet_NaN();
          row.psnr_mean = row.psnr_std = row.psnr_final_mean = row.iterations = row.best_lambda;
          row.failed_runs = nr;
          result.table.push_back(std::move(row));
          continue;
        }
        row.best_lambda = spec.lambda_grid[best];
        std::vector<double> bests, finals, iters;
        std::size_t longest = 0;
        for (std::size_t r = 0; r < nr; ++r) {
          const auto& c = cell_at(best, r);
          if (!c.error.empty()) {
            ++row.failed_runs;
            continue;
          }
          bests.push_back(c.psnr_best);
          finals.push_back(c.psnr_final);
          iters.push_back(static_cast<double>(c.iterations));
          longest = std::max(longest, c.iterates_psnr.size());
        }
        row.psnr_mean = mean_of(bests);
        row.psnr_std = sample_std(bests);
        row.psnr_final_mean = mean_of(finals);
        row.iterations = mean_of(iters);
        // Runs that stopped early hold their last value.
        for (std::size_t k = 0; k < longest; ++k) {
          std::vector<double> v;
          for (std::size_t r = 0; r < nr; ++r) {
            const auto& c = cell_at(best, r);
            if (!c.error.empty()) continue;
            v.push_back(c.iterates_psnr[std::min(k, c.iterates_psnr.size() - 1)]);
          }
          row.curve_iteration.push_back(mean_of(v));
        }
        result.table.push_back(std::move(row));
      }
    }
  }

  if (spec.output_dir) write_sweep_outputs(spec, result, *spec.output_dir);
  return result;
}

void write_sweep_outputs(const ExperimentSpec& spec, const SweepResult& result, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "curves");
  auto open = [](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  };

  {
    auto f = open(dir / "table.csv");
    f << "image,method,sigma,best_lambda,psnr_mean,psnr_std,psnr_final_mean,iterations,failed_runs,runs,operator\n";
    for (const auto& r : result.table) {
      f << csv_field(r.image) << "," << csv_field(r.method) << "," << format_real(r.sigma) << ","
        << format_real(r.best_lambda) << "," << format_psnr(r.psnr_mean) << "," << format_psnr(r.psnr_std) << ","
        << format_psnr(r.psnr_final_mean) << "," << format_real(r.iterations) << "," << r.failed_runs << ","
        << spec.runs << "," << csv_field(spec.op) << "\n";
    }
  }
  {
    std::vector<std::string> labels;
    for (const auto& s : spec.images) labels.push_back(source_label(s));
    auto f = open(dir / "runs.csv");
    f << "image,method,sigma,lambda,run,seed,psnr_best,psnr_final,best_iteration,iterations,status\n";
    for (const auto& c : result.cells) {
      f << csv_field(labels[c.image]) << "," << csv_field(spec.methods[c.method].label) << ","
        << format_real(spec.noise_sigmas[c.sigma]) << "," << format_real(spec.lambda_grid[c.lambda]) << "," << c.run
        << "," << c.seed << ",";
      if (c.error.empty())
        f << format_psnr(c.psnr_best) << "," << format_psnr(c.psnr_final) << "," << c.best_iteration << ","
          << c.iterations << ",ok\n";
      else
        f << ",,,," << csv_field("error: " + c.error) << "\n";
    }
  }
  for (const auto& r : result.table) {
    const std::string stem = sanitize(r.image) + "__" + sanitize(r.method) + "__sigma" + sanitize(format_real(r.sigma));
    {
      auto f = open(dir / "curves" / (stem + "__lambda.csv"));
      f << "lambda,psnr_mean\n";
      for (std::size_t l = 0; l < spec.lambda_grid.size(); ++l)
        f << format_real(spec.lambda_grid[l]) << "," << format_psnr(r.curve_lambda[l]) << "\n";
    }
    {
      auto f = open(dir / "curves" / (stem + "__iterations.csv"));
      f << "iteration,psnr_mean\n";
      for (std::size_t k = 0; k < r.curve_iteration.size(); ++k)
        f << (k + 1) << "," << format_psnr(r.curve_iteration[k]) << "\n";
    }
  }
}

}  // namespace fida

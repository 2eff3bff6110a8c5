// mixest: command-line front end for minimum Hellinger mixture estimation.

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mixest/divergences.hpp"
#include "mixest/experiments.hpp"
#include "mixest/io.hpp"

namespace fs = std::filesystem;
using namespace mixest;

namespace {

struct FitArgs {
  std::string data;
  std::string algo = "1";
  std::string family = "gaussian";
  std::string kernel = "gaussian";
  double sigma1 = 1.0;
  double sigma0 = 1.0;
  std::string cn = "bic";
  double epsilon = 0.05;
  std::size_t m_fixed = 0;
  std::size_t m_max = 10;
  std::size_t starts = 20;
  std::size_t max_iters = 500;
  std::size_t grid_points = QuadratureGrid::kDefaultPoints;
  std::uint64_t seed = 0;
  bool full_sweep = false;
  std::string out;
};

struct SimArgs {
  std::string case_id;
  std::string preset = "desk";
  std::string algo = "1";
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int replications = 0;
};

struct SlcArgs {
  std::string data = "data/slc.txt";
  std::string cn = "bic";
  double sigma = 0.05;
  std::size_t m_max = 10;
  std::size_t starts = 20;
  std::uint64_t seed = 0;
  std::string out;
};

struct DistArgs {
  std::string kind;
  std::string a, b;
  int r = 1;
  std::string family = "gaussian";
  std::string kernel = "gaussian";
  double sigma = 0.0;
  std::size_t grid_points = QuadratureGrid::kDefaultPoints;
};

Selector parse_selector(const std::string& s) {
  if (s == "1") return Selector::Algorithm1;
  if (s == "2") return Selector::Algorithm2;
  if (s == "ws") return Selector::WS;
  throw InputError("--algo must be 1, 2 or ws, got '" + s + "'");
}

Json measure_input(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg.front() != '{') {
    std::ifstream in(arg);
    if (!in) throw InputError("cannot read " + arg);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    Json j = Json::parse(text);
    // Accept fit/selection output directly.
    if (j.contains("G_hat")) return j["G_hat"];
    return j;
  } catch (const Json::parse_error& e) {
    throw InputError("invalid JSON in " + arg + ": " + e.what());
  }
}

int cmd_fit(const FitArgs& a) {
  if (!(a.sigma0 > 0.0)) throw InputError("σ₀ must be positive");
  const Sample data = read_sample(a.data);
  const KernelFamily fam = KernelFamily::parse(a.family);
  FitConfig cfg;
  cfg.kernel = SmoothingKernel::parse_tag(a.kernel);
  cfg.sigma1 = a.sigma1;
  cfg.sigma0 = a.sigma0;
  cfg.starts = a.starts;
  cfg.max_iters = a.max_iters;
  cfg.seed = a.seed;
  cfg.grid.points = a.grid_points;

  Json out;
  std::string summary;
  if (a.m_fixed > 0) {
    cfg.max_components = a.m_fixed;
    const FitResult r = fit_fixed_order(data, fam, cfg);
    out = to_json(r);
    summary = "m = " + std::to_string(r.order) + ", h = " + format_double(r.h_value) + "\n";
  } else {
    SelectionOptions opts;
    opts.m_max = a.m_max;
    opts.full_sweep = a.full_sweep;
    const double cn = CnRule::parse(a.cn)(data.size(), fam.dim());
    SelectionResult r;
    switch (parse_selector(a.algo)) {
      case Selector::Algorithm1:
        r = algorithm1(data, fam, a.sigma1, a.sigma0, cn, cfg, opts);
        break;
      case Selector::Algorithm2:
        r = algorithm2(data, fam, a.sigma1, a.sigma0, a.epsilon, cfg, opts);
        break;
      case Selector::WS:
        r = ws_algorithm(data, fam, a.sigma0, cn, cfg, opts);
        break;
    }
    out = to_json(r);
    summary = "m_hat = " + std::to_string(r.m_hat) + (r.cap_hit ? " (cap hit)" : "") + ", h = " +
              format_double(r.sweep[r.m_hat - 1].h_value) + "\n";
    for (std::size_t i = 0; i < r.g_hat.size(); ++i) {
      summary += "  p = " + format_double(r.g_hat.weight(i)) + "  theta =";
      for (double t : r.g_hat.atom(i)) summary += " " + format_double(t);
      summary += "\n";
    }
  }
  out["config"] = {{"data", a.data},       {"algo", a.algo},     {"family", a.family},
                   {"kernel", a.kernel},   {"sigma1", a.sigma1}, {"sigma0", a.sigma0},
                   {"cn", a.cn},           {"epsilon", a.epsilon}, {"m", a.m_fixed},
                   {"m_max", a.m_max},     {"starts", a.starts}, {"max_iters", a.max_iters},
                   {"grid_points", a.grid_points}, {"seed", a.seed}};
  if (a.out.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    write_file_atomic(a.out, out.dump(2) + "\n");
    std::cout << summary;
  }
  return 0;
}

int cmd_simulate(const SimArgs& a) {
  CaseSpec spec = builtin_case(a.case_id, parse_preset(a.preset), a.seed);
  spec.selector = parse_selector(a.algo);
  if (spec.selector == Selector::WS) spec.sigma1 = 0.0;
  if (a.replications > 0) spec.replications = static_cast<std::size_t>(a.replications);
  const ExperimentReport report = run_case(spec);

  fs::create_directories(a.out_dir);
  const std::string stem = "case" + a.case_id + "_" + to_string(spec.selector);
  Json summary = report.summary_json();
  summary["config"] = {{"case", a.case_id}, {"preset", a.preset}, {"algo", a.algo},
                       {"seed", a.seed},    {"replications", spec.replications}};
  write_file_atomic(fs::path(a.out_dir) / (stem + ".csv"), report.csv());
  write_file_atomic(fs::path(a.out_dir) / (stem + ".json"), summary.dump(2) + "\n");
  write_file_atomic(fs::path(a.out_dir) / (stem + ".dat"), report.plot_data());

  for (const auto& s : report.sizes)
    std::printf("n=%zu modal_m=%zu frac_target=%.3f mean_w1=%.6g se=%.3g failures=%zu\n", s.n, s.modal_m,
                s.fraction_target, s.mean_w1_modal, s.se_w1_modal, s.failures);
  if (report.rate_defined)
    std::printf("case %s slope = %.4f +- %.4f\n", a.case_id.c_str(), report.rate.slope, report.rate.stderr_);
  else
    std::printf("case %s slope undefined (fewer than 3 usable sample sizes)\n", a.case_id.c_str());
  return 0;
}

int cmd_slc(const SlcArgs& a) {
  FitConfig fit;
  fit.starts = a.starts;
  fit.seed = a.seed;
  const SlcResult r = slc_pipeline(a.data, CnRule::parse(a.cn), fit, a.sigma, a.m_max);
  std::printf("m_hat = %zu\n", r.selection.m_hat);
  std::printf("%-6s", "");
  for (std::size_t i = 0; i < r.row.p.size(); ++i) std::printf("  p%-6zu", i + 1);
  for (std::size_t i = 0; i < r.row.p.size(); ++i) std::printf("  eta%-4zu", i + 1);
  for (std::size_t i = 0; i < r.row.p.size(); ++i) std::printf("  tau%-4zu", i + 1);
  std::printf("\nAlg 1 ");
  for (double v : r.row.p) std::printf("  %-7.3f", v);
  for (double v : r.row.eta) std::printf("  %-7.3f", v);
  for (double v : r.row.tau) std::printf("  %-7.3f", v);
  std::printf("\n");
  if (!a.out.empty()) {
    Json j = to_json(r.selection);
    j["row"] = {{"p", r.row.p}, {"eta", r.row.eta}, {"tau", r.row.tau}};
    j["config"] = {{"data", a.data}, {"cn", a.cn}, {"sigma", a.sigma}, {"m_max", a.m_max}, {"seed", a.seed}};
    write_file_atomic(a.out, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_distance(const DistArgs& a) {
  const MixingMeasure g1 = measure_from_json(measure_input(a.a));
  const MixingMeasure g2 = measure_from_json(measure_input(a.b));
  if (a.kind == "wasserstein") {
    std::cout << format_double(wasserstein(g1, g2, a.r)) << "\n";
    return 0;
  }
  const KernelFamily fam = KernelFamily::parse(a.family);
  const SmoothingKernel smooth{SmoothingKernel::parse_tag(a.kernel), a.sigma};
  // Grid covering both mixtures: their atoms' locations serve as the data.
  Sample pts;
  for (const auto* g : {&g1, &g2})
    for (const auto& atom : g->atoms()) pts.values.push_back(atom[0]);
  GridPolicy policy;
  policy.points = a.grid_points;
  double smax = 0.0;
  for (const auto* g : {&g1, &g2})
    for (const auto& atom : g->atoms()) smax = std::max(smax, fam.scale(atom));
  policy.scale_max = smax;
  const KernelFamily fams[] = {fam};
  const QuadratureGrid grid = build_grid(pts, fams, a.sigma, policy);
  const SmoothedFamily sf = convolve(fam, smooth, &grid);
  const auto p = mixture_density(g1, sf, grid);
  const auto q = mixture_density(g2, sf, grid);
  std::cout << format_double(hellinger(p, q, grid)) << "\n";
  return 0;
}

void apply_thread_cap() {
  if (const char* env = std::getenv("MIXEST_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw InputError("MIXEST_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(v));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum Hellinger distance estimation and order selection for finite mixtures"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit a mixture to a data file (one value per line)");
  f->set_config("--config", "", "Flat key=value file; flags override it");
  f->add_option("data", fit.data, "Data file")->required();
  f->add_option("--algo", fit.algo, "Selector: 1, 2 or ws")->capture_default_str();
  f->add_option("--family", fit.family, "Kernel family")->capture_default_str();
  f->add_option("--kernel", fit.kernel, "Smoothing kernel: gaussian or cauchy")->capture_default_str();
  f->add_option("--sigma1", fit.sigma1, "Bandwidth on the candidate mixture")->capture_default_str();
  f->add_option("--sigma0", fit.sigma0, "Bandwidth of the kernel density estimate")->capture_default_str();
  f->add_option("--cn", fit.cn, "C_n: bic, aic or a number")->capture_default_str();
  f->add_option("--epsilon", fit.epsilon, "Threshold for --algo 2")->capture_default_str();
  f->add_option("--m", fit.m_fixed, "Fit this order only (no selection)");
  f->add_option("--m-max", fit.m_max, "Largest order tried")->capture_default_str();
  f->add_option("--starts", fit.starts, "Random restarts per order")->capture_default_str();
  f->add_option("--max-iters", fit.max_iters, "Iterations per start")->capture_default_str();
  f->add_option("--grid-points", fit.grid_points, "Quadrature grid size (odd)")->capture_default_str();
  f->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
  f->add_flag("--full-sweep", fit.full_sweep, "Fit every order up to --m-max");
  f->add_option("--out", fit.out, "JSON output path (default: stdout)");

  SimArgs sim;
  auto* s = app.add_subcommand("simulate", "Run a built-in simulation case");
  s->set_config("--config", "", "Flat key=value file; flags override it");
  s->add_option("--case", sim.case_id, "Case id (1.1 ... 4.2)")->required();
  s->add_option("--preset", sim.preset, "quick, desk or full")->capture_default_str();
  s->add_option("--algo", sim.algo, "Selector: 1, 2 or ws")->capture_default_str();
  s->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
  s->add_option("--replications", sim.replications, "Override the preset's replication count");
  s->add_option("--out-dir", sim.out_dir, "Directory for CSV/JSON/plot data")->capture_default_str();

  SlcArgs slc;
  auto* l = app.add_subcommand("slc", "Fit the SLC activity data");
  l->set_config("--config", "", "Flat key=value file; flags override it");
  l->add_option("data", slc.data, "SLC data file")->capture_default_str();
  l->add_option("--cn", slc.cn, "C_n: bic, aic or a number")->capture_default_str();
  l->add_option("--sigma", slc.sigma, "sigma1 = sigma0")->capture_default_str();
  l->add_option("--m-max", slc.m_max, "Largest order tried")->capture_default_str();
  l->add_option("--starts", slc.starts, "Random restarts per order")->capture_default_str();
  l->add_option("--seed", slc.seed, "Random seed")->capture_default_str();
  l->add_option("--out", slc.out, "JSON output path");

  DistArgs dist;
  auto* d = app.add_subcommand("distance", "Distance between two mixing measures (JSON files or inline)");
  d->add_option("kind", dist.kind, "wasserstein or hellinger")
      ->required()
      ->check(CLI::IsMember({"wasserstein", "hellinger"}));
  d->add_option("a", dist.a, "First measure")->required();
  d->add_option("b", dist.b, "Second measure")->required();
  d->add_option("--r", dist.r, "Order of the Wasserstein distance")->capture_default_str();
  d->add_option("--family", dist.family, "Kernel family (hellinger)")->capture_default_str();
  d->add_option("--kernel", dist.kernel, "Smoothing kernel (hellinger)")->capture_default_str();
  d->add_option("--sigma", dist.sigma, "Bandwidth applied to both mixtures (hellinger)")->capture_default_str();
  d->add_option("--grid-points", dist.grid_points, "Quadrature grid size (odd)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    apply_thread_cap();
    if (*f) return cmd_fit(fit);
    if (*s) return cmd_simulate(sim);
    if (*l) return cmd_slc(slc);
    if (*d) return cmd_distance(dist);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

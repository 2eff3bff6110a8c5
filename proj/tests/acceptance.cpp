// Acceptance runner. `--oracles` checks the numerical kernels against the
// independent references in oracles.hpp; `--simulations` runs the simulation
// cases at the chosen preset plus the real-data fit. Prints one PASS/FAIL line
// per criterion and exits nonzero if any criterion fails.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "mixest/densities.hpp"
#include "mixest/divergences.hpp"
#include "mixest/estimator.hpp"
#include "mixest/experiments.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mixest;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(const std::string& id, bool ok, const std::string& detail) {
  std::printf("criterion %-3s %s  %s\n", id.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---- 7a-d ----------------------------------------------------------------

void oracle_wasserstein() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> kd(1, 3), dd(1, 3);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto d = static_cast<std::size_t>(dd(rng));
    const auto g1 = support::random_measure(rng, static_cast<std::size_t>(kd(rng)), d);
    const auto g2 = support::random_measure(rng, static_cast<std::size_t>(kd(rng)), d);
    for (int r : {1, 2}) worst = std::max(worst, std::abs(wasserstein(g1, g2, r) - oracle::brute_force_wasserstein(g1, g2, r)));
  }
  verdict("7a", worst <= 1e-9, "max |W_r - LP| = " + fmt("%.3g", worst) + " over 200 instances (<= 1e-9)");
}

void oracle_hellinger() {
  const QuadratureGrid g(-40.0, 40.0);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> loc(-3.0, 3.0), sc(0.3, 3.0);
  double worst = 0.0;
  auto normal_on = [&](double e, double t) {
    std::vector<double> v(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) v[j] = oracle::normal_density(g.points()[j], e, t);
    return v;
  };
  for (int t = 0; t < 50; ++t) {
    const double e1 = loc(rng), t1 = sc(rng), e2 = loc(rng), t2 = sc(rng);
    const double h = hellinger(normal_on(e1, t1), normal_on(e2, t2), g);
    worst = std::max(worst, std::abs(h - std::sqrt(1.0 - oracle::normal_affinity(e1, t1, e2, t2))));
  }
  verdict("7b", worst <= 1e-7, "max |h - closed form| = " + fmt("%.3g", worst) + " over 50 pairs (<= 1e-7)");
}

void oracle_convolution() {
  const QuadratureGrid grid(-30.0, 30.0, 4097);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> loc(-3.0, 3.0), sc(0.2, 3.0), bw(0.1, 2.0);
  double worst = 0.0;
  std::vector<double> vg(grid.size()), vc(grid.size());
  for (int t = 0; t < 20; ++t) {
    const double e = loc(rng), s = sc(rng), sigma = bw(rng);
    const std::vector<double> th{e, s};
    convolve(KernelFamily::gaussian(), {KernelTag::Gaussian, sigma}).evaluate(th, grid, vg, {});
    convolve(KernelFamily::cauchy(), {KernelTag::Cauchy, sigma}).evaluate(th, grid, vc, {});
    for (std::size_t j = 0; j < grid.size(); j += 8) {
      const double x = grid.points()[j];
      const double qg = oracle::convolution_at([&](double u) { return oracle::normal_density(u, e, s); },
                                               [&](double y) { return oracle::normal_density(y, 0.0, sigma); }, x, e);
      const double qc = oracle::convolution_at([&](double u) { return oracle::cauchy_density(u, e, s); },
                                               [&](double y) { return oracle::cauchy_density(y, 0.0, sigma); }, x, e);
      worst = std::max({worst, std::abs(vg[j] - qg), std::abs(vc[j] - qc)});
    }
  }
  verdict("7c", worst <= 1e-5, "sup |closed form - quadrature| = " + fmt("%.3g", worst) + " over 20 (theta, sigma) (<= 1e-5)");
}

void oracle_gradient() {
  const MixingMeasure g0({{0.0, std::sqrt(10.0)}, {-0.3, std::sqrt(0.05)}, {0.3, std::sqrt(0.05)}}, {0.5, 0.25, 0.25});
  const Sample data = sample(g0, KernelFamily::gaussian(), 500, 1);
  FitConfig cfg;
  cfg.max_components = 3;
  cfg.sigma1 = cfg.sigma0 = 1.0;
  cfg.grid.points = 1025;
  const FitProblem pb(data, KernelFamily::gaussian(), cfg);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto& box = pb.box();
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x, w;
    for (int i = 0; i < 3; ++i) {
      x.push_back(box.lower()[0] + (0.1 + 0.8 * u(rng)) * (box.upper()[0] - box.lower()[0]));
      x.push_back(box.lower()[1] + (0.02 + 0.3 * u(rng)) * (box.upper()[1] - box.lower()[1]));
      w.push_back(u(rng) + 0.1);
    }
    const double sw = w[0] + w[1] + w[2];
    for (double& v : w) v /= sw;
    const auto ev = evaluate_affinity(pb, w, x, true);
    const double h = 1e-5;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      auto a = x, b = x;
      a[j] += h;
      b[j] -= h;
      const double fd = (evaluate_affinity(pb, w, a, false).affinity - evaluate_affinity(pb, w, b, false).affinity) / (2 * h);
      num = std::max(num, std::abs(ev.grad_atoms[j] - fd));
      den = std::max(den, std::abs(fd));
    }
    worst = std::max(worst, num / den);
  }
  verdict("7d", worst <= 1e-4, "max relative gradient error = " + fmt("%.3g", worst) + " at 20 points (<= 1e-4)");
}

// ---- simulations ---------------------------------------------------------

struct Runner {
  Preset preset;
  std::uint64_t seed;
  fs::path out_dir;
  double max_violation = -1.0;
  std::map<std::string, ExperimentReport> done;

  const ExperimentReport& run(const std::string& id, Selector sel = Selector::Algorithm1) {
    const std::string key = id + "_" + to_string(sel);
    if (auto it = done.find(key); it != done.end()) return it->second;
    CaseSpec spec = builtin_case(id, preset, seed);
    spec.selector = sel;
    if (sel == Selector::WS) spec.sigma1 = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = run_case(spec);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    max_violation = std::max(max_violation, rep.max_monotonicity_violation);
    write_file_atomic(out_dir / ("case" + key + ".csv"), rep.csv());
    write_file_atomic(out_dir / ("case" + key + ".json"), rep.summary_json().dump(2) + "\n");
    std::printf("  case %s (%s): %zu runs in %.0f s\n", id.c_str(), to_string(sel).c_str(), rep.rows.size(), secs);
    for (const auto& s : rep.sizes)
      std::printf("    n=%-5zu modal_m=%zu frac_target=%.2f mean_w1=%.4g failures=%zu\n", s.n, s.modal_m,
                  s.fraction_target, s.mean_w1_modal, s.failures);
    std::fflush(stdout);
    return done.emplace(key, std::move(rep)).first->second;
  }
};

const SizeSummary& at_2000(const ExperimentReport& r) {
  for (const auto& s : r.sizes)
    if (s.n == 2000) return s;
  return r.sizes.back();
}

std::string slope_text(const ExperimentReport& r) {
  return r.rate_defined ? fmt("%.3f", r.rate.slope) + " +- " + fmt("%.3f", r.rate.stderr_) : "undefined";
}

bool in_band(const ExperimentReport& r, double lo, double hi) {
  return r.rate_defined && r.rate.slope >= lo && r.rate.slope <= hi;
}

void rate_criterion(Runner& run, const std::string& crit, const std::string& id, double lo, double hi,
                    double min_frac) {
  const auto& r = run.run(id);
  const auto& s = at_2000(r);
  const bool ok = in_band(r, lo, hi) && s.fraction_target >= min_frac;
  verdict(crit, ok,
          "case " + id + ": slope " + slope_text(r) + " in [" + fmt("%.2f", lo) + ", " + fmt("%.2f", hi) +
              "]; fraction m_hat=target at n=" + std::to_string(s.n) + " = " + fmt("%.2f", s.fraction_target) +
              " (>= " + fmt("%.2f", min_frac) + ")");
}

void varying_criterion(Runner& run) {
  const auto c21 = builtin_case("2.1", run.preset, run.seed), c22 = builtin_case("2.2", run.preset, run.seed);
  const MixingMeasure lim21({{1.0}, {2.0}}, {0.5, 0.5}), lim22({{1.0}}, {1.0});
  double worst = 0.0;
  for (std::size_t n : c21.sample_sizes) {
    const double dn = static_cast<double>(n);
    worst = std::max(worst, std::abs(wasserstein(c21.truth(n), lim21, 1) - 0.5 / dn));
    worst = std::max(worst, std::abs(wasserstein(c22.truth(n), lim22, 1) - 1.5 / std::sqrt(dn)));
  }
  const auto& r21 = run.run("2.1");
  const auto& r22 = run.run("2.2");
  const bool ok = in_band(r21, -0.35, -0.04) && in_band(r22, -0.25, -0.01) && worst <= 1e-9;
  verdict("3", ok,
          "case 2.1 slope " + slope_text(r21) + " in [-0.35, -0.04]; case 2.2 slope " + slope_text(r22) +
              " in [-0.25, -0.01]; analytic W1 error " + fmt("%.2g", worst) + " (<= 1e-9)");
}

void matched_criterion(Runner& run) {
  const auto& a1 = run.run("4.1");
  const auto& ws = run.run("4.1", Selector::WS);
  const auto& s = at_2000(a1);
  const double ratio = at_2000(ws).mean_w1_all / s.mean_w1_all;
  const bool ok = in_band(a1, -0.70, -0.32) && s.fraction_target >= 0.80 && ratio >= 3.0;
  verdict("5", ok,
          "case 4.1: slope " + slope_text(a1) + " in [-0.70, -0.32]; fraction m_hat=2 = " +
              fmt("%.2f", s.fraction_target) + " (>= 0.80); WS/Alg1 mean W1 at n=" + std::to_string(s.n) + " = " +
              fmt("%.2f", ratio) + " (>= 3)");
}

fs::path slc_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("MIXEST_SLC_DATA")) return env;
  return fs::path(MIXEST_SOURCE_DIR) / "data" / "slc.txt";
}

void slc_criterion(const fs::path& path) {
  if (!fs::exists(path)) {
    std::printf("criterion 6   SKIP  no SLC data file at %s\n", path.string().c_str());
    return;
  }
  FitConfig fit;
  const SlcResult r = slc_pipeline(path, CnRule{}, fit);
  const double ref[5] = {0.264, 0.368, 0.231, 0.118, 0.065};
  bool ok = r.selection.m_hat == 2;
  std::string detail = "m_hat = " + std::to_string(r.selection.m_hat);
  if (ok) {
    // Components come ordered by descending mean, matching the reference row.
    const double got[5] = {r.row.p[0], r.row.eta[0], r.row.eta[1], r.row.tau[0], r.row.tau[1]};
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(got[i] - ref[i]));
    ok = worst <= 0.06;
    detail += "; (p1, eta1, eta2, tau1, tau2) = (" + fmt("%.3f", got[0]) + ", " + fmt("%.3f", got[1]) + ", " +
              fmt("%.3f", got[2]) + ", " + fmt("%.3f", got[3]) + ", " + fmt("%.3f", got[4]) +
              "), max deviation " + fmt("%.3f", worst) + " (<= 0.06)";
  }
  verdict("6", ok, detail);
}

void determinism_criterion(Runner& run) {
  // Rerun the case 1.1 suite with a different thread count.
  const auto& first = run.run("1.1");
  CaseSpec spec = builtin_case("1.1", run.preset, run.seed);
  const int threads = omp_get_max_threads() == 1 ? 2 : 1;
  const ExperimentReport again = run_case(spec, threads);
  const bool ok = again.csv() == first.csv() && again.summary_json().dump() == first.summary_json().dump();
  verdict("7f", ok, "case 1.1 rerun with " + std::to_string(threads) + " thread(s): reports " +
                        (ok ? "byte-identical" : "differ"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  bool oracles = false, simulations = false;
  std::string preset = "desk", slc, out_dir = "acceptance_reports";
  std::uint64_t seed = 0;
  std::set<std::string> only;
  app.add_flag("--oracles", oracles, "Run the oracle suites 7a-7d");
  app.add_flag("--simulations", simulations, "Run criteria 1-6, 7e and 7f");
  app.add_option("--preset", preset, "quick, desk or full")->capture_default_str();
  app.add_option("--seed", seed, "Base seed")->capture_default_str();
  app.add_option("--slc", slc, "SLC data file (default: $MIXEST_SLC_DATA or data/slc.txt)");
  app.add_option("--out-dir", out_dir, "Where per-case reports go")->capture_default_str();
  app.add_option("--only", only, "Subset of simulation criteria, e.g. --only 1 5");
  CLI11_PARSE(app, argc, argv);
  if (!oracles && !simulations) oracles = simulations = true;
  auto want = [&](const std::string& c) { return only.empty() || only.count(c) > 0; };

  try {
    if (oracles) {
      oracle_wasserstein();
      oracle_hellinger();
      oracle_convolution();
      oracle_gradient();
    }
    if (simulations) {
      const auto t0 = std::chrono::steady_clock::now();
      fs::create_directories(out_dir);
      Runner run{parse_preset(preset), seed, out_dir};
      if (want("1")) rate_criterion(run, "1", "1.1", -0.70, -0.32, 0.90);
      if (want("2")) rate_criterion(run, "2", "1.3", -0.35, -0.04, 0.80);
      if (want("3")) varying_criterion(run);
      if (want("4")) rate_criterion(run, "4", "3.1", -0.70, -0.32, 0.80);
      if (want("5")) matched_criterion(run);
      if (want("6")) slc_criterion(slc_path(slc));
      if (!run.done.empty())
        verdict("7e", run.max_violation <= 1e-12,
                "max h(m+1) - h(m) over every sweep = " + fmt("%.3g", run.max_violation) + " (<= 1e-12)");
      if (want("7f")) determinism_criterion(run);
      std::printf("simulation wall time %.0f s on %d thread(s)\n",
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), omp_get_max_threads());
    }
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}

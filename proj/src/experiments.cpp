#include "mixest/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mixest/rng.hpp"

namespace mixest {

double CnRule::operator()(std::size_t n, std::size_t d1) const {
  switch (kind) {
    case Kind::Bic:
      return bic_cn(n, d1);
    case Kind::Aic:
      return 3.0 / static_cast<double>(n);
    case Kind::Fixed:
      return value;
  }
  return value;
}

std::string CnRule::name() const {
  switch (kind) {
    case Kind::Bic:
      return "bic";
    case Kind::Aic:
      return "aic";
    case Kind::Fixed:
      return format_double(value);
  }
  return "?";
}

CnRule CnRule::parse(const std::string& s) {
  if (s == "bic") return {Kind::Bic, 0.0};
  if (s == "aic") return {Kind::Aic, 0.0};
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(v >= 0.0) || !std::isfinite(v))
    throw InputError("C_n must be 'bic', 'aic' or a nonnegative number, got '" + s + "'");
  return {Kind::Fixed, v};
}

void CaseSpec::validate() const {
  if (!truth || !target) throw InputError("case " + id + ": truth and target measures are required");
  if (sample_sizes.empty()) throw InputError("case " + id + ": no sample sizes");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 2) throw InputError("case " + id + ": sample sizes must be >= 2");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1])
      throw InputError("case " + id + ": sample sizes must be strictly increasing");
  }
  if (replications < 1) throw InputError("case " + id + ": replications must be >= 1");
  if (!(sigma0 > 0.0)) throw InputError("σ₀ must be positive");
  if (!(sigma1 >= 0.0)) throw InputError("σ₁ must be nonnegative");
  if (m_max < 1) throw InputError("m_max must be >= 1");
}

Preset parse_preset(const std::string& s) {
  if (s == "quick") return Preset::Quick;
  if (s == "desk") return Preset::Desk;
  if (s == "full") return Preset::Full;
  throw InputError("unknown preset '" + s + "' (quick, desk, full)");
}

namespace {

MixingMeasure fixed(std::vector<Atom> atoms, std::vector<double> weights) {
  return canonicalize(std::move(atoms), std::move(weights));
}

std::function<MixingMeasure(std::size_t)> constant(MixingMeasure g) {
  return [g](std::size_t) { return g; };
}

MixingMeasure case1_measure(bool skew) {
  const double big = std::sqrt(10.0), small = std::sqrt(0.05);
  if (skew) return fixed({{0.0, big, 0.0}, {-0.3, small, 0.0}, {0.3, small, 0.0}}, {0.5, 0.25, 0.25});
  return fixed({{0.0, big}, {-0.3, small}, {0.3, small}}, {0.5, 0.25, 0.25});
}

}  // namespace

std::vector<std::string> builtin_case_ids() {
  return {"1.1", "1.2", "1.3", "2.1", "2.2", "3.1", "3.2", "4.1", "4.2"};
}

CaseSpec builtin_case(const std::string& id, Preset preset, std::uint64_t seed) {
  CaseSpec c;
  c.id = id;
  c.base_seed = seed;
  c.cn = {CnRule::Kind::Bic, 0.0};
  c.sigma1 = 1.0;
  c.sigma0 = 1.0;

  if (id == "1.1" || id == "1.2" || id == "1.3") {
    const bool cauchy = id == "1.2", skew = id == "1.3";
    c.generator = cauchy ? KernelFamily::cauchy() : skew ? KernelFamily::skew_normal() : KernelFamily::gaussian();
    c.kernel = cauchy ? KernelTag::Cauchy : KernelTag::Gaussian;
    c.truth = constant(case1_measure(skew));
    c.target_order = 3;
  } else if (id == "2.1") {
    c.generator = KernelFamily::gaussian_loc(1.0);
    c.truth = [](std::size_t n) {
      const double e = 1.0 / static_cast<double>(n);
      return fixed({{1.0 - e}, {1.0 + e}, {2.0}}, {0.25, 0.25, 0.5});
    };
    c.target_order = 3;
  } else if (id == "2.2") {
    c.generator = KernelFamily::cauchy_loc(1.0);
    c.kernel = KernelTag::Cauchy;
    c.truth = [](std::size_t n) {
      const double e = 1.0 / std::sqrt(static_cast<double>(n));
      return fixed({{1.0 - e}, {1.0 + e}, {1.0 + 2.0 * e}}, {0.25, 0.25, 0.5});
    };
    c.target_order = 3;
  } else if (id == "3.1" || id == "3.2") {
    const bool cauchy = id == "3.2";
    c.fit_family = cauchy ? KernelFamily::cauchy() : KernelFamily::gaussian();
    c.generator = c.fit_family.with_shift(2.0);
    c.kernel = cauchy ? KernelTag::Cauchy : KernelTag::Gaussian;
    c.truth = constant(fixed({{0.0, 2.0}, {1.0, 3.0}}, {1.0 / 3.0, 2.0 / 3.0}));
    c.target = constant(fixed({{-2.0, 2.0}, {-1.0, 3.0}, {2.0, 2.0}, {3.0, 3.0}},
                              {1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0}));
    c.target_order = 4;
  } else if (id == "4.1" || id == "4.2") {
    const bool cauchy = id == "4.2";
    c.generator = cauchy ? KernelFamily::cauchy_loc(2.0) : KernelFamily::gaussian_loc(2.0);
    c.fit_family = cauchy ? KernelFamily::cauchy_loc(1.0) : KernelFamily::gaussian_loc(1.0);
    c.kernel = cauchy ? KernelTag::Cauchy : KernelTag::Gaussian;
    c.sigma1 = 2.0;
    c.sigma0 = 1.0;
    c.truth = constant(fixed({{-1.0}, {2.0}}, {1.0 / 3.0, 2.0 / 3.0}));
    c.target_order = 2;
  } else {
    throw InputError("unknown case '" + id + "'");
  }
  if (id[0] == '1' || id[0] == '2') c.fit_family = c.generator;
  if (!c.target) c.target = c.truth;

  std::size_t count = 20, step = 200;
  switch (preset) {
    case Preset::Quick:
      count = 3;
      step = 400;
      c.replications = 4;
      break;
    case Preset::Desk:
      count = 10;
      c.replications = 50;
      break;
    case Preset::Full:
      c.replications = 100;
      break;
  }
  for (std::size_t i = 1; i <= count; ++i) c.sample_sizes.push_back(step * i);

  c.m_max = c.target_order + 3;
  c.fit.kernel = c.kernel;
  c.fit.sigma1 = c.sigma1;
  c.fit.sigma0 = c.sigma0;
  c.fit.seed = seed;
  // Simulation fits run thousands of times; a coarser grid and fewer starts
  // keep the desk preset within a few core-hours.
  c.fit.grid.points = 1025;
  c.fit.starts = 8;
  c.fit.max_iters = 300;
  c.fit.tol = 1e-9;
  return c;
}

std::uint64_t replication_seed(std::uint64_t base, std::size_t n, std::size_t rep) {
  return derive_seed({base, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
}

namespace {

ReplicationRow run_one(const CaseSpec& spec, std::size_t n, std::size_t rep) {
  ReplicationRow row;
  row.n = n;
  row.rep = rep;
  const std::uint64_t seed = replication_seed(spec.base_seed, n, rep);
  try {
    const Sample data = sample(spec.truth(n), spec.generator, n, seed);
    FitConfig fit = spec.fit;
    fit.seed = derive_seed({seed, 0x5eedULL});
    SelectionOptions opts;
    opts.m_max = spec.m_max;
    const double cn = spec.cn(n, spec.fit_family.dim());
    SelectionResult sel;
    switch (spec.selector) {
      case Selector::Algorithm1:
        sel = algorithm1(data, spec.fit_family, spec.sigma1, spec.sigma0, cn, fit, opts);
        break;
      case Selector::Algorithm2:
        sel = algorithm2(data, spec.fit_family, spec.sigma1, spec.sigma0, cn, fit, opts);
        break;
      case Selector::WS:
        sel = ws_algorithm(data, spec.fit_family, spec.sigma0, cn, fit, opts);
        break;
    }
    row.m_hat = sel.m_hat;
    row.cap_hit = sel.cap_hit;
    row.monotonicity_violation = sel.max_monotonicity_violation();
    row.w1 = wasserstein(sel.g_hat, spec.target(n), 1.0);
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
    row.m_hat = 0;
    row.w1 = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

}  // namespace

ExperimentReport run_case(const CaseSpec& spec, int threads) {
  spec.validate();
  const std::size_t sizes = spec.sample_sizes.size();
  const std::size_t total = sizes * spec.replications;
  std::vector<ReplicationRow> rows(total);
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
  for (std::size_t k = 0; k < total; ++k) {
    // Largest n first so the slow tail does not land at the end of the schedule.
    const std::size_t idx = total - 1 - k;
    rows[idx] = run_one(spec, spec.sample_sizes[idx / spec.replications], idx % spec.replications);
  }
  return summarize(spec.id, std::move(rows), spec.target_order);
}

ExperimentReport summarize(const std::string& case_id, std::vector<ReplicationRow> rows,
                           std::size_t target_order) {
  std::sort(rows.begin(), rows.end(), [](const ReplicationRow& a, const ReplicationRow& b) {
    return a.n != b.n ? a.n < b.n : a.rep < b.rep;
  });
  ExperimentReport r;
  r.case_id = case_id;
  r.rows = std::move(rows);

  std::vector<std::pair<double, double>> rate_rows;
  for (std::size_t i = 0; i < r.rows.size();) {
    std::size_t j = i;
    while (j < r.rows.size() && r.rows[j].n == r.rows[i].n) ++j;
    SizeSummary s;
    s.n = r.rows[i].n;
    std::size_t ok = 0;
    double sum_all = 0.0;
    for (std::size_t t = i; t < j; ++t) {
      const auto& row = r.rows[t];
      r.max_monotonicity_violation = std::max(r.max_monotonicity_violation, row.monotonicity_violation);
      if (row.failed) {
        ++s.failures;
        continue;
      }
      ++s.m_counts[row.m_hat];
      ++ok;
      sum_all += row.w1;
    }
    if (ok > 0) {
      std::size_t best = 0;
      for (const auto& [m, c] : s.m_counts)
        if (c > best) {  // map order: ties keep the smaller m
          best = c;
          s.modal_m = m;
        }
      const auto it = s.m_counts.find(target_order);
      s.fraction_target = it == s.m_counts.end() ? 0.0 : static_cast<double>(it->second) / ok;
      s.mean_w1_all = sum_all / static_cast<double>(ok);
      double sum = 0.0;
      for (std::size_t t = i; t < j; ++t)
        if (!r.rows[t].failed && r.rows[t].m_hat == s.modal_m) sum += r.rows[t].w1;
      s.mean_w1_modal = sum / static_cast<double>(best);
      double ss = 0.0;
      for (std::size_t t = i; t < j; ++t)
        if (!r.rows[t].failed && r.rows[t].m_hat == s.modal_m) {
          const double d = r.rows[t].w1 - s.mean_w1_modal;
          ss += d * d;
        }
      s.sd_w1_modal = best > 1 ? std::sqrt(ss / static_cast<double>(best - 1)) : 0.0;
      s.se_w1_modal = s.sd_w1_modal / std::sqrt(static_cast<double>(best));
      if (s.mean_w1_modal > 0.0) rate_rows.emplace_back(static_cast<double>(s.n), s.mean_w1_modal);
    }
    r.sizes.push_back(std::move(s));
    i = j;
  }
  if (rate_rows.size() >= 3) {
    r.rate = rate_slope(rate_rows);
    r.rate_defined = true;
  }
  return r;
}

RateFit rate_slope(const std::vector<std::pair<double, double>>& rows) {
  if (rows.size() < 3) throw InputError("rate slope needs at least 3 rows");
  const double k = static_cast<double>(rows.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [n, w] : rows) {
    if (!(n > 0.0)) throw InputError("sample sizes must be positive");
    if (!(w > 0.0) || !std::isfinite(w)) throw InputError("mean W1 must be positive, got " + format_double(w));
    mx += std::log(n);
    my += std::log(w);
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, w] : rows) {
    const double dx = std::log(n) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(w) - my);
  }
  if (!(sxx > 0.0)) throw InputError("sample sizes must not all be equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& [n, w] : rows) {
    const double e = std::log(w) - intercept - fit.slope * std::log(n);
    rss += e * e;
  }
  fit.stderr_ = std::sqrt(rss / (k - 2.0) / sxx);
  return fit;
}

const SizeSummary& ExperimentReport::at(std::size_t n) const {
  for (const auto& s : sizes)
    if (s.n == n) return s;
  throw InputError("no sample size " + std::to_string(n) + " in report for case " + case_id);
}

std::string ExperimentReport::csv() const {
  std::string out = "case,n,rep,m_hat,w1\n";
  for (const auto& row : rows) {
    out += case_id + ',' + std::to_string(row.n) + ',' + std::to_string(row.rep) + ',' +
           std::to_string(row.m_hat) + ',' + (row.failed ? std::string("nan") : format_double(row.w1)) + '\n';
  }
  return out;
}

Json ExperimentReport::summary_json() const {
  Json j;
  j["case"] = case_id;
  j["sizes"] = Json::array();
  for (const auto& s : sizes) {
    Json counts = Json::object();
    for (const auto& [m, c] : s.m_counts) counts[std::to_string(m)] = c;
    j["sizes"].push_back({{"n", s.n},
                          {"modal_m", s.modal_m},
                          {"fraction_target", s.fraction_target},
                          {"mean_w1_modal", s.mean_w1_modal},
                          {"sd_w1_modal", s.sd_w1_modal},
                          {"se_w1_modal", s.se_w1_modal},
                          {"mean_w1_all", s.mean_w1_all},
                          {"failures", s.failures},
                          {"m_counts", counts}});
  }
  if (rate_defined) j["rate"] = {{"slope", rate.slope}, {"stderr", rate.stderr_}};
  else j["rate"] = nullptr;
  j["max_monotonicity_violation"] = max_monotonicity_violation;
  Json errors = Json::array();
  for (const auto& row : rows)
    if (row.failed) errors.push_back({{"n", row.n}, {"rep", row.rep}, {"error", row.error}});
  j["failures"] = errors;
  return j;
}

std::string ExperimentReport::plot_data() const {
  std::string out = "# log_n log_mean_w1 sd se n mean_w1 fraction_target\n";
  for (const auto& s : sizes) {
    if (!(s.mean_w1_modal > 0.0)) continue;
    out += format_double(std::log(static_cast<double>(s.n))) + ' ' + format_double(std::log(s.mean_w1_modal)) +
           ' ' + format_double(s.sd_w1_modal) + ' ' + format_double(s.se_w1_modal) + ' ' + std::to_string(s.n) +
           ' ' + format_double(s.mean_w1_modal) + ' ' + format_double(s.fraction_target) + '\n';
  }
  return out;
}

SlcResult slc_fit(const Sample& data, const CnRule& cn, const FitConfig& fit, double sigma, std::size_t m_max) {
  if (data.size() < kSlcObservations)
    throw InputError("SLC data needs " + std::to_string(kSlcObservations) + " observations, got " +
                     std::to_string(data.size()));
  const KernelFamily fam = KernelFamily::gaussian();
  FitConfig cfg = fit;
  cfg.kernel = KernelTag::Gaussian;
  SelectionOptions opts;
  opts.m_max = m_max;
  SlcResult out;
  // The fit depends on the data only through their order statistics.
  Sample sorted = data;
  std::sort(sorted.values.begin(), sorted.values.end());
  out.selection = algorithm1(sorted, fam, sigma, sigma, cn(data.size(), fam.dim()), cfg, opts);
  const auto& g = out.selection.g_hat;
  std::vector<std::size_t> order(g.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return g.atom(a)[0] > g.atom(b)[0]; });
  for (std::size_t i : order) {
    out.row.p.push_back(g.weight(i));
    out.row.eta.push_back(g.atom(i)[0]);
    out.row.tau.push_back(g.atom(i)[1]);
  }
  return out;
}

SlcResult slc_pipeline(const std::filesystem::path& path, const CnRule& cn, const FitConfig& fit, double sigma,
                       std::size_t m_max) {
  if (!std::filesystem::exists(path)) throw InputError("SLC data file not found: " + path.string());
  return slc_fit(read_sample(path), cn, fit, sigma, m_max);
}

}  // namespace mixest

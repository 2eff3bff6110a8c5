#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mixest/error.hpp"
#include "mixest/io.hpp"
#include "mixest/selection.hpp"

namespace mixest {

/// How the selection threshold constant is chosen for each n.
struct CnRule {
  enum class Kind { Bic, Aic, Fixed } kind = Kind::Bic;
  double value = 0.0;  ///< used by Fixed

  /// Bic: sqrt((d1+1) log n / 2); Aic: 3 / n; Fixed: value.
  double operator()(std::size_t n, std::size_t d1) const;
  std::string name() const;
  static CnRule parse(const std::string& s);
};

/// A simulation case: how data are generated, what is fitted, and which
/// measure the W1 error is measured against. Measures may depend on n.
struct CaseSpec {
  std::string id;
  KernelFamily generator = KernelFamily::gaussian();
  KernelFamily fit_family = KernelFamily::gaussian();
  KernelTag kernel = KernelTag::Gaussian;
  double sigma1 = 1.0;
  double sigma0 = 1.0;
  std::function<MixingMeasure(std::size_t)> truth;
  std::function<MixingMeasure(std::size_t)> target;
  CnRule cn;
  std::size_t target_order = 1;
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = 1;
  std::uint64_t base_seed = 0;
  Selector selector = Selector::Algorithm1;
  std::size_t m_max = 10;
  FitConfig fit;

  void validate() const;
};

enum class Preset { Quick, Desk, Full };
Preset parse_preset(const std::string& s);

/// Simulation cases 1.1-4.2 at the given preset: desk = n 200..2000 step 200 with
/// 50 replications, full = 200..4000 with 100, quick = 3 sizes x 4 reps.
CaseSpec builtin_case(const std::string& id, Preset preset = Preset::Desk, std::uint64_t seed = 0);
std::vector<std::string> builtin_case_ids();

/// Seed of replication `rep` at sample size n.
std::uint64_t replication_seed(std::uint64_t base, std::size_t n, std::size_t rep);

struct ReplicationRow {
  std::size_t n = 0;
  std::size_t rep = 0;
  std::size_t m_hat = 0;
  double w1 = 0.0;
  bool cap_hit = false;
  bool failed = false;
  std::string error;
  double monotonicity_violation = 0.0;
};

struct SizeSummary {
  std::size_t n = 0;
  std::size_t modal_m = 0;
  double fraction_target = 0.0;
  double mean_w1_modal = 0.0;
  double sd_w1_modal = 0.0;
  double se_w1_modal = 0.0;
  double mean_w1_all = 0.0;
  std::size_t failures = 0;
  std::map<std::size_t, std::size_t> m_counts;
};

struct RateFit {
  double slope = 0.0;
  double stderr_ = 0.0;
};

struct ExperimentReport {
  std::string case_id;
  std::vector<ReplicationRow> rows;  ///< ordered by (n, rep)
  std::vector<SizeSummary> sizes;
  RateFit rate;
  bool rate_defined = false;
  double max_monotonicity_violation = 0.0;

  const SizeSummary& at(std::size_t n) const;
  std::string csv() const;         ///< case,n,rep,m_hat,w1
  Json summary_json() const;
  std::string plot_data() const;  ///< log n, log mean W1, sd and se error bars
};

/// Runs every (n, rep) of the case; `threads` = 0 keeps the OpenMP default.
ExperimentReport run_case(const CaseSpec& spec, int threads = 0);

/// Aggregates raw rows with the modal-m rule and fits the log-log rate.
ExperimentReport summarize(const std::string& case_id, std::vector<ReplicationRow> rows,
                           std::size_t target_order);

/// OLS slope of ln(mean W1) on ln n and its standard error; needs >= 3 rows.
RateFit rate_slope(const std::vector<std::pair<double, double>>& rows);

struct SlcRow {
  std::vector<double> p, eta, tau;  ///< components ordered by descending mean
};

struct SlcResult {
  SelectionResult selection;
  SlcRow row;
};

inline constexpr std::size_t kSlcObservations = 190;

/// Algorithm 1 with a gaussian loc-scale family, sigma1 = sigma0 = 0.05 by
/// default, on a file of (at least) 190 observations.
SlcResult slc_pipeline(const std::filesystem::path& path, const CnRule& cn, const FitConfig& fit,
                       double sigma = 0.05, std::size_t m_max = 10);
SlcResult slc_fit(const Sample& data, const CnRule& cn, const FitConfig& fit, double sigma = 0.05,
                  std::size_t m_max = 10);

}  // namespace mixest

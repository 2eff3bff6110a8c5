#include "mixest/selection.hpp"

#include <cmath>
#include <limits>

#include "mixest/error.hpp"

namespace mixest {

std::string to_string(Selector s) {
  switch (s) {
    case Selector::Algorithm1: return "algorithm1";
    case Selector::Algorithm2: return "algorithm2";
    case Selector::WS: return "ws";
  }
  return "?";
}

double SelectionResult::max_monotonicity_violation() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sweep.size(); ++i)
    worst = std::max(worst, sweep[i].h_value - sweep[i - 1].h_value);
  return sweep.size() < 2 ? 0.0 : worst;
}

namespace {

class Sweep {
 public:
  Sweep(const Sample& data, const KernelFamily& fam, double sigma1, double sigma0,
        const FitConfig& fit, std::size_t m_max)
      : problem_(data, fam, configure(fit, sigma1, sigma0, m_max)) {}

  const FitResult& at(std::size_t m) {
    while (fits_.size() < m) {
      const std::size_t next = fits_.size() + 1;
      try {
        if (fits_.empty()) {
          fits_.push_back(fit_fixed_order(problem_, next));
        } else {
          const FitResult& prev = fits_.back();
          std::vector<MixingMeasure> extra{
              warm_start_split(prev, problem_.family(), problem_.data_scale(), problem_.box())};
          fits_.push_back(fit_fixed_order(problem_, next, extra, &prev));
        }
      } catch (const std::exception& e) {
        throw SelectionError("fit of order " + std::to_string(next) + " failed: " + e.what(), fits_);
      }
    }
    return fits_[m - 1];
  }

  std::vector<FitResult> take() { return std::move(fits_); }
  std::size_t n() const { return problem_.data().size(); }

 private:
  static FitConfig configure(FitConfig cfg, double sigma1, double sigma0, std::size_t m_max) {
    if (m_max < 1) throw InputError("m_max must be >= 1");
    cfg.sigma1 = sigma1;
    cfg.sigma0 = sigma0;
    cfg.max_components = m_max;
    cfg.validate();
    return cfg;
  }

  FitProblem problem_;
  std::vector<FitResult> fits_;
};

SelectionResult finish(Selector sel, Sweep& sweep, std::size_t m_hat, bool cap_hit,
                       std::vector<ThresholdStep> trace, double sigma1, double sigma0) {
  SelectionResult out;
  out.selector = sel;
  out.m_hat = m_hat;
  out.cap_hit = cap_hit;
  out.trace = std::move(trace);
  out.sweep = sweep.take();
  out.g_hat = out.sweep[m_hat - 1].g_hat;
  out.sigma1 = sigma1;
  out.sigma0 = sigma0;
  return out;
}

SelectionResult difference_rule(Selector sel, const Sample& data, const KernelFamily& fam,
                                double sigma1, double sigma0, double cn, const FitConfig& fit,
                                const SelectionOptions& opts) {
  if (!(sigma0 > 0.0)) throw InputError("sigma0 must be positive");
  if (!(cn >= 0.0)) throw InputError("C_n must be nonnegative");
  Sweep sweep(data, fam, sigma1, sigma0, fit, opts.m_max);
  const double threshold = cn / std::sqrt(static_cast<double>(sweep.n()));
  std::vector<ThresholdStep> trace;
  std::size_t m_hat = 0;
  for (std::size_t m = 1; m < opts.m_max; ++m) {
    if (m_hat != 0 && !opts.full_sweep) break;
    const double hm = sweep.at(m).h_value;
    const double hn = sweep.at(m + 1).h_value;
    const ThresholdStep step{m, hm - hn, threshold, hm <= hn + threshold};
    trace.push_back(step);
    if (step.satisfied && m_hat == 0) m_hat = m;
  }
  const bool cap = m_hat == 0;
  if (cap) {
    m_hat = opts.m_max;
    sweep.at(m_hat);
  }
  return finish(sel, sweep, m_hat, cap, std::move(trace), sigma1, sigma0);
}

}  // namespace

SelectionResult algorithm1(const Sample& data, const KernelFamily& fam, double sigma1,
                           double sigma0, double cn, const FitConfig& fit,
                           const SelectionOptions& opts) {
  return difference_rule(Selector::Algorithm1, data, fam, sigma1, sigma0, cn, fit, opts);
}

SelectionResult ws_algorithm(const Sample& data, const KernelFamily& fam, double sigma0,
                             double cn_prime, const FitConfig& fit, const SelectionOptions& opts) {
  return difference_rule(Selector::WS, data, fam, 0.0, sigma0, cn_prime, fit, opts);
}

SelectionResult algorithm2(const Sample& data, const KernelFamily& fam, double sigma1,
                           double sigma0, double epsilon, const FitConfig& fit,
                           const SelectionOptions& opts) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (!(sigma0 > 0.0)) throw InputError("sigma0 must be positive");
  Sweep sweep(data, fam, sigma1, sigma0, fit, opts.m_max);
  std::vector<ThresholdStep> trace;
  std::size_t m_hat = 0;
  for (std::size_t m = 1; m <= opts.m_max; ++m) {
    if (m_hat != 0 && !opts.full_sweep) break;
    const double hm = sweep.at(m).h_value;
    trace.push_back({m, hm, epsilon, hm < epsilon});
    if (hm < epsilon && m_hat == 0) m_hat = m;
  }
  const bool cap = m_hat == 0;
  if (cap) m_hat = opts.m_max;
  return finish(Selector::Algorithm2, sweep, m_hat, cap, std::move(trace), sigma1, sigma0);
}

double bic_cn(std::size_t n, std::size_t d1) {
  if (n < 2) throw InputError("bic_cn needs n >= 2");
  return std::sqrt(static_cast<double>(d1 + 1) * std::log(static_cast<double>(n)) / 2.0);
}

bool epsilon_feasibility(const MixingMeasure& g0, double ratio_lb, double epsilon) {
  if (!(ratio_lb > 0.0)) throw InputError("ratio lower bound must be positive");
  const auto [mass, sep] = min_mass_separation(g0);
  return ratio_lb * mass * sep >= epsilon;
}

}  // namespace mixest

#include "mixest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <string>

#include "mixest/divergences.hpp"
#include "mixest/error.hpp"

namespace mixest {

void FitConfig::validate() const {
  if (max_components < 1) throw InputError("number of components m must be >= 1");
  if (!(sigma0 > 0.0)) throw InputError("sigma0 must be positive");
  if (!(sigma1 >= 0.0)) throw InputError("sigma1 must be >= 0");
  if (starts < 1) throw InputError("starts must be >= 1");
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  if (!(weight_floor >= 0.0) || weight_floor * static_cast<double>(max_components) >= 1.0)
    throw InputError("weight_floor must lie in [0, 1/m)");
}

namespace {

QuadratureGrid make_grid(const Sample& data, const KernelFamily& fam, const FitConfig& cfg) {
  cfg.validate();
  const KernelFamily fams[] = {fam};
  return build_grid(data, fams, std::max(cfg.sigma0, cfg.sigma1), cfg.grid);
}

}  // namespace

FitProblem::FitProblem(Sample data, const KernelFamily& fam, const FitConfig& cfg)
    : data_(std::move(data)),
      fam_(fam),
      cfg_(cfg),
      grid_(make_grid(data_, fam, cfg)),
      smoothed_(convolve(fam, SmoothingKernel{cfg.kernel, cfg.sigma1}, &grid_)),
      box_(cfg.box ? *cfg.box
                   : default_box(data_, fam, grid_, cfg.sigma1,
                                 smoothed_.mode() == SmoothedFamily::Mode::Numeric)),
      kde_(smoothed_empirical(data_, SmoothingKernel{cfg.kernel, cfg.sigma0}, grid_)),
      data_scale_(robust_scale(data_.values)) {
  if (box_.dim() != fam.dim()) throw InputError("parameter box dimension does not match family");
  sqrt_kde_.resize(kde_.size());
  for (std::size_t j = 0; j < kde_.size(); ++j) sqrt_kde_[j] = std::sqrt(kde_[j]);
}

ParameterBox default_box(const Sample& data, const KernelFamily& fam, const QuadratureGrid& grid,
                         double sigma1, bool numeric_convolution) {
  const double s = std::max(robust_scale(data.values), 1e-8);
  std::vector<double> lo, hi;
  lo.push_back(quantile(data.values, 0.005) - 1.0);
  hi.push_back(quantile(data.values, 0.995) + 1.0);
  if (fam.dim() >= 2) {
    double floor = 0.01 * s;
    if (numeric_convolution || sigma1 < 4.0 * grid.step()) floor = std::max(floor, 4.0 * grid.step());
    lo.push_back(floor);
    hi.push_back(std::max(10.0 * s, 2.0 * floor));
  }
  if (fam.dim() >= 3) {
    lo.push_back(-20.0);
    hi.push_back(20.0);
  }
  return ParameterBox(lo, hi);
}

namespace {

// Projection onto {p : p_i >= floor, sum p = 1}.
std::vector<double> project_simplex(std::vector<double> v, double floor) {
  const std::size_t k = v.size();
  const double mass = 1.0 - floor * static_cast<double>(k);
  for (double& x : v) x -= floor;
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, shift = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    cum += u[i];
    const double t = (cum - mass) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) shift = t;
  }
  for (double& x : v) x = std::max(0.0, x - shift) + floor;
  return v;
}

// Grid-level state of one candidate (weights, atoms).
struct Evaluation {
  std::vector<double> comps;  // k x N
  std::vector<double> grads;  // k x d x N
  std::vector<double> q;      // N
  double affinity = 0.0;
  std::vector<double> grad_w;  // k
  std::vector<double> grad_x;  // k x d
};

class Evaluator {
 public:
  explicit Evaluator(const FitProblem& pb) : pb_(pb), n_(pb.grid().size()), d_(pb.family().dim()) {}

  std::size_t dim() const { return d_; }

  void components(std::span<const double> atoms, Evaluation& e, bool with_grad) const {
    const std::size_t k = atoms.size() / d_;
    e.comps.resize(k * n_);
    e.grads.resize(with_grad ? k * d_ * n_ : 0);
    for (std::size_t i = 0; i < k; ++i) {
      pb_.smoothed().evaluate(atoms.subspan(i * d_, d_), pb_.grid(),
                              std::span<double>(e.comps).subspan(i * n_, n_),
                              with_grad ? std::span<double>(e.grads).subspan(i * d_ * n_, d_ * n_)
                                        : std::span<double>(),
                              kernels::Exec::Serial);
    }
  }

  // Re-evaluates component i only (values, no gradients).
  void component(std::span<const double> atoms, std::size_t i, Evaluation& e) const {
    pb_.smoothed().evaluate(atoms.subspan(i * d_, d_), pb_.grid(),
                            std::span<double>(e.comps).subspan(i * n_, n_), {}, kernels::Exec::Serial);
  }

  double mix(std::span<const double> p, const Evaluation& e, std::vector<double>& q) const {
    q.resize(n_);
    kernels::mixture_serial(p, e.comps, q);
    return kernels::sqrt_dot_serial(pb_.grid().weights(), q, pb_.sqrt_kde());
  }

  void full(std::span<const double> p, std::span<const double> atoms, Evaluation& e,
            bool with_grad) const {
    components(atoms, e, with_grad);
    e.affinity = mix(p, e, e.q);
    if (with_grad) gradients(p, e);
  }

  // Fills grad_w and grad_x from comps/grads/q at weights p.
  void gradients(std::span<const double> p, Evaluation& e) const {
    const std::size_t k = p.size();
    const auto& w = pb_.grid().weights();
    const auto& sg = pb_.sqrt_kde();
    std::vector<double> r(n_);
    for (std::size_t j = 0; j < n_; ++j) r[j] = e.q[j] > 0.0 ? w[j] * sg[j] / std::sqrt(e.q[j]) : 0.0;
    e.grad_w.assign(k, 0.0);
    e.grad_x.assign(k * d_, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += e.comps[i * n_ + j] * r[j];
      e.grad_w[i] = 0.5 * s;
      if (e.grads.empty()) continue;
      for (std::size_t c = 0; c < d_; ++c) {
        const double* g = &e.grads[(i * d_ + c) * n_];
        double t = 0.0;
        for (std::size_t j = 0; j < n_; ++j) t += g[j] * r[j];
        e.grad_x[i * d_ + c] = 0.5 * p[i] * t;
      }
    }
  }

 private:
  const FitProblem& pb_;
  std::size_t n_, d_;
};

struct Outcome {
  std::vector<double> weights;
  std::vector<double> atoms;
  double affinity = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

class LocalAscent {
 public:
  LocalAscent(const FitProblem& pb)
      : pb_(pb),
        ev_(pb),
        d_(pb.family().dim()),
        n_(pb.grid().size()),
        numeric_(pb.smoothed().mode() == SmoothedFamily::Mode::Numeric) {}

  Outcome run(const MixingMeasure& start) const {
    const std::size_t k = start.size();
    const std::size_t nx = k * d_;
    const auto& cfg = pb_.config();
    const double floor = std::min(cfg.weight_floor, 0.5 / static_cast<double>(k));

    std::vector<double> lo(nx), hi(nx), width(nx), x(nx);
    for (std::size_t i = 0; i < k; ++i) {
      const Atom a = pb_.box().clamp(start.atom(i));
      for (std::size_t c = 0; c < d_; ++c) {
        lo[i * d_ + c] = pb_.box().lower()[c];
        hi[i * d_ + c] = pb_.box().upper()[c];
        width[i * d_ + c] = hi[i * d_ + c] - lo[i * d_ + c];
        x[i * d_ + c] = a[c];
      }
    }
    std::vector<double> p = project_simplex(start.weights(), floor);

    Evaluation cur;
    ev_.full(p, x, cur, true);
    check_finite(cur.affinity);
    Outcome out;
    out.trace.push_back(cur.affinity);

    std::vector<double> H;  // inverse Hessian approximation of -A, nx x nx
    std::vector<char> prev_free;
    bool scaled = false;

    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
      out.iterations = it;
      const double a0 = cur.affinity;
      weight_step(p, cur, floor);

      // Projected quasi-Newton step on the atoms.
      const std::vector<double> g = cur.grad_x;
      std::vector<char> free(nx);
      for (std::size_t j = 0; j < nx; ++j)
        free[j] = !((x[j] <= lo[j] && g[j] < 0.0) || (x[j] >= hi[j] && g[j] > 0.0));
      if (H.empty() || free != prev_free) {
        H = initial_inverse_hessian(g, width, free);
        scaled = false;
      }
      prev_free = free;
      std::vector<double> dir = matvec(H, g, free);
      if (dot(g, dir) <= 0.0) {
        H = initial_inverse_hessian(g, width, free);
        scaled = false;
        dir = matvec(H, g, free);
      }

      Evaluation trial;
      std::vector<double> xt(nx), step(nx);
      bool moved = false;
      double alpha = 1.0;
      for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
        bool any = false;
        for (std::size_t j = 0; j < nx; ++j) {
          xt[j] = std::clamp(x[j] + alpha * dir[j], lo[j], hi[j]);
          step[j] = xt[j] - x[j];
          any = any || step[j] != 0.0;
        }
        if (!any) break;
        // Gradients of numerically convolved families cost d extra
        // convolutions, so trials are valued first.
        ev_.full(p, xt, trial, !numeric_);
        if (!std::isfinite(trial.affinity)) continue;
        if (trial.affinity >= cur.affinity + 1e-4 * dot(g, step) &&
            trial.affinity >= cur.affinity) {
          if (numeric_) ev_.full(p, xt, trial, true);
          moved = true;
          break;
        }
      }
      if (moved) {
        std::vector<double> y(nx);
        for (std::size_t j = 0; j < nx; ++j) y[j] = -(trial.grad_x[j] - g[j]);
        bfgs_update(H, step, y, free, scaled);
        x = xt;
        cur = std::move(trial);
      }
      out.trace.push_back(cur.affinity);
      if (std::abs(cur.affinity - a0) < cfg.tol) {
        out.converged = true;
        break;
      }
    }

    polish(p, x, lo, hi, width, cur, floor);
    if (cur.affinity > out.trace.back()) out.trace.push_back(cur.affinity);
    out.weights = std::move(p);
    out.atoms = std::move(x);
    out.affinity = cur.affinity;
    return out;
  }

 private:
  static void check_finite(double a) {
    if (!std::isfinite(a)) throw NumericalError("affinity is not finite at the starting point");
  }

  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }

  // Multiplicative fixed-point update p_i <- p_i dA/dp_i * 2 / A, projected
  // onto the floored simplex and backtracked until the affinity does not drop.
  void weight_step(std::vector<double>& p, Evaluation& cur, double floor) const {
    const std::size_t k = p.size();
    if (k == 1) return;
    std::vector<double> target(k);
    for (std::size_t i = 0; i < k; ++i) target[i] = p[i] * 2.0 * cur.grad_w[i] / cur.affinity;
    target = project_simplex(target, floor);
    std::vector<double> q;
    for (double t = 1.0; t > 1e-3; t *= 0.5) {
      std::vector<double> trial(k);
      for (std::size_t i = 0; i < k; ++i) trial[i] = p[i] + t * (target[i] - p[i]);
      trial = project_simplex(trial, floor);
      const double a = ev_.mix(trial, cur, q);
      if (std::isfinite(a) && a >= cur.affinity) {
        p = std::move(trial);
        cur.q = std::move(q);
        cur.affinity = a;
        ev_.gradients(p, cur);
        return;
      }
    }
  }

  static std::vector<double> initial_inverse_hessian(const std::vector<double>& g,
                                                     const std::vector<double>& width,
                                                     const std::vector<char>& free) {
    const std::size_t n = g.size();
    double gmax = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (free[j]) gmax = std::max(gmax, std::abs(g[j]) * width[j]);
    const double lambda = gmax > 0.0 ? 0.05 / gmax : 0.0;
    std::vector<double> H(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) H[j * n + j] = free[j] ? lambda * width[j] * width[j] : 0.0;
    return H;
  }

  static std::vector<double> matvec(const std::vector<double>& H, const std::vector<double>& g,
                                    const std::vector<char>& free) {
    const std::size_t n = g.size();
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!free[i]) continue;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (free[j]) s += H[i * n + j] * g[j];
      d[i] = s;
    }
    return d;
  }

  static void bfgs_update(std::vector<double>& H, const std::vector<double>& s,
                          const std::vector<double>& y, const std::vector<char>& free, bool& scaled) {
    const std::size_t n = s.size();
    const double sy = dot(s, y), yy = dot(y, y), ss = dot(s, s);
    if (!(sy > 1e-12 * std::sqrt(ss * yy))) return;
    if (!scaled) {
      // First curvature pair: replace the heuristic diagonal by (s'y / y'y) I.
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) H[i * n + j] = (i == j && free[i]) ? sy / yy : 0.0;
      scaled = true;
    }
    const double rho = 1.0 / sy;
    std::vector<double> Hy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * y[j];
    const double yHy = dot(y, Hy);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        H[i * n + j] += -rho * (Hy[i] * s[j] + s[i] * Hy[j]) + (rho * rho * yHy + rho) * s[i] * s[j];
      }
    }
  }

  // Derivative-free compass search on atom coordinates, then one more weight step.
  void polish(std::vector<double>& p, std::vector<double>& x, const std::vector<double>& lo,
              const std::vector<double>& hi, const std::vector<double>& width, Evaluation& cur,
              double floor) const {
    const std::size_t nx = x.size();
    std::vector<double> step(nx);
    for (std::size_t j = 0; j < nx; ++j) step[j] = 1e-3 * width[j];
    std::size_t budget = 30 * nx;
    Evaluation trial;
    trial.comps = cur.comps;
    bool changed = false;
    while (budget > 0 && step[0] > 1e-8 * width[0]) {
      bool improved = false;
      for (std::size_t j = 0; j < nx && budget > 0; ++j) {
        const std::size_t i = j / d_;
        for (double sign : {1.0, -1.0}) {
          std::vector<double> xt = x;
          xt[j] = std::clamp(x[j] + sign * step[j], lo[j], hi[j]);
          if (xt[j] == x[j] || budget == 0) continue;
          --budget;
          ev_.component(xt, i, trial);
          trial.affinity = ev_.mix(p, trial, trial.q);
          if (std::isfinite(trial.affinity) && trial.affinity > cur.affinity) {
            x = std::move(xt);
            std::copy_n(trial.comps.begin() + static_cast<std::ptrdiff_t>(i * n_), n_,
                        cur.comps.begin() + static_cast<std::ptrdiff_t>(i * n_));
            cur.q = trial.q;
            cur.affinity = trial.affinity;
            improved = changed = true;
            break;
          }
          std::copy_n(cur.comps.begin() + static_cast<std::ptrdiff_t>(i * n_), n_,
                      trial.comps.begin() + static_cast<std::ptrdiff_t>(i * n_));
        }
      }
      if (!improved)
        for (double& s : step) s *= 0.25;
    }
    if (changed) ev_.full(p, x, cur, true);
    weight_step(p, cur, floor);
  }

  const FitProblem& pb_;
  Evaluator ev_;
  std::size_t d_, n_;
  bool numeric_;
};

std::vector<double> flatten(const MixingMeasure& g) {
  std::vector<double> x;
  for (const auto& a : g.atoms()) x.insert(x.end(), a.begin(), a.end());
  return x;
}

struct Candidate {
  std::optional<FitResult> fit;
  std::string error;
};

// Lowest h, then fewer atoms, then lexicographically smaller atoms.
bool better(const FitResult& a, const FitResult& b) {
  if (a.h_value != b.h_value) return a.h_value < b.h_value;
  if (a.g_hat.size() != b.g_hat.size()) return a.g_hat.size() < b.g_hat.size();
  return a.g_hat.atoms() < b.g_hat.atoms();
}

}  // namespace

AffinityEval evaluate_affinity(const FitProblem& problem, std::span<const double> weights,
                               std::span<const double> atoms, bool with_gradient) {
  Evaluator ev(problem);
  if (atoms.size() != weights.size() * ev.dim()) throw InputError("atoms/weights size mismatch");
  Evaluation e;
  ev.full(weights, atoms, e, with_gradient);
  AffinityEval out;
  out.affinity = e.affinity;
  out.grad_atoms = std::move(e.grad_x);
  out.grad_weights = std::move(e.grad_w);
  return out;
}

ObjectiveValue objective(const MixingMeasure& g, const FitProblem& problem) {
  for (const auto& a : g.atoms()) problem.family().validate(a);
  const std::vector<double> x = flatten(g);
  const double a = evaluate_affinity(problem, g.weights(), x, false).affinity;
  if (!std::isfinite(a)) throw NumericalError("objective is not finite");
  return {hellinger_from_affinity(a), std::min(a, 1.0)};
}

ObjectiveValue objective(const MixingMeasure& g, const Sample& data, const KernelFamily& fam,
                         const FitConfig& cfg) {
  return objective(g, FitProblem(data, fam, cfg));
}

std::vector<MixingMeasure> initial_starts(const Sample& data, const KernelFamily& fam,
                                          std::size_t m, const ParameterBox& box,
                                          std::size_t starts, std::uint64_t seed) {
  if (m < 1) throw InputError("number of components m must be >= 1");
  if (data.values.empty()) throw InputError("empty sample");
  const std::size_t d = fam.dim();
  const double s = std::max(robust_scale(data.values), 1e-8);
  std::vector<double> sorted = data.values;
  std::sort(sorted.begin(), sorted.end());
  const std::vector<double> uniform(m, 1.0 / static_cast<double>(m));

  auto make_atom = [&](double loc, double scale) {
    Atom a(d, 0.0);
    a[0] = loc;
    if (d >= 2) a[1] = scale;
    return box.clamp(a);
  };

  auto random_atoms = [&](Rng& rng, std::vector<Atom>& atoms) {
    atoms.clear();
    for (std::size_t i = 0; i < m; ++i) {
      Atom a(d);
      for (std::size_t c = 0; c < d; ++c) {
        const double l = box.lower()[c], u = box.upper()[c];
        if (fam.role(c) == CoordinateRole::Scale && l > 0.0) {
          a[c] = std::exp(std::uniform_real_distribution<double>(std::log(l), std::log(u))(rng));
        } else {
          a[c] = std::uniform_real_distribution<double>(l, u)(rng);
        }
      }
      atoms.push_back(std::move(a));
    }
  };

  std::vector<MixingMeasure> out;
  out.reserve(starts);
  for (std::size_t idx = 0; idx < starts; ++idx) {
    Rng rng(derive_seed({seed, m, idx}));
    std::vector<Atom> atoms;
    if (idx == 0) {
      for (std::size_t i = 0; i < m; ++i)
        atoms.push_back(make_atom(quantile(sorted, static_cast<double>(i + 1) / static_cast<double>(m + 1)),
                                  s / static_cast<double>(m)));
    } else if (idx % 2 == 1) {
      // k-means++ seeding followed by a few Lloyd iterations in one dimension.
      std::vector<double> centers;
      std::uniform_int_distribution<std::size_t> any(0, sorted.size() - 1);
      centers.push_back(sorted[any(rng)]);
      std::vector<double> d2(sorted.size());
      while (centers.size() < m) {
        for (std::size_t t = 0; t < sorted.size(); ++t) {
          double best = std::numeric_limits<double>::infinity();
          for (double c : centers) best = std::min(best, (sorted[t] - c) * (sorted[t] - c));
          d2[t] = best;
        }
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        if (total <= 0.0) {
          centers.push_back(sorted[any(rng)]);
          continue;
        }
        std::discrete_distribution<std::size_t> pick(d2.begin(), d2.end());
        centers.push_back(sorted[pick(rng)]);
      }
      std::vector<std::size_t> label(sorted.size());
      for (int lloyd = 0; lloyd < 10; ++lloyd) {
        std::vector<double> sum(m, 0.0);
        std::vector<std::size_t> cnt(m, 0);
        for (std::size_t t = 0; t < sorted.size(); ++t) {
          std::size_t b = 0;
          for (std::size_t c = 1; c < m; ++c)
            if (std::abs(sorted[t] - centers[c]) < std::abs(sorted[t] - centers[b])) b = c;
          label[t] = b;
          sum[b] += sorted[t];
          ++cnt[b];
        }
        for (std::size_t c = 0; c < m; ++c)
          if (cnt[c] > 0) centers[c] = sum[c] / static_cast<double>(cnt[c]);
      }
      for (std::size_t c = 0; c < m; ++c) {
        std::vector<double> members;
        for (std::size_t t = 0; t < sorted.size(); ++t)
          if (label[t] == c) members.push_back(sorted[t]);
        const double sd = members.size() >= 2 ? sample_sd(members) : 0.0;
        atoms.push_back(make_atom(centers[c], sd > 0.0 ? sd : s / static_cast<double>(m)));
      }
    } else {
      random_atoms(rng, atoms);
    }
    // k-means seeding often lands on the same clusters; redraw duplicates at random.
    MixingMeasure g(atoms, uniform);
    while (std::find(out.begin(), out.end(), g) != out.end()) {
      random_atoms(rng, atoms);
      g = MixingMeasure(atoms, uniform);
    }
    out.push_back(std::move(g));
  }
  return out;
}

MixingMeasure warm_start_split(const FitResult& prev, const KernelFamily& fam, double data_scale,
                               const ParameterBox& box) {
  const MixingMeasure& g = prev.g_hat;
  const auto heavy = static_cast<std::size_t>(
      std::max_element(g.weights().begin(), g.weights().end()) - g.weights().begin());
  const double delta =
      0.5 * (fam.dim() >= 2 ? g.atom(heavy)[1] : data_scale / 10.0);
  std::vector<Atom> atoms;
  std::vector<double> weights;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i != heavy) {
      atoms.push_back(g.atom(i));
      weights.push_back(g.weight(i));
      continue;
    }
    for (double sign : {-1.0, 1.0}) {
      Atom a = g.atom(i);
      a[0] += sign * delta;
      atoms.push_back(box.clamp(a));
      weights.push_back(0.5 * g.weight(i));
    }
  }
  return MixingMeasure(std::move(atoms), std::move(weights));
}

FitResult fit_fixed_order(const FitProblem& problem, std::size_t m,
                          const std::vector<MixingMeasure>& extra_starts,
                          const FitResult* previous) {
  if (m < 1) throw InputError("number of components m must be >= 1");
  const FitConfig& cfg = problem.config();
  if (cfg.weight_floor * static_cast<double>(m) >= 1.0)
    throw InputError("weight_floor must lie in [0, 1/m)");
  std::vector<MixingMeasure> starts =
      initial_starts(problem.data(), problem.family(), m, problem.box(), cfg.starts, cfg.seed);
  for (const auto& e : extra_starts) {
    if (e.size() > m) throw InputError("extra start has more than m atoms");
    starts.push_back(e);
  }

  std::vector<Candidate> cands(starts.size());
  const LocalAscent ascent(problem);
  const auto ns = static_cast<std::ptrdiff_t>(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < ns; ++s) {
    try {
      const Outcome o = ascent.run(starts[s]);
      const std::size_t d = problem.family().dim();
      std::vector<Atom> atoms;
      for (std::size_t i = 0; i < o.weights.size(); ++i)
        atoms.emplace_back(o.atoms.begin() + static_cast<std::ptrdiff_t>(i * d),
                           o.atoms.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
      // Components pinned at the weight floor are dropped here.
      std::vector<double> w = o.weights;
      const double floor = std::min(cfg.weight_floor, 0.5 / static_cast<double>(w.size()));
      double kept = 0.0;
      for (double& v : w) {
        if (v <= floor * (1.0 + 1e-9)) v = 0.0;
        kept += v;
      }
      if (kept > 0.0) {
        for (double& v : w) v /= kept;
      } else {
        w = o.weights;
      }
      FitResult r;
      r.g_hat = canonicalize(std::move(atoms), w);
      const ObjectiveValue v = objective(r.g_hat, problem);
      r.order = m;
      r.h_value = v.h;
      r.affinity = v.affinity;
      r.iterations = o.iterations;
      r.converged = o.converged;
      r.winning_start = static_cast<std::size_t>(s);
      r.trace = o.trace;
      cands[s].fit = std::move(r);
    } catch (const std::exception& ex) {
      cands[s].error = ex.what();
    }
  }

  const FitResult* best = nullptr;
  for (const auto& c : cands)
    if (c.fit && (!best || better(*c.fit, *best))) best = &*c.fit;
  if (!best) throw NumericalError("every start failed: " + cands.front().error);

  FitResult out = *best;
  out.converged = std::any_of(cands.begin(), cands.end(),
                              [](const Candidate& c) { return c.fit && c.fit->converged; });
  if (previous && previous->h_value < out.h_value) {
    out = *previous;
    out.order = m;
    out.winning_start = starts.size();
  }
  return out;
}

FitResult fit_fixed_order(const Sample& data, const KernelFamily& fam, const FitConfig& cfg) {
  const FitProblem problem(data, fam, cfg);
  return fit_fixed_order(problem, cfg.max_components);
}

}  // namespace mixest

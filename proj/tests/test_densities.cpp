#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include "doctest.h"
#include "mixest/densities.hpp"
#include "mixest/error.hpp"
#include "oracles.hpp"

using namespace mixest;
using doctest::Approx;

namespace {

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> on_grid(const SmoothedFamily& f, std::span<const double> theta, const QuadratureGrid& g) {
  std::vector<double> v(g.size());
  f.evaluate(theta, g, v, {});
  return v;
}

}  // namespace

TEST_CASE("pointwise densities") {
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(eval_density(KernelFamily::gaussian(), std::vector<double>{0.0, 1.0}, 0.0) == Approx(inv_sqrt_2pi).epsilon(1e-15));
  CHECK(eval_density(KernelFamily::cauchy(), std::vector<double>{0.0, 1.0}, 0.0) == Approx(1.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(eval_density(KernelFamily::skew_normal(), std::vector<double>{0.0, 1.0, 0.0}, 0.0) == Approx(inv_sqrt_2pi).epsilon(1e-15));
  CHECK(eval_density(KernelFamily::gaussian_loc(2.0), std::vector<double>{1.0}, 1.0) == Approx(inv_sqrt_2pi / 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_density(KernelFamily::gaussian(), std::vector<double>{0.0, 0.0}, 0.0), InputError);
  CHECK_THROWS_AS(eval_density(KernelFamily::cauchy(), std::vector<double>{0.0, -1.0}, 0.0), InputError);
  CHECK_THROWS_AS(eval_density(KernelFamily::gaussian(), std::vector<double>{0.0}, 0.0), InputError);
}

TEST_CASE("family parsing and dimensions") {
  CHECK(KernelFamily::parse("gaussian").dim() == 2);
  CHECK(KernelFamily::parse("cauchy").dim() == 2);
  CHECK(KernelFamily::parse("skewnormal").dim() == 3);
  CHECK(KernelFamily::parse("gaussian-loc").dim() == 1);
  CHECK(KernelFamily::parse("cauchy-loc:2").fixed_scale() == 2.0);
  CHECK(KernelFamily::parse("student-t:3").dim() == 2);
  CHECK_THROWS_AS(KernelFamily::parse("laplace"), InputError);
  CHECK_THROWS_AS(KernelFamily::parse("student-t:-1"), InputError);
  CHECK_THROWS_AS(SmoothingKernel::parse_tag("box"), InputError);
}

TEST_CASE("shift mixture density") {
  const auto f = KernelFamily::gaussian();
  const auto s = f.with_shift(2.0);
  const std::vector<double> th{0.5, 1.5};
  for (double x : {-3.0, 0.0, 1.0, 4.0})
    CHECK(s.density(th, x) == Approx(0.5 * f.density(th, x - 2.0) + 0.5 * f.density(th, x + 2.0)).epsilon(1e-14));
}

TEST_CASE("families integrate to one") {
  const QuadratureGrid grid(-400.0, 400.0, 200001);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> loc(-2.0, 2.0), sc(0.3, 3.0), sk(-5.0, 5.0);
  for (int t = 0; t < 10; ++t) {
    const double e = loc(rng), s = sc(rng), m = sk(rng);
    const std::vector<std::pair<KernelFamily, std::vector<double>>> cases = {
        {KernelFamily::gaussian(), {e, s}},        {KernelFamily::cauchy(), {e, s}},
        {KernelFamily::skew_normal(), {e, s, m}},  {KernelFamily::gaussian_loc(s), {e}},
        {KernelFamily::cauchy_loc(s), {e}},        {KernelFamily::student_t(4.0), {e, s}},
        {KernelFamily::gaussian().with_shift(2.0), {e, s}}};
    for (const auto& [fam, th] : cases) {
      std::vector<double> v(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j) v[j] = fam.density(th, grid.points()[j]);
      CAPTURE(fam.name());
      // Cauchy-type tails are not negligible at +-400; compare with the exact mass there.
      double mass = 1.0;
      if (fam.cauchy_type()) {
        const double width = fam.scale(th);
        mass = (std::atan((grid.hi() - e) / width) - std::atan((grid.lo() - e) / width)) / std::numbers::pi;
      }
      CHECK(grid.integrate(v) == Approx(mass).epsilon(1e-4));
      CHECK(*std::min_element(v.begin(), v.end()) >= 0.0);
    }
  }
}

TEST_CASE("analytic parameter gradients match finite differences") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> loc(-1.0, 1.0), sc(0.5, 2.0), sk(-3.0, 3.0), xs(-4.0, 4.0);
  const std::vector<KernelFamily> fams{KernelFamily::gaussian(),     KernelFamily::cauchy(),
                                       KernelFamily::skew_normal(),  KernelFamily::gaussian_loc(1.5),
                                       KernelFamily::cauchy_loc(0.7), KernelFamily::student_t(5.0),
                                       KernelFamily::cauchy().with_shift(2.0)};
  for (const auto& fam : fams) {
    for (int t = 0; t < 20; ++t) {
      std::vector<double> th{loc(rng), sc(rng), sk(rng)};
      th.resize(fam.dim());
      const double x = xs(rng);
      std::vector<double> g(fam.dim());
      fam.density_grad(th, x, g);
      for (std::size_t k = 0; k < fam.dim(); ++k) {
        const double h = 1e-6;
        auto a = th, b = th;
        a[k] += h;
        b[k] -= h;
        const double fd = (fam.density(a, x) - fam.density(b, x)) / (2 * h);
        CAPTURE(fam.name());
        CHECK(g[k] == Approx(fd).epsilon(1e-5).scale(1e-3));
      }
    }
  }
}

TEST_CASE("skew normal with zero skewness equals the normal") {
  const QuadratureGrid grid(-10.0, 10.0, 1025);
  for (double e : {-1.0, 0.3})
    for (double s : {0.5, 2.0})
      for (double x : grid.points())
        CHECK(std::abs(eval_density(KernelFamily::skew_normal(), std::vector<double>{e, s, 0.0}, x) -
                       eval_density(KernelFamily::gaussian(), std::vector<double>{e, s}, x)) <= 1e-12);
}

TEST_CASE("closed-form convolutions against direct quadrature") {
  const QuadratureGrid grid(-30.0, 30.0, 4097);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> loc(-3.0, 3.0), sc(0.2, 3.0), bw(0.1, 2.0);
  double worst_g = 0.0, worst_c = 0.0;
  for (int t = 0; t < 20; ++t) {
    const double e = loc(rng), s = sc(rng), sigma = bw(rng);
    const std::vector<double> th{e, s};
    const auto fg = convolve(KernelFamily::gaussian(), {KernelTag::Gaussian, sigma});
    const auto fc = convolve(KernelFamily::cauchy(), {KernelTag::Cauchy, sigma});
    CHECK(fg.mode() == SmoothedFamily::Mode::GaussianClosed);
    CHECK(fc.mode() == SmoothedFamily::Mode::CauchyClosed);
    const auto vg = on_grid(fg, th, grid), vc = on_grid(fc, th, grid);
    for (std::size_t j = 0; j < grid.size(); j += 8) {
      const double x = grid.points()[j];
      const double qg = oracle::convolution_at([&](double u) { return oracle::normal_density(u, e, s); },
                                               [&](double y) { return oracle::normal_density(y, 0.0, sigma); }, x, e);
      const double qc = oracle::convolution_at([&](double u) { return oracle::cauchy_density(u, e, s); },
                                               [&](double y) { return oracle::cauchy_density(y, 0.0, sigma); }, x, e);
      worst_g = std::max(worst_g, std::abs(vg[j] - qg));
      worst_c = std::max(worst_c, std::abs(vc[j] - qc));
    }
  }
  CHECK(worst_g <= 1e-5);
  CHECK(worst_c <= 1e-5);
}

TEST_CASE("closed-form examples") {
  const auto fc = convolve(KernelFamily::cauchy(), {KernelTag::Cauchy, 1.0});
  CHECK(fc.density(std::vector<double>{0.0, 1.0}, 0.0) == Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-15));
  const auto fg = convolve(KernelFamily::gaussian(), {KernelTag::Gaussian, 1.0});
  CHECK(fg.density(std::vector<double>{0.0, std::sqrt(3.0)}, 0.0) ==
        Approx(oracle::normal_density(0.0, 0.0, 2.0)).epsilon(1e-15));
  const auto fl = convolve(KernelFamily::gaussian_loc(2.0), {KernelTag::Gaussian, 1.0});
  CHECK(fl.density(std::vector<double>{0.0}, 0.5) == Approx(oracle::normal_density(0.5, 0.0, std::sqrt(5.0))).epsilon(1e-15));
  const auto fcl = convolve(KernelFamily::cauchy_loc(1.0), {KernelTag::Cauchy, 2.0});
  CHECK(fcl.density(std::vector<double>{1.0}, 0.0) == Approx(oracle::cauchy_density(0.0, 1.0, 3.0)).epsilon(1e-15));
}

TEST_CASE("zero bandwidth is the identity") {
  const QuadratureGrid grid(-10.0, 10.0, 513);
  for (const auto& fam : {KernelFamily::gaussian(), KernelFamily::skew_normal(), KernelFamily::student_t(3.0)}) {
    const auto f = convolve(fam, {KernelTag::Cauchy, 0.0});
    CHECK(f.mode() == SmoothedFamily::Mode::Identity);
    std::vector<double> th{0.2, 1.1, 1.0};
    th.resize(fam.dim());
    const auto v = on_grid(f, th, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) CHECK(v[j] == fam.density(th, grid.points()[j]));
  }
}

TEST_CASE("numerical convolution against direct quadrature") {
  const QuadratureGrid grid(-40.0, 40.0, 4097);
  CHECK_THROWS_AS(convolve(KernelFamily::skew_normal(), {KernelTag::Gaussian, 1.0}), InputError);
  const auto f = convolve(KernelFamily::skew_normal(), {KernelTag::Gaussian, 1.0}, &grid);
  CHECK(f.mode() == SmoothedFamily::Mode::Numeric);
  CHECK_FALSE(f.samplable());
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> loc(-2.0, 2.0), sc(0.3, 3.0), sk(-4.0, 4.0);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const std::vector<double> th{loc(rng), sc(rng), sk(rng)};
    const auto v = on_grid(f, th, grid);
    for (std::size_t j = 0; j < grid.size(); j += 16) {
      const double x = grid.points()[j];
      const double q = oracle::convolution_at([&](double u) { return KernelFamily::skew_normal().density(th, u); },
                                              [](double y) { return oracle::normal_density(y, 0.0, 1.0); }, x, th[0]);
      worst = std::max(worst, std::abs(v[j] - q));
    }
    CHECK(grid.integrate(v) == Approx(1.0).epsilon(1e-6));
  }
  CHECK(worst <= 1e-5);

  // Pointwise values interpolate the cached grid curve.
  const std::vector<double> th{0.3, 1.2, 2.0};
  const auto v = on_grid(f, th, grid);
  CHECK(f.density(th, grid.points()[2000]) == Approx(v[2000]).epsilon(1e-12));
  const double mid = 0.5 * (grid.points()[2000] + grid.points()[2001]);
  const double q = oracle::convolution_at([&](double u) { return KernelFamily::skew_normal().density(th, u); },
                                          [](double y) { return oracle::normal_density(y, 0.0, 1.0); }, mid, th[0]);
  CHECK(std::abs(f.density(th, mid) - q) <= 1e-6);
  CHECK_THROWS_AS(sample(MixingMeasure({th}, {1.0}), f, 10, 1), InputError);
  const QuadratureGrid other(-40.0, 40.0, 2049);
  std::vector<double> buf(other.size());
  CHECK_THROWS_AS(f.evaluate(th, other, buf, {}), InputError);
}

TEST_CASE("numerical convolution is safe under concurrent evaluation") {
  const QuadratureGrid grid(-30.0, 30.0, 2049);
  const auto f = convolve(KernelFamily::student_t(3.0), {KernelTag::Gaussian, 0.8}, &grid);
  std::vector<std::vector<double>> thetas;
  for (int i = 0; i < 40; ++i) thetas.push_back({0.05 * i, 0.5 + 0.03 * i});
  std::vector<double> serial;
  for (const auto& th : thetas)
    for (double x : {-1.0, 0.0, 0.7}) serial.push_back(f.density(th, x));
  std::vector<std::vector<double>> results(4);
  std::vector<std::thread> pool;
  for (int w = 0; w < 4; ++w)
    pool.emplace_back([&, w] {
      for (int rep = 0; rep < 20; ++rep)
        for (const auto& th : thetas)
          for (double x : {-1.0, 0.0, 0.7}) results[w].push_back(f.density(th, x));
    });
  for (auto& t : pool) t.join();
  for (const auto& r : results)
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == serial[i % serial.size()]);
}

TEST_CASE("mixture density") {
  const QuadratureGrid grid(-20.0, 20.0, 4097);
  const auto fam = KernelFamily::gaussian();
  const auto one = mixture_density(MixingMeasure({{0.0, 1.0}}, {1.0}), fam, grid);
  for (std::size_t j = 0; j < grid.size(); j += 64)
    CHECK(one[j] == Approx(oracle::normal_density(grid.points()[j], 0.0, 1.0)).epsilon(1e-14));

  const MixingMeasure g0({{0.0, std::sqrt(10.0)}, {-0.3, std::sqrt(0.05)}, {0.3, std::sqrt(0.05)}}, {0.5, 0.25, 0.25});
  const QuadratureGrid centred(-1.0, 1.0, 257);  // x = 0 is the middle node
  const auto v = mixture_density(g0, fam, centred);
  const double expect = 0.5 * oracle::normal_density(0.0, 0.0, std::sqrt(10.0)) +
                        0.25 * oracle::normal_density(0.0, -0.3, std::sqrt(0.05)) +
                        0.25 * oracle::normal_density(0.0, 0.3, std::sqrt(0.05));
  CHECK(v[128] == Approx(expect).epsilon(1e-14));

  const auto twin = mixture_density(MixingMeasure({{0.0, 1.0}, {0.0, 1.0 + 1e-3}}, {0.5, 0.5}), fam, grid);
  const auto twin_same = mixture_density(canonicalize({{0.0, 1.0}, {0.0, 1.0}}, {0.5, 0.5}), fam, grid);
  CHECK(sup_diff(twin_same, one) <= 1e-15);
  CHECK(grid.integrate(twin) == Approx(1.0).epsilon(1e-3));

  const ParameterBox box({-1.0, 0.1}, {1.0, 2.0});
  CHECK_THROWS_AS(mixture_density(MixingMeasure({{3.0, 1.0}}, {1.0}), fam, grid, &box), InputError);
}

TEST_CASE("kernel density estimate") {
  const QuadratureGrid grid(-1.0, 1.0, 257);
  const SmoothingKernel k{KernelTag::Gaussian, 1.0};
  const auto a = smoothed_empirical(Sample{{0.0}, 0}, k, grid);
  for (std::size_t j = 0; j < grid.size(); ++j)
    CHECK(a[j] == Approx(oracle::normal_density(grid.points()[j], 0.0, 1.0)).epsilon(1e-14));
  const auto b = smoothed_empirical(Sample{{-1.0, 1.0}, 0}, k, grid);
  CHECK(b[128] == Approx(0.241970724519143).epsilon(1e-12));

  CHECK_THROWS_AS(smoothed_empirical(Sample{}, k, grid), InputError);
  CHECK_THROWS_AS(smoothed_empirical(Sample{{1.0}, 0}, SmoothingKernel{KernelTag::Gaussian, 0.0}, grid), InputError);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  Sample s1, s2, both;
  for (int i = 0; i < 37; ++i) s1.values.push_back(z(rng));
  for (int i = 0; i < 53; ++i) s2.values.push_back(3.0 + z(rng));
  both.values = s1.values;
  both.values.insert(both.values.end(), s2.values.begin(), s2.values.end());
  const QuadratureGrid wide(-15.0, 20.0, 2049);
  for (const auto tag : {KernelTag::Gaussian, KernelTag::Cauchy}) {
    const SmoothingKernel kk{tag, 0.7};
    const auto k1 = smoothed_empirical(s1, kk, wide), k2 = smoothed_empirical(s2, kk, wide),
               k12 = smoothed_empirical(both, kk, wide);
    for (std::size_t j = 0; j < wide.size(); ++j) CHECK(std::abs(k12[j] - (37 * k1[j] + 53 * k2[j]) / 90.0) <= 1e-12);
  }
  const auto kg = smoothed_empirical(both, k, wide);
  CHECK(wide.integrate(kg) >= 0.999);
}

TEST_CASE("sampling") {
  const MixingMeasure g({{0.0, 1.0}}, {1.0});
  const auto s = sample(g, KernelFamily::gaussian(), 100000, 42);
  const double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / 1e5;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(sample_sd(s.values) - 1.0) < 0.02);
  CHECK(s.seed == 42);
  CHECK(sample(g, KernelFamily::gaussian(), 500, 42).values == sample(g, KernelFamily::gaussian(), 500, 42).values);
  CHECK(sample(g, KernelFamily::gaussian(), 500, 42).values != sample(g, KernelFamily::gaussian(), 500, 43).values);

  const MixingMeasure degenerate({{-100.0}, {100.0}}, {1.0, 0.0});
  for (double x : sample(degenerate, KernelFamily::gaussian_loc(1.0), 2000, 1).values) CHECK(x < 0.0);
  CHECK_THROWS_AS(sample(g, KernelFamily::gaussian(), 0, 1), InputError);

  // Draws from the smoothed family follow f * K.
  const auto sf = convolve(KernelFamily::gaussian(), {KernelTag::Gaussian, 1.0});
  const auto t = sample(MixingMeasure({{0.0, std::sqrt(3.0)}}, {1.0}), sf, 100000, 8);
  CHECK(std::abs(sample_sd(t.values) - 2.0) < 0.03);

  const auto sk = sample(MixingMeasure({{0.0, 1.0, 5.0}}, {1.0}), KernelFamily::skew_normal(), 100000, 3);
  const double skew_mean = std::accumulate(sk.values.begin(), sk.values.end(), 0.0) / 1e5;
  const double delta = 5.0 / std::sqrt(26.0);
  CHECK(std::abs(skew_mean - delta * std::sqrt(2.0 / std::numbers::pi)) < 0.02);
}

TEST_CASE("grid construction") {
  const auto fam = KernelFamily::gaussian();
  const KernelFamily fams[] = {fam};
  GridPolicy pol;
  pol.scale_max = std::sqrt(10.0);
  const auto g = build_grid(Sample{{-3.0, 0.5, 3.0}, 0}, fams, 1.0, pol);
  const double pad = 6.0 * (std::sqrt(10.0) + 1.0);
  CHECK(g.lo() <= -3.0 - pad);
  CHECK(g.hi() >= 3.0 + pad);
  CHECK(g.size() == 4097);

  const auto flat = build_grid(Sample{{5.0, 5.0, 5.0}, 0}, fams, 1.0);
  CHECK(flat.lo() < 5.0);
  CHECK(flat.hi() > 5.0);
  CHECK(flat.size() == 4097);
  CHECK_THROWS_AS(build_grid(Sample{}, fams, 1.0), InputError);

  std::vector<double> heavy(10000);
  for (std::size_t i = 0; i < heavy.size(); ++i) heavy[i] = static_cast<double>(i) / 1000.0;
  heavy.back() = 1e9;
  const KernelFamily cf[] = {KernelFamily::cauchy()};
  CHECK(build_grid(Sample{heavy, 0}, cf, 1.0).hi() < 1e3);

  // Tight data with a far outlier: the step must still resolve the scale.
  std::vector<double> tight(400);
  for (std::size_t i = 0; i < tight.size(); ++i) tight[i] = 0.01 * std::sin(static_cast<double>(i));
  tight.back() = 800.0;
  GridPolicy small;
  small.points = 257;
  small.heavy_tail = false;
  const auto refined = build_grid(Sample{tight, 0}, cf, 0.05, small);
  CHECK(refined.size() > 257);
  CHECK((refined.size() - 1) % 256 == 0);
  CHECK(refined.step() <= (robust_scale(tight) + 0.05) / 4.0 + 1e-12);
  CHECK(build_grid(Sample{{-3.0, 0.5, 3.0}, 0}, fams, 1.0, small).size() == 257);

  const QuadratureGrid dflt(-12.0, 12.0);
  std::vector<double> phi(dflt.size());
  for (std::size_t j = 0; j < dflt.size(); ++j) phi[j] = oracle::normal_density(dflt.points()[j], 0.0, 1.0);
  CHECK(std::abs(dflt.integrate(phi) - 1.0) <= 1e-6);
  CHECK(dflt.integrate_trapezoid(phi) >= 1.0 - 1e-4);
}

TEST_CASE("quadrature grid invariants") {
  CHECK_THROWS_AS(QuadratureGrid(0.0, 1.0, 256), InputError);
  CHECK_THROWS_AS(QuadratureGrid(0.0, 1.0, 255), InputError);
  CHECK_THROWS_AS(QuadratureGrid(1.0, 0.0, 257), InputError);
  const QuadratureGrid g(-2.0, 3.0, 257);
  for (std::size_t j = 1; j < g.size(); ++j)
    CHECK(std::abs(g.points()[j] - g.points()[j - 1] - g.step()) <= 1e-12);
  CHECK(g.points().back() == 3.0);
  std::vector<double> cubic(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) cubic[j] = std::pow(g.points()[j], 3);
  CHECK(g.integrate(cubic) == Approx((81.0 - 16.0) / 4.0).epsilon(1e-13));
}

TEST_CASE("robust scale and quantiles") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(quantile(x, 0.5) == 3.0);
  CHECK(quantile(x, 0.1) == Approx(1.4));
  CHECK(sample_sd(x) == Approx(std::sqrt(2.5)));
  CHECK(robust_scale(x) == Approx(std::min(std::sqrt(2.5), 2.0 / 1.349)));
  CHECK_THROWS_AS(quantile({}, 0.5), InputError);
}

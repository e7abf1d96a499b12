#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "tglab/error.hpp"
#include "tglab/leakage.hpp"

using namespace tglab;

TEST_SUITE("leakage") {

TEST_CASE("critically damped density") {
  CHECK(critically_damped_density(10.0, 0.0) == 0.0);
  CHECK(critically_damped_density(10.0, -1.0) == 0.0);
  // maximum at t = 1/g
  CHECK(critically_damped_density(10.0, 0.1) == doctest::Approx(5.413411329464508).epsilon(1e-14));
  CHECK(critically_damped_density(10.0, 0.1) > critically_damped_density(10.0, 0.099));
  CHECK(critically_damped_density(10.0, 0.1) > critically_damped_density(10.0, 0.101));
  CHECK_THROWS_AS(critically_damped_density(10.0, NAN), Error);
  CHECK_THROWS_AS(critically_damped_density(-1.0, 0.1), Error);
}

TEST_CASE("quadrature") {
  QuadratureSettings s;
  s.relative_tolerance = 1e-10;
  CHECK(integrate([](double) { return 0.0; }, 0.0, 1.0, s) == 0.0);
  for (double g : {1.0, 10.0, 12.5, 40.0}) {
    const double m = integrate([g](double t) { return critically_damped_density(g, t); }, 0.0,
                               20.0 / g, s);
    CHECK(std::abs(m - 1.0) < 1e-9);
    const double mean = integrate([g](double t) { return t * critically_damped_density(g, t); },
                                  0.0, 20.0 / g, s);
    CHECK(mean == doctest::Approx(1.5 / g).epsilon(1e-9));
  }
  const double m2 = integrate2d(
      [](double a, double b) {
        return critically_damped_density(10.0, a) * critically_damped_density(12.5, b);
      },
      2.0, QuadratureSettings{});
  CHECK(std::abs(m2 - 1.0) < 1e-8);

  // a kinked integrand with a tiny budget must report non-convergence
  QuadratureSettings tight;
  tight.relative_tolerance = 1e-12;
  tight.panel_count = 2;
  tight.max_doublings = 1;
  CHECK_THROWS_AS(integrate([](double t) { return std::sqrt(std::abs(t - 0.3)); }, 0.0, 1.0, tight),
                  Error);
  QuadratureSettings bad;
  bad.relative_tolerance = 0.1;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("overlap integral") {
  const auto a = LeakageProfile::critically_damped(10.0);
  const auto b = LeakageProfile::critically_damped(12.5);
  CHECK(overlap_integral(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(overlap_integral(a, b) == doctest::Approx(0.9815387555554633).epsilon(1e-9));
  CHECK(overlap_integral(a, b) == doctest::Approx(overlap_integral(b, a)).epsilon(1e-12));
  CHECK(overlap_integral(a, LeakageProfile::critically_damped(5.0)) ==
        doctest::Approx(0.8380524814062785).epsilon(1e-9));
  double prev = 1.0;
  for (double gb : {20.0, 40.0, 80.0, 160.0}) {
    const double ov = overlap_integral(a, LeakageProfile::critically_damped(gb));
    CHECK(ov < prev);
    prev = ov;
  }
  CHECK(prev < 0.2);
}

TEST_CASE("tabulated profiles") {
  std::vector<double> t, d;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    t.push_back(2.0 * i / n);
    d.push_back(critically_damped_density(10.0, t.back()));
  }
  const auto tab = LeakageProfile::tabulated(t, d);
  CHECK(std::abs(tab.total_mass() - 1.0) < 1e-6);
  CHECK(tab.density(0.1) == doctest::Approx(critically_damped_density(10.0, 0.1)).epsilon(1e-6));
  CHECK(tab.density(3.0) == 0.0);
  const auto b = LeakageProfile::critically_damped(12.5);
  CHECK(std::abs(overlap_integral(tab, b) - 0.9815387555554633) < 1e-6);

  CHECK_THROWS_AS(LeakageProfile::tabulated({0.0, 1.0, 0.5}, {0.0, 1.0, 0.0}), Error);
  CHECK_THROWS_AS(LeakageProfile::tabulated({0.1, 1.0}, {0.0, 1.0}), Error);
  CHECK_THROWS_AS(LeakageProfile::tabulated({0.0, 1.0}, {0.0, -1.0}), Error);
  CHECK_THROWS_AS(LeakageProfile::tabulated({0.0, 1.0}, {0.0, 0.0}), Error);
  CHECK_THROWS_AS(LeakageProfile::tabulated({0.0, 1.0}, {4.0, 4.0}), Error);

  // sub-unit mass models loss
  const auto lossy = LeakageProfile::tabulated({0.0, 1.0, 2.0}, {0.0, 0.5, 0.0});
  CHECK(lossy.total_mass() == doctest::Approx(0.5));
}

TEST_CASE("csv round trip is bit exact") {
  const auto path = std::filesystem::temp_directory_path() / "tglab_profile_rt.csv";
  std::vector<double> t{0.0, 0.1, 0.30000000000000004, 1.0 / 3.0, 2.0};
  std::vector<double> d{0.0, 1.2345678901234567, 0.9, 0.123, 0.0};
  LeakageProfile::tabulated(t, d).save_csv(path.string());
  const auto back = LeakageProfile::load_csv(path.string());
  CHECK(back.times() == t);
  CHECK(back.densities() == d);
  std::filesystem::remove(path);
}

TEST_CASE("sampling") {
  const double g = 10.0;
  const auto p = LeakageProfile::critically_damped(g);
  Rng r1(7), r2(7);
  for (int i = 0; i < 100; ++i) CHECK(p.sample(r1) == p.sample(r2));

  const int n = 1000000;
  Rng rng(2024);
  std::vector<double> xs(n);
  double sum = 0.0, sum2 = 0.0;
  for (auto& x : xs) {
    x = sample_time(p, rng);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.5 / g) < 3.0 * se);

  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = critically_damped_cdf(g, xs[i]);
    ks = std::max({ks, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
  }
  CHECK(ks < 0.002);

  // tabulated sampling honours the piecewise-linear density
  const auto tri = LeakageProfile::tabulated({0.0, 1.0, 2.0}, {0.0, 0.5, 0.0});
  Rng r3(3);
  double m = 0.0;
  for (int i = 0; i < 200000; ++i) m += tri.sample(r3);
  CHECK(m / 200000 == doctest::Approx(1.0).epsilon(0.005));
  CHECK(tri.sampling_cdf(1.0) == doctest::Approx(0.5));
}

TEST_CASE("cavity params validation") {
  CHECK_THROWS_AS(CavityParams(-1.0, 4.0), Error);
  CHECK_THROWS_AS(CavityParams(1.0, 0.0), Error);
  CHECK(CavityParams::critically_damped(10.0).kappa == 40.0);
}

}

#include <cmath>

#include "doctest.h"
#include "tglab/error.hpp"
#include "tglab/heralding.hpp"
#include "tglab/metrics.hpp"
#include "tglab/procedures.hpp"

using namespace tglab;

namespace {

const LeakageProfile kA = LeakageProfile::critically_damped(10.0);
const LeakageProfile kB = LeakageProfile::critically_damped(12.5);

// Frozen reference values for the (10, 12.5) pair, computed independently
// with per-row exact interval integration in extended precision.
constexpr double kOverlap = 0.9815387555554633;
constexpr double kWindowMass = 0.032462;
constexpr double kOutsidePaper = 0.32491;

double theta1(double a, double b) { return std::pow(std::cos(a) * std::sin(b), 2); }
double theta2(double a, double b) { return std::pow(std::sin(a) * std::cos(b), 2); }

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("expected fidelity closed form") {
  const TiltAngle q(kQuarterPi);
  CHECK(expected_f(q, q, kA, kA).value == doctest::Approx(0.25).epsilon(1e-12));
  const double e = expected_f(q, q, kA, kB).value;
  CHECK(e == doctest::Approx(0.25 * kOverlap * kOverlap).epsilon(1e-9));
  CHECK(std::abs(e - 0.240855) < 1e-5);
  for (double a : {0.2, 0.6, 1.1})
    for (double b : {0.3, 0.9, 1.4}) {
      const double closed = expected_f(TiltAngle(a), TiltAngle(b), kA, kB).value;
      const double quad = expected_f_quadrature(TiltAngle(a), TiltAngle(b), kA, kB).value;
      CHECK(std::abs(closed - quad) < 1e-6);
      // X flips on both sides leave E(F) unchanged
      CHECK(expected_f(TiltAngle(kHalfPi - a), TiltAngle(kHalfPi - b), kA, kB).value ==
            doctest::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("expected squared fidelity") {
  CHECK(expected_f_sq(TiltAngle(0.0), TiltAngle(0.7), kA, kB).value == 0.0);
  CHECK(expected_f_sq(TiltAngle(0.7), TiltAngle(kHalfPi), kA, kB).value == 0.0);
  const auto i = series_integrals_i(kA, kB, 0);
  for (double t : {0.2, kQuarterPi, 1.0}) {
    const double q = expected_f_sq(TiltAngle(t), TiltAngle(t), kA, kB).value;
    CHECK(std::abs(q - theta1(t, t) * i[0]) < 1e-6);
  }
  // variance bounds and diagonal dominance
  for (double sa = 0.1; sa < 0.95; sa += 0.2) {
    const double a = std::asin(std::sqrt(sa));
    const double b = std::asin(std::sqrt(1.0 - sa));
    const double ef = expected_f(TiltAngle(a), TiltAngle(a), kA, kB).value;
    const double diag = expected_f_sq(TiltAngle(a), TiltAngle(a), kA, kB).value;
    const double anti = expected_f_sq(TiltAngle(a), TiltAngle(b), kA, kB).value;
    CHECK(diag <= 0.5 * ef + 1e-12);
    CHECK(diag >= ef * ef - 1e-12);
    CHECK(diag >= anti - 1e-12);
  }
}

TEST_CASE("series integrals") {
  const auto i = series_integrals_i(kA, kB, 4);
  const auto j = series_integrals_j(kA, kB, 4);
  CHECK(std::abs(i[1] / i[0] - 0.5) < 1e-6);
  for (int n = 0; n <= 4; ++n) {
    CHECK(std::abs(i[n] - j[n]) < 1e-6);
    if (n > 0) CHECK(i[n] < i[n - 1]);
  }
  const auto [series, terms] = efsq_series(TiltAngle(0.7), TiltAngle(0.8), kA, kB, 8);
  const double quad = expected_f_sq(TiltAngle(0.7), TiltAngle(0.8), kA, kB).value;
  CHECK(std::abs(series.value - quad) < 1e-4);
  CHECK(std::abs(terms.k) < 1.0);
  CHECK(series.method == ExpectationResult::Method::Series);
  // the two regions cover every entangling pair; far off-diagonal picks region J
  CHECK(efsq_series(TiltAngle(0.1), TiltAngle(1.4), kA, kB, 2).second.region == SeriesRegion::J);
  CHECK(efsq_series(TiltAngle(1.4), TiltAngle(0.1), kA, kB, 2).second.region == SeriesRegion::I);
  CHECK_THROWS_AS(efsq_series(TiltAngle(0.0), TiltAngle(0.8), kA, kB, 4), Error);
}

TEST_CASE("first-order approximation") {
  const auto i0 = series_integrals_i(kA, kB, 0)[0];
  for (double t : {0.3, 0.8})
    CHECK(efsq_first_order(TiltAngle(t), TiltAngle(t), kA, kB).value ==
          doctest::Approx(theta1(t, t) * i0).epsilon(1e-10));
  // the ratio to I0 depends on tilts only
  const LeakageProfile c = LeakageProfile::critically_damped(5.0);
  const LeakageProfile d = LeakageProfile::critically_damped(6.0);
  const double i0b = series_integrals_i(c, d, 0)[0];
  for (auto [a, b] : {std::pair{0.6, 0.7}, {0.5, 0.9}}) {
    const double r1 = efsq_first_order(TiltAngle(a), TiltAngle(b), kA, kB).value / i0;
    const double r2 = efsq_first_order(TiltAngle(a), TiltAngle(b), c, d).value / i0b;
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
  }
  // error against the full quadrature shrinks towards the diagonal
  double last = 1.0;
  for (double a : {0.6, 0.7, 0.75, 0.78}) {
    const double approx = efsq_first_order(TiltAngle(a), TiltAngle(0.8), kA, kB).value;
    const double full = expected_f_sq(TiltAngle(a), TiltAngle(0.8), kA, kB).value;
    const double rel = std::abs(approx - full) / full;
    CHECK(rel < last);
    last = rel;
  }
  CHECK(last < 5e-3);
}

TEST_CASE("fidelity histogram") {
  const TiltAngle q(kQuarterPi);
  const FidelityHistogram h = fidelity_histogram(q, q, kA, kB, 50);
  CHECK(h.edges.size() == 51);
  CHECK(h.total_mass() == doctest::Approx(0.5).epsilon(1e-6));
  for (double m : h.masses) CHECK(m >= 0.0);

  const FidelityHistogram same = fidelity_histogram(q, q, kA, kA, 10);
  CHECK(same.masses.back() == doctest::Approx(0.5).epsilon(1e-9));

  const FidelityHistogram w = fidelity_histogram_edges(q, q, kA, kB, {0.0, 0.5 - 1e-4, 0.5});
  CHECK(std::abs(w.masses[1] - kWindowMass) < 2e-5);
  CHECK_THROWS_AS(fidelity_histogram(q, q, kA, kB, 5), Error);
}

TEST_CASE("strategy comparison") {
  CHECK(first_attempt_success(0.5, ComparisonMode::Paper) == doctest::Approx(0.75));
  CHECK(first_attempt_success(0.5, ComparisonMode::Exact) == doctest::Approx(0.75));
  CHECK(first_attempt_success(0.3, ComparisonMode::Paper) == doctest::Approx(0.27));
  // exact mode is P_ii of the realign-then-merge tree at tilt with fidelity F
  for (double f : {0.1, 0.3, 0.45}) {
    const double theta = 0.5 * std::asin(2.0 * f);
    const double ps = p_success(theta), pr = p_success(failure_function(theta));
    CHECK(first_attempt_success(f, ComparisonMode::Exact) ==
          doctest::Approx(1.0 - (1.0 - ps) * (1.0 - pr)).epsilon(1e-12));
  }

  const ComparisonReport r = compare_strategies(kA, kB, 1e-4, ComparisonMode::Paper);
  CHECK(std::abs(r.p_postselect - kWindowMass) < 2e-5);
  CHECK(std::abs(r.p_outside_window - kOutsidePaper) < 2e-5);
  CHECK(r.p_total == doctest::Approx(r.p_postselect + r.p_outside_window));
  const ComparisonReport x = compare_strategies(kA, kB, 1e-4, ComparisonMode::Exact);
  CHECK(x.p_postselect == doctest::Approx(r.p_postselect));
  CHECK(x.p_total == doctest::Approx(x.p_postselect + x.p_outside_window));

  const ComparisonReport wide = compare_strategies(kA, kB, 0.5, ComparisonMode::Paper);
  CHECK(wide.p_postselect == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(wide.p_outside_window == doctest::Approx(0.0).epsilon(1e-9));
  // widening the window moves mass from weight 3F^2 <= 3/4 to weight 1
  double prev = 0.0;
  for (double eps : {1e-4, 1e-3, 1e-2, 0.1}) {
    const double t = compare_strategies(kA, kB, eps, ComparisonMode::Paper).p_total;
    CHECK(t >= prev - 1e-9);
    prev = t;
  }
}

TEST_CASE("resource ratio") {
  CHECK(resource_ratio(1.0, 1e6) == doctest::Approx(1.0));
  const double n = 1e6;
  CHECK(resource_ratio(0.39, n) / resource_ratio(0.033, n) ==
        doctest::Approx(std::pow(0.033 / 0.39, std::log(n))).epsilon(1e-10));
  CHECK(resource_ratio(0.5, n) / resource_ratio(0.05, n) ==
        doctest::Approx(std::pow(0.1, std::log(n))).epsilon(1e-10));
}

TEST_CASE("Monte Carlo moments agree with quadrature") {
  for (auto [a, b] : {std::pair{kQuarterPi, kQuarterPi}, {0.5, 0.9}}) {
    DhContext ctx;
    ctx.theta_a = TiltAngle(a);
    ctx.theta_b = TiltAngle(b);
    ctx.pa = kA;
    ctx.pb = kB;
    const double p = success_probability(ctx.theta_a, ctx.theta_b);
    Rng r(404);
    const int n = 100000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int k = 0; k < n; ++k) {
      const double f = gate_fidelity(click_likelihood(sample_clicks(ctx, r), ctx));
      s1 += f;
      s2 += f * f;
      s4 += f * f * f * f;
    }
    const double m2 = s2 / n, se2 = std::sqrt((s4 / n - m2 * m2) / n);
    const double want = expected_f_sq(ctx.theta_a, ctx.theta_b, kA, kB).value / p;
    CHECK(std::abs(m2 - want) < 3.0 * se2);
  }
}

}

#include "tglab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tglab/error.hpp"
#include "tglab/heralding.hpp"

namespace tglab {

namespace {

struct Thetas {
  double t1, t2;  // cos^2 a sin^2 b, sin^2 a cos^2 b
};

Thetas thetas(TiltAngle a, TiltAngle b) {
  const double ca = std::cos(a.radians()), sa = std::sin(a.radians());
  const double cb = std::cos(b.radians()), sb = std::sin(b.radians());
  return {ca * ca * sb * sb, sa * sa * cb * cb};
}

struct Grid {
  double h;
  std::vector<double> w, pa, pb;  // Simpson weights and densities at the nodes
};

Grid make_grid(const LeakageProfile& pa, const LeakageProfile& pb, double tmax, long n) {
  Grid g;
  g.h = tmax / static_cast<double>(n);
  g.w.resize(n + 1);
  g.pa.resize(n + 1);
  g.pb.resize(n + 1);
  for (long i = 0; i <= n; ++i) {
    g.w[i] = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double t = g.h * static_cast<double>(i);
    g.pa[i] = pa.density(t);
    g.pb[i] = pb.density(t);
  }
  return g;
}

// Tensor Simpson over (t1, t2) of kernel(U, V, out) with U = PA(t1)PB(t2),
// V = PB(t1)PA(t2); all components refined together until each converges.
template <class Kernel>
std::vector<double> separable_quadrature(const LeakageProfile& pa, const LeakageProfile& pb,
                                         std::size_t components, const QuadratureSettings& s,
                                         Kernel kernel, double* err = nullptr) {
  s.validate();
  const double tmax = s.t_max > 0.0 ? s.t_max : common_support_end(pa, pb);
  long n = s.panel_count % 2 ? s.panel_count + 1 : s.panel_count;
  auto run = [&](long panels) {
    const Grid g = make_grid(pa, pb, tmax, panels);
    std::vector<double> acc(components, 0.0), row(components), tmp(components);
    for (long i = 0; i <= panels; ++i) {
      std::fill(row.begin(), row.end(), 0.0);
      for (long j = 0; j <= panels; ++j) {
        const double u = g.pa[i] * g.pb[j], v = g.pb[i] * g.pa[j];
        if (u + v <= 0.0) continue;
        kernel(u, v, tmp.data());
        for (std::size_t k = 0; k < components; ++k) row[k] += g.w[j] * tmp[k];
      }
      for (std::size_t k = 0; k < components; ++k) acc[k] += g.w[i] * row[k];
    }
    for (auto& a : acc) a *= g.h * g.h / 9.0;
    return acc;
  };
  std::vector<double> prev = run(n), prev_extrap;
  const int doublings = std::min(s.max_doublings, 4);
  auto converged = [&](const std::vector<double>& a, const std::vector<double>& b, double* worst) {
    bool ok = true;
    *worst = 0.0;
    for (std::size_t k = 0; k < components; ++k) {
      const double diff = std::abs(a[k] - b[k]);
      *worst = std::max(*worst, diff);
      if (diff > s.relative_tolerance * std::max(std::abs(a[k]), 1e-14)) ok = false;
    }
    return ok;
  };
  for (int d = 0; d < doublings; ++d) {
    n *= 2;
    std::vector<double> next = run(n);
    // Simpson error is O(h^4): Richardson on successive doublings
    std::vector<double> extrap(components);
    for (std::size_t k = 0; k < components; ++k) extrap[k] = next[k] + (next[k] - prev[k]) / 15.0;
    double worst = 0.0;
    if (converged(next, prev, &worst)) {
      if (err) *err = worst;
      return next;
    }
    if (!prev_extrap.empty() && converged(extrap, prev_extrap, &worst)) {
      if (err) *err = worst;
      return extrap;
    }
    prev = std::move(next);
    prev_extrap = std::move(extrap);
  }
  fail(ErrorKind::Numeric, "2D quadrature did not converge within the panel budget");
}

}  // namespace

double FidelityHistogram::total_mass() const {
  double t = 0.0;
  for (double m : masses) t += m;
  return t;
}

ExpectationResult expected_f(TiltAngle a, TiltAngle b, const LeakageProfile& pa,
                             const LeakageProfile& pb, const QuadratureSettings& s) {
  const double ov = overlap_integral(pa, pb, s);
  ExpectationResult r;
  r.value = 0.25 * std::abs(std::sin(2.0 * a.radians()) * std::sin(2.0 * b.radians())) * ov * ov;
  r.method = ExpectationResult::Method::ClosedForm;
  r.estimated_error = s.relative_tolerance * r.value;
  return r;
}

ExpectationResult expected_f_quadrature(TiltAngle a, TiltAngle b, const LeakageProfile& pa,
                                        const LeakageProfile& pb, const QuadratureSettings& s) {
  const Thetas th = thetas(a, b);
  const double k = std::sqrt(th.t1 * th.t2);
  double err = 0.0;
  auto v = separable_quadrature(pa, pb, 1, s,
                                [](double u, double w, double* out) { out[0] = std::sqrt(u * w); },
                                &err);
  return {k * v[0], ExpectationResult::Method::Quadrature, 0, k * err};
}

ExpectationResult expected_f_sq(TiltAngle a, TiltAngle b, const LeakageProfile& pa,
                                const LeakageProfile& pb, const QuadratureSettings& s) {
  const Thetas th = thetas(a, b);
  if (a.is_degenerate() || b.is_degenerate() || th.t1 * th.t2 == 0.0)
    return {0.0, ExpectationResult::Method::Quadrature, 0, 0.0};
  double err = 0.0;
  auto v = separable_quadrature(
      pa, pb, 1, s,
      [&](double u, double w, double* out) {
        const double x = th.t1 * u, y = th.t2 * w;
        out[0] = x + y > 0.0 ? x * y / (x + y) : 0.0;
      },
      &err);
  return {v[0], ExpectationResult::Method::Quadrature, 0, err};
}

std::vector<double> series_integrals_i(const LeakageProfile& pa, const LeakageProfile& pb,
                                       int order, const QuadratureSettings& s) {
  require(order >= 0, ErrorKind::Numeric, "series order must be >= 0");
  return separable_quadrature(pa, pb, static_cast<std::size_t>(order) + 1, s,
                              [order](double u, double v, double* out) {
                                const double base = u * v / (u + v), r = v / (u + v);
                                double t = base;
                                for (int k = 0; k <= order; ++k, t *= r) out[k] = t;
                              });
}

std::vector<double> series_integrals_j(const LeakageProfile& pa, const LeakageProfile& pb,
                                       int order, const QuadratureSettings& s) {
  require(order >= 0, ErrorKind::Numeric, "series order must be >= 0");
  return separable_quadrature(pa, pb, static_cast<std::size_t>(order) + 1, s,
                              [order](double u, double v, double* out) {
                                const double sum = u + v;
                                const double base = u * v / sum, r = u / sum;
                                double t = base;
                                for (int k = 0; k <= order; ++k, t *= r) out[k] = t;
                              });
}

std::pair<ExpectationResult, SeriesTerms> efsq_series(TiltAngle a, TiltAngle b,
                                                      const LeakageProfile& pa,
                                                      const LeakageProfile& pb, int order,
                                                      const QuadratureSettings& s) {
  const Thetas th = thetas(a, b);
  require(th.t1 > 0.0 && th.t2 > 0.0, ErrorKind::Numeric,
          "series undefined: a product-state tilt puts the point outside both regions");
  const double k_i = th.t1 / th.t2 - 1.0, k_j = th.t2 / th.t1 - 1.0;
  SeriesTerms terms;
  double prefactor;
  if (std::abs(k_i) <= std::abs(k_j)) {
    terms.region = SeriesRegion::I;
    terms.k = k_i;
    prefactor = th.t1;
  } else {
    terms.region = SeriesRegion::J;
    terms.k = k_j;
    prefactor = th.t2;
  }
  require(std::abs(terms.k) < 1.0, ErrorKind::Numeric,
          "point lies outside both convergence regions (|K| >= 1)");
  // region I expands in U/(U+V) (the J_n), region J in V/(U+V) (the I_n)
  terms.i_values = terms.region == SeriesRegion::I ? series_integrals_j(pa, pb, order, s)
                                                   : series_integrals_i(pa, pb, order, s);
  double sum = 0.0, pw = 1.0;
  for (int n = 0; n <= order; ++n, pw *= -terms.k) sum += pw * prefactor * terms.i_values[n];
  ExpectationResult r;
  r.value = sum;
  r.method = ExpectationResult::Method::Series;
  r.order = order;
  // alternating-series remainder bound: next term, with I_{n+1} <= I_n
  r.estimated_error = std::abs(pw) * prefactor * terms.i_values.back();
  return {r, terms};
}

ExpectationResult efsq_first_order(TiltAngle a, TiltAngle b, const LeakageProfile& pa,
                                   const LeakageProfile& pb, const QuadratureSettings& s) {
  const Thetas th = thetas(a, b);
  const double big = std::max(th.t1, th.t2), small = std::min(th.t1, th.t2);
  if (big == 0.0 || small == 0.0) return {0.0, ExpectationResult::Method::Series, 1, 0.0};
  const double k = big / small - 1.0;
  const double i0 = series_integrals_i(pa, pb, 0, s)[0];
  return {big * (1.0 - 0.5 * k) * i0, ExpectationResult::Method::Series, 1, 0.0};
}

// ---- fidelity-resolved integration ------------------------------------------

namespace {

inline double fid_of_u(double u) { return 0.5 / std::cosh(0.5 * u); }

// F edge -> |u| at which F crosses it.
double u_of_fid(double f) {
  if (f <= 0.0) return std::numeric_limits<double>::infinity();
  if (f >= 0.5) return 0.0;
  return 2.0 * std::acosh(0.5 / f);
}

struct BinMasses {
  std::vector<double> plain;     // int Q
  std::vector<double> weighted;  // int w(F) Q
};

// Masses of Q12 over F-bins. The inner (t2) direction is split exactly at
// the points where the log-likelihood ratio u = ln X - ln Y crosses a bin
// edge; u is interpolated linearly inside each cell (exact for the closed
// form) and Q linearly. The outer direction is Simpson.
template <class Weight>
BinMasses bin_masses(const Thetas& th, const LeakageProfile& pa, const LeakageProfile& pb,
                     const std::vector<double>& edges, long n, Weight weight) {
  const double tmax = common_support_end(pa, pb);
  const Grid g = make_grid(pa, pb, tmax, n);
  const std::size_t bins = edges.size() - 1;
  // crossing levels in u, ascending (interior edges only)
  std::vector<double> levels;
  for (std::size_t e = 1; e < bins; ++e) {
    const double u = u_of_fid(edges[e]);
    levels.push_back(u);
    if (u > 0.0) levels.push_back(-u);
  }
  std::sort(levels.begin(), levels.end());
  auto bin_of = [&](double f) {
    auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, f);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
  };

  std::vector<double> la(n + 1), lb(n + 1);
  for (long j = 0; j <= n; ++j) {
    la[j] = g.pa[j] > 0.0 ? std::log(g.pa[j]) : -std::numeric_limits<double>::infinity();
    lb[j] = g.pb[j] > 0.0 ? std::log(g.pb[j]) : -std::numeric_limits<double>::infinity();
  }

  BinMasses out{std::vector<double>(bins, 0.0), std::vector<double>(bins, 0.0)};
  std::vector<double> row_p(bins), row_w(bins), u(n + 1), q(n + 1), f(n + 1);
  std::vector<char> finite(n + 1);
  std::vector<double> cuts;
  for (long i = 0; i <= n; ++i) {
    const double a = th.t1 * g.pa[i], b = th.t2 * g.pb[i];
    if (a + b <= 0.0) continue;
    std::fill(row_p.begin(), row_p.end(), 0.0);
    std::fill(row_w.begin(), row_w.end(), 0.0);
    const double la_i = a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
    const double lb_i = b > 0.0 ? std::log(b) : -std::numeric_limits<double>::infinity();
    for (long j = 0; j <= n; ++j) {
      const double x = a * g.pb[j], y = b * g.pa[j];
      q[j] = x + y;
      finite[j] = x > 0.0 && y > 0.0;
      u[j] = finite[j] ? (la_i + lb[j]) - (lb_i + la[j]) : 0.0;
      f[j] = finite[j] ? std::sqrt(x * y) / (x + y) : 0.0;
    }
    for (long j = 0; j < n; ++j) {
      if (q[j] <= 0.0 && q[j + 1] <= 0.0) continue;
      if (!finite[j] || !finite[j + 1]) {
        // a likelihood vanishes at an end: split the trapezoid between end bins
        for (long e : {j, j + 1}) {
          const std::size_t k = bin_of(f[e]);
          row_p[k] += 0.5 * g.h * q[e];
          row_w[k] += 0.5 * g.h * q[e] * weight(f[e]);
        }
        continue;
      }
      const double u0 = u[j], du = u[j + 1] - u[j];
      cuts.clear();
      cuts.push_back(0.0);
      if (du != 0.0) {
        const double lo = std::min(u0, u[j + 1]), hi = std::max(u0, u[j + 1]);
        auto it = std::upper_bound(levels.begin(), levels.end(), lo);
        for (; it != levels.end() && *it < hi; ++it) cuts.push_back((*it - u0) / du);
        if (du < 0.0) std::sort(cuts.begin() + 1, cuts.end());
      }
      cuts.push_back(1.0);
      if (cuts.size() == 2) {
        const std::size_t k = bin_of(0.5 * (f[j] + f[j + 1]) > 0.0 ? fid_of_u(u0 + 0.5 * du) : 0.0);
        row_p[k] += 0.5 * g.h * (q[j] + q[j + 1]);
        row_w[k] += 0.5 * g.h * (q[j] * weight(f[j]) + q[j + 1] * weight(f[j + 1]));
        continue;
      }
      for (std::size_t c = 1; c < cuts.size(); ++c) {
        const double s0 = cuts[c - 1], s1 = cuts[c];
        if (s1 <= s0) continue;
        const double q0 = q[j] + s0 * (q[j + 1] - q[j]), q1 = q[j] + s1 * (q[j + 1] - q[j]);
        const double f0 = fid_of_u(u0 + s0 * du), f1 = fid_of_u(u0 + s1 * du);
        const std::size_t k = bin_of(fid_of_u(u0 + 0.5 * (s0 + s1) * du));
        const double len = g.h * (s1 - s0);
        row_p[k] += 0.5 * len * (q0 + q1);
        row_w[k] += 0.5 * len * (q0 * weight(f0) + q1 * weight(f1));
      }
    }
    const double w = g.w[i] * g.h / 3.0;
    for (std::size_t k = 0; k < bins; ++k) {
      out.plain[k] += w * row_p[k];
      out.weighted[k] += w * row_w[k];
    }
  }
  return out;
}

// Inner rule is second order: one Richardson step on (n, 2n).
template <class Weight>
std::pair<BinMasses, double> bin_masses_extrapolated(const Thetas& th, const LeakageProfile& pa,
                                                     const LeakageProfile& pb,
                                                     const std::vector<double>& edges,
                                                     long n, Weight weight) {
  const BinMasses coarse = bin_masses(th, pa, pb, edges, n, weight);
  const BinMasses fine = bin_masses(th, pa, pb, edges, 2 * n, weight);
  BinMasses r = fine;
  double err = 0.0;
  for (std::size_t k = 0; k < fine.plain.size(); ++k) {
    r.plain[k] = (4.0 * fine.plain[k] - coarse.plain[k]) / 3.0;
    r.weighted[k] = (4.0 * fine.weighted[k] - coarse.weighted[k]) / 3.0;
    err = std::max(err, std::abs(fine.plain[k] - coarse.plain[k]) / 3.0);
    err = std::max(err, std::abs(fine.weighted[k] - coarse.weighted[k]) / 3.0);
  }
  return {r, err};
}

void check_edges(const std::vector<double>& edges) {
  require(edges.size() >= 2, ErrorKind::Config, "histogram needs at least one bin");
  require(edges.front() == 0.0 && edges.back() == 0.5, ErrorKind::Config,
          "histogram edges must span [0, 1/2]");
  for (std::size_t i = 1; i < edges.size(); ++i)
    require(edges[i] > edges[i - 1], ErrorKind::Config, "histogram edges must ascend");
}

}  // namespace

FidelityHistogram fidelity_histogram_edges(TiltAngle a, TiltAngle b, const LeakageProfile& pa,
                                           const LeakageProfile& pb, std::vector<double> edges,
                                           const HistogramSettings& s) {
  check_edges(edges);
  require(s.panels >= 16, ErrorKind::Config, "histogram panel count too small");
  const long n = s.panels % 2 ? s.panels + 1 : s.panels;
  auto [m, err] =
      bin_masses_extrapolated(thetas(a, b), pa, pb, edges, n, [](double) { return 1.0; });
  (void)err;
  FidelityHistogram h;
  h.edges = std::move(edges);
  h.masses = std::move(m.plain);
  for (auto& v : h.masses) v = std::max(v, 0.0);
  return h;
}

FidelityHistogram fidelity_histogram(TiltAngle a, TiltAngle b, const LeakageProfile& pa,
                                     const LeakageProfile& pb, int bins,
                                     const HistogramSettings& s) {
  require(bins >= 10, ErrorKind::Config, "fidelity histogram needs at least 10 bins");
  std::vector<double> edges(bins + 1);
  for (int k = 0; k <= bins; ++k) edges[k] = 0.5 * k / bins;
  edges.back() = 0.5;
  return fidelity_histogram_edges(a, b, pa, pb, std::move(edges), s);
}

double first_attempt_success(double f, ComparisonMode mode) {
  const double f2 = f * f;
  if (mode == ComparisonMode::Paper) return 3.0 * f2;
  if (f2 >= 0.5) return 0.75;  // limit at F = 1/2
  return 2.0 * f2 + 2.0 * f2 * f2 / (1.0 - 2.0 * f2);
}

ComparisonReport compare_strategies(const LeakageProfile& pa, const LeakageProfile& pb,
                                    double epsilon, ComparisonMode mode,
                                    const HistogramSettings& s) {
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::Config, "epsilon must be > 0");
  ComparisonReport r;
  r.mode = mode;
  r.epsilon = epsilon;
  const Thetas th = thetas(TiltAngle::untilted(), TiltAngle::untilted());
  const long n = s.panels % 2 ? s.panels + 1 : s.panels;
  const double cut = 0.5 - epsilon;
  if (cut <= 0.0) {
    // window covers every outcome
    auto [m, err] = bin_masses_extrapolated(th, pa, pb, {0.0, 0.5}, n, [](double) { return 1.0; });
    r.p_postselect = m.plain[0];
    r.estimated_error = err;
  } else {
    auto [m, err] = bin_masses_extrapolated(th, pa, pb, {0.0, cut, 0.5}, n,
                                            [mode](double f) { return first_attempt_success(f, mode); });
    r.p_postselect = m.plain[1];
    r.p_outside_window = m.weighted[0];
    r.estimated_error = err;
  }
  r.p_total = r.p_postselect + r.p_outside_window;
  return r;
}

double resource_ratio(double p, double n) {
  require(p > 0.0 && p <= 1.0, ErrorKind::Numeric, "gate probability must lie in (0, 1]");
  require(n > 1.0, ErrorKind::Numeric, "computation size must exceed 1");
  return std::exp(-std::log(n) * std::log(p));
}

}  // namespace tglab

#include "tglab/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tglab/csv.hpp"
#include "tglab/error.hpp"

namespace tglab {

namespace {

void require_finite(double v, const char* what) {
  require(std::isfinite(v), ErrorKind::Numeric, std::string(what) + " must be finite");
}

constexpr int kCriticalTableCells = 1 << 14;

}  // namespace

CavityParams::CavityParams(double g_, double kappa_) : g(g_), kappa(kappa_) {
  require(std::isfinite(g) && g > 0.0, ErrorKind::Config, "coupling g must be positive");
  require(std::isfinite(kappa) && kappa > 0.0, ErrorKind::Config,
          "leakage rate kappa must be positive");
}

void QuadratureSettings::validate() const {
  require(relative_tolerance > 0.0 && relative_tolerance <= 1e-3, ErrorKind::Config,
          "relative_tolerance must lie in (0, 1e-3]");
  require(panel_count >= 2, ErrorKind::Config, "panel_count must be at least 2");
  require(max_doublings >= 1 && max_doublings <= 16, ErrorKind::Config,
          "max_doublings must lie in [1, 16]");
  require(t_max >= 0.0 && std::isfinite(t_max), ErrorKind::Config, "t_max must be >= 0");
}

double critically_damped_density(double g, double t) {
  require_finite(g, "g");
  require_finite(t, "t");
  require(g > 0.0, ErrorKind::Numeric, "g must be positive");
  if (t <= 0.0) return 0.0;
  return 4.0 * g * g * g * t * t * std::exp(-2.0 * g * t);
}

double critically_damped_cdf(double g, double t) {
  if (t <= 0.0) return 0.0;
  const double x = 2.0 * g * t;
  // regularised lower gamma P(3, x); expm1 form keeps precision at small x
  if (x < 1e-3) return x * x * x / 6.0 * (1.0 - 0.75 * x);
  return 1.0 - std::exp(-x) * (1.0 + x + 0.5 * x * x);
}

// Inverse-CDF table. For the closed form the node CDF values are exact and
// interpolated linearly; for tabulated data the density is piecewise linear so
// the CDF is piecewise quadratic and is inverted exactly per cell.
struct LeakageProfile::Table {
  std::vector<double> t;
  std::vector<double> d;
  std::vector<double> cdf;  // unnormalised
  bool quadratic = false;
};

LeakageProfile LeakageProfile::critically_damped(double g) {
  require(std::isfinite(g) && g > 0.0, ErrorKind::Config,
          "critically damped coupling must be positive");
  LeakageProfile p;
  p.coupling_ = g;
  p.mass_ = 1.0;
  p.build_table();
  return p;
}

LeakageProfile LeakageProfile::tabulated(std::vector<double> times,
                                         std::vector<double> densities) {
  require(times.size() == densities.size(), ErrorKind::Config,
          "tabulated profile: times and densities differ in length");
  require(times.size() >= 2, ErrorKind::Config, "tabulated profile needs >= 2 points");
  require(times.front() == 0.0, ErrorKind::Config, "tabulated profile must start at t = 0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(std::isfinite(times[i]) && std::isfinite(densities[i]), ErrorKind::Config,
            "tabulated profile has non-finite entries");
    require(densities[i] >= 0.0, ErrorKind::Config, "tabulated density must be >= 0");
    if (i > 0)
      require(times[i] > times[i - 1], ErrorKind::Config,
              "tabulated times must be strictly ascending");
  }
  double mass = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    mass += 0.5 * (times[i] - times[i - 1]) * (densities[i] + densities[i - 1]);
  require(mass > 0.0, ErrorKind::Config, "tabulated profile has zero mass");
  require(mass <= 1.0 + 1e-6, ErrorKind::Config, "tabulated profile mass exceeds 1");

  LeakageProfile p;
  p.times_ = std::move(times);
  p.densities_ = std::move(densities);
  p.mass_ = std::min(mass, 1.0);
  p.build_table();
  return p;
}

LeakageProfile LeakageProfile::load_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  require(table.header.size() == 2 && table.header[0] == "time" && table.header[1] == "density",
          ErrorKind::Config, path + ": expected header 'time,density'");
  std::vector<double> t, d;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    require(row.size() == 2, ErrorKind::Config,
            path + ":" + std::to_string(r + 2) + ": expected two columns");
    t.push_back(parse_double(row[0], path + ":" + std::to_string(r + 2)));
    d.push_back(parse_double(row[1], path + ":" + std::to_string(r + 2)));
  }
  return tabulated(std::move(t), std::move(d));
}

void LeakageProfile::save_csv(const std::string& path) const {
  CsvWriter out({"time", "density"});
  if (is_critically_damped()) {
    const std::size_t n = 4000;
    const double tmax = support_end();
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = tmax * static_cast<double>(i) / static_cast<double>(n);
      out.row({fmt_double(t), fmt_double(density(t))});
    }
  } else {
    for (std::size_t i = 0; i < times_.size(); ++i)
      out.row({fmt_double(times_[i]), fmt_double(densities_[i])});
  }
  out.write(path);
}

double LeakageProfile::density(double t) const {
  if (is_critically_damped()) return critically_damped_density(coupling_, t);
  if (!(t >= 0.0) || t > times_.back()) return 0.0;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.end()) return densities_.back();
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return densities_[lo] + w * (densities_[hi] - densities_[lo]);
}

double LeakageProfile::support_end() const {
  if (is_critically_damped()) return 20.0 / coupling_;
  return times_.back();
}

void LeakageProfile::build_table() {
  auto tab = std::make_shared<Table>();
  if (is_critically_damped()) {
    const double tmax = support_end();
    tab->t.resize(kCriticalTableCells + 1);
    tab->cdf.resize(kCriticalTableCells + 1);
    for (int i = 0; i <= kCriticalTableCells; ++i) {
      const double t = tmax * i / kCriticalTableCells;
      tab->t[i] = t;
      tab->cdf[i] = critically_damped_cdf(coupling_, t);
    }
  } else {
    tab->quadratic = true;
    tab->t = times_;
    tab->d = densities_;
    tab->cdf.assign(times_.size(), 0.0);
    for (std::size_t i = 1; i < times_.size(); ++i)
      tab->cdf[i] = tab->cdf[i - 1] +
                    0.5 * (times_[i] - times_[i - 1]) * (densities_[i] + densities_[i - 1]);
  }
  table_ = std::move(tab);
}

double LeakageProfile::sampling_cdf(double t) const {
  const Table& tab = *table_;
  const double total = tab.cdf.back();
  if (t <= 0.0) return 0.0;
  if (t >= tab.t.back()) return 1.0;
  auto it = std::upper_bound(tab.t.begin(), tab.t.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - tab.t.begin());
  const std::size_t lo = hi - 1;
  const double h = tab.t[hi] - tab.t[lo];
  const double s = t - tab.t[lo];
  if (!tab.quadratic)
    return (tab.cdf[lo] + (tab.cdf[hi] - tab.cdf[lo]) * s / h) / total;
  const double d0 = tab.d[lo], d1 = tab.d[hi];
  return (tab.cdf[lo] + d0 * s + 0.5 * (d1 - d0) * s * s / h) / total;
}

double LeakageProfile::sample(Rng& rng) const {
  const Table& tab = *table_;
  const double total = tab.cdf.back();
  require(total > 0.0, ErrorKind::Numeric, "cannot sample a zero-mass profile");
  const double target = rng.uniform_open() * total;
  auto it = std::upper_bound(tab.cdf.begin(), tab.cdf.end(), target);
  if (it == tab.cdf.end()) return tab.t.back();
  std::size_t hi = static_cast<std::size_t>(it - tab.cdf.begin());
  if (hi == 0) hi = 1;
  const std::size_t lo = hi - 1;
  const double h = tab.t[hi] - tab.t[lo];
  const double m = target - tab.cdf[lo];
  const double cell = tab.cdf[hi] - tab.cdf[lo];
  if (cell <= 0.0) return tab.t[lo];
  if (!tab.quadratic) return tab.t[lo] + h * m / cell;
  // solve d0 s + (d1 - d0) s^2 / (2h) = m on [0, h]
  const double d0 = tab.d[lo], d1 = tab.d[hi];
  const double a = 0.5 * (d1 - d0) / h;
  double s;
  if (std::abs(a) * h < 1e-12 * std::max(d0, 1e-300)) {
    s = m / d0;
  } else {
    const double disc = std::max(0.0, d0 * d0 + 4.0 * a * m);
    s = 2.0 * m / (d0 + std::sqrt(disc));  // stable root
  }
  return tab.t[lo] + std::clamp(s, 0.0, h);
}

double common_support_end(const LeakageProfile& a, const LeakageProfile& b) {
  return std::max(a.support_end(), b.support_end());
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, long n) {
  const double h = (b - a) / static_cast<double>(n);
  double odd = 0.0, even = 0.0;
  for (long i = 1; i < n; ++i) {
    const double v = f(a + h * static_cast<double>(i));
    (i % 2 ? odd : even) += v;
  }
  return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

double simpson2d(const std::function<double(double, double)>& f, double tmax, long n) {
  const double h = tmax / static_cast<double>(n);
  std::vector<double> w(n + 1);
  for (long i = 0; i <= n; ++i) w[i] = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  double total = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double t1 = h * static_cast<double>(i);
    double row = 0.0;
    for (long j = 0; j <= n; ++j) row += w[j] * f(t1, h * static_cast<double>(j));
    total += w[i] * row;
  }
  return total * h * h / 9.0;
}

bool converged(double coarse, double fine, double tol) {
  return std::abs(fine - coarse) <= tol * std::max(std::abs(fine), 1e-14);
}

long even_panels(int n) { return n % 2 ? n + 1 : n; }

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSettings& settings) {
  settings.validate();
  require(b > a, ErrorKind::Numeric, "integration interval is empty");
  long n = even_panels(settings.panel_count);
  double prev = simpson(f, a, b, n);
  require(std::isfinite(prev), ErrorKind::Numeric, "integrand is not finite");
  for (int k = 0; k < settings.max_doublings; ++k) {
    n *= 2;
    const double next = simpson(f, a, b, n);
    require(std::isfinite(next), ErrorKind::Numeric, "integrand is not finite");
    if (converged(prev, next, settings.relative_tolerance)) return next;
    prev = next;
  }
  fail(ErrorKind::Numeric, "1D quadrature did not converge within the panel budget");
}

double integrate2d(const std::function<double(double, double)>& f, double t_max,
                   const QuadratureSettings& settings) {
  settings.validate();
  require(t_max > 0.0, ErrorKind::Numeric, "2D integration needs t_max > 0");
  long n = even_panels(settings.panel_count);
  double prev = simpson2d(f, t_max, n);
  require(std::isfinite(prev), ErrorKind::Numeric, "integrand is not finite");
  // 2D grids grow fourfold per doubling; cap to keep the budget sane
  const int doublings = std::min(settings.max_doublings, 4);
  for (int k = 0; k < doublings; ++k) {
    n *= 2;
    const double next = simpson2d(f, t_max, n);
    require(std::isfinite(next), ErrorKind::Numeric, "integrand is not finite");
    if (converged(prev, next, settings.relative_tolerance)) return next;
    prev = next;
  }
  fail(ErrorKind::Numeric, "2D quadrature did not converge within the panel budget");
}

double overlap_integral(const LeakageProfile& pa, const LeakageProfile& pb,
                        const QuadratureSettings& settings) {
  const double tmax = settings.t_max > 0.0 ? settings.t_max : common_support_end(pa, pb);
  auto f = [&](double t) { return std::sqrt(pa.density(t) * pb.density(t)); };
  double v;
  if (!pa.is_critically_damped() || !pb.is_critically_damped()) {
    // kinks at grid nodes: integrate cell by cell on the union of grids
    std::vector<double> nodes{0.0, tmax};
    for (const auto* p : {&pa, &pb})
      for (double t : p->times())
        if (t < tmax) nodes.push_back(t);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (nodes.size() > 64) {
      // dense grids: a fixed 4-point Gauss rule per cell is plenty
      static const double x[4] = {-0.8611363115940526, -0.3399810435848563,
                                  0.3399810435848563, 0.8611363115940526};
      static const double w[4] = {0.3478548451374538, 0.6521451548625461,
                                  0.6521451548625461, 0.3478548451374538};
      v = 0.0;
      for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double m = 0.5 * (nodes[i] + nodes[i - 1]), r = 0.5 * (nodes[i] - nodes[i - 1]);
        for (int k = 0; k < 4; ++k) v += r * w[k] * f(m + r * x[k]);
      }
    } else {
      v = 0.0;
      for (std::size_t i = 1; i < nodes.size(); ++i)
        v += integrate(f, nodes[i - 1], nodes[i], settings);
    }
  } else {
    v = integrate(f, 0.0, tmax, settings);
  }
  return std::clamp(v, 0.0, 1.0);
}

double sample_time(const LeakageProfile& profile, Rng& rng) { return profile.sample(rng); }

}  // namespace tglab

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tglab/rng.hpp"

namespace tglab {

struct CavityParams {
  double g = 0.0;      // Jaynes-Cummings coupling
  double kappa = 0.0;  // cavity leakage rate

  CavityParams() = default;
  CavityParams(double g_, double kappa_);
  static CavityParams critically_damped(double g) { return {g, 4.0 * g}; }
};

struct QuadratureSettings {
  double relative_tolerance = 1e-8;
  double t_max = 0.0;  // 0 = derive from the profiles involved
  int panel_count = 256;
  int max_doublings = 10;

  void validate() const;
};

// 4 g^3 t^2 exp(-2 g t) for t > 0, zero otherwise.
double critically_damped_density(double g, double t);

class LeakageProfile {
 public:
  static LeakageProfile critically_damped(double g);
  // Linear interpolation, zero outside the grid. Grid must start at 0.
  static LeakageProfile tabulated(std::vector<double> times,
                                  std::vector<double> densities);
  static LeakageProfile load_csv(const std::string& path);
  void save_csv(const std::string& path) const;

  double density(double t) const;
  double operator()(double t) const { return density(t); }
  double total_mass() const { return mass_; }

  // Upper end of the region that carries all but a negligible tail.
  double support_end() const;

  bool is_critically_damped() const { return coupling_ > 0.0; }
  double coupling() const { return coupling_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& densities() const { return densities_; }

  // Draw from the normalised density by inverting a tabulated CDF.
  double sample(Rng& rng) const;
  // Normalised CDF of the sampling table.
  double sampling_cdf(double t) const;

 private:
  struct Table;
  LeakageProfile() = default;
  void build_table();

  double coupling_ = 0.0;
  std::vector<double> times_;
  std::vector<double> densities_;
  double mass_ = 1.0;
  std::shared_ptr<const Table> table_;
};

// Closed-form CDF of the critically damped density.
double critically_damped_cdf(double g, double t);

// Truncation point covering both profiles (20/g_min for critically damped).
double common_support_end(const LeakageProfile& a, const LeakageProfile& b);

// Composite Simpson on [a, b], doubled until two successive estimates agree
// within the relative tolerance. Throws Numeric on budget exhaustion.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSettings& settings);

// Tensor-product Simpson on [0, t_max]^2 with the same doubling check.
double integrate2d(const std::function<double(double, double)>& f, double t_max,
                   const QuadratureSettings& settings);

double overlap_integral(const LeakageProfile& pa, const LeakageProfile& pb,
                        const QuadratureSettings& settings = {});

double sample_time(const LeakageProfile& profile, Rng& rng);

}  // namespace tglab

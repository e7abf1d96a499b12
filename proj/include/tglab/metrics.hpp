#pragma once

#include <vector>

#include "tglab/leakage.hpp"
#include "tglab/tilted_graph.hpp"

namespace tglab {

struct ExpectationResult {
  enum class Method { ClosedForm, Quadrature, Series };
  double value = 0.0;
  Method method = Method::ClosedForm;
  int order = 0;  // series order when method == Series
  double estimated_error = 0.0;
};

enum class SeriesRegion { I, J };

struct SeriesTerms {
  std::vector<double> i_values;  // I_0..I_N (J_n = I_n)
  SeriesRegion region = SeriesRegion::I;
  double k = 0.0;                // expansion parameter of the chosen region
};

struct FidelityHistogram {
  std::vector<double> edges;   // ascending over [0, 1/2]
  std::vector<double> masses;  // one per bin
  double total_mass() const;
};

enum class ComparisonMode { Paper, Exact };

struct ComparisonReport {
  double p_postselect = 0.0;
  double p_outside_window = 0.0;
  double p_total = 0.0;
  ComparisonMode mode = ComparisonMode::Paper;
  double epsilon = 0.0;
  double estimated_error = 0.0;
};

// 1/4 sin 2a sin 2b (overlap)^2
ExpectationResult expected_f(TiltAngle theta_a, TiltAngle theta_b, const LeakageProfile& pa,
                             const LeakageProfile& pb, const QuadratureSettings& s = {});
// Direct quadrature of sqrt(XY) -- the independent cross-check.
ExpectationResult expected_f_quadrature(TiltAngle theta_a, TiltAngle theta_b,
                                        const LeakageProfile& pa, const LeakageProfile& pb,
                                        const QuadratureSettings& s = {});
// Quadrature of XY / (X + Y).
ExpectationResult expected_f_sq(TiltAngle theta_a, TiltAngle theta_b, const LeakageProfile& pa,
                                const LeakageProfile& pb, const QuadratureSettings& s = {});

// I_n = int UV/(U+V) (V/(U+V))^n, n = 0..order.
std::vector<double> series_integrals_i(const LeakageProfile& pa, const LeakageProfile& pb,
                                       int order, const QuadratureSettings& s = {});
// J_n with U/(U+V) in place of V/(U+V), evaluated independently.
std::vector<double> series_integrals_j(const LeakageProfile& pa, const LeakageProfile& pb,
                                       int order, const QuadratureSettings& s = {});

std::pair<ExpectationResult, SeriesTerms> efsq_series(TiltAngle theta_a, TiltAngle theta_b,
                                                      const LeakageProfile& pa,
                                                      const LeakageProfile& pb, int order,
                                                      const QuadratureSettings& s = {});
ExpectationResult efsq_first_order(TiltAngle theta_a, TiltAngle theta_b,
                                   const LeakageProfile& pa, const LeakageProfile& pb,
                                   const QuadratureSettings& s = {});

struct HistogramSettings {
  int panels = 2048;  // per axis; refined once more for the error estimate
};

FidelityHistogram fidelity_histogram(TiltAngle theta_a, TiltAngle theta_b,
                                     const LeakageProfile& pa, const LeakageProfile& pb,
                                     int bins, const HistogramSettings& s = {});
FidelityHistogram fidelity_histogram_edges(TiltAngle theta_a, TiltAngle theta_b,
                                           const LeakageProfile& pa, const LeakageProfile& pb,
                                           std::vector<double> edges,
                                           const HistogramSettings& s = {});

// Probability that the first merge/bridge attempt after a DH of fidelity F succeeds.
double first_attempt_success(double fidelity, ComparisonMode mode);

ComparisonReport compare_strategies(const LeakageProfile& pa, const LeakageProfile& pb,
                                    double epsilon, ComparisonMode mode,
                                    const HistogramSettings& s = {});

// p^(-ln n)
double resource_ratio(double p_gate, double n);

}  // namespace tglab

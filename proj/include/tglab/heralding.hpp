#pragma once

#include "tglab/leakage.hpp"
#include "tglab/rng.hpp"
#include "tglab/tilted_graph.hpp"

namespace tglab {

namespace detail {
// Shared so default-constructed contexts do not rebuild sampling tables.
inline const LeakageProfile& default_dh_profile() {
  static const LeakageProfile p = LeakageProfile::critically_damped(10.0);
  return p;
}
}  // namespace detail

struct DhContext {
  TiltAngle theta_a;
  TiltAngle theta_b;
  LeakageProfile pa = detail::default_dh_profile();
  LeakageProfile pb = detail::default_dh_profile();
  double detection_efficiency = 1.0;

  void validate() const;
  // cos^2 a sin^2 b and sin^2 a cos^2 b
  double theta1() const;
  double theta2() const;
};

struct ClickPair {
  double t1 = 0.0;
  double t2 = 0.0;
};

struct ClickLikelihood {
  double x_term = 0.0;  // qubit a emitted first
  double y_term = 0.0;  // qubit b emitted first
};

struct DhOutcome {
  bool success = false;
  TiltAngle theta_beta;
  ClickPair clicks;
  int parity = +1;  // detector parity, folded into a Z correction
  // Failure: computational-basis results of the two measured qubits.
  int bit_a = 0;
  int bit_b = 0;

  static DhOutcome succeeded(TiltAngle theta_beta, ClickPair clicks, int parity) {
    DhOutcome o;
    o.success = true;
    o.theta_beta = theta_beta;
    o.clicks = clicks;
    o.parity = parity;
    return o;
  }
  static DhOutcome failed(int bit_a = 0, int bit_b = 0) {
    DhOutcome o;
    o.bit_a = bit_a;
    o.bit_b = bit_b;
    return o;
  }
};

double success_probability(TiltAngle theta_a, TiltAngle theta_b, double efficiency = 1.0);
double click_density_first(double t1, const DhContext& ctx);
ClickLikelihood click_likelihood(const ClickPair& clicks, const DhContext& ctx);
double click_density_joint(const ClickPair& clicks, const DhContext& ctx);
// (X + Y) / Q1(t1); throws when the first-click density vanishes.
double click_density_conditional(const ClickPair& clicks, const DhContext& ctx);

ClickPair sample_clicks(const DhContext& ctx, Rng& rng);
TiltAngle tilt_after_dh(const DhContext& ctx, const ClickPair& clicks);
// sqrt(XY)/(X+Y)
double gate_fidelity(const ClickLikelihood& l);

// Full attempt: success draw, clicks, parity; failure bits from the lossless
// failure branch (both qubits found equal).
DhOutcome attempt_dh(const DhContext& ctx, Rng& rng);

enum class DhConfiguration { Ghz, Cherry };

// Which of the supported layouts qubit q sits in (fresh qubits count as GHZ).
DhConfiguration classify_dh_qubit(const TiltedGraph& g, VertexId q);
// Tilt governing the amplitudes of q's physical computational basis.
TiltAngle dh_effective_tilt(const TiltedGraph& g, VertexId q);

TiltedGraph apply_dh_to_graph(const TiltedGraph& g, VertexId qa, VertexId qb,
                              const DhOutcome& outcome);

}  // namespace tglab

#pragma once

#include <array>
#include <complex>
#include <vector>

#include "tglab/leakage.hpp"
#include "tglab/rng.hpp"
#include "tglab/tilted_graph.hpp"

namespace tglab {

using cplx = std::complex<double>;
using Mat2 = std::array<cplx, 4>;  // row-major

inline constexpr std::size_t kMaxOracleQubits = 14;

Mat2 mat_mul(const Mat2& a, const Mat2& b);
Mat2 mat_adjoint(const Mat2& a);
Mat2 mat_identity();
Mat2 mat_hadamard();
Mat2 mat_x();
Mat2 mat_z_phase(double alpha);  // diag(1, e^{i alpha})
// Physical local frame Z(z) X^x H^h of a vertex.
Mat2 frame_matrix(const Vertex& v);

// Qubit k of the register is labels[k]; amplitude index bit k is that qubit.
class StateVector {
 public:
  StateVector() = default;
  StateVector(std::vector<VertexId> labels, std::vector<cplx> amplitudes);
  static StateVector product(const std::vector<VertexId>& labels,
                             const std::vector<std::array<cplx, 2>>& qubits);

  std::size_t qubit_count() const { return labels_.size(); }
  const std::vector<VertexId>& labels() const { return labels_; }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  std::size_t index_of(VertexId label) const;
  double norm_sq() const;
  void normalize();

  void apply_1q(VertexId q, const Mat2& m);
  // Two-qubit diagonal with entries d[a + 2b] for bits (a on q1, b on q2).
  void apply_diag2(VertexId q1, VertexId q2, const std::array<cplx, 4>& d);

  // Unnormalised projection of qubit q onto |outcome>, qubit removed.
  StateVector project_out(VertexId q, int outcome) const;
  StateVector tensor(const StateVector& other) const;
  // Reorder qubits to the given label order (same label set).
  StateVector permuted(const std::vector<VertexId>& order) const;

 private:
  std::vector<VertexId> labels_;
  std::vector<cplx> amps_;
};

StateVector build_state(const TiltedGraph& g);

struct MeasurementRecord {
  VertexId qubit = 0;
  Mat2 rotation{};
  int outcome = 0;
  double probability = 0.0;
};

// Rotate q by pre_rotation, measure Z, remove q from the register.
std::pair<MeasurementRecord, StateVector> measure(const StateVector& s, VertexId q,
                                                  const Mat2& pre_rotation, Rng& rng);
// Same with the outcome forced; probability is the Born weight of that outcome.
std::pair<MeasurementRecord, StateVector> measure_forced(const StateVector& s, VertexId q,
                                                         const Mat2& pre_rotation, int outcome);

// |<a|b>|^2, matched by labels.
double overlap(const StateVector& a, const StateVector& b);

struct TrajectoryResult {
  TiltAngle theta_beta;
  double click_density = 0.0;        // summed over detector pairs
  std::array<double, 4> per_detector{};  // (+,+), (+,-), (-,+), (-,-)
  double residual_round1 = 0.0;      // amplitude left undecayed before the re-excitation
};

struct TrajectoryOptions {
  double theta_a = kQuarterPi;
  double theta_b = kQuarterPi;
  double residual_limit = 1e-8;
};

// Two-round double heralding by direct integration of the conditional
// Schrodinger equation with detector jumps at t1 (round 1) and t2 (round 2).
TrajectoryResult trajectory_dh(const CavityParams& a, const CavityParams& b, double t1,
                               double t2, const TrajectoryOptions& opt = {});

// Single system emission density sampled on a grid of times.
std::vector<double> trajectory_emission_density(const CavityParams& p,
                                                const std::vector<double>& times);

// Precomputed round-1 for a fixed t1 so that t2 grids are cheap.
class TrajectoryDh {
 public:
  TrajectoryDh(const CavityParams& a, const CavityParams& b, double t1,
               const TrajectoryOptions& opt = {});
  TrajectoryResult second_click(double t2) const;

 private:
  CavityParams a_, b_;
  TrajectoryOptions opt_;
  std::array<std::array<cplx, 16>, 2> after_round1_{};
  double residual_ = 0.0;
};

}  // namespace tglab

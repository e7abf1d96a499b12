#pragma once

#include <optional>
#include <utility>

#include "tglab/oracle.hpp"
#include "tglab/rng.hpp"
#include "tglab/tilted_graph.hpp"

namespace tglab {

struct RotationDescriptor {
  enum class Kind { M, MS, Pauli };
  enum class Basis { X, Y, Z };
  Kind kind = Kind::Pauli;
  double angle = 0.0;
  Basis basis = Basis::Z;

  static RotationDescriptor m(double theta) { return {Kind::M, theta, Basis::Z}; }
  static RotationDescriptor ms(double beta) { return {Kind::MS, beta, Basis::Z}; }
  static RotationDescriptor pauli(Basis b) { return {Kind::Pauli, 0.0, b}; }

  // Unitary applied before a computational-basis readout.
  Mat2 matrix() const;
};

// [[-cos, sin], [sin, cos]]
Mat2 rotation_m(double theta);
Mat2 gate_s();

struct ProcedureOutcome {
  bool success = false;
  int outcome = 0;                 // measured bit
  double probability = 0.0;        // Born weight of the realised branch
  double success_probability = 0.0;
  std::optional<EdgeAnnotation> annotation;  // merge / bridge result before canonicalisation
  std::optional<TiltAngle> tilt;             // realign result
  RotationDescriptor rotation;     // in the graph frame of the measured vertex
  Mat2 graph_rotation{};           // full graph-frame unitary before the Z readout
};

// 1/2 sin^2(2 theta)
double p_success(double theta);
// cos R = cos^2 phi / sqrt(1 - 1/2 sin^2 2 phi)
double failure_function(double phi);
// Bridge failure angle; failure_function_general(0, phi, +1) == failure_function(phi).
double failure_function_general(double gamma1, double theta, int sign);

struct BridgeAngles {
  double beta;
  double n_b;      // amplitude factor, N_B^2 = 1 / (1 - sign sin 2g cos 2t)
  double delta;    // targeted increment, sign pi/4 - gamma1
  double gamma2;   // increment on failure
};
BridgeAngles bridge_angles(double gamma1, double theta, int sign);
int bridge_auto_sign(double gamma1, double theta);
int merge_auto_sign(double gamma1);

// Physical pre-rotation for a graph-frame rotation on vertex v.
Mat2 physical_rotation(const Vertex& v, const Mat2& graph_frame_rotation);

// Branch-resolved procedures: the outcome is fixed, probability reported.
std::pair<ProcedureOutcome, TiltedGraph> realign_branch(const TiltedGraph& g, VertexId cherry,
                                                         int outcome);
std::pair<ProcedureOutcome, TiltedGraph> merge_branch(const TiltedGraph& g, VertexId central,
                                                       int sign, int outcome);
std::pair<ProcedureOutcome, TiltedGraph> bridge_branch(const TiltedGraph& g, VertexId central,
                                                        int sign, int outcome);

// Graph-frame Z readout of an untilted cherry: the neighbour keeps its tilt
// and picks up Z^outcome. Probability 1/2 per outcome.
std::pair<ProcedureOutcome, TiltedGraph> drop_cherry_branch(const TiltedGraph& g,
                                                             VertexId cherry, int outcome);

// Sampling versions. sign = nullopt picks the amplifying sign.
std::pair<ProcedureOutcome, TiltedGraph> realign(const TiltedGraph& g, VertexId cherry, Rng& rng);
std::pair<ProcedureOutcome, TiltedGraph> merge(const TiltedGraph& g, VertexId central,
                                                std::optional<int> sign, Rng& rng);
std::pair<ProcedureOutcome, TiltedGraph> bridge(const TiltedGraph& g, VertexId central,
                                                 std::optional<int> sign, Rng& rng);

// Annotation angle currently on the two neighbours of a merge/bridge centre.
double prior_partial_fusion(const TiltedGraph& g, VertexId central);
double prior_weighted(const TiltedGraph& g, VertexId central);

struct RealignLoopResult {
  bool success = false;
  int attempts = 0;
  TiltedGraph graph;
};
// Realign `vertex` using its cherries until success or the budget runs out.
RealignLoopResult realign_until(const TiltedGraph& g, VertexId vertex, int cherry_budget,
                                Rng& rng);

enum class JoinKind { Merge, Bridge };
enum class Method { I, II };

struct MethodChoice {
  Method method = Method::II;
  double p_i = 0.0;
  double p_ii = 0.0;
};

// Amplification of the next attempt given the prior annotation angle.
double amplification(double gamma, double theta, JoinKind kind);
MethodChoice choose_method(TiltAngle theta_a, double gamma, JoinKind kind);

}  // namespace tglab

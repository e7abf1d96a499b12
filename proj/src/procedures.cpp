#include "tglab/procedures.hpp"

#include <algorithm>
#include <cmath>

#include "tglab/error.hpp"

namespace tglab {

namespace {
using Kind = EdgeAnnotation::Kind;
}

Mat2 rotation_m(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {-c, s, s, c};
}

Mat2 gate_s() { return {1.0, 0.0, 0.0, cplx(0.0, 1.0)}; }

Mat2 RotationDescriptor::matrix() const {
  switch (kind) {
    case Kind::M: return rotation_m(angle);
    case Kind::MS: return mat_mul(rotation_m(angle), gate_s());
    case Kind::Pauli:
      switch (basis) {
        case Basis::Z: return mat_identity();
        case Basis::X: return mat_hadamard();
        case Basis::Y: return mat_mul(mat_hadamard(), mat_adjoint(gate_s()));
      }
  }
  return mat_identity();
}

double p_success(double theta) {
  const double s = std::sin(2.0 * theta);
  return 0.5 * s * s;
}

double failure_function(double phi) {
  const double c2 = std::cos(phi) * std::cos(phi);
  const double s2 = 1.0 - c2;
  return std::acos(std::clamp(c2 / std::sqrt(c2 * c2 + s2 * s2), -1.0, 1.0));
}

BridgeAngles bridge_angles(double gamma1, double theta, int sign) {
  require(sign == 1 || sign == -1, ErrorKind::Numeric, "bridge sign must be +-1");
  const double inv_sq = 1.0 - sign * std::sin(2.0 * gamma1) * std::cos(2.0 * theta);
  require(inv_sq > 1e-15, ErrorKind::Numeric, "bridge normalisation diverges");
  BridgeAngles b;
  b.n_b = 1.0 / std::sqrt(inv_sq);
  b.delta = sign * kQuarterPi - gamma1;
  const double c = std::cos(theta), s = std::sin(theta);
  const double cos_b = std::sqrt(2.0) * b.n_b * c * std::sin(b.delta);
  const double sin_b = std::sqrt(2.0) * b.n_b * s * std::cos(b.delta);
  b.beta = std::atan2(sin_b, cos_b);
  // failure branch: -(cos b cos t - i sin b sin t ZZ)
  b.gamma2 = std::atan2(-sin_b * s, cos_b * c);
  return b;
}

double failure_function_general(double gamma1, double theta, int sign) {
  const BridgeAngles b = bridge_angles(gamma1, theta, sign);
  const double x = std::cos(b.beta) * std::cos(theta);
  const double y = std::sin(b.beta) * std::sin(theta);
  return std::acos(std::clamp(x / std::hypot(x, y), -1.0, 1.0));
}

int bridge_auto_sign(double gamma1, double theta) {
  return std::sin(2.0 * gamma1) * std::cos(2.0 * theta) >= 0.0 ? 1 : -1;
}

int merge_auto_sign(double gamma1) { return reduce_half_turn(gamma1) >= 0.0 ? 1 : -1; }

Mat2 physical_rotation(const Vertex& v, const Mat2& graph_frame_rotation) {
  return mat_mul(graph_frame_rotation, mat_adjoint(frame_matrix(v)));
}

namespace {

void require_cherry(const TiltedGraph& g, VertexId cherry) {
  require(g.has_vertex(cherry), ErrorKind::Graph, "no vertex " + std::to_string(cherry));
  require(g.degree(cherry) == 1, ErrorKind::Graph,
          "vertex " + std::to_string(cherry) + " is not a cherry (degree != 1)");
  const VertexId v = g.neighbours(cherry).front();
  const auto e = g.edge(cherry, v);
  require(e->kind == Kind::Pure, ErrorKind::Graph, "cherry edge must be a pure edge");
  require(g.vertex(cherry).tilt.is_untilted(), ErrorKind::Graph, "cherry must be untilted");
}

std::pair<VertexId, VertexId> centre_neighbours(const TiltedGraph& g, VertexId central) {
  require(g.has_vertex(central), ErrorKind::Graph, "no vertex " + std::to_string(central));
  const auto n = g.neighbours(central);
  require(n.size() == 2, ErrorKind::Graph,
          "central vertex " + std::to_string(central) + " must have exactly two neighbours");
  for (VertexId v : n)
    require(g.edge(central, v)->kind == Kind::Pure, ErrorKind::Graph,
            "central vertex must connect by pure edges");
  return {n[0], n[1]};
}

// Tilt of the graph-frame qubit with sign folded in by the rotation.
double centre_tilt(const TiltedGraph& g, VertexId v) { return g.vertex(v).tilt.radians(); }

}  // namespace

double prior_partial_fusion(const TiltedGraph& g, VertexId central) {
  const auto [x, y] = centre_neighbours(g, central);
  const auto e = g.edge(x, y);
  if (!e) return 0.0;
  require(e->kind == Kind::PartialFusion, ErrorKind::Graph,
          "merge needs the neighbours unlinked or linked by a partial fusion");
  return e->phi;
}

double prior_weighted(const TiltedGraph& g, VertexId central) {
  const auto [x, y] = centre_neighbours(g, central);
  const auto e = g.edge(x, y);
  if (!e) return 0.0;
  require(e->kind == Kind::Weighted, ErrorKind::Graph,
          "bridge needs the neighbours unlinked or linked by a weighted edge");
  return e->phi;
}

std::pair<ProcedureOutcome, TiltedGraph> realign_branch(const TiltedGraph& g, VertexId cherry,
                                                         int outcome) {
  require_cherry(g, cherry);
  const VertexId v = g.neighbours(cherry).front();
  const double theta = centre_tilt(g, v);
  const double c = std::cos(theta), s = std::sin(theta);
  ProcedureOutcome po;
  po.outcome = outcome;
  po.success = outcome == 1;
  po.success_probability = p_success(theta);
  po.rotation = RotationDescriptor::m(theta);  // applied after a graph-frame H
  po.graph_rotation = mat_mul(rotation_m(theta), mat_hadamard());
  TiltedGraph out = g;
  out.remove_vertex(cherry);
  if (outcome == 1) {
    po.probability = 2.0 * c * c * s * s;
    po.tilt = TiltAngle(std::atan2(s * c, c * s));
  } else {
    po.probability = c * c * c * c + s * s * s * s;
    po.tilt = TiltAngle(std::atan2(s * s, -c * c));
  }
  out.vertex(v).tilt = *po.tilt;
  return {po, canonicalize(out)};
}

std::pair<ProcedureOutcome, TiltedGraph> drop_cherry_branch(const TiltedGraph& g,
                                                             VertexId cherry, int outcome) {
  require_cherry(g, cherry);
  const VertexId v = g.neighbours(cherry).front();
  ProcedureOutcome po;
  po.outcome = outcome;
  po.success = true;
  po.probability = 0.5;
  po.success_probability = 1.0;
  po.rotation = RotationDescriptor::pauli(RotationDescriptor::Basis::Z);
  po.graph_rotation = mat_identity();
  TiltedGraph out = g;
  out.remove_vertex(cherry);
  if (outcome)
    require(frame_z(out.vertex(v), kPi), ErrorKind::Graph, "unreachable");
  po.tilt = out.vertex(v).tilt;
  return {po, canonicalize(out)};
}

std::pair<ProcedureOutcome, TiltedGraph> merge_branch(const TiltedGraph& g, VertexId central,
                                                       int sign, int outcome) {
  require(sign == 1 || sign == -1, ErrorKind::Numeric, "merge sign must be +-1");
  const auto [x, y] = centre_neighbours(g, central);
  require(g.vertex(x).tilt.is_untilted(1e-9) && g.vertex(y).tilt.is_untilted(1e-9),
          ErrorKind::Graph, "merge needs untilted neighbours");
  const double gamma1 = prior_partial_fusion(g, central);
  const double theta = centre_tilt(g, central);
  const double ps = p_success(theta);
  ProcedureOutcome po;
  po.outcome = outcome;
  po.rotation = RotationDescriptor::m(sign * theta);
  po.graph_rotation = po.rotation.matrix();
  po.success_probability = ps * (1.0 + sign * std::sin(2.0 * gamma1));
  const double c = std::cos(theta), s = std::sin(theta);
  double phi, weight;
  if (outcome == 1) {
    // c s (1 + sign ZZ)
    phi = sign * kQuarterPi;
    weight = ps;
    po.success = true;
  } else {
    // -(c^2 - sign s^2 ZZ)
    phi = std::atan2(-sign * s * s, c * c);
    weight = c * c * c * c + s * s * s * s;
  }
  const FusionCombination comb = combine_partial_fusions(phi, gamma1);
  po.probability = weight * comb.n_m * comb.n_m;
  po.annotation = EdgeAnnotation::partial_fusion(comb.phi);
  TiltedGraph out = g;
  out.remove_vertex(central);
  out.set_edge(x, y, *po.annotation);
  return {po, canonicalize(out)};
}

std::pair<ProcedureOutcome, TiltedGraph> bridge_branch(const TiltedGraph& g, VertexId central,
                                                        int sign, int outcome) {
  const auto [x, y] = centre_neighbours(g, central);
  const double gamma1 = prior_weighted(g, central);
  const double theta = centre_tilt(g, central);
  const BridgeAngles b = bridge_angles(gamma1, theta, sign);
  const double c = std::cos(theta), s = std::sin(theta);
  const double cb = std::cos(b.beta), sb = std::sin(b.beta);
  ProcedureOutcome po;
  po.outcome = outcome;
  po.rotation = RotationDescriptor::ms(b.beta);
  po.graph_rotation = po.rotation.matrix();
  po.success_probability = b.n_b * b.n_b * p_success(theta);
  double increment;
  if (outcome == 1) {
    // s_b c + i c_b s ZZ
    po.probability = sb * sb * c * c + cb * cb * s * s;
    increment = std::atan2(cb * s, sb * c);
    po.success = true;
  } else {
    po.probability = cb * cb * c * c + sb * sb * s * s;
    increment = b.gamma2;
  }
  po.annotation = EdgeAnnotation::weighted(combine_weighted_edges(gamma1, increment));
  TiltedGraph out = g;
  out.remove_vertex(central);
  out.set_edge(x, y, *po.annotation);
  return {po, canonicalize(out)};
}

std::pair<ProcedureOutcome, TiltedGraph> realign(const TiltedGraph& g, VertexId cherry, Rng& rng) {
  auto one = realign_branch(g, cherry, 1);
  if (rng.uniform() < one.first.probability) return one;
  return realign_branch(g, cherry, 0);
}

std::pair<ProcedureOutcome, TiltedGraph> merge(const TiltedGraph& g, VertexId central,
                                                std::optional<int> sign, Rng& rng) {
  const int sg = sign ? *sign : merge_auto_sign(prior_partial_fusion(g, central));
  auto one = merge_branch(g, central, sg, 1);
  if (rng.uniform() < one.first.probability) return one;
  return merge_branch(g, central, sg, 0);
}

std::pair<ProcedureOutcome, TiltedGraph> bridge(const TiltedGraph& g, VertexId central,
                                                 std::optional<int> sign, Rng& rng) {
  const int sg =
      sign ? *sign : bridge_auto_sign(prior_weighted(g, central), centre_tilt(g, central));
  auto one = bridge_branch(g, central, sg, 1);
  if (rng.uniform() < one.first.probability) return one;
  return bridge_branch(g, central, sg, 0);
}

RealignLoopResult realign_until(const TiltedGraph& g, VertexId vertex, int cherry_budget,
                                Rng& rng) {
  RealignLoopResult r{false, 0, g};
  while (r.attempts < cherry_budget) {
    if (r.graph.vertex(vertex).tilt.is_untilted()) {
      r.success = true;
      return r;
    }
    std::optional<VertexId> cherry;
    for (VertexId k : r.graph.neighbours(vertex)) {
      if (r.graph.degree(k) == 1 && r.graph.edge(k, vertex)->kind == Kind::Pure &&
          r.graph.vertex(k).tilt.is_untilted()) {
        cherry = k;
        break;
      }
    }
    if (!cherry) break;
    ++r.attempts;
    auto [po, next] = realign(r.graph, *cherry, rng);
    r.graph = std::move(next);
    if (po.success) {
      r.success = true;
      return r;
    }
  }
  r.success = r.graph.vertex(vertex).tilt.is_untilted();
  return r;
}

double amplification(double gamma, double theta, JoinKind kind) {
  const double s2g = std::abs(std::sin(2.0 * gamma));
  if (kind == JoinKind::Merge) return 1.0 + s2g;
  return 1.0 / (1.0 - s2g * std::abs(std::cos(2.0 * theta)));
}

MethodChoice choose_method(TiltAngle theta_a, double gamma, JoinKind kind) {
  const double ta = theta_a.radians();
  const double talpha = -failure_function(ta);
  MethodChoice m;
  m.p_i = amplification(gamma, ta, kind) * p_success(ta);
  m.p_ii = 1.0 - (1.0 - amplification(gamma, talpha, kind) * p_success(talpha)) *
                     (1.0 - p_success(ta));
  m.method = m.p_i > m.p_ii ? Method::I : Method::II;
  return m;
}

}  // namespace tglab

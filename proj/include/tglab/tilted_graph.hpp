#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tglab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kQuarterPi = kPi / 4.0;
inline constexpr double kHalfPi = kPi / 2.0;

// Reduce an angle into (-pi/2, pi/2] (period pi).
double reduce_half_turn(double phi);
// Reduce into [0, 2 pi).
double reduce_full_turn(double phi);
bool angle_near(double a, double b, double tol = 1e-12);

// Vertex preparation cos(theta)|0> + sin(theta)|1>, theta modulo pi.
class TiltAngle {
 public:
  TiltAngle() : theta_(kQuarterPi) {}
  explicit TiltAngle(double theta);
  static TiltAngle untilted() { return TiltAngle(kQuarterPi); }

  double radians() const { return theta_; }
  bool is_untilted(double tol = 1e-12) const;
  bool is_degenerate(double tol = 1e-12) const;  // product state, theta in {0, pi/2}
  // |<theta|pi/4>|^2 for a single qubit, i.e. 1/2 (1 + sin 2 theta)
  double fidelity() const;

  friend bool operator==(TiltAngle a, TiltAngle b) { return a.theta_ == b.theta_; }

 private:
  double theta_;
};

using VertexId = long;

// Local frame: physical qubit = Z(z_phase) X^x_flip H^hadamard (graph-frame qubit),
// where the graph frame is the one in which edges are applied.
struct Vertex {
  VertexId id = 0;
  TiltAngle tilt;
  bool hadamard = false;
  double z_phase = 0.0;
  bool x_flip = false;
};

struct EdgeAnnotation {
  enum class Kind { Pure, Weighted, PartialFusion };
  Kind kind = Kind::Pure;
  double phi = 0.0;  // unused for Pure

  static EdgeAnnotation pure() { return {Kind::Pure, 0.0}; }
  static EdgeAnnotation weighted(double phi) { return {Kind::Weighted, reduce_half_turn(phi)}; }
  static EdgeAnnotation partial_fusion(double phi) {
    return {Kind::PartialFusion, reduce_half_turn(phi)};
  }
};

const char* kind_name(EdgeAnnotation::Kind k);

struct FusionCombination {
  double phi;
  double n_m;  // norm of the combined operator relative to a canonical P(phi)
};

// P(phi1) P(phi2) = N_M P(phi).
FusionCombination combine_partial_fusions(double phi1, double phi2);
// U(phi1) U(phi2) = U(phi1 + phi2).
double combine_weighted_edges(double phi1, double phi2);

// Physical X applied to a vertex: theta -> pi/2 - theta, flag toggles.
Vertex apply_x_flip(const Vertex& v);

// Graph-frame single-qubit operations, inserted right after the edge layer.
// Return false where the frame cannot represent the result.
bool frame_z(Vertex& v, double alpha);
void frame_x(Vertex& v);
void frame_h(Vertex& v);
// Physical H applied on top of the current frame (z_phase must be 0 or pi).
void physical_h(Vertex& v);

class TiltedGraph {
 public:
  using EdgeKey = std::pair<VertexId, VertexId>;

  static EdgeKey key(VertexId a, VertexId b);

  void add_vertex(const Vertex& v);
  Vertex& add_vertex(VertexId id, double theta = kQuarterPi);
  void remove_vertex(VertexId id);
  bool has_vertex(VertexId id) const { return vertices_.count(id) != 0; }
  const Vertex& vertex(VertexId id) const;
  Vertex& vertex(VertexId id);

  void set_edge(VertexId a, VertexId b, EdgeAnnotation ann);
  void remove_edge(VertexId a, VertexId b);
  std::optional<EdgeAnnotation> edge(VertexId a, VertexId b) const;

  std::vector<VertexId> neighbours(VertexId id) const;
  std::size_t degree(VertexId id) const;
  std::vector<VertexId> component(VertexId id) const;
  std::vector<VertexId> vertex_ids() const;

  const std::map<VertexId, Vertex>& vertices() const { return vertices_; }
  const std::map<EdgeKey, EdgeAnnotation>& edges() const { return edges_; }
  std::size_t size() const { return vertices_.size(); }
  VertexId next_id() const { return vertices_.empty() ? 0 : vertices_.rbegin()->first + 1; }

  // "V id theta hadamard z_phase x_flip" and "E id1 id2 kind phi" records.
  std::string to_text() const;
  static TiltedGraph from_text(const std::string& text);

  bool operator==(const TiltedGraph& o) const;

 private:
  std::map<VertexId, Vertex> vertices_;
  std::map<EdgeKey, EdgeAnnotation> edges_;
  std::map<VertexId, std::set<VertexId>> adjacency_;
};

// Canonical ranges, positive tilts, +-pi/4 annotations rewritten to pure edges.
TiltedGraph canonicalize(const TiltedGraph& g);

}  // namespace tglab

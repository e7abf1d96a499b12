#include "tglab/tilted_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "tglab/csv.hpp"
#include "tglab/error.hpp"

namespace tglab {

double reduce_half_turn(double phi) {
  require(std::isfinite(phi), ErrorKind::Numeric, "angle must be finite");
  double r = std::fmod(phi, kPi);  // (-pi, pi)
  if (r <= -kHalfPi) r += kPi;
  if (r > kHalfPi) r -= kPi;
  // snap values that only missed the closed end through rounding
  if (std::abs(r + kHalfPi) < 1e-15) r = kHalfPi;
  return r;
}

double reduce_full_turn(double phi) {
  require(std::isfinite(phi), ErrorKind::Numeric, "angle must be finite");
  double r = std::fmod(phi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  if (r >= 2.0 * kPi - 1e-13) r = 0.0;
  if (std::abs(r) < 1e-13) r = 0.0;
  return r;
}

bool angle_near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

TiltAngle::TiltAngle(double theta) : theta_(reduce_half_turn(theta)) {}

bool TiltAngle::is_untilted(double tol) const {
  return angle_near(std::abs(theta_), kQuarterPi, tol);
}

bool TiltAngle::is_degenerate(double tol) const {
  return std::abs(theta_) <= tol || angle_near(std::abs(theta_), kHalfPi, tol);
}

double TiltAngle::fidelity() const { return 0.5 * (1.0 + std::abs(std::sin(2.0 * theta_))); }

const char* kind_name(EdgeAnnotation::Kind k) {
  switch (k) {
    case EdgeAnnotation::Kind::Pure: return "pure";
    case EdgeAnnotation::Kind::Weighted: return "weighted";
    case EdgeAnnotation::Kind::PartialFusion: return "partial";
  }
  return "?";
}

FusionCombination combine_partial_fusions(double phi1, double phi2) {
  const double s = std::sin(phi1 + phi2);
  const double c = std::cos(phi1 - phi2);
  const double n = std::hypot(s, c);
  require(n > 1e-14, ErrorKind::Numeric, "annihilating partial fusions: product is zero");
  return {reduce_half_turn(std::atan2(s, c)), n};
}

double combine_weighted_edges(double phi1, double phi2) { return reduce_half_turn(phi1 + phi2); }

Vertex apply_x_flip(const Vertex& v) {
  // label-level identity X|theta> = |pi/2 - theta>; the flag records the flip
  Vertex out = v;
  out.tilt = TiltAngle(kHalfPi - v.tilt.radians());
  out.x_flip = !v.x_flip;
  return out;
}

bool frame_z(Vertex& v, double alpha) {
  if (!v.hadamard) {
    v.z_phase = reduce_full_turn(v.z_phase + (v.x_flip ? -alpha : alpha));
    return true;
  }
  const double a = reduce_full_turn(alpha);
  if (a == 0.0) return true;
  if (angle_near(a, kPi, 1e-12)) {
    v.x_flip = !v.x_flip;  // H Z = X H
    return true;
  }
  return false;
}

void frame_x(Vertex& v) {
  if (!v.hadamard)
    v.x_flip = !v.x_flip;
  else
    v.z_phase = reduce_full_turn(v.z_phase + kPi);  // H X = Z H
}

void frame_h(Vertex& v) { v.hadamard = !v.hadamard; }

void physical_h(Vertex& v) {
  const double z = reduce_full_turn(v.z_phase);
  const bool z_on = angle_near(z, kPi, 1e-12);
  require(z == 0.0 || z_on, ErrorKind::Graph,
          "physical H needs a Pauli-only frame on the vertex");
  // H Z^a X^b = X^a Z^b H
  const bool b = v.x_flip;
  v.x_flip = z_on;
  v.z_phase = b ? kPi : 0.0;
  v.hadamard = !v.hadamard;
}

TiltedGraph::EdgeKey TiltedGraph::key(VertexId a, VertexId b) {
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

void TiltedGraph::add_vertex(const Vertex& v) {
  require(!has_vertex(v.id), ErrorKind::Graph, "duplicate vertex " + std::to_string(v.id));
  Vertex c = v;
  c.z_phase = reduce_full_turn(c.z_phase);
  vertices_.emplace(v.id, c);
  adjacency_[v.id];
}

Vertex& TiltedGraph::add_vertex(VertexId id, double theta) {
  Vertex v;
  v.id = id;
  v.tilt = TiltAngle(theta);
  add_vertex(v);
  return vertices_.at(id);
}

void TiltedGraph::remove_vertex(VertexId id) {
  require(has_vertex(id), ErrorKind::Graph, "no vertex " + std::to_string(id));
  for (VertexId n : adjacency_.at(id)) {
    edges_.erase(key(id, n));
    adjacency_.at(n).erase(id);
  }
  adjacency_.erase(id);
  vertices_.erase(id);
}

const Vertex& TiltedGraph::vertex(VertexId id) const {
  auto it = vertices_.find(id);
  require(it != vertices_.end(), ErrorKind::Graph, "no vertex " + std::to_string(id));
  return it->second;
}

Vertex& TiltedGraph::vertex(VertexId id) {
  auto it = vertices_.find(id);
  require(it != vertices_.end(), ErrorKind::Graph, "no vertex " + std::to_string(id));
  return it->second;
}

void TiltedGraph::set_edge(VertexId a, VertexId b, EdgeAnnotation ann) {
  require(a != b, ErrorKind::Graph, "self-edge on " + std::to_string(a));
  require(has_vertex(a) && has_vertex(b), ErrorKind::Graph, "edge endpoint missing");
  if (ann.kind == EdgeAnnotation::Kind::Pure) ann.phi = 0.0;
  edges_[key(a, b)] = ann;
  adjacency_[a].insert(b);
  adjacency_[b].insert(a);
}

void TiltedGraph::remove_edge(VertexId a, VertexId b) {
  if (edges_.erase(key(a, b)) == 0) return;
  adjacency_.at(a).erase(b);
  adjacency_.at(b).erase(a);
}

std::optional<EdgeAnnotation> TiltedGraph::edge(VertexId a, VertexId b) const {
  auto it = edges_.find(key(a, b));
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

std::vector<VertexId> TiltedGraph::neighbours(VertexId id) const {
  auto it = adjacency_.find(id);
  if (it == adjacency_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::size_t TiltedGraph::degree(VertexId id) const {
  auto it = adjacency_.find(id);
  return it == adjacency_.end() ? 0 : it->second.size();
}

std::vector<VertexId> TiltedGraph::component(VertexId id) const {
  std::set<VertexId> seen{id};
  std::vector<VertexId> stack{id};
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    for (VertexId n : neighbours(v))
      if (seen.insert(n).second) stack.push_back(n);
  }
  return {seen.begin(), seen.end()};
}

std::vector<VertexId> TiltedGraph::vertex_ids() const {
  std::vector<VertexId> out;
  for (const auto& [id, v] : vertices_) out.push_back(id);
  return out;
}

std::string TiltedGraph::to_text() const {
  std::string s;
  for (const auto& [id, v] : vertices_) {
    s += "V " + std::to_string(id) + " " + fmt_double(v.tilt.radians()) + " " +
         (v.hadamard ? "1" : "0") + " " + fmt_double(v.z_phase) + " " + (v.x_flip ? "1" : "0") +
         "\n";
  }
  for (const auto& [k, ann] : edges_) {
    s += "E " + std::to_string(k.first) + " " + std::to_string(k.second) + " " +
         kind_name(ann.kind) + " " + fmt_double(ann.phi) + "\n";
  }
  return s;
}

TiltedGraph TiltedGraph::from_text(const std::string& text) {
  TiltedGraph g;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    const std::string where = "graph line " + std::to_string(lineno);
    if (tag == "V") {
      Vertex v;
      std::string theta, z;
      int h = 0, x = 0;
      require(static_cast<bool>(ls >> v.id >> theta >> h >> z >> x), ErrorKind::Config,
              where + ": malformed vertex record");
      const double t = parse_double(theta, where);
      require(t > -kHalfPi && t <= kHalfPi, ErrorKind::Config, where + ": tilt out of range");
      v.tilt = TiltAngle(t);
      v.hadamard = h != 0;
      v.z_phase = parse_double(z, where);
      v.x_flip = x != 0;
      g.vertices_.emplace(v.id, v);  // keep z bits exactly as written
      g.adjacency_[v.id];
    } else if (tag == "E") {
      VertexId a, b;
      std::string kind, phi;
      require(static_cast<bool>(ls >> a >> b >> kind >> phi), ErrorKind::Config,
              where + ": malformed edge record");
      EdgeAnnotation ann;
      if (kind == "pure") ann.kind = EdgeAnnotation::Kind::Pure;
      else if (kind == "weighted") ann.kind = EdgeAnnotation::Kind::Weighted;
      else if (kind == "partial") ann.kind = EdgeAnnotation::Kind::PartialFusion;
      else fail(ErrorKind::Config, where + ": unknown edge kind '" + kind + "'");
      ann.phi = parse_double(phi, where);
      require(a != b && g.has_vertex(a) && g.has_vertex(b), ErrorKind::Config,
              where + ": edge endpoints must be distinct existing vertices");
      g.edges_[key(a, b)] = ann;
      g.adjacency_[a].insert(b);
      g.adjacency_[b].insert(a);
    } else {
      fail(ErrorKind::Config, where + ": unknown record '" + tag + "'");
    }
  }
  return g;
}

bool TiltedGraph::operator==(const TiltedGraph& o) const {
  if (vertices_.size() != o.vertices_.size() || edges_.size() != o.edges_.size()) return false;
  for (const auto& [id, v] : vertices_) {
    auto it = o.vertices_.find(id);
    if (it == o.vertices_.end()) return false;
    const Vertex& w = it->second;
    if (!(v.tilt == w.tilt) || v.hadamard != w.hadamard || v.z_phase != w.z_phase ||
        v.x_flip != w.x_flip)
      return false;
  }
  for (const auto& [k, a] : edges_) {
    auto it = o.edges_.find(k);
    if (it == o.edges_.end() || it->second.kind != a.kind || it->second.phi != a.phi)
      return false;
  }
  return true;
}

namespace {

using Kind = EdgeAnnotation::Kind;

// Add an annotation on (a, b) on top of whatever is there.
void fold_edge(TiltedGraph& g, VertexId a, VertexId b, EdgeAnnotation add) {
  auto cur = g.edge(a, b);
  if (!cur) {
    g.set_edge(a, b, add);
    return;
  }
  if (cur->kind == Kind::Pure && add.kind == Kind::Pure) {
    g.remove_edge(a, b);  // CZ^2 = 1
    return;
  }
  if (cur->kind == add.kind && add.kind == Kind::Weighted) {
    g.set_edge(a, b, EdgeAnnotation::weighted(combine_weighted_edges(cur->phi, add.phi)));
    return;
  }
  if (cur->kind == add.kind && add.kind == Kind::PartialFusion) {
    g.set_edge(a, b,
               EdgeAnnotation::partial_fusion(combine_partial_fusions(cur->phi, add.phi).phi));
    return;
  }
  const bool mixed_pw = (cur->kind == Kind::Pure && add.kind == Kind::Weighted) ||
                        (cur->kind == Kind::Weighted && add.kind == Kind::Pure);
  if (mixed_pw) {
    // CZ U(phi) = U(phi + pi/4) S_a S_b up to phase
    const double phi = cur->kind == Kind::Weighted ? cur->phi : add.phi;
    Vertex va = g.vertex(a), vb = g.vertex(b);
    require(frame_z(va, kHalfPi) && frame_z(vb, kHalfPi), ErrorKind::Graph,
            "cannot fold a pure edge into a weighted edge on Hadamard-framed vertices");
    g.vertex(a) = va;
    g.vertex(b) = vb;
    g.set_edge(a, b, EdgeAnnotation::weighted(phi + kQuarterPi));
    return;
  }
  fail(ErrorKind::Graph, "cannot combine a partial fusion with a unitary edge annotation");
}

void z_on(TiltedGraph& g, VertexId v, double alpha) {
  require(frame_z(g.vertex(v), alpha), ErrorKind::Graph,
          "graph-frame Z rotation not representable on vertex " + std::to_string(v));
}

// P(+-pi/4) between x and y: y becomes a Hadamard leaf copying x.
void fuse(TiltedGraph& g, VertexId x, VertexId y, bool odd) {
  const double tx = g.vertex(x).tilt.radians();
  const double ty = g.vertex(y).tilt.radians();
  const double a0 = std::cos(tx) * (odd ? std::sin(ty) : std::cos(ty));
  const double a1 = std::sin(tx) * (odd ? std::cos(ty) : std::sin(ty));
  require(std::hypot(a0, a1) > 1e-300, ErrorKind::Numeric,
          "fusion annihilates the state (orthogonal product inputs)");

  g.remove_edge(x, y);
  for (VertexId u : g.neighbours(y)) {
    EdgeAnnotation ann = *g.edge(y, u);
    g.remove_edge(y, u);
    if (odd) {
      if (ann.kind == Kind::Pure)
        z_on(g, u, kPi);
      else
        ann.phi = -ann.phi;
    }
    fold_edge(g, x, u, ann);
  }
  g.vertex(x).tilt = TiltAngle(std::atan2(a1, a0));
  Vertex& vy = g.vertex(y);
  vy.tilt = TiltAngle::untilted();
  if (odd) frame_x(vy);
  frame_h(vy);
  g.set_edge(x, y, EdgeAnnotation::pure());
}

// One rewrite step; returns true if the graph changed.
bool rewrite_once(TiltedGraph& g) {
  for (const auto& [k, ann0] : g.edges()) {
    const VertexId a = k.first, b = k.second;
    const EdgeAnnotation ann = ann0;
    if (ann.kind == Kind::Pure) continue;
    const double phi = reduce_half_turn(ann.phi);
    if (phi != ann.phi) {
      g.set_edge(a, b, {ann.kind, phi});
      return true;
    }
    if (angle_near(phi, 0.0)) {
      g.remove_edge(a, b);
      return true;
    }
    if (angle_near(phi, kHalfPi)) {
      // U(pi/2) = i ZZ and P(pi/2) = ZZ
      g.remove_edge(a, b);
      z_on(g, a, kPi);
      z_on(g, b, kPi);
      return true;
    }
    if (angle_near(std::abs(phi), kQuarterPi)) {
      const bool plus = phi > 0.0;
      if (ann.kind == Kind::Weighted) {
        Vertex va = g.vertex(a), vb = g.vertex(b);
        const double alpha = plus ? -kHalfPi : kHalfPi;
        if (frame_z(va, alpha) && frame_z(vb, alpha)) {
          g.vertex(a) = va;
          g.vertex(b) = vb;
          g.set_edge(a, b, EdgeAnnotation::pure());
          return true;
        }
        continue;  // stays weighted, state unchanged
      }
      fuse(g, a, b, !plus);
      return true;
    }
  }
  return false;
}

}  // namespace

TiltedGraph canonicalize(const TiltedGraph& in) {
  TiltedGraph g = in;
  for (VertexId id : g.vertex_ids()) {
    Vertex& v = g.vertex(id);
    if (v.tilt.radians() < 0.0) {
      // |-theta> = Z |theta>
      v.tilt = TiltAngle(-v.tilt.radians());
      require(frame_z(v, kPi), ErrorKind::Graph, "unreachable");
    }
  }
  for (int guard = 0; rewrite_once(g); ++guard)
    require(guard < 100000, ErrorKind::Numeric, "canonicalisation did not terminate");
  for (VertexId id : g.vertex_ids()) {
    Vertex& v = g.vertex(id);
    v.z_phase = reduce_full_turn(v.z_phase);
    if (v.tilt.radians() < 0.0) {
      v.tilt = TiltAngle(-v.tilt.radians());
      frame_z(v, kPi);
    }
  }
  return g;
}

}  // namespace tglab

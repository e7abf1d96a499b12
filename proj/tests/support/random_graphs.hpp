#pragma once

#include <cmath>

#include "tglab/rng.hpp"
#include "tglab/tilted_graph.hpp"

namespace tglab::testing {

inline double uniform(Rng& r, double lo, double hi) { return lo + (hi - lo) * r.uniform(); }

inline EdgeAnnotation random_annotation(Rng& r) {
  static const double special[] = {0.0, kQuarterPi, -kQuarterPi, kHalfPi};
  const int kind = static_cast<int>(r.next_u64() % 3);
  const double phi = r.uniform() < 0.5 ? special[r.next_u64() % 4] : uniform(r, -kHalfPi, kHalfPi);
  if (kind == 0) return EdgeAnnotation::pure();
  if (kind == 1) return EdgeAnnotation::weighted(phi);
  return EdgeAnnotation::partial_fusion(phi);
}

// Arbitrary tilts and frames, sparse random annotated edges.
inline TiltedGraph random_graph(Rng& r, int n, double edge_p = 0.35) {
  TiltedGraph g;
  for (int i = 0; i < n; ++i) {
    Vertex v;
    v.id = i;
    v.tilt = TiltAngle(uniform(r, -kHalfPi, kHalfPi));
    v.hadamard = r.uniform() < 0.4;
    v.x_flip = r.uniform() < 0.4;
    v.z_phase = r.uniform() < 0.5 ? 0.0 : uniform(r, 0.0, 2.0 * kPi);
    g.add_vertex(v);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (r.uniform() < edge_p) g.set_edge(i, j, random_annotation(r));
  return g;
}

}  // namespace tglab::testing

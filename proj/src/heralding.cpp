#include "tglab/heralding.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <complex>

#include "tglab/error.hpp"

namespace tglab {

void DhContext::validate() const {
  require(detection_efficiency > 0.0 && detection_efficiency <= 1.0, ErrorKind::Config,
          "detection efficiency must lie in (0, 1]");
}

double DhContext::theta1() const {
  const double c = std::cos(theta_a.radians()), s = std::sin(theta_b.radians());
  return c * c * s * s;
}

double DhContext::theta2() const {
  const double s = std::sin(theta_a.radians()), c = std::cos(theta_b.radians());
  return s * s * c * c;
}

double success_probability(TiltAngle theta_a, TiltAngle theta_b, double efficiency) {
  require(efficiency > 0.0 && efficiency <= 1.0, ErrorKind::Config,
          "detection efficiency must lie in (0, 1]");
  const double ca = std::cos(theta_a.radians()), sa = std::sin(theta_a.radians());
  const double cb = std::cos(theta_b.radians()), sb = std::sin(theta_b.radians());
  return (ca * ca * sb * sb + sa * sa * cb * cb) * efficiency * efficiency;
}

double click_density_first(double t1, const DhContext& ctx) {
  return ctx.theta1() * ctx.pa.density(t1) + ctx.theta2() * ctx.pb.density(t1);
}

ClickLikelihood click_likelihood(const ClickPair& c, const DhContext& ctx) {
  return {ctx.theta1() * ctx.pa.density(c.t1) * ctx.pb.density(c.t2),
          ctx.theta2() * ctx.pb.density(c.t1) * ctx.pa.density(c.t2)};
}

double click_density_joint(const ClickPair& c, const DhContext& ctx) {
  const auto l = click_likelihood(c, ctx);
  return l.x_term + l.y_term;
}

double click_density_conditional(const ClickPair& c, const DhContext& ctx) {
  const double q1 = click_density_first(c.t1, ctx);
  require(q1 > 0.0, ErrorKind::Numeric, "conditioning on a first click of zero density");
  return click_density_joint(c, ctx) / q1;
}

ClickPair sample_clicks(const DhContext& ctx, Rng& rng) {
  const double w1 = ctx.theta1(), w2 = ctx.theta2();
  require(w1 + w2 > 0.0, ErrorKind::Numeric, "double heralding cannot succeed for these tilts");
  if (rng.uniform() * (w1 + w2) < w1) {
    const double t1 = ctx.pa.sample(rng);
    return {t1, ctx.pb.sample(rng)};
  }
  const double t1 = ctx.pb.sample(rng);
  return {t1, ctx.pa.sample(rng)};
}

TiltAngle tilt_after_dh(const DhContext& ctx, const ClickPair& clicks) {
  const auto l = click_likelihood(clicks, ctx);
  require(l.x_term + l.y_term > 0.0, ErrorKind::Numeric,
          "tilt undefined: both click likelihoods vanish");
  // cos^2 = Y / (X + Y)
  return TiltAngle(std::atan2(std::sqrt(l.x_term), std::sqrt(l.y_term)));
}

double gate_fidelity(const ClickLikelihood& l) {
  const double q = l.x_term + l.y_term;
  if (q <= 0.0) return 0.0;
  return std::sqrt(l.x_term * l.y_term) / q;
}

DhOutcome attempt_dh(const DhContext& ctx, Rng& rng) {
  const double p = success_probability(ctx.theta_a, ctx.theta_b, ctx.detection_efficiency);
  if (rng.uniform() < p) {
    const ClickPair c = sample_clicks(ctx, rng);
    const int parity = rng.uniform() < 0.5 ? +1 : -1;
    return DhOutcome::succeeded(tilt_after_dh(ctx, c), c, parity);
  }
  const double ca = std::cos(ctx.theta_a.radians()), sa = std::sin(ctx.theta_a.radians());
  const double cb = std::cos(ctx.theta_b.radians()), sb = std::sin(ctx.theta_b.radians());
  const double w0 = ca * ca * cb * cb, w1 = sa * sa * sb * sb;
  const int bit = (w0 + w1 > 0.0 && rng.uniform() * (w0 + w1) >= w0) ? 1 : 0;
  return DhOutcome::failed(bit, bit);
}

// ---- graph rewriting -------------------------------------------------------

namespace {

using cplx = std::complex<double>;

struct Star {
  VertexId centre = 0;
  std::vector<VertexId> leaves;
};

// Centre: no frame but Z; leaves: untilted Hadamard vertices hanging off it.
std::optional<Star> as_star(const TiltedGraph& g, VertexId q) {
  const auto comp = g.component(q);
  auto is_centre_frame = [](const Vertex& v) { return !v.hadamard && !v.x_flip; };
  for (VertexId c : comp) {
    const Vertex& vc = g.vertex(c);
    if (!is_centre_frame(vc)) continue;
    if (g.degree(c) != comp.size() - 1) continue;
    bool ok = true;
    Star s{c, {}};
    for (VertexId v : comp) {
      if (v == c) continue;
      const Vertex& vv = g.vertex(v);
      const auto e = g.edge(c, v);
      if (!e || e->kind != EdgeAnnotation::Kind::Pure || g.degree(v) != 1 || !vv.hadamard ||
          !vv.tilt.is_untilted() || vv.tilt.radians() < 0.0) {
        ok = false;
        break;
      }
      s.leaves.push_back(v);
    }
    if (ok) return s;
  }
  return std::nullopt;
}

bool is_cherry(const TiltedGraph& g, VertexId q) {
  const Vertex& v = g.vertex(q);
  if (v.hadamard || v.x_flip || g.degree(q) != 1) return false;
  const auto e = g.edge(q, g.neighbours(q).front());
  return e && e->kind == EdgeAnnotation::Kind::Pure;
}

// Amplitude of logical branch L of a star, frames included.
cplx star_amplitude(const TiltedGraph& g, const Star& s, int L) {
  const Vertex& c = g.vertex(s.centre);
  const double t = c.tilt.radians();
  cplx a = (L ? std::sin(t) : std::cos(t)) * std::polar(1.0, L * c.z_phase);
  for (VertexId l : s.leaves) {
    const Vertex& v = g.vertex(l);
    const int bit = L ^ static_cast<int>(v.x_flip);
    a *= std::polar(1.0, bit * v.z_phase);
  }
  return a;
}

int star_bit_offset(const TiltedGraph& g, const Star& s, VertexId v) {
  return v == s.centre ? 0 : static_cast<int>(g.vertex(v).x_flip);
}

TiltedGraph dh_stars(const TiltedGraph& g, VertexId qa, VertexId qb, const Star& sa,
                     const Star& sb, const DhOutcome& o) {
  TiltedGraph out = g;
  const int xa = star_bit_offset(g, sa, qa), xb = star_bit_offset(g, sb, qb);
  if (!o.success) {
    const int La = o.bit_a ^ xa, Lb = o.bit_b ^ xb;
    for (const auto& [s, L] : {std::pair{&sa, La}, std::pair{&sb, Lb}}) {
      std::vector<VertexId> members{s->centre};
      members.insert(members.end(), s->leaves.begin(), s->leaves.end());
      for (VertexId v : members) {
        const int bit = L ^ star_bit_offset(g, *s, v);
        out.remove_vertex(v);
        if (v == qa || v == qb) continue;
        out.add_vertex(v, bit ? kHalfPi : 0.0);
      }
    }
    return out;
  }

  const double tb = o.theta_beta.radians();
  cplx amp[2];
  for (int Lb = 0; Lb < 2; ++Lb) {
    const int pb = Lb ^ xb;  // physical value of qb
    const int La = 1 ^ pb ^ xa;
    const cplx phase_a = star_amplitude(g, sa, La), phase_b = star_amplitude(g, sb, Lb);
    const double mag = pb == 0 ? std::cos(tb) : std::sin(tb);
    cplx a = mag;
    if (std::abs(phase_a) > 0.0) a *= phase_a / std::abs(phase_a);
    if (std::abs(phase_b) > 0.0) a *= phase_b / std::abs(phase_b);
    if (pb == 0 && o.parity < 0) a = -a;
    amp[Lb] = a;
  }

  std::vector<VertexId> a_members{sa.centre};
  a_members.insert(a_members.end(), sa.leaves.begin(), sa.leaves.end());
  std::vector<int> a_offsets;
  for (VertexId v : a_members) a_offsets.push_back(star_bit_offset(g, sa, v));
  for (VertexId v : a_members) out.remove_vertex(v);

  Vertex& c = out.vertex(sb.centre);
  c.tilt = TiltAngle(std::atan2(std::abs(amp[1]), std::abs(amp[0])));
  double z = 0.0;
  if (std::abs(amp[0]) > 0.0 && std::abs(amp[1]) > 0.0) z = std::arg(amp[1]) - std::arg(amp[0]);
  c.z_phase = reduce_full_turn(z);
  c.hadamard = false;
  c.x_flip = false;
  for (VertexId l : sb.leaves) out.vertex(l).z_phase = 0.0;
  for (std::size_t i = 0; i < a_members.size(); ++i) {
    Vertex v;
    v.id = a_members[i];
    v.tilt = TiltAngle::untilted();
    v.hadamard = true;
    v.x_flip = (1 ^ xa ^ xb ^ a_offsets[i]) != 0;
    out.add_vertex(v);
    out.set_edge(sb.centre, v.id, EdgeAnnotation::pure());
  }
  return out;
}

TiltedGraph dh_cherries(const TiltedGraph& g, VertexId qa, VertexId qb, const DhOutcome& o) {
  TiltedGraph out = g;
  const VertexId na = g.neighbours(qa).front();
  const VertexId nb = g.neighbours(qb).front();
  if (!o.success) {
    out.remove_vertex(qa);
    out.remove_vertex(qb);
    if (o.bit_a) require(frame_z(out.vertex(na), kPi), ErrorKind::Graph, "unreachable");
    if (o.bit_b) require(frame_z(out.vertex(nb), kPi), ErrorKind::Graph, "unreachable");
    return out;
  }
  const double phi_a = g.vertex(qa).z_phase, phi_b = g.vertex(qb).z_phase;
  const double tb = o.theta_beta.radians();
  // branch qb=0 (qa=1): parity * cos * e^{i phi_a} Z_na ; branch qb=1: sin * e^{i phi_b} Z_nb
  Vertex& c = out.vertex(qb);
  c.tilt = TiltAngle(tb);
  c.z_phase = reduce_full_turn(phi_b - phi_a + (o.parity < 0 ? kPi : 0.0));
  c.hadamard = false;
  c.x_flip = false;
  out.set_edge(qb, na, EdgeAnnotation::pure());
  require(frame_z(out.vertex(na), kPi), ErrorKind::Graph, "unreachable");  // Z_na^(1 xor qb)

  out.remove_edge(qa, na);
  Vertex& leaf = out.vertex(qa);
  leaf.tilt = TiltAngle::untilted();
  leaf.z_phase = 0.0;
  leaf.hadamard = true;
  leaf.x_flip = true;  // physical qa = NOT qb
  out.set_edge(qb, qa, EdgeAnnotation::pure());
  return out;
}

}  // namespace

DhConfiguration classify_dh_qubit(const TiltedGraph& g, VertexId q) {
  require(g.has_vertex(q), ErrorKind::Graph, "no vertex " + std::to_string(q));
  if (as_star(g, q)) return DhConfiguration::Ghz;
  if (is_cherry(g, q)) return DhConfiguration::Cherry;
  fail(ErrorKind::Graph, "vertex " + std::to_string(q) +
                             " is neither in a GHZ star nor a Hadamard-free cherry");
}

TiltAngle dh_effective_tilt(const TiltedGraph& g, VertexId q) {
  if (auto s = as_star(g, q)) {
    const double t = g.vertex(s->centre).tilt.radians();
    return star_bit_offset(g, *s, q) ? TiltAngle(kHalfPi - t) : TiltAngle(t);
  }
  require(is_cherry(g, q), ErrorKind::Graph, "unrecognised double-heralding configuration");
  return g.vertex(q).tilt;
}

TiltedGraph apply_dh_to_graph(const TiltedGraph& g, VertexId qa, VertexId qb,
                              const DhOutcome& outcome) {
  require(g.has_vertex(qa) && g.has_vertex(qb), ErrorKind::Graph, "DH qubit missing");
  const auto ka = classify_dh_qubit(g, qa), kb = classify_dh_qubit(g, qb);
  require(ka == kb, ErrorKind::Graph, "mixed GHZ/cherry double heralding is not supported");
  if (ka == DhConfiguration::Ghz) {
    const auto comp = g.component(qa);
    require(std::find(comp.begin(), comp.end(), qb) == comp.end(), ErrorKind::Graph,
            "GHZ double heralding needs qubits in distinct components");
    return dh_stars(g, qa, qb, *as_star(g, qa), *as_star(g, qb), outcome);
  }
  // The cherry rewrite only puts Z corrections on the two neighbours, so any
  // correlation between them is untouched.
  require(g.neighbours(qa).front() != g.neighbours(qb).front(), ErrorKind::Graph,
          "cherries for double heralding must hang off different vertices");
  return dh_cherries(g, qa, qb, outcome);
}

}  // namespace tglab

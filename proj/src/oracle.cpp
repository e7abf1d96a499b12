#include "tglab/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "tglab/error.hpp"

namespace tglab {

namespace {
const cplx I(0.0, 1.0);
}

Mat2 mat_mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}
Mat2 mat_adjoint(const Mat2& a) {
  return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
}
Mat2 mat_identity() { return {1.0, 0.0, 0.0, 1.0}; }
Mat2 mat_hadamard() {
  const double r = 1.0 / std::sqrt(2.0);
  return {r, r, r, -r};
}
Mat2 mat_x() { return {0.0, 1.0, 1.0, 0.0}; }
Mat2 mat_z_phase(double alpha) { return {1.0, 0.0, 0.0, std::polar(1.0, alpha)}; }

Mat2 frame_matrix(const Vertex& v) {
  Mat2 m = mat_identity();
  if (v.hadamard) m = mat_hadamard();
  if (v.x_flip) m = mat_mul(mat_x(), m);
  return mat_mul(mat_z_phase(v.z_phase), m);
}

StateVector::StateVector(std::vector<VertexId> labels, std::vector<cplx> amplitudes)
    : labels_(std::move(labels)), amps_(std::move(amplitudes)) {
  require(labels_.size() <= kMaxOracleQubits, ErrorKind::Numeric,
          "oracle register exceeds the qubit cap");
  require(amps_.size() == (std::size_t{1} << labels_.size()), ErrorKind::Numeric,
          "amplitude count does not match qubit count");
}

StateVector StateVector::product(const std::vector<VertexId>& labels,
                                 const std::vector<std::array<cplx, 2>>& qubits) {
  require(labels.size() == qubits.size(), ErrorKind::Numeric, "label/qubit count mismatch");
  require(labels.size() <= kMaxOracleQubits, ErrorKind::Numeric,
          "oracle register exceeds the qubit cap");
  std::vector<cplx> amps(std::size_t{1} << labels.size(), 1.0);
  for (std::size_t i = 0; i < amps.size(); ++i)
    for (std::size_t k = 0; k < labels.size(); ++k) amps[i] *= qubits[k][(i >> k) & 1];
  return StateVector(labels, std::move(amps));
}

std::size_t StateVector::index_of(VertexId label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  require(it != labels_.end(), ErrorKind::Numeric, "qubit " + std::to_string(label) + " not in register");
  return static_cast<std::size_t>(it - labels_.begin());
}

double StateVector::norm_sq() const {
  double n = 0.0;
  for (const auto& a : amps_) n += std::norm(a);
  return n;
}

void StateVector::normalize() {
  const double n = norm_sq();
  require(n > 1e-300, ErrorKind::Numeric, "cannot normalise a zero state");
  const double s = 1.0 / std::sqrt(n);
  for (auto& a : amps_) a *= s;
}

void StateVector::apply_1q(VertexId q, const Mat2& m) {
  const std::size_t bit = std::size_t{1} << index_of(q);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (i & bit) continue;
    const cplx a0 = amps_[i], a1 = amps_[i | bit];
    amps_[i] = m[0] * a0 + m[1] * a1;
    amps_[i | bit] = m[2] * a0 + m[3] * a1;
  }
}

void StateVector::apply_diag2(VertexId q1, VertexId q2, const std::array<cplx, 4>& d) {
  const std::size_t k1 = index_of(q1), k2 = index_of(q2);
  for (std::size_t i = 0; i < amps_.size(); ++i)
    amps_[i] *= d[((i >> k1) & 1) + 2 * ((i >> k2) & 1)];
}

StateVector StateVector::project_out(VertexId q, int outcome) const {
  const std::size_t k = index_of(q);
  std::vector<VertexId> labels;
  for (std::size_t j = 0; j < labels_.size(); ++j)
    if (j != k) labels.push_back(labels_[j]);
  std::vector<cplx> out(amps_.size() / 2);
  const std::size_t low = (std::size_t{1} << k) - 1;
  for (std::size_t r = 0; r < out.size(); ++r) {
    const std::size_t i = (r & low) | ((r & ~low) << 1) | (static_cast<std::size_t>(outcome) << k);
    out[r] = amps_[i];
  }
  return StateVector(std::move(labels), std::move(out));
}

StateVector StateVector::tensor(const StateVector& other) const {
  std::vector<VertexId> labels = labels_;
  labels.insert(labels.end(), other.labels_.begin(), other.labels_.end());
  require(labels.size() <= kMaxOracleQubits, ErrorKind::Numeric,
          "oracle register exceeds the qubit cap");
  std::vector<cplx> amps(amps_.size() * other.amps_.size());
  for (std::size_t j = 0; j < other.amps_.size(); ++j)
    for (std::size_t i = 0; i < amps_.size(); ++i)
      amps[i + j * amps_.size()] = amps_[i] * other.amps_[j];
  return StateVector(std::move(labels), std::move(amps));
}

StateVector StateVector::permuted(const std::vector<VertexId>& order) const {
  require(order.size() == labels_.size(), ErrorKind::Numeric, "permutation size mismatch");
  std::vector<std::size_t> src(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) src[k] = index_of(order[k]);
  std::vector<cplx> out(amps_.size());
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    std::size_t j = 0;
    for (std::size_t k = 0; k < order.size(); ++k) j |= ((i >> k) & 1) << src[k];
    out[i] = amps_[j];
  }
  return StateVector(order, std::move(out));
}

StateVector build_state(const TiltedGraph& g) {
  require(g.size() <= kMaxOracleQubits, ErrorKind::Numeric,
          "graph has more vertices than the oracle cap");
  std::vector<VertexId> labels = g.vertex_ids();
  std::vector<std::array<cplx, 2>> qubits;
  for (VertexId id : labels) {
    const double t = g.vertex(id).tilt.radians();
    qubits.push_back({std::cos(t), std::sin(t)});
  }
  StateVector s = StateVector::product(labels, qubits);
  for (const auto& [k, ann] : g.edges()) {
    std::array<cplx, 4> d;
    switch (ann.kind) {
      case EdgeAnnotation::Kind::Pure:
        d = {1.0, 1.0, 1.0, -1.0};
        break;
      case EdgeAnnotation::Kind::Weighted: {
        const cplx same = std::polar(1.0, ann.phi), diff = std::polar(1.0, -ann.phi);
        d = {same, diff, diff, same};
        break;
      }
      case EdgeAnnotation::Kind::PartialFusion: {
        const double same = std::cos(ann.phi) + std::sin(ann.phi);
        const double diff = std::cos(ann.phi) - std::sin(ann.phi);
        d = {same, diff, diff, same};
        break;
      }
    }
    s.apply_diag2(k.first, k.second, d);
  }
  require(s.norm_sq() > 1e-24, ErrorKind::Numeric, "annihilating fusion: zero-norm graph state");
  s.normalize();
  for (VertexId id : labels) {
    const Vertex& v = g.vertex(id);
    if (v.hadamard || v.x_flip || v.z_phase != 0.0) s.apply_1q(id, frame_matrix(v));
  }
  return s;
}

std::pair<MeasurementRecord, StateVector> measure_forced(const StateVector& s, VertexId q,
                                                         const Mat2& pre_rotation, int outcome) {
  StateVector r = s;
  r.apply_1q(q, pre_rotation);
  StateVector p = r.project_out(q, outcome);
  MeasurementRecord rec;
  rec.qubit = q;
  rec.rotation = pre_rotation;
  rec.outcome = outcome;
  rec.probability = p.norm_sq() / s.norm_sq();
  if (rec.probability > 1e-300) p.normalize();
  return {rec, p};
}

std::pair<MeasurementRecord, StateVector> measure(const StateVector& s, VertexId q,
                                                  const Mat2& pre_rotation, Rng& rng) {
  auto zero = measure_forced(s, q, pre_rotation, 0);
  if (rng.uniform() < zero.first.probability) return zero;
  return measure_forced(s, q, pre_rotation, 1);
}

double overlap(const StateVector& a, const StateVector& b) {
  require(a.qubit_count() == b.qubit_count(), ErrorKind::Numeric, "overlap: dimension mismatch");
  const StateVector bb = b.permuted(a.labels());
  cplx ip = 0.0;
  for (std::size_t i = 0; i < a.amplitudes().size(); ++i)
    ip += std::conj(a.amplitudes()[i]) * bb.amplitudes()[i];
  return std::norm(ip) / (a.norm_sq() * b.norm_sq());
}

// ---- trajectory integrator -------------------------------------------------

namespace {

// Per-system levels: excited atom, photon in cavity, and the two ground states.
enum Level { kE = 0, kP = 1, kG1 = 2, kG0 = 3 };
using Joint = std::array<cplx, 16>;
inline int idx(int la, int lb) { return la * 4 + lb; }

struct Sys {
  double g, kappa;
};

Joint derivative(const Joint& c, const Sys& A, const Sys& B) {
  Joint d{};
  for (int o = 0; o < 4; ++o) {
    d[idx(kE, o)] += -I * A.g * c[idx(kP, o)];
    d[idx(kP, o)] += -I * A.g * c[idx(kE, o)] - 0.5 * A.kappa * c[idx(kP, o)];
    d[idx(o, kE)] += -I * B.g * c[idx(o, kP)];
    d[idx(o, kP)] += -I * B.g * c[idx(o, kE)] - 0.5 * B.kappa * c[idx(o, kP)];
  }
  return d;
}

void evolve(Joint& c, const Sys& A, const Sys& B, double T) {
  if (T <= 0.0) return;
  const double hmax = 1.0 / (100.0 * std::max({A.g, A.kappa, B.g, B.kappa}));
  const long n = static_cast<long>(std::ceil(T / hmax));
  const double h = T / static_cast<double>(n);
  for (long s = 0; s < n; ++s) {
    const Joint k1 = derivative(c, A, B);
    Joint tmp;
    for (int i = 0; i < 16; ++i) tmp[i] = c[i] + 0.5 * h * k1[i];
    const Joint k2 = derivative(tmp, A, B);
    for (int i = 0; i < 16; ++i) tmp[i] = c[i] + 0.5 * h * k2[i];
    const Joint k3 = derivative(tmp, A, B);
    for (int i = 0; i < 16; ++i) tmp[i] = c[i] + h * k3[i];
    const Joint k4 = derivative(tmp, A, B);
    for (int i = 0; i < 16; ++i) c[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  for (const auto& v : c)
    require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorKind::Numeric,
            "trajectory integration produced non-finite amplitudes");
}

// J = sqrt(kA/2) a + sign sqrt(kB/2) b; the cavity photon leaves the atom in |0>.
Joint jump(const Joint& c, const Sys& A, const Sys& B, int sign) {
  Joint out{};
  const double wa = std::sqrt(0.5 * A.kappa), wb = sign * std::sqrt(0.5 * B.kappa);
  for (int o = 0; o < 4; ++o) {
    out[idx(kG0, o)] += wa * c[idx(kP, o)];
    out[idx(o, kG0)] += wb * c[idx(o, kP)];
  }
  return out;
}

double norm_sq(const Joint& c) {
  double n = 0.0;
  for (const auto& v : c) n += std::norm(v);
  return n;
}

// Ground-state spin flips X (x) X and the pi-pulse |0> -> |e> on both atoms.
Joint flip_both(const Joint& c) {
  auto f = [](int l) { return l == kG0 ? kG1 : l == kG1 ? kG0 : l; };
  Joint out{};
  for (int la = 0; la < 4; ++la)
    for (int lb = 0; lb < 4; ++lb) out[idx(f(la), f(lb))] += c[idx(la, lb)];
  return out;
}

Joint pi_pulse(const Joint& c) {
  auto f = [](int l) { return l == kG0 ? kE : l; };
  Joint out{};
  for (int la = 0; la < 4; ++la)
    for (int lb = 0; lb < 4; ++lb) out[idx(f(la), f(lb))] += c[idx(la, lb)];
  return out;
}

Sys as_sys(const CavityParams& p) {
  require(p.g > 0.0 && p.kappa > 0.0, ErrorKind::Numeric, "cavity parameters must be positive");
  return {p.g, p.kappa};
}

}  // namespace

TrajectoryDh::TrajectoryDh(const CavityParams& a, const CavityParams& b, double t1,
                           const TrajectoryOptions& opt)
    : a_(a), b_(b), opt_(opt) {
  require(t1 > 0.0 && std::isfinite(t1), ErrorKind::Numeric, "click time t1 must be positive");
  const Sys A = as_sys(a), B = as_sys(b);
  Joint c{};
  const double ca = std::cos(opt.theta_a), sa = std::sin(opt.theta_a);
  const double cb = std::cos(opt.theta_b), sb = std::sin(opt.theta_b);
  c[idx(kG0, kG0)] = ca * cb;
  c[idx(kG0, kG1)] = ca * sb;
  c[idx(kG1, kG0)] = sa * cb;
  c[idx(kG1, kG1)] = sa * sb;
  c = pi_pulse(c);
  evolve(c, A, B, t1);

  // anything still excited after this long has decayed below double precision
  const double wait = 40.0 / std::min({A.g, B.g, 0.25 * A.kappa, 0.25 * B.kappa});
  for (int s = 0; s < 2; ++s) {
    Joint j = jump(c, A, B, s == 0 ? 1 : -1);
    evolve(j, A, B, wait);
    double ground = 0.0, excited = 0.0;
    for (int la = 0; la < 4; ++la)
      for (int lb = 0; lb < 4; ++lb) {
        const double p = std::norm(j[idx(la, lb)]);
        if (la >= kG1 && lb >= kG1) ground += p;
        else excited += p;
      }
    residual_ = std::max(residual_, ground > 0.0 ? std::sqrt(excited / ground) : 0.0);
    require(residual_ <= opt.residual_limit, ErrorKind::Numeric,
            "round-one excitation did not decay before re-excitation");
    for (int la = 0; la < 4; ++la)
      for (int lb = 0; lb < 4; ++lb)
        if (la < kG1 || lb < kG1) j[idx(la, lb)] = 0.0;
    after_round1_[s] = pi_pulse(flip_both(j));
  }
}

TrajectoryResult TrajectoryDh::second_click(double t2) const {
  require(t2 > 0.0 && std::isfinite(t2), ErrorKind::Numeric, "click time t2 must be positive");
  const Sys A = as_sys(a_), B = as_sys(b_);
  TrajectoryResult r;
  r.residual_round1 = residual_;
  double theta = -1.0;
  for (int s1 = 0; s1 < 2; ++s1) {
    Joint c = after_round1_[s1];
    evolve(c, A, B, t2);
    for (int s2 = 0; s2 < 2; ++s2) {
      Joint j = flip_both(jump(c, A, B, s2 == 0 ? 1 : -1));
      const double dens = norm_sq(j);
      r.per_detector[s1 * 2 + s2] = dens;
      r.click_density += dens;
      // qubit 0 is the ground level reached through |0>; read (qa, qb) = (0,1) vs (1,0)
      const double a01 = std::abs(j[idx(kG0, kG1)]), a10 = std::abs(j[idx(kG1, kG0)]);
      if (a01 + a10 > 0.0 && theta < 0.0) theta = std::atan2(a01, a10);
    }
  }
  require(theta >= 0.0, ErrorKind::Numeric, "no amplitude survives both clicks");
  r.theta_beta = TiltAngle(theta);
  return r;
}

TrajectoryResult trajectory_dh(const CavityParams& a, const CavityParams& b, double t1,
                               double t2, const TrajectoryOptions& opt) {
  return TrajectoryDh(a, b, t1, opt).second_click(t2);
}

std::vector<double> trajectory_emission_density(const CavityParams& p,
                                                const std::vector<double>& times) {
  const Sys A = as_sys(p);
  const Sys idle{1.0, 1.0};  // second system kept in its ground state
  Joint c{};
  c[idx(kE, kG0)] = 1.0;
  std::vector<double> out;
  double now = 0.0;
  for (double t : times) {
    require(t >= now, ErrorKind::Numeric, "emission-density times must be ascending");
    evolve(c, A, idle, t - now);
    now = t;
    out.push_back(A.kappa * std::norm(c[idx(kP, kG0)]));
  }
  return out;
}

}  // namespace tglab

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "random_graphs.hpp"
#include "tglab/error.hpp"
#include "tglab/heralding.hpp"
#include "tglab/metrics.hpp"
#include "tglab/oracle.hpp"

using namespace tglab;

namespace {

DhContext make_ctx(double ta, double tb, double ga = 10.0, double gb = 12.5) {
  DhContext c;
  c.theta_a = TiltAngle(ta);
  c.theta_b = TiltAngle(tb);
  c.pa = LeakageProfile::critically_damped(ga);
  c.pb = LeakageProfile::critically_damped(gb);
  return c;
}

// Success: the emission pattern (qa=0, qb=1) leaves amplitude sqrt(PA(t1)PB(t2)),
// (qa=1, qb=0) leaves sqrt(PB(t1)PA(t2)), equal bits are filtered out.
StateVector dh_kraus(const StateVector& s, VertexId qa, VertexId qb, const DhContext& ctx,
                     const ClickPair& c, int parity) {
  const std::size_t ia = s.index_of(qa), ib = s.index_of(qb);
  const double w01 = std::sqrt(ctx.pa.density(c.t1) * ctx.pb.density(c.t2));
  const double w10 = std::sqrt(ctx.pb.density(c.t1) * ctx.pa.density(c.t2));
  std::vector<cplx> amps = s.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const int a = static_cast<int>((i >> ia) & 1), b = static_cast<int>((i >> ib) & 1);
    if (a == b)
      amps[i] = 0.0;
    else if (a == 0)
      amps[i] *= w01;
    else
      amps[i] *= parity < 0 ? -w10 : w10;
  }
  StateVector out(s.labels(), amps);
  out.normalize();
  return out;
}

StateVector z_measure_both(const StateVector& s, VertexId qa, VertexId qb, int ba, int bb) {
  StateVector out = s.project_out(qa, ba).project_out(qb, bb);
  out.normalize();
  return out;
}

// Tilted GHZ star: centre then n-1 Hadamard leaves with random Pauli/phase frames.
void add_star(TiltedGraph& g, VertexId first, int n, double tilt, Rng& r, bool decorate) {
  Vertex& c = g.add_vertex(first, tilt);
  if (decorate) c.z_phase = testing::uniform(r, 0.0, 2.0 * kPi);
  for (int i = 1; i < n; ++i) {
    Vertex& l = g.add_vertex(first + i);
    l.hadamard = true;
    if (decorate) {
      l.x_flip = r.uniform() < 0.5;
      l.z_phase = r.uniform() < 0.5 ? 0.0 : kPi;
    }
    g.set_edge(first, first + i, EdgeAnnotation::pure());
  }
}

// Node na with one extra untilted neighbour and a Hadamard-free cherry qubit q.
void add_cherry(TiltedGraph& g, VertexId na, VertexId q, VertexId other, double tilt, Rng& r,
                bool hadamard_node = false) {
  Vertex& n = g.add_vertex(na);
  n.hadamard = hadamard_node;
  g.add_vertex(other);
  g.set_edge(na, other, EdgeAnnotation::pure());
  Vertex& c = g.add_vertex(q, tilt);
  c.z_phase = testing::uniform(r, 0.0, 2.0 * kPi);
  g.set_edge(na, q, EdgeAnnotation::pure());
}

DhContext ctx_for(const TiltedGraph& g, VertexId qa, VertexId qb) {
  return make_ctx(dh_effective_tilt(g, qa).radians(), dh_effective_tilt(g, qb).radians());
}

void check_success_against_oracle(const TiltedGraph& g, VertexId qa, VertexId qb, Rng& r) {
  const DhContext ctx = ctx_for(g, qa, qb);
  const ClickPair c = sample_clicks(ctx, r);
  for (int parity : {+1, -1}) {
    const DhOutcome o = DhOutcome::succeeded(tilt_after_dh(ctx, c), c, parity);
    const TiltedGraph after = apply_dh_to_graph(g, qa, qb, o);
    CHECK(overlap(build_state(after), dh_kraus(build_state(g), qa, qb, ctx, c, parity)) >
          1.0 - 1e-10);
  }
}

void check_failure_against_oracle(const TiltedGraph& g, VertexId qa, VertexId qb) {
  const StateVector s = build_state(g);
  for (int bit : {0, 1}) {
    // only outcomes with non-zero Born weight are meaningful
    const StateVector p = s.project_out(qa, bit).project_out(qb, bit);
    if (p.norm_sq() < 1e-20) continue;
    const TiltedGraph after = apply_dh_to_graph(g, qa, qb, DhOutcome::failed(bit, bit));
    CHECK_FALSE(after.has_vertex(qa));
    CHECK_FALSE(after.has_vertex(qb));
    CHECK(overlap(build_state(after), z_measure_both(s, qa, qb, bit, bit)) > 1.0 - 1e-10);
  }
}

}  // namespace

TEST_SUITE("heralding") {

TEST_CASE("success probability") {
  CHECK(success_probability(TiltAngle(kQuarterPi), TiltAngle(kQuarterPi)) == doctest::Approx(0.5));
  CHECK(success_probability(TiltAngle(0.0), TiltAngle(0.0)) == doctest::Approx(0.0));
  CHECK(success_probability(TiltAngle(0.0), TiltAngle(kHalfPi)) == doctest::Approx(1.0));
  CHECK(success_probability(TiltAngle(kPi / 6), TiltAngle(kPi / 3)) == doctest::Approx(5.0 / 8.0));
  CHECK(success_probability(TiltAngle(kQuarterPi), TiltAngle(kQuarterPi), 0.8) ==
        doctest::Approx(0.32));
}

TEST_CASE("click densities integrate to the success probability") {
  QuadratureSettings q;
  q.t_max = 2.0;
  for (auto [ta, tb] : {std::pair{kQuarterPi, kQuarterPi}, {0.3, 1.1}, {kPi / 6, kPi / 3}}) {
    const DhContext ctx = make_ctx(ta, tb);
    const double p = success_probability(ctx.theta_a, ctx.theta_b);
    const double m1 = integrate([&](double t) { return click_density_first(t, ctx); }, 0.0, 2.0, q);
    CHECK(m1 == doctest::Approx(p).epsilon(1e-8));
    const double m2 = integrate2d(
        [&](double t1, double t2) { return click_density_joint({t1, t2}, ctx); }, 2.0, q);
    CHECK(m2 == doctest::Approx(p).epsilon(1e-8));
    const double cond = integrate(
        [&](double t2) { return click_density_conditional({0.07, t2}, ctx); }, 0.0, 2.0, q);
    CHECK(cond == doctest::Approx(1.0).epsilon(1e-8));
  }
  const DhContext flat = make_ctx(0.0, 0.0);
  CHECK(click_density_first(0.1, flat) == 0.0);
  CHECK_THROWS_AS(click_density_conditional({0.1, 0.2}, flat), Error);

  // identical profiles: independent clicks at half weight
  const DhContext same = make_ctx(kQuarterPi, kQuarterPi, 10.0, 10.0);
  const double pt1 = same.pa.density(0.04), pt2 = same.pa.density(0.15);
  CHECK(click_density_joint({0.04, 0.15}, same) == doctest::Approx(0.5 * pt1 * pt2));
}

TEST_CASE("tilt after heralding") {
  const DhContext same = make_ctx(0.4, 0.4, 10.0, 10.0);
  for (double t1 : {0.01, 0.1, 0.5})
    for (double t2 : {0.02, 0.2})
      CHECK(tilt_after_dh(same, {t1, t2}).radians() == doctest::Approx(kQuarterPi));

  // untilted inputs reduce to the ratio of profile products
  const DhContext ctx = make_ctx(kQuarterPi, kQuarterPi);
  const double u = ctx.pa.density(0.05) * ctx.pb.density(0.2);
  const double v = ctx.pb.density(0.05) * ctx.pa.density(0.2);
  CHECK(std::cos(tilt_after_dh(ctx, {0.05, 0.2}).radians()) ==
        doctest::Approx(1.0 / std::sqrt(1.0 + u / v)));

  // equal tilts cancel: same formula as the untilted case
  for (double t : {0.2, 0.7, 1.3}) {
    const DhContext tilted = make_ctx(t, t);
    for (double t1 : {0.03, 0.3})
      for (double t2 : {0.05, 0.12})
        CHECK(tilt_after_dh(tilted, {t1, t2}).radians() ==
              doctest::Approx(tilt_after_dh(ctx, {t1, t2}).radians()).epsilon(1e-14));
  }

  // swapping the two systems at fixed times complements the tilt
  Rng r(4);
  for (int k = 0; k < 50; ++k) {
    const double ta = testing::uniform(r, 0.1, 1.4), tb = testing::uniform(r, 0.1, 1.4);
    const DhContext ab = make_ctx(ta, tb, 10.0, 14.0), ba = make_ctx(tb, ta, 14.0, 10.0);
    const double t1 = testing::uniform(r, 0.01, 0.4), t2 = testing::uniform(r, 0.01, 0.4);
    CHECK(tilt_after_dh(ba, {t1, t2}).radians() ==
          doctest::Approx(kHalfPi - tilt_after_dh(ab, {t1, t2}).radians()).epsilon(1e-12));
    // swapping the click times alone complements it only for equal tilts
    const DhContext eq = make_ctx(ta, ta, 10.0, 14.0);
    CHECK(tilt_after_dh(eq, {t2, t1}).radians() ==
          doctest::Approx(kHalfPi - tilt_after_dh(eq, {t1, t2}).radians()).epsilon(1e-12));
  }

  CHECK_THROWS_AS(tilt_after_dh(make_ctx(0.0, 0.0), {0.1, 0.1}), Error);
}

TEST_CASE("click sampling") {
  const DhContext ctx = make_ctx(kQuarterPi, kQuarterPi);
  Rng a(17), b(17);
  for (int k = 0; k < 10; ++k) {
    const ClickPair x = sample_clicks(ctx, a), y = sample_clicks(ctx, b);
    CHECK(x.t1 == y.t1);
    CHECK(x.t2 == y.t2);
  }

  // mean gate fidelity against the closed-form expectation
  const int n = 100000;
  Rng r(2024);
  double sum = 0.0, sum2 = 0.0;
  std::vector<double> firsts;
  firsts.reserve(n);
  for (int k = 0; k < n; ++k) {
    const ClickPair c = sample_clicks(ctx, r);
    const double f = gate_fidelity(click_likelihood(c, ctx));
    sum += f;
    sum2 += f * f;
    firsts.push_back(c.t1);
  }
  const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
  const double p = success_probability(ctx.theta_a, ctx.theta_b);
  const double want = expected_f(ctx.theta_a, ctx.theta_b, ctx.pa, ctx.pb).value / p;
  CHECK(std::abs(mean - want) < 3.0 * se);

  // first-click times follow the normalised first-round density
  std::sort(firsts.begin(), firsts.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < firsts.size(); i += 97) {
    const double t = firsts[i];
    const double cdf = 0.5 * (critically_damped_cdf(10.0, t) + critically_damped_cdf(12.5, t));
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
  }
  CHECK(ks < 0.01);
}

TEST_CASE("Monte Carlo success frequency") {
  const DhContext ctx = make_ctx(0.5, 1.0);
  const double p = success_probability(ctx.theta_a, ctx.theta_b);
  Rng r(8);
  const int n = 100000;
  int ok = 0, parity_plus = 0;
  for (int k = 0; k < n; ++k) {
    const DhOutcome o = attempt_dh(ctx, r);
    if (o.success) {
      ++ok;
      parity_plus += o.parity > 0;
    } else {
      CHECK(o.bit_a == o.bit_b);
    }
  }
  CHECK(std::abs(ok - n * p) < 3.0 * std::sqrt(n * p * (1 - p)));
  CHECK(std::abs(parity_plus - ok / 2.0) < 4.0 * std::sqrt(ok / 4.0));
}

TEST_CASE("fresh qubits: success gives the tilted pair") {
  Rng r(1);
  TiltedGraph g;
  g.add_vertex(0);
  g.add_vertex(1);
  CHECK(classify_dh_qubit(g, 0) == DhConfiguration::Ghz);
  check_success_against_oracle(g, 0, 1, r);
  check_failure_against_oracle(g, 0, 1);

  const DhContext ctx = ctx_for(g, 0, 1);
  const ClickPair c{0.05, 0.2};
  const TiltAngle tb = tilt_after_dh(ctx, c);
  const TiltedGraph after = apply_dh_to_graph(g, 0, 1, DhOutcome::succeeded(tb, c, +1));
  CHECK(after.size() == 2);
  CHECK(after.edges().size() == 1);
  // (qa=1, qb=0) carries cos, (qa=0, qb=1) carries sin
  const StateVector s = build_state(after);
  CHECK(std::abs(s.amplitudes()[1]) == doctest::Approx(std::cos(tb.radians())));
  CHECK(std::abs(s.amplitudes()[2]) == doctest::Approx(std::sin(tb.radians())));
}

TEST_CASE("GHZ nodes: success and failure against the Kraus oracle") {
  Rng r(77);
  for (int k = 0; k < 40; ++k) {
    TiltedGraph g;
    const int na = 1 + static_cast<int>(r.next_u64() % 4), nb = 1 + static_cast<int>(r.next_u64() % 4);
    const bool decorate = k % 2 == 1;
    add_star(g, 0, na, decorate ? testing::uniform(r, 0.1, 1.4) : kQuarterPi, r, decorate);
    add_star(g, 10, nb, decorate ? testing::uniform(r, 0.1, 1.4) : kQuarterPi, r, decorate);
    const VertexId qa = static_cast<VertexId>(r.next_u64() % na);
    const VertexId qb = 10 + static_cast<VertexId>(r.next_u64() % nb);
    CHECK(classify_dh_qubit(g, qa) == DhConfiguration::Ghz);
    check_success_against_oracle(g, qa, qb, r);
    check_failure_against_oracle(g, qa, qb);
  }
}

TEST_CASE("two 3-qubit GHZ nodes") {
  Rng r(5);
  TiltedGraph g;
  add_star(g, 0, 3, kQuarterPi, r, false);
  add_star(g, 3, 3, kQuarterPi, r, false);
  check_success_against_oracle(g, 1, 4, r);

  const DhContext ctx = ctx_for(g, 1, 4);
  const ClickPair c{0.05, 0.2};
  const TiltedGraph after =
      apply_dh_to_graph(g, 1, 4, DhOutcome::succeeded(tilt_after_dh(ctx, c), c, +1));
  CHECK(after.size() == 6);
  CHECK(after.component(0).size() == 6);

  // failure: every qubit left is separable
  for (int bit : {0, 1}) {
    const TiltedGraph f = apply_dh_to_graph(g, 1, 4, DhOutcome::failed(bit, bit));
    CHECK(f.size() == 4);
    CHECK(f.edges().empty());
  }
  check_failure_against_oracle(g, 1, 4);
}

TEST_CASE("cherries: success and failure against the Kraus oracle") {
  Rng r(31);
  for (int k = 0; k < 40; ++k) {
    TiltedGraph g;
    add_cherry(g, 0, 1, 2, testing::uniform(r, 0.1, 1.4), r, k % 2 == 1);
    add_cherry(g, 10, 11, 12, testing::uniform(r, 0.1, 1.4), r, k % 4 >= 2);
    CHECK(classify_dh_qubit(g, 1) == DhConfiguration::Cherry);
    INFO("k=", k);
    check_success_against_oracle(g, 1, 11, r);
    check_failure_against_oracle(g, 1, 11);
  }
}

TEST_CASE("cherries already linked through their neighbours") {
  Rng r(37);
  for (int k = 0; k < 60; ++k) {
    TiltedGraph g;
    add_cherry(g, 0, 1, 2, testing::uniform(r, 0.1, 1.4), r, k % 2 == 1);
    add_cherry(g, 10, 11, 12, testing::uniform(r, 0.1, 1.4), r, k % 3 == 0);
    const double phi = testing::uniform(r, -1.2, 1.2);
    g.set_edge(0, 10, k % 2 ? EdgeAnnotation::partial_fusion(phi) : EdgeAnnotation::weighted(phi));
    g.vertex(10).z_phase = k % 4 < 2 ? 0.0 : kPi;
    INFO("k=", k);
    check_success_against_oracle(g, 1, 11, r);
    check_failure_against_oracle(g, 1, 11);
  }
  TiltedGraph shared;
  add_cherry(shared, 0, 1, 2, 0.4, r);
  shared.add_vertex(3, 0.7);
  shared.set_edge(0, 3, EdgeAnnotation::pure());
  CHECK_THROWS_AS(apply_dh_to_graph(shared, 1, 3, DhOutcome::failed()), Error);
}

TEST_CASE("rejected configurations") {
  Rng r(0);
  TiltedGraph g;
  add_star(g, 0, 3, kQuarterPi, r, false);
  const DhOutcome ok = DhOutcome::succeeded(TiltAngle(kQuarterPi), {0.1, 0.1}, +1);
  CHECK_THROWS_AS(apply_dh_to_graph(g, 1, 2, ok), Error);  // same component
  add_cherry(g, 10, 11, 12, 0.3, r);
  CHECK_THROWS_AS(apply_dh_to_graph(g, 1, 11, ok), Error);  // GHZ with cherry
  // a vertex in the middle of a chain is neither
  TiltedGraph chain;
  for (VertexId v = 0; v < 4; ++v) chain.add_vertex(v);
  chain.set_edge(0, 1, EdgeAnnotation::pure());
  chain.set_edge(1, 2, EdgeAnnotation::pure());
  chain.set_edge(2, 3, EdgeAnnotation::weighted(0.3));
  CHECK_THROWS_AS(classify_dh_qubit(chain, 1), Error);
}

}

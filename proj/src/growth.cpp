#include "tglab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "tglab/csv.hpp"
#include "tglab/error.hpp"

namespace tglab {

long Inventory::qubit_count() const {
  long n = 0;
  for (const Piece& p : pieces) n += p.size();
  return n;
}

void StrategyConfig::validate() const {
  require(!profiles.empty(), ErrorKind::Config, "cavity pool needs at least one profile");
  require(systems >= 1, ErrorKind::Config, "systems must be >= 1");
  require(target_ghz_size >= 2, ErrorKind::Config, "target GHZ size must be >= 2");
  require(fidelity_acceptance > 0.5 && fidelity_acceptance <= 1.0, ErrorKind::Config,
          "fidelity acceptance must lie in (1/2, 1]");
  require(efficiency > 0.0 && efficiency <= 1.0, ErrorKind::Config,
          "detection efficiency must lie in (0, 1]");
  require(max_rounds >= 1, ErrorKind::Config, "max_rounds must be >= 1");
  require(join_attempt_budget >= 1, ErrorKind::Config, "join attempt budget must be >= 1");
  require(threads >= 1, ErrorKind::Config, "threads must be >= 1");
}

const LeakageProfile& StrategyConfig::profile_of(int system) const {
  return profiles[static_cast<std::size_t>(system) % profiles.size()];
}

// ---- stats -----------------------------------------------------------------

void RunStats::absorb(const RunStats& later) {
  dh_attempts += later.dh_attempts;
  dh_successes += later.dh_successes;
  qubits_consumed += later.qubits_consumed;
  realignments_attempted += later.realignments_attempted;
  realignments_succeeded += later.realignments_succeeded;
  merges += later.merges;
  bridges += later.bridges;
  census = later.census;
  mean_final_fidelity = later.mean_final_fidelity;
  const int base = rounds.empty() ? 0 : rounds.back().round;
  for (RoundRow r : later.rounds) {
    r.round += base;
    rounds.push_back(r);
  }
}

std::string RunStats::rounds_csv() const {
  CsvWriter w({"round", "attempts", "successes", "qubits_consumed", "mean_tilt", "mean_fidelity"});
  for (const RoundRow& r : rounds)
    w.row({std::to_string(r.round), std::to_string(r.attempts), std::to_string(r.successes),
           std::to_string(r.qubits_consumed), fmt_double(r.mean_tilt), fmt_double(r.mean_fidelity)});
  return w.str();
}

std::string RunStats::summary_csv() const {
  CsvWriter w({"key", "value"});
  w.row({"dh_attempts", std::to_string(dh_attempts)});
  w.row({"dh_successes", std::to_string(dh_successes)});
  w.row({"qubits_consumed", std::to_string(qubits_consumed)});
  w.row({"realignments_attempted", std::to_string(realignments_attempted)});
  w.row({"realignments_succeeded", std::to_string(realignments_succeeded)});
  w.row({"merges", std::to_string(merges)});
  w.row({"bridges", std::to_string(bridges)});
  w.row({"mean_final_fidelity", fmt_double(mean_final_fidelity)});
  for (const auto& [size, count] : census)
    w.row({"pieces_of_size_" + std::to_string(size), std::to_string(count)});
  return w.str();
}

namespace {

void fill_census(RunStats& s, const std::vector<Piece>& pieces) {
  s.census.clear();
  double f = 0.0;
  int n = 0;
  for (const Piece& p : pieces) {
    ++s.census[p.size()];
    if (p.size() >= 2) {
      f += p.tilt.fidelity();
      ++n;
    }
  }
  s.mean_final_fidelity = n ? f / n : 0.0;
}

RoundRow summarise(int round, long attempts, long successes, long consumed,
                   const std::vector<const std::vector<Piece>*>& groups) {
  RoundRow r{round, attempts, successes, consumed, 0.0, 0.0};
  int n = 0;
  for (const auto* g : groups)
    for (const Piece& p : *g) {
      if (p.size() < 2) continue;
      r.mean_tilt += p.tilt.radians();
      r.mean_fidelity += p.tilt.fidelity();
      ++n;
    }
  if (n) {
    r.mean_tilt /= n;
    r.mean_fidelity /= n;
  }
  return r;
}

}  // namespace

// ---- phase 1 ---------------------------------------------------------------

bool maybe_flip(TiltAngle a, TiltAngle b) {
  const double sa = std::sin(a.radians()), sb = std::sin(b.radians());
  return std::abs(sa * sa - sb * sb) > 0.5;
}

Pairs pair_inventory(const std::vector<Piece>& pieces, Pairing mode, Rng& rng) {
  std::vector<std::size_t> order(pieces.size());
  std::iota(order.begin(), order.end(), 0);
  if (mode == Pairing::Sorted) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pieces[a].tilt.radians() < pieces[b].tilt.radians();
    });
  } else {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.next_u64() % i]);
  }
  Pairs p;
  for (std::size_t i = 0; i + 1 < order.size(); i += 2) p.pairs.emplace_back(order[i], order[i + 1]);
  if (order.size() % 2) p.leftover = order.back();
  return p;
}

namespace {

struct PairOutcome {
  bool success = false;
  TiltAngle tilt;
};

PairOutcome attempt_pair(const Piece& a, const Piece& b, int round, const StrategyConfig& cfg,
                         Rng rng) {
  // round-robin over the members as the heralded qubit
  const int ma = a.members[static_cast<std::size_t>(round) % a.members.size()];
  const int mb = b.members[static_cast<std::size_t>(round) % b.members.size()];
  DhContext ctx;
  ctx.theta_a = a.tilt;
  ctx.theta_b = cfg.flip_rule && maybe_flip(a.tilt, b.tilt) ? TiltAngle(kHalfPi - b.tilt.radians())
                                                            : b.tilt;
  ctx.pa = cfg.profile_of(ma);
  ctx.pb = cfg.profile_of(mb);
  ctx.detection_efficiency = cfg.efficiency;
  const DhOutcome o = attempt_dh(ctx, rng);
  return {o.success, o.theta_beta};
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(t);
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < t; ++k)
    pool.emplace_back([&, k] {
      try {
        for (std::size_t i = k; i < n; i += t) fn(i);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

PhaseResult run_phase1(const StrategyConfig& cfg, Rng& rng) {
  cfg.validate();
  require(cfg.systems >= cfg.target_ghz_size, ErrorKind::Exhausted,
          "cavity pool smaller than the target GHZ size");
  std::vector<Piece> active, finished;
  long next_id = 0;
  for (int s = 0; s < cfg.systems; ++s) active.push_back({next_id++, TiltAngle::untilted(), {s}});

  PhaseResult out;
  RunStats& st = out.stats;
  for (int round = 1; round <= cfg.max_rounds; ++round) {
    long active_qubits = 0;
    for (const Piece& p : active) active_qubits += p.size();
    if (active_qubits < cfg.target_ghz_size || active.size() < 2) break;

    const Rng round_rng = rng.split(static_cast<std::uint64_t>(round));
    Rng pairing_rng = round_rng.split(0);
    const Pairs pairs = pair_inventory(active, cfg.pairing, pairing_rng);
    std::vector<PairOutcome> results(pairs.pairs.size());
    parallel_for(pairs.pairs.size(), cfg.threads, [&](std::size_t k) {
      const auto [i, j] = pairs.pairs[k];
      results[k] = attempt_pair(active[i], active[j], round, cfg, round_rng.split(k + 1));
    });

    // merge in pair order so the outcome is independent of the thread count
    std::vector<Piece> next;
    long successes = 0;
    for (std::size_t k = 0; k < results.size(); ++k) {
      const Piece& a = active[pairs.pairs[k].first];
      const Piece& b = active[pairs.pairs[k].second];
      if (results[k].success) {
        ++successes;
        Piece p{next_id++, results[k].tilt, a.members};
        p.members.insert(p.members.end(), b.members.begin(), b.members.end());
        (p.size() >= cfg.target_ghz_size ? finished : next).push_back(std::move(p));
      } else {
        // destroyed pieces go back to the pool as fresh qubits
        for (const Piece* src : {&a, &b})
          for (int m : src->members) next.push_back({next_id++, TiltAngle::untilted(), {m}});
      }
    }
    if (pairs.leftover) next.push_back(active[*pairs.leftover]);
    active = std::move(next);

    st.dh_attempts += static_cast<long>(results.size());
    st.dh_successes += successes;
    st.rounds.push_back(
        summarise(round, static_cast<long>(results.size()), successes, 0, {&finished, &active}));
  }
  require(!finished.empty(), ErrorKind::Exhausted,
          "pool exhausted before any piece reached the target size");
  out.inventory.pieces = finished;
  out.inventory.pieces.insert(out.inventory.pieces.end(), active.begin(), active.end());
  fill_census(st, out.inventory.pieces);
  return out;
}

// ---- realignment -----------------------------------------------------------

PhaseResult run_realignment(const Inventory& inv, const StrategyConfig& cfg, Rng& rng) {
  cfg.validate();
  PhaseResult out;
  RunStats& st = out.stats;
  long attempts = 0, successes = 0;
  for (const Piece& in : inv.pieces) {
    Piece p = in;
    if (p.size() < 2 || p.tilt.fidelity() >= cfg.fidelity_acceptance) {
      out.inventory.pieces.push_back(p);
      continue;
    }
    Rng prng = rng.split(static_cast<std::uint64_t>(p.id));
    // a realignment needs a cherry to spend and must leave at least two qubits
    while (p.size() >= 3 && p.tilt.fidelity() < cfg.fidelity_acceptance) {
      ++attempts;
      p.members.pop_back();  // the cherry is measured out
      ++st.qubits_consumed;
      const double theta = p.tilt.radians();
      if (prng.uniform() < p_success(theta)) {
        ++successes;
        p.tilt = TiltAngle::untilted();
      } else {
        p.tilt = TiltAngle(failure_function(theta));
      }
    }
    if (p.tilt.fidelity() < cfg.fidelity_acceptance) {
      st.qubits_consumed += p.size();
      continue;
    }
    out.inventory.pieces.push_back(p);
  }
  st.realignments_attempted = attempts;
  st.realignments_succeeded = successes;
  st.rounds.push_back(summarise(1, attempts, successes, st.qubits_consumed, {&out.inventory.pieces}));
  fill_census(st, out.inventory.pieces);
  return out;
}

// ---- joins -----------------------------------------------------------------

std::vector<TiltedGraph> piece_graphs(const Inventory& inv, std::size_t count,
                                      std::map<VertexId, int>* cavity_of) {
  require(inv.pieces.size() >= count, ErrorKind::Exhausted, "not enough pieces for the target");
  std::vector<TiltedGraph> out;
  VertexId next = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const Piece& p = inv.pieces[k];
    require(p.size() >= 2, ErrorKind::Exhausted, "join pieces need at least two qubits");
    TiltedGraph g;
    const VertexId centre = next;
    for (int m : p.members) {
      Vertex& v = g.add_vertex(next);
      if (next != centre) {
        v.hadamard = true;
        g.set_edge(centre, next, EdgeAnnotation::pure());
      }
      if (cavity_of) (*cavity_of)[next] = m;
      ++next;
    }
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

bool is_forest(const TiltedGraph& t) {
  std::map<VertexId, VertexId> parent;
  for (VertexId v : t.vertex_ids()) parent[v] = v;
  auto find = [&](VertexId v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [k, ann] : t.edges()) {
    const VertexId a = find(k.first), b = find(k.second);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

// An untilted Hadamard leaf with a Pauli frame hanging off `centre`.
std::optional<VertexId> free_leaf(const TiltedGraph& g, VertexId centre) {
  for (VertexId v : g.neighbours(centre)) {
    const Vertex& x = g.vertex(v);
    const double z = reduce_full_turn(x.z_phase);
    if (g.degree(v) == 1 && x.hadamard && x.tilt.is_untilted() &&
        g.edge(centre, v)->kind == EdgeAnnotation::Kind::Pure &&
        (z == 0.0 || angle_near(z, kPi, 1e-12)))
      return v;
  }
  return std::nullopt;
}

double prior_annotation(const TiltedGraph& g, VertexId a, VertexId b) {
  const auto e = g.edge(a, b);
  return e ? e->phi : 0.0;
}

template <class BranchFn>
std::pair<ProcedureOutcome, TiltedGraph> sample_branch(const TiltedGraph& g, VertexId measured,
                                                       BranchFn branch, Rng& rng,
                                                       std::vector<JoinOp>& log) {
  auto one = branch(1);
  auto chosen = rng.uniform() < one.first.probability ? std::move(one) : branch(0);
  JoinOp op;
  op.kind = JoinOp::Kind::Measure;
  op.a = measured;
  op.rotation = physical_rotation(g.vertex(measured), chosen.first.graph_rotation);
  op.outcome = chosen.first.outcome;
  log.push_back(op);
  return chosen;
}

}  // namespace

JoinResult run_join(const Inventory& inv, const TiltedGraph& target, const StrategyConfig& cfg,
                    Rng& rng) {
  cfg.validate();
  require(is_forest(target), ErrorKind::Config, "join targets must be forests");
  const std::vector<VertexId> nodes = target.vertex_ids();
  for (std::size_t k = 0; k < nodes.size(); ++k)
    require(nodes[k] == static_cast<VertexId>(k), ErrorKind::Config,
            "target nodes must be numbered 0..n-1");

  // best pieces first
  Inventory chosen;
  for (const Piece& p : inv.pieces)
    if (p.size() >= 2) chosen.pieces.push_back(p);
  std::stable_sort(chosen.pieces.begin(), chosen.pieces.end(), [](const Piece& a, const Piece& b) {
    return a.tilt.fidelity() > b.tilt.fidelity();
  });
  require(chosen.pieces.size() >= nodes.size(), ErrorKind::Exhausted,
          "not enough pieces for the target graph");
  std::map<int, int> unused;
  for (std::size_t k = nodes.size(); k < chosen.pieces.size(); ++k) ++unused[chosen.pieces[k].size()];
  for (const Piece& p : inv.pieces)
    if (p.size() < 2) ++unused[p.size()];
  chosen.pieces.resize(nodes.size());

  JoinResult r;
  std::map<VertexId, int> cavity_of;
  r.pieces = piece_graphs(chosen, nodes.size(), &cavity_of);
  for (std::size_t k = 0; k < r.pieces.size(); ++k) {
    for (const auto& [id, v] : r.pieces[k].vertices()) r.graph.add_vertex(v);
    for (const auto& [key, ann] : r.pieces[k].edges()) r.graph.set_edge(key.first, key.second, ann);
    r.node_centre[static_cast<VertexId>(k)] = r.pieces[k].vertex_ids().front();
  }
  const long initial_qubits = static_cast<long>(r.graph.size());
  RunStats& st = r.stats;
  TiltedGraph& g = r.graph;
  const bool merge_kind = cfg.join_kind == JoinKind::Merge;

  std::uint64_t edge_index = 0;
  for (const auto& [key, ann] : target.edges()) {
    Rng erng = rng.split(++edge_index);
    long dh = 0, dh_ok = 0;
    int procedures = 0;
    const long consumed_before = st.qubits_consumed;
    bool joined = false;
    while (!joined) {
      require(dh < cfg.join_attempt_budget, ErrorKind::Exhausted,
              "join attempt budget exhausted for target edge " + std::to_string(key.first) + "-" +
                  std::to_string(key.second));
      const VertexId cu = r.node_centre.at(key.first), cv = r.node_centre.at(key.second);
      const auto qa = free_leaf(g, cu), qb = free_leaf(g, cv);
      require(qa && qb, ErrorKind::Exhausted, "a piece ran out of qubits during joining (larger target_size helps)");
      for (auto [q, centre] : {std::pair{*qa, cu}, std::pair{*qb, cv}}) {
        physical_h(g.vertex(q));
        if (g.vertex(q).x_flip) {
          // X on an untilted leaf is Z on its neighbour
          g.vertex(q).x_flip = false;
          require(frame_z(g.vertex(centre), kPi), ErrorKind::Graph, "unreachable");
        }
        JoinOp op;
        op.kind = JoinOp::Kind::PhysicalH;
        op.a = q;
        r.log.push_back(op);
      }

      DhContext ctx;
      ctx.theta_a = dh_effective_tilt(g, *qa);
      ctx.theta_b = dh_effective_tilt(g, *qb);
      ctx.pa = cfg.profile_of(cavity_of.at(*qa));
      ctx.pb = cfg.profile_of(cavity_of.at(*qb));
      ctx.detection_efficiency = cfg.efficiency;
      const DhOutcome o = attempt_dh(ctx, erng);
      ++dh;
      JoinOp op;
      op.a = *qa;
      op.b = *qb;
      if (o.success) {
        ++dh_ok;
        op.kind = JoinOp::Kind::DhSuccess;
        op.weight_01 = std::sqrt(ctx.pa.density(o.clicks.t1) * ctx.pb.density(o.clicks.t2));
        op.weight_10 = std::sqrt(ctx.pb.density(o.clicks.t1) * ctx.pa.density(o.clicks.t2));
        op.parity = o.parity;
      } else {
        op.kind = JoinOp::Kind::DhFailure;
        op.bit_a = o.bit_a;
        op.bit_b = o.bit_b;
        st.qubits_consumed += 2;
      }
      r.log.push_back(op);
      g = apply_dh_to_graph(g, *qa, *qb, o);
      if (!o.success) continue;

      // qb is now a tilted vertex between the two centres with cherry qa
      const VertexId central = *qb, cherry = *qa;
      const TiltAngle tilt = g.vertex(central).tilt;
      Method method = cfg.join_method == JoinPolicy::ForceI ? Method::I : Method::II;
      if (cfg.join_method == JoinPolicy::Auto)
        method = choose_method(tilt, prior_annotation(g, cu, cv), cfg.join_kind).method;
      if (method == Method::I) {
        g = sample_branch(g, cherry, [&](int m) { return drop_cherry_branch(g, cherry, m); }, erng,
                          r.log)
                .second;
      } else {
        auto [po, next] = sample_branch(
            g, cherry, [&](int m) { return realign_branch(g, cherry, m); }, erng, r.log);
        ++st.realignments_attempted;
        st.realignments_succeeded += po.success;
        g = std::move(next);
      }
      ++st.qubits_consumed;

      ++procedures;
      ProcedureOutcome po;
      if (merge_kind) {
        const int sign = cfg.recycle ? merge_auto_sign(prior_partial_fusion(g, central)) : +1;
        std::tie(po, g) = sample_branch(
            g, central, [&](int m) { return merge_branch(g, central, sign, m); }, erng, r.log);
        ++st.merges;
      } else {
        const int sign = cfg.recycle ? bridge_auto_sign(prior_weighted(g, central),
                                                        g.vertex(central).tilt.radians())
                                     : +1;
        std::tie(po, g) = sample_branch(
            g, central, [&](int m) { return bridge_branch(g, central, sign, m); }, erng, r.log);
        ++st.bridges;
      }
      ++st.qubits_consumed;
      joined = angle_near(std::abs(reduce_half_turn(po.annotation->phi)), kQuarterPi, 1e-9);
      if (joined && merge_kind) {
        // the fused pair survives as the lower id
        const VertexId keep = std::min(cu, cv), gone = std::max(cu, cv);
        for (auto& [node, c] : r.node_centre)
          if (c == gone) c = keep;
      }
    }
    st.dh_attempts += dh;
    st.dh_successes += dh_ok;
    r.procedure_attempts.push_back(procedures);
    st.rounds.push_back({static_cast<int>(edge_index), dh, dh_ok, st.qubits_consumed - consumed_before,
                         0.0, 0.0});
  }
  require(initial_qubits - static_cast<long>(g.size()) == st.qubits_consumed, ErrorKind::Numeric,
          "qubit bookkeeping mismatch in joins");
  double f = 0.0;
  for (const Piece& p : chosen.pieces) f += p.tilt.fidelity();
  st.mean_final_fidelity = f / static_cast<double>(chosen.pieces.size());
  for (RoundRow& row : st.rounds) {
    row.mean_tilt = kQuarterPi;
    row.mean_fidelity = st.mean_final_fidelity;
  }
  st.census = unused;
  ++st.census[static_cast<int>(g.size())];
  return r;
}

StateVector replay_join(const JoinResult& r) {
  StateVector s({}, {1.0});
  std::vector<bool> loaded(r.pieces.size(), false);
  auto ensure = [&](VertexId q) {
    for (VertexId l : s.labels())
      if (l == q) return;
    for (std::size_t k = 0; k < r.pieces.size(); ++k)
      if (!loaded[k] && r.pieces[k].has_vertex(q)) {
        s = s.tensor(build_state(r.pieces[k]));
        loaded[k] = true;
        return;
      }
    fail(ErrorKind::Verification, "replay touches unknown qubit " + std::to_string(q));
  };
  for (const JoinOp& op : r.log) {
    switch (op.kind) {
      case JoinOp::Kind::PhysicalH:
        ensure(op.a);
        s.apply_1q(op.a, mat_hadamard());
        break;
      case JoinOp::Kind::DhSuccess: {
        ensure(op.a);
        ensure(op.b);
        const std::size_t ia = s.index_of(op.a), ib = s.index_of(op.b);
        std::vector<cplx> amps = s.amplitudes();
        for (std::size_t i = 0; i < amps.size(); ++i) {
          const int a = static_cast<int>((i >> ia) & 1), b = static_cast<int>((i >> ib) & 1);
          if (a == b)
            amps[i] = 0.0;
          else if (a == 0)
            amps[i] *= op.weight_01;
          else
            amps[i] *= op.parity < 0 ? -op.weight_10 : op.weight_10;
        }
        s = StateVector(s.labels(), std::move(amps));
        s.normalize();
        break;
      }
      case JoinOp::Kind::DhFailure:
        ensure(op.a);
        ensure(op.b);
        s = s.project_out(op.a, op.bit_a).project_out(op.b, op.bit_b);
        s.normalize();
        break;
      case JoinOp::Kind::Measure: {
        ensure(op.a);
        s.apply_1q(op.a, op.rotation);
        s = s.project_out(op.a, op.outcome);
        s.normalize();
        break;
      }
    }
  }
  for (std::size_t k = 0; k < r.pieces.size(); ++k)
    if (!loaded[k]) {
      s = s.tensor(build_state(r.pieces[k]));
      loaded[k] = true;
    }
  return s;
}

// ---- pipeline --------------------------------------------------------------

TiltedGraph linear_target(int n) {
  require(n >= 1, ErrorKind::Config, "target needs at least one node");
  TiltedGraph t;
  for (int k = 0; k < n; ++k) t.add_vertex(k);
  for (int k = 0; k + 1 < n; ++k) t.set_edge(k, k + 1, EdgeAnnotation::pure());
  return t;
}

GrowthResult run_growth(const StrategyConfig& cfg, const TiltedGraph& target) {
  cfg.validate();
  const Rng root(cfg.seed);
  GrowthResult g;
  Rng r1 = root.split(1), r2 = root.split(2), r3 = root.split(3);
  g.phase1 = run_phase1(cfg, r1);
  g.realigned = run_realignment(g.phase1.inventory, cfg, r2);
  g.total = g.phase1.stats;
  g.total.absorb(g.realigned.stats);
  if (target.size() > 1) {
    g.joined = run_join(g.realigned.inventory, target, cfg, r3);
    g.total.absorb(g.joined->stats);
  }
  return g;
}

}  // namespace tglab

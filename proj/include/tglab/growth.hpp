#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tglab/heralding.hpp"
#include "tglab/leakage.hpp"
#include "tglab/metrics.hpp"
#include "tglab/oracle.hpp"
#include "tglab/procedures.hpp"
#include "tglab/rng.hpp"
#include "tglab/tilted_graph.hpp"

namespace tglab {

// A tilted GHZ piece; members are the cavity systems holding its qubits.
struct Piece {
  long id = 0;
  TiltAngle tilt;
  std::vector<int> members;

  int size() const { return static_cast<int>(members.size()); }
};

struct Inventory {
  std::vector<Piece> pieces;

  long qubit_count() const;
};

enum class Pairing { Sorted, Random };
enum class JoinPolicy { Auto, ForceI, ForceII };

struct StrategyConfig {
  std::vector<LeakageProfile> profiles;  // system i uses profiles[i % size]
  int systems = 64;
  int target_ghz_size = 4;
  double fidelity_acceptance = 0.99;  // minimum f = (1 + sin 2 theta) / 2
  Pairing pairing = Pairing::Sorted;
  bool flip_rule = true;
  JoinPolicy join_method = JoinPolicy::Auto;
  JoinKind join_kind = JoinKind::Bridge;
  ComparisonMode comparison_mode = ComparisonMode::Paper;
  std::uint64_t seed = 0;
  double efficiency = 1.0;
  int max_rounds = 1000;
  int join_attempt_budget = 1000;  // DH attempts per target edge
  bool recycle = true;             // sign-match the next attempt to the leftover annotation
  int threads = 1;

  void validate() const;
  const LeakageProfile& profile_of(int system) const;
};

struct RoundRow {
  int round = 0;
  long attempts = 0;
  long successes = 0;
  long qubits_consumed = 0;
  double mean_tilt = 0.0;
  double mean_fidelity = 0.0;
};

struct RunStats {
  long dh_attempts = 0;
  long dh_successes = 0;
  long qubits_consumed = 0;
  long realignments_attempted = 0;
  long realignments_succeeded = 0;
  long merges = 0;
  long bridges = 0;
  std::map<int, int> census;  // piece size -> count
  double mean_final_fidelity = 0.0;
  std::vector<RoundRow> rounds;

  void absorb(const RunStats& later);
  std::string rounds_csv() const;
  std::string summary_csv() const;
};

// Flip the second partner when the tilts sit on opposite sides.
bool maybe_flip(TiltAngle a, TiltAngle b);

struct Pairs {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // indices into the input
  std::optional<std::size_t> leftover;
};
// Sorted: stable ascending sort by tilt, adjacent pairs. Random: seeded shuffle.
Pairs pair_inventory(const std::vector<Piece>& pieces, Pairing mode, Rng& rng);

struct PhaseResult {
  Inventory inventory;
  RunStats stats;
};

// Grow GHZ pieces from fresh qubits until no further piece can reach the target.
PhaseResult run_phase1(const StrategyConfig& cfg, Rng& rng);

// Realign pieces below acceptance; each attempt spends one qubit.
PhaseResult run_realignment(const Inventory& inv, const StrategyConfig& cfg, Rng& rng);

// Physical operations of a join, replayable on a state vector.
struct JoinOp {
  enum class Kind { PhysicalH, DhSuccess, DhFailure, Measure };
  Kind kind = Kind::Measure;
  VertexId a = 0;
  VertexId b = 0;
  double weight_01 = 0.0;  // Kraus weights of (a=0,b=1) and (a=1,b=0)
  double weight_10 = 0.0;
  int parity = +1;
  int bit_a = 0;
  int bit_b = 0;
  Mat2 rotation{};
  int outcome = 0;
};

struct JoinResult {
  TiltedGraph graph;
  std::vector<TiltedGraph> pieces;   // initial star graphs, disjoint ids
  std::map<VertexId, VertexId> node_centre;  // target node -> centre vertex
  std::vector<JoinOp> log;
  std::vector<int> procedure_attempts;  // merge/bridge attempts per target edge
  RunStats stats;
};

// Star graph for each piece: centre then Hadamard leaves. Within-acceptance
// tilts are treated as untilted; their fidelity is carried in the stats.
std::vector<TiltedGraph> piece_graphs(const Inventory& inv, std::size_t count,
                                      std::map<VertexId, int>* cavity_of);

// Join pieces along the target's edges (target vertex k uses piece k).
JoinResult run_join(const Inventory& inv, const TiltedGraph& target, const StrategyConfig& cfg,
                    Rng& rng);

// State-vector replay of a join; pieces are tensored in when first touched.
StateVector replay_join(const JoinResult& r);

struct GrowthResult {
  PhaseResult phase1;
  PhaseResult realigned;
  std::optional<JoinResult> joined;
  RunStats total;
};

// Phase 1, realignment, then joins along the target (skipped when empty).
GrowthResult run_growth(const StrategyConfig& cfg, const TiltedGraph& target);

// Linear chain of n target nodes.
TiltedGraph linear_target(int n);

}  // namespace tglab

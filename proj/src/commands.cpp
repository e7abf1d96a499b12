#include "tglab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "tglab/csv.hpp"
#include "tglab/growth.hpp"
#include "tglab/heralding.hpp"
#include "tglab/metrics.hpp"
#include "tglab/oracle.hpp"
#include "tglab/procedures.hpp"

namespace tglab {

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"calibrate", "efsq-surface", "fidelity-hist",
                                                 "compare",   "grow",         "verify"};
  return names;
}

Command parse_command(const std::string& name) {
  const auto& names = command_names();
  const auto it = std::find(names.begin(), names.end(), name);
  require(it != names.end(), ErrorKind::Config, "unknown command '" + name + "'");
  return static_cast<Command>(it - names.begin());
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 1;
    case ErrorKind::Verification:
      return 3;
    default:
      return 2;
  }
}

namespace {

// Static partition of [0, n) over threads; each index writes its own slot.
void parallel_indices(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
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

std::string pct(double p) {
  std::ostringstream s;
  s.precision(4);
  s << std::fixed << 100.0 * p << "%";
  return s.str();
}

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& body,
                CommandOutput& out) {
  const std::filesystem::path p = dir / name;
  std::ofstream f(p, std::ios::binary);
  require(f.good(), ErrorKind::Config, "cannot write '" + p.string() + "'");
  f << body;
  require(f.good(), ErrorKind::Config, "write failed for '" + p.string() + "'");
  out.files.push_back(name);
}

}  // namespace

std::string efsq_surface_csv(const ExperimentConfig& cfg) {
  const int n = cfg.surface_grid;
  // cell centres of the (sin^2 a, sin^2 b) unit square
  std::vector<double> s2(n);
  for (int i = 0; i < n; ++i) s2[i] = (i + 0.5) / n;
  std::vector<double> values(static_cast<std::size_t>(n) * n);
  parallel_indices(values.size(), cfg.threads, [&](std::size_t k) {
    const double a = std::asin(std::sqrt(s2[k / n])), b = std::asin(std::sqrt(s2[k % n]));
    values[k] = expected_f_sq(TiltAngle(a), TiltAngle(b), cfg.profile_a(), cfg.profile_b(),
                              cfg.quadrature)
                    .value;
  });
  CsvWriter w({"sin2_theta_a", "sin2_theta_b", "efsq"});
  for (std::size_t k = 0; k < values.size(); ++k)
    w.row({fmt_double(s2[k / n]), fmt_double(s2[k % n]), fmt_double(values[k])});
  return w.str();
}

std::string fidelity_hist_csv(const ExperimentConfig& cfg) {
  HistogramSettings hs;
  hs.panels = cfg.hist_panels;
  const FidelityHistogram h =
      fidelity_histogram(TiltAngle(cfg.hist_theta_a), TiltAngle(cfg.hist_theta_b),
                         cfg.profile_a(), cfg.profile_b(), cfg.hist_bins, hs);
  CsvWriter w({"F_bin_lo", "F_bin_hi", "mass"});
  for (std::size_t i = 0; i < h.masses.size(); ++i)
    w.row({fmt_double(h.edges[i]), fmt_double(h.edges[i + 1]), fmt_double(h.masses[i])});
  return w.str();
}

namespace {

std::vector<ComparisonReport> compare_reports(const ExperimentConfig& cfg) {
  HistogramSettings hs;
  hs.panels = cfg.compare_panels;
  std::vector<ComparisonReport> out(2);
  const ComparisonMode modes[2] = {ComparisonMode::Paper, ComparisonMode::Exact};
  parallel_indices(2, cfg.threads, [&](std::size_t i) {
    out[i] = compare_strategies(cfg.profile_a(), cfg.profile_b(), cfg.epsilon, modes[i], hs);
  });
  return out;
}

std::string reports_csv(const std::vector<ComparisonReport>& reports) {
  CsvWriter w({"mode", "epsilon", "p_postselect", "p_outside_window", "p_total",
               "estimated_error"});
  for (const ComparisonReport& r : reports)
    w.row({r.mode == ComparisonMode::Paper ? "paper" : "exact", fmt_double(r.epsilon),
           fmt_double(r.p_postselect), fmt_double(r.p_outside_window), fmt_double(r.p_total),
           fmt_double(r.estimated_error)});
  return w.str();
}

}  // namespace

std::string compare_csv(const ExperimentConfig& cfg) { return reports_csv(compare_reports(cfg)); }

// ---- oracle suite ----------------------------------------------------------

double OracleSuiteReport::max_discrepancy() const {
  double m = 0.0;
  for (const OracleCheck& c : checks) m = std::max(m, c.max_discrepancy);
  return m;
}

std::string OracleSuiteReport::csv() const {
  CsvWriter w({"check", "cases", "skipped", "max_discrepancy"});
  for (const OracleCheck& c : checks)
    w.row({c.name, std::to_string(c.cases), std::to_string(c.skipped),
           fmt_double(c.max_discrepancy)});
  w.row({"all", "", "", fmt_double(max_discrepancy())});
  return w.str();
}

namespace {

double uniform(Rng& r, double lo, double hi) { return lo + (hi - lo) * r.uniform(); }

void random_frame(Vertex& v, Rng& r) {
  v.hadamard = r.uniform() < 0.5;
  v.x_flip = r.uniform() < 0.5;
  v.z_phase = v.hadamard ? (r.uniform() < 0.5 ? 0.0 : kPi) : uniform(r, 0.0, 2.0 * kPi);
}

double state_gap(const StateVector& a, const StateVector& b) {
  return std::abs(1.0 - overlap(a, b));
}

TiltedGraph random_graph(Rng& r) {
  const int n = 2 + static_cast<int>(r.next_u64() % 7);
  TiltedGraph g;
  for (int i = 0; i < n; ++i) {
    Vertex& v = g.add_vertex(i, uniform(r, -kHalfPi, kHalfPi));
    v.hadamard = r.uniform() < 0.4;
    v.x_flip = r.uniform() < 0.4;
    v.z_phase = r.uniform() < 0.5 ? 0.0 : uniform(r, 0.0, 2.0 * kPi);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (r.uniform() >= 0.35) continue;
      const double special[] = {kQuarterPi, -kQuarterPi, kHalfPi, 0.0};
      const double phi = r.uniform() < 0.5 ? special[r.next_u64() % 4] : uniform(r, -kHalfPi, kHalfPi);
      switch (r.next_u64() % 3) {
        case 0: g.set_edge(i, j, EdgeAnnotation::pure()); break;
        case 1: g.set_edge(i, j, EdgeAnnotation::weighted(phi)); break;
        default: g.set_edge(i, j, EdgeAnnotation::partial_fusion(phi)); break;
      }
    }
  return g;
}

// central 0 (tilted), neighbours 1 and 2 with random extra legs, optional cherry 5.
TiltedGraph procedure_graph(Rng& r, double theta, std::optional<EdgeAnnotation> prior, bool cherry) {
  TiltedGraph g;
  random_frame(g.add_vertex(0, theta), r);
  for (VertexId v = 1; v <= 4; ++v) random_frame(g.add_vertex(v), r);
  g.set_edge(0, 1, EdgeAnnotation::pure());
  g.set_edge(0, 2, EdgeAnnotation::pure());
  g.set_edge(1, 3, EdgeAnnotation::pure());
  g.set_edge(2, 4, EdgeAnnotation::pure());
  if (prior) g.set_edge(1, 2, *prior);
  if (cherry) {
    random_frame(g.add_vertex(5), r);
    g.set_edge(0, 5, EdgeAnnotation::pure());
  }
  // up to ten qubits: extra legs anywhere but the central vertex
  const int extra = static_cast<int>(r.next_u64() % 5);
  for (int k = 0; k < extra; ++k) {
    const VertexId id = 6 + k;
    random_frame(g.add_vertex(id, uniform(r, 0.05, kHalfPi - 0.05)), r);
    g.set_edge(1 + static_cast<VertexId>(r.next_u64() % 4), id, EdgeAnnotation::pure());
  }
  return g;
}

using BranchFn = std::function<std::pair<ProcedureOutcome, TiltedGraph>(int)>;

double branch_gap(const TiltedGraph& g, VertexId measured, const BranchFn& branch) {
  const StateVector s = build_state(g);
  double gap = 0.0;
  for (int m : {0, 1}) {
    const auto [po, out] = branch(m);
    const Mat2 rot = physical_rotation(g.vertex(measured), po.graph_rotation);
    const auto [rec, post] = measure_forced(s, measured, rot, m);
    gap = std::max(gap, std::abs(rec.probability - po.probability));
    if (rec.probability > 1e-9) gap = std::max(gap, state_gap(post, build_state(out)));
  }
  return gap;
}

StateVector kraus(const StateVector& s, VertexId qa, VertexId qb, const DhContext& ctx,
                  const ClickPair& c, int parity) {
  const std::size_t ia = s.index_of(qa), ib = s.index_of(qb);
  const double w01 = std::sqrt(ctx.pa.density(c.t1) * ctx.pb.density(c.t2));
  const double w10 = std::sqrt(ctx.pb.density(c.t1) * ctx.pa.density(c.t2));
  std::vector<cplx> amps = s.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const int a = static_cast<int>((i >> ia) & 1), b = static_cast<int>((i >> ib) & 1);
    if (a == b)
      amps[i] = 0.0;
    else
      amps[i] *= a == 0 ? w01 : (parity < 0 ? -w10 : w10);
  }
  StateVector out(s.labels(), std::move(amps));
  out.normalize();
  return out;
}

double dh_gap(const TiltedGraph& g, VertexId qa, VertexId qb, const LeakageProfile& pa,
              const LeakageProfile& pb, Rng& r) {
  DhContext ctx;
  ctx.theta_a = dh_effective_tilt(g, qa);
  ctx.theta_b = dh_effective_tilt(g, qb);
  ctx.pa = pa;
  ctx.pb = pb;
  const StateVector s = build_state(g);
  const ClickPair c = sample_clicks(ctx, r);
  double gap = 0.0;
  for (int parity : {+1, -1}) {
    const DhOutcome o = DhOutcome::succeeded(tilt_after_dh(ctx, c), c, parity);
    gap = std::max(gap, state_gap(build_state(apply_dh_to_graph(g, qa, qb, o)),
                                  kraus(s, qa, qb, ctx, c, parity)));
  }
  for (int bit : {0, 1}) {
    StateVector p = s.project_out(qa, bit).project_out(qb, bit);
    if (p.norm_sq() < 1e-20) continue;
    p.normalize();
    gap = std::max(gap, state_gap(build_state(apply_dh_to_graph(g, qa, qb, DhOutcome::failed(bit, bit))), p));
  }
  return gap;
}

// Runs `body` for each case; Graph errors count as refused configurations.
OracleCheck run_check(const std::string& name, int cases, Rng r,
                      const std::function<double(Rng&)>& body) {
  OracleCheck c{name, 0, 0, 0.0};
  for (int k = 0; k < cases; ++k) {
    Rng cr = r.split(static_cast<std::uint64_t>(k));
    try {
      c.max_discrepancy = std::max(c.max_discrepancy, body(cr));
      ++c.cases;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Graph) throw;
      ++c.skipped;
    }
  }
  return c;
}

}  // namespace

OracleSuiteReport run_oracle_suite(int cases, std::uint64_t seed) {
  const Rng root(seed);
  const LeakageProfile pa = LeakageProfile::critically_damped(10.0);
  const LeakageProfile pb = LeakageProfile::critically_damped(12.5);
  OracleSuiteReport rep;

  rep.checks.push_back(run_check("canonicalize", cases, root.split(1), [](Rng& r) {
    const TiltedGraph g = random_graph(r);
    return state_gap(build_state(g), build_state(canonicalize(g)));
  }));
  rep.checks.push_back(run_check("realign", cases, root.split(2), [](Rng& r) {
    const TiltedGraph g = procedure_graph(r, uniform(r, 1e-3, kHalfPi - 1e-3), std::nullopt, true);
    return branch_gap(g, 5, [&](int m) { return realign_branch(g, 5, m); });
  }));
  rep.checks.push_back(run_check("drop_cherry", cases, root.split(3), [](Rng& r) {
    const TiltedGraph g = procedure_graph(r, uniform(r, 1e-3, kHalfPi - 1e-3), std::nullopt, true);
    return branch_gap(g, 5, [&](int m) { return drop_cherry_branch(g, 5, m); });
  }));
  rep.checks.push_back(run_check("merge", cases, root.split(4), [](Rng& r) {
    std::optional<EdgeAnnotation> prior;
    if (r.uniform() < 0.75) prior = EdgeAnnotation::partial_fusion(uniform(r, -kHalfPi, kHalfPi));
    const TiltedGraph g = procedure_graph(r, uniform(r, 1e-3, kHalfPi - 1e-3), prior, false);
    const int sign = r.uniform() < 0.5 ? 1 : -1;
    return branch_gap(g, 0, [&](int m) { return merge_branch(g, 0, sign, m); });
  }));
  rep.checks.push_back(run_check("bridge", cases, root.split(5), [](Rng& r) {
    std::optional<EdgeAnnotation> prior;
    if (r.uniform() < 0.75) prior = EdgeAnnotation::weighted(uniform(r, -kHalfPi, kHalfPi));
    const TiltedGraph g = procedure_graph(r, uniform(r, 1e-3, kHalfPi - 1e-3), prior, false);
    const int sign = r.uniform() < 0.5 ? 1 : -1;
    return branch_gap(g, 0, [&](int m) { return bridge_branch(g, 0, sign, m); });
  }));
  rep.checks.push_back(run_check("dh_ghz", cases, root.split(6), [&](Rng& r) {
    TiltedGraph g;
    for (VertexId first : {0, 10}) {
      const int n = 2 + static_cast<int>(r.next_u64() % 3);
      Vertex& c = g.add_vertex(first, uniform(r, 0.1, kHalfPi - 0.1));
      c.z_phase = uniform(r, 0.0, 2.0 * kPi);
      for (int i = 1; i < n; ++i) {
        Vertex& l = g.add_vertex(first + i);
        l.hadamard = true;
        l.x_flip = r.uniform() < 0.5;
        l.z_phase = r.uniform() < 0.5 ? 0.0 : kPi;
        g.set_edge(first, first + i, EdgeAnnotation::pure());
      }
    }
    return dh_gap(g, 1, 11, pa, pb, r);
  }));
  rep.checks.push_back(run_check("dh_cherry", cases, root.split(7), [&](Rng& r) {
    TiltedGraph g;
    for (VertexId na : {0, 10}) {
      random_frame(g.add_vertex(na), r);
      g.add_vertex(na + 2);
      g.set_edge(na, na + 2, EdgeAnnotation::pure());
      Vertex& q = g.add_vertex(na + 1, uniform(r, 0.1, kHalfPi - 0.1));
      q.z_phase = uniform(r, 0.0, 2.0 * kPi);
      g.set_edge(na, na + 1, EdgeAnnotation::pure());
    }
    if (r.uniform() < 0.5) g.set_edge(0, 10, EdgeAnnotation::weighted(uniform(r, -1.5, 1.5)));
    return dh_gap(g, 1, 11, pa, pb, r);
  }));
  return rep;
}

// ---- dispatch --------------------------------------------------------------

CommandOutput run_command(Command cmd, const ExperimentConfig& cfg, const std::string& out_dir) {
  const std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::Config, "cannot create output directory '" + dir.string() + "'");
  CommandOutput out;
  std::ostringstream rep;
  rep.precision(10);

  switch (cmd) {
    case Command::Calibrate: {
      CsvWriter summary({"profile", "total_mass", "support_end"});
      for (const NamedProfile& p : cfg.profiles) {
        const double t_max = cfg.calibrate_t_max > 0.0 ? cfg.calibrate_t_max : p.profile.support_end();
        CsvWriter w({"time", "density"});
        for (int i = 0; i < cfg.calibrate_points; ++i) {
          const double t = t_max * i / (cfg.calibrate_points - 1);
          w.row({fmt_double(t), fmt_double(p.profile.density(t))});
        }
        write_file(dir, "profile_" + p.name + ".csv", w.str(), out);
        summary.row({p.name, fmt_double(p.profile.total_mass()), fmt_double(p.profile.support_end())});
      }
      write_file(dir, "calibrate.csv", summary.str(), out);
      rep << "overlap(" << cfg.profiles[cfg.pair_a].name << ", " << cfg.profiles[cfg.pair_b].name
          << ") = " << overlap_integral(cfg.profile_a(), cfg.profile_b(), cfg.quadrature) << "\n";
      break;
    }
    case Command::EfsqSurface:
      write_file(dir, "efsq_surface.csv", efsq_surface_csv(cfg), out);
      rep << "E(F^2) surface: " << cfg.surface_grid << "x" << cfg.surface_grid << " grid\n";
      break;
    case Command::FidelityHist:
      write_file(dir, "fidelity_hist.csv", fidelity_hist_csv(cfg), out);
      rep << "fidelity histogram: " << cfg.hist_bins << " bins\n";
      break;
    case Command::Compare: {
      const auto reports = compare_reports(cfg);
      write_file(dir, "compare.csv", reports_csv(reports), out);
      for (const ComparisonReport& r : reports)
        rep << (r.mode == ComparisonMode::Paper ? "paper" : "exact") << " mode, epsilon "
            << r.epsilon << ": postselect " << pct(r.p_postselect) << ", outside window "
            << pct(r.p_outside_window) << ", total " << pct(r.p_total) << "\n";
      break;
    }
    case Command::Grow: {
      const TiltedGraph target = cfg.target_nodes >= 2 ? linear_target(cfg.target_nodes) : TiltedGraph{};
      const GrowthResult g = run_growth(cfg.strategy, target);
      write_file(dir, "grow_rounds.csv", g.total.rounds_csv(), out);
      write_file(dir, "grow_summary.csv", g.total.summary_csv(), out);
      rep << "DH attempts " << g.total.dh_attempts << ", successes " << g.total.dh_successes
          << ", qubits consumed " << g.total.qubits_consumed << ", mean final fidelity "
          << g.total.mean_final_fidelity << "\n";
      break;
    }
    case Command::Verify: {
      const OracleSuiteReport r = run_oracle_suite(cfg.verify_cases, cfg.seed);
      write_file(dir, "verify.csv", r.csv(), out);
      for (const OracleCheck& c : r.checks)
        rep << c.name << ": " << c.cases << " cases (" << c.skipped << " refused), max discrepancy "
            << c.max_discrepancy << "\n";
      rep << "max oracle discrepancy " << r.max_discrepancy() << " (tolerance "
          << cfg.verify_tolerance << ")\n";
      if (!(r.max_discrepancy() < cfg.verify_tolerance)) out.exit_code = exit_code_for(ErrorKind::Verification);
      break;
    }
  }
  out.report = rep.str();
  return out;
}

}  // namespace tglab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tglab/growth.hpp"
#include "tglab/leakage.hpp"
#include "tglab/metrics.hpp"

namespace tglab {

struct NamedProfile {
  std::string name;
  LeakageProfile profile;
};

// One experiment per file. Sections and keys:
//   [run]        seed (required), threads, efficiency
//   [quadrature] tolerance, t_max, panels, max_doublings
//   [profile NAME]  g = <coupling>  |  file = <csv, relative to the config>
//   [pair]       a, b                 profile names used by two-cavity commands
//   [calibrate]  points, t_max
//   [surface]    grid
//   [histogram]  theta_a, theta_b, bins, panels
//   [compare]    epsilon, panels
//   [grow]       systems, pool, target_size, acceptance, pairing, flip, join_method,
//                join_kind, target_nodes, max_rounds, join_budget, recycle
//   [verify]     cases, tolerance
struct ExperimentConfig {
  std::string path;
  std::uint64_t seed = 0;
  int threads = 1;
  double efficiency = 1.0;
  QuadratureSettings quadrature;

  std::vector<NamedProfile> profiles;
  std::size_t pair_a = 0;
  std::size_t pair_b = 0;

  int calibrate_points = 1001;
  double calibrate_t_max = 0.0;  // 0 = profile support

  int surface_grid = 20;

  double hist_theta_a = kQuarterPi;
  double hist_theta_b = kQuarterPi;
  int hist_bins = 50;
  int hist_panels = 2048;

  double epsilon = 1e-4;
  int compare_panels = 2048;

  StrategyConfig strategy;  // profiles filled from the pool
  int target_nodes = 0;     // linear join target; 0 or 1 skips joins

  int verify_cases = 200;
  double verify_tolerance = 1e-9;

  const LeakageProfile& profile_a() const { return profiles.at(pair_a).profile; }
  const LeakageProfile& profile_b() const { return profiles.at(pair_b).profile; }
  // Re-seed everything that derives from the seed.
  void set_seed(std::uint64_t s);
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& path,
                                   const std::string& base_dir = ".");
ExperimentConfig parse_config(const std::string& path);

}  // namespace tglab

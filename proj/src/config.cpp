#include "tglab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tglab/error.hpp"

namespace tglab {

void ExperimentConfig::set_seed(std::uint64_t s) {
  seed = s;
  strategy.seed = s;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  std::string label;  // "profile a" -> name "profile", label "a"
  int line = 0;
  std::map<std::string, Entry> keys;
  std::set<std::string> used;
};

class Reader {
 public:
  Reader(std::string path, Section& s) : path_(std::move(path)), s_(s) {}

  [[noreturn]] void error(int line, const std::string& msg) const {
    fail(ErrorKind::Config, path_ + ":" + std::to_string(line) + ": " + msg);
  }

  const Entry* find(const std::string& key) {
    auto it = s_.keys.find(key);
    if (it == s_.keys.end()) return nullptr;
    s_.used.insert(key);
    return &it->second;
  }

  double real(const std::string& key, double fallback) {
    const Entry* e = find(key);
    if (!e) return fallback;
    return to_real(*e, key);
  }

  double to_real(const Entry& e, const std::string& key) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(e.value, &pos);
      if (pos == e.value.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    error(e.line, "'" + key + "' expects a number, got '" + e.value + "'");
  }

  long integer(const std::string& key, long fallback) {
    const Entry* e = find(key);
    if (!e) return fallback;
    long v = 0;
    const auto* end = e->value.data() + e->value.size();
    const auto [p, ec] = std::from_chars(e->value.data(), end, v);
    if (ec != std::errc() || p != end)
      error(e->line, "'" + key + "' expects an integer, got '" + e->value + "'");
    return v;
  }

  std::uint64_t unsigned64(const std::string& key, const Entry& e) const {
    std::uint64_t v = 0;
    const auto* end = e.value.data() + e.value.size();
    const auto [p, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || p != end)
      error(e.line, "'" + key + "' expects a non-negative integer, got '" + e.value + "'");
    return v;
  }

  bool boolean(const std::string& key, bool fallback) {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    error(e->line, "'" + key + "' expects on/off, got '" + e->value + "'");
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed) {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (std::find(allowed.begin(), allowed.end(), e->value) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      error(e->line, "'" + key + "' must be one of " + list + ", got '" + e->value + "'");
    }
    return e->value;
  }

  // Range check anchored at the key's line (or the section header if defaulted).
  void check(const std::string& key, bool ok, const std::string& what) const {
    if (ok) return;
    auto it = s_.keys.find(key);
    error(it == s_.keys.end() ? s_.line : it->second.line, "'" + key + "' " + what);
  }

  void reject_unused() const {
    for (const auto& [k, e] : s_.keys)
      if (!s_.used.count(k)) error(e.line, "unknown key '" + k + "' in [" + header() + "]");
  }

  std::string header() const { return s_.label.empty() ? s_.name : s_.name + " " + s_.label; }

 private:
  std::string path_;
  Section& s_;
};

std::vector<Section> split_sections(const std::string& text, const std::string& path) {
  std::vector<Section> out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  auto where = [&](int l) { return path + ":" + std::to_string(l) + ": "; };
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      require(s.back() == ']', ErrorKind::Config, where(line) + "unterminated section header");
      std::istringstream hs(s.substr(1, s.size() - 2));
      Section sec;
      sec.line = line;
      hs >> sec.name >> sec.label;
      std::string extra;
      require(!sec.name.empty() && !(hs >> extra), ErrorKind::Config,
              where(line) + "malformed section header '" + s + "'");
      out.push_back(std::move(sec));
      continue;
    }
    const auto eq = s.find('=');
    require(eq != std::string::npos, ErrorKind::Config, where(line) + "expected key = value");
    require(!out.empty(), ErrorKind::Config, where(line) + "key outside of any section");
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    require(!key.empty(), ErrorKind::Config, where(line) + "empty key");
    require(!value.empty(), ErrorKind::Config, where(line) + "empty value for '" + key + "'");
    auto [it, fresh] = out.back().keys.emplace(key, Entry{value, line});
    require(fresh, ErrorKind::Config,
            where(line) + "duplicate key '" + key + "' (first set on line " +
                std::to_string(it->second.line) + ")");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& path,
                                   const std::string& base_dir) {
  ExperimentConfig cfg;
  cfg.path = path;
  std::vector<Section> sections = split_sections(text, path);

  static const std::set<std::string> singletons = {"run",       "quadrature", "pair",
                                                   "calibrate", "surface",    "histogram",
                                                   "compare",   "grow",       "verify"};
  std::map<std::string, Section*> by_name;
  std::vector<Section*> profile_sections;
  for (Section& s : sections) {
    const std::string at = path + ":" + std::to_string(s.line) + ": ";
    if (s.name == "profile") {
      require(!s.label.empty(), ErrorKind::Config, at + "profile sections need a name");
      for (const Section* p : profile_sections)
        require(p->label != s.label, ErrorKind::Config, at + "duplicate profile '" + s.label + "'");
      profile_sections.push_back(&s);
      continue;
    }
    require(singletons.count(s.name) != 0, ErrorKind::Config, at + "unknown section [" + s.name + "]");
    require(s.label.empty(), ErrorKind::Config, at + "section [" + s.name + "] takes no name");
    require(!by_name.count(s.name), ErrorKind::Config, at + "duplicate section [" + s.name + "]");
    by_name[s.name] = &s;
  }
  Section empty_section;
  auto section = [&](const std::string& name) -> Section& {
    auto it = by_name.find(name);
    if (it != by_name.end()) return *it->second;
    empty_section = Section{name, "", 0, {}, {}};
    return empty_section;
  };

  {
    Section& s = section("run");
    Reader r(path, s);
    const Entry* seed = r.find("seed");
    if (!seed)
      fail(ErrorKind::Config, path + ":" + std::to_string(s.line) +
                                  ": missing required key 'seed' in [run] (runs must be seeded)");
    cfg.set_seed(r.unsigned64("seed", *seed));
    cfg.threads = static_cast<int>(r.integer("threads", 1));
    r.check("threads", cfg.threads >= 1 && cfg.threads <= 256, "must lie in [1, 256]");
    cfg.efficiency = r.real("efficiency", 1.0);
    r.check("efficiency", cfg.efficiency > 0.0 && cfg.efficiency <= 1.0, "must lie in (0, 1]");
    r.reject_unused();
  }
  {
    Section& s = section("quadrature");
    Reader r(path, s);
    cfg.quadrature.relative_tolerance = r.real("tolerance", 1e-8);
    r.check("tolerance", cfg.quadrature.relative_tolerance > 0.0 &&
                             cfg.quadrature.relative_tolerance < 1.0,
            "must lie in (0, 1)");
    cfg.quadrature.t_max = r.real("t_max", 0.0);
    r.check("t_max", cfg.quadrature.t_max >= 0.0, "must be >= 0");
    cfg.quadrature.panel_count = static_cast<int>(r.integer("panels", 256));
    r.check("panels", cfg.quadrature.panel_count >= 2, "must be >= 2");
    cfg.quadrature.max_doublings = static_cast<int>(r.integer("max_doublings", 10));
    r.check("max_doublings", cfg.quadrature.max_doublings >= 0 && cfg.quadrature.max_doublings <= 20,
            "must lie in [0, 20]");
    r.reject_unused();
  }

  for (Section* s : profile_sections) {
    Reader r(path, *s);
    const Entry* g = r.find("g");
    const Entry* file = r.find("file");
    if ((g != nullptr) == (file != nullptr))
      r.error(s->line, "profile '" + s->label + "' needs exactly one of 'g' or 'file'");
    if (g) {
      const double coupling = r.to_real(*g, "g");
      if (!(coupling > 0.0)) r.error(g->line, "'g' must be > 0, got " + g->value);
      cfg.profiles.push_back({s->label, LeakageProfile::critically_damped(coupling)});
    } else {
      const std::filesystem::path p = std::filesystem::path(base_dir) / file->value;
      if (!std::filesystem::exists(p))
        r.error(file->line, "profile file '" + p.string() + "' does not exist");
      try {
        cfg.profiles.push_back({s->label, LeakageProfile::load_csv(p.string())});
      } catch (const Error& e) {
        r.error(file->line, e.what());
      }
    }
    r.reject_unused();
  }
  require(!cfg.profiles.empty(), ErrorKind::Config, path + ": at least one [profile NAME] is required");

  auto profile_index = [&](Reader& r, const std::string& key, std::size_t fallback) {
    const Entry* e = r.find(key);
    if (!e) return fallback;
    for (std::size_t i = 0; i < cfg.profiles.size(); ++i)
      if (cfg.profiles[i].name == e->value) return i;
    r.error(e->line, "unknown profile '" + e->value + "'");
  };
  {
    Reader r(path, section("pair"));
    cfg.pair_a = profile_index(r, "a", 0);
    cfg.pair_b = profile_index(r, "b", cfg.profiles.size() > 1 ? 1 : 0);
    r.reject_unused();
  }
  {
    Reader r(path, section("calibrate"));
    cfg.calibrate_points = static_cast<int>(r.integer("points", 1001));
    r.check("points", cfg.calibrate_points >= 2, "must be >= 2");
    cfg.calibrate_t_max = r.real("t_max", 0.0);
    r.check("t_max", cfg.calibrate_t_max >= 0.0, "must be >= 0");
    r.reject_unused();
  }
  {
    Reader r(path, section("surface"));
    cfg.surface_grid = static_cast<int>(r.integer("grid", 20));
    r.check("grid", cfg.surface_grid >= 1 && cfg.surface_grid <= 1000, "must lie in [1, 1000]");
    r.reject_unused();
  }
  {
    Reader r(path, section("histogram"));
    cfg.hist_theta_a = r.real("theta_a", kQuarterPi);
    cfg.hist_theta_b = r.real("theta_b", kQuarterPi);
    r.check("theta_a", cfg.hist_theta_a > 0.0 && cfg.hist_theta_a < kHalfPi, "must lie in (0, pi/2)");
    r.check("theta_b", cfg.hist_theta_b > 0.0 && cfg.hist_theta_b < kHalfPi, "must lie in (0, pi/2)");
    cfg.hist_bins = static_cast<int>(r.integer("bins", 50));
    r.check("bins", cfg.hist_bins >= 1, "must be >= 1");
    cfg.hist_panels = static_cast<int>(r.integer("panels", 2048));
    r.check("panels", cfg.hist_panels >= 16, "must be >= 16");
    r.reject_unused();
  }
  {
    Reader r(path, section("compare"));
    cfg.epsilon = r.real("epsilon", 1e-4);
    r.check("epsilon", cfg.epsilon > 0.0 && cfg.epsilon < 0.5, "must lie in (0, 1/2)");
    cfg.compare_panels = static_cast<int>(r.integer("panels", 2048));
    r.check("panels", cfg.compare_panels >= 16, "must be >= 16");
    r.reject_unused();
  }
  {
    Reader r(path, section("grow"));
    StrategyConfig& st = cfg.strategy;
    std::vector<std::size_t> pool;
    if (const Entry* e = r.find("pool")) {
      for (const std::string& name : split_list(e->value)) {
        auto it = std::find_if(cfg.profiles.begin(), cfg.profiles.end(),
                               [&](const NamedProfile& p) { return p.name == name; });
        if (it == cfg.profiles.end()) r.error(e->line, "unknown profile '" + name + "' in pool");
        pool.push_back(static_cast<std::size_t>(it - cfg.profiles.begin()));
      }
      if (pool.empty()) r.error(e->line, "'pool' lists no profiles");
    } else {
      for (std::size_t i = 0; i < cfg.profiles.size(); ++i) pool.push_back(i);
    }
    for (std::size_t i : pool) st.profiles.push_back(cfg.profiles[i].profile);
    st.systems = static_cast<int>(r.integer("systems", 64));
    r.check("systems", st.systems >= 1 && st.systems <= 10'000'000, "must lie in [1, 1e7]");
    st.target_ghz_size = static_cast<int>(r.integer("target_size", 4));
    r.check("target_size", st.target_ghz_size >= 2, "must be >= 2");
    st.fidelity_acceptance = r.real("acceptance", 0.99);
    r.check("acceptance", st.fidelity_acceptance > 0.5 && st.fidelity_acceptance <= 1.0,
            "must lie in (1/2, 1]");
    st.pairing = r.choice("pairing", "sorted", {"sorted", "random"}) == "sorted" ? Pairing::Sorted
                                                                                 : Pairing::Random;
    st.flip_rule = r.boolean("flip", true);
    const std::string method = r.choice("join_method", "auto", {"auto", "force-i", "force-ii"});
    st.join_method = method == "auto"      ? JoinPolicy::Auto
                     : method == "force-i" ? JoinPolicy::ForceI
                                           : JoinPolicy::ForceII;
    st.join_kind = r.choice("join_kind", "bridge", {"merge", "bridge"}) == "merge" ? JoinKind::Merge
                                                                                  : JoinKind::Bridge;
    st.comparison_mode = r.choice("comparison_mode", "paper", {"paper", "exact"}) == "paper"
                             ? ComparisonMode::Paper
                             : ComparisonMode::Exact;
    cfg.target_nodes = static_cast<int>(r.integer("target_nodes", 0));
    r.check("target_nodes", cfg.target_nodes >= 0, "must be >= 0");
    st.max_rounds = static_cast<int>(r.integer("max_rounds", 1000));
    r.check("max_rounds", st.max_rounds >= 1, "must be >= 1");
    st.join_attempt_budget = static_cast<int>(r.integer("join_budget", 1000));
    r.check("join_budget", st.join_attempt_budget >= 1, "must be >= 1");
    st.recycle = r.boolean("recycle", true);
    st.efficiency = cfg.efficiency;
    st.threads = cfg.threads;
    r.reject_unused();
  }
  {
    Reader r(path, section("verify"));
    cfg.verify_cases = static_cast<int>(r.integer("cases", 200));
    r.check("cases", cfg.verify_cases >= 1, "must be >= 1");
    cfg.verify_tolerance = r.real("tolerance", 1e-9);
    r.check("tolerance", cfg.verify_tolerance > 0.0, "must be > 0");
    r.reject_unused();
  }
  cfg.strategy.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Config, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  return parse_config_text(ss.str(), path, dir.empty() ? "." : dir.string());
}

}  // namespace tglab

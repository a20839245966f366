#include "rindler/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "rindler/errors.hpp"
#include "rindler/format.hpp"
#include "rindler/qubit_ops.hpp"

namespace rindler::scenario {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!out.empty() && out.back().empty() && s.find_last_not_of(" \t") != std::string::npos &&
      s[s.find_last_not_of(" \t")] == ',')
    out.pop_back();
  return out;
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// Reads typed values and records every problem instead of stopping at the first.
class Reader {
 public:
  Reader(const Config& config, std::vector<Diagnostic>& diags, std::string prefix)
      : config_(config), diags_(diags), prefix_(std::move(prefix)) {}

  void error(const std::string& field, const std::string& message) { diags_.push_back({prefix_ + field, message}); }

  double number(const std::string& key, double fallback) {
    const auto v = config_.get(key);
    if (!v) return fallback;
    return parse_number(key, *v, fallback);
  }

  std::optional<double> optional_number(const std::string& key) {
    const auto v = config_.get(key);
    if (!v) return std::nullopt;
    return parse_number(key, *v, 0.0);
  }

  int integer(const std::string& key, int fallback) {
    const auto v = config_.get(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const int x = std::stoi(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
      return x;
    } catch (const std::exception&) {
      error(key, "expected an integer, got '" + *v + "'");
      return fallback;
    }
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto v = config_.get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    error(key, "expected true or false, got '" + *v + "'");
    return fallback;
  }

  std::string word(const std::string& key, const std::string& fallback, std::initializer_list<const char*> allowed) {
    const std::string v = config_.get_or(key, fallback);
    for (const char* a : allowed)
      if (v == a) return v;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    error(key, "unknown value '" + v + "' (expected one of: " + list + ")");
    return fallback;
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    const auto v = config_.get(key);
    if (!v) return out;
    for (const auto& item : split_list(*v)) out.push_back(parse_number(key, item, 0.0));
    return out;
  }

  std::vector<std::string> words(const std::string& key) {
    const auto v = config_.get(key);
    return v ? split_list(*v) : std::vector<std::string>{};
  }

  bool has(const std::string& key) const { return config_.has(key); }

 private:
  double parse_number(const std::string& key, const std::string& text, double fallback) {
    try {
      std::size_t used = 0;
      const double x = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      if (!std::isfinite(x)) throw std::invalid_argument("not finite");
      return x;
    } catch (const std::exception&) {
      error(key, "expected a number, got '" + text + "'");
      return fallback;
    }
  }

  const Config& config_;
  std::vector<Diagnostic>& diags_;
  std::string prefix_;
};

// Builds one evolution from flat keys. `label` prefixes diagnostics of cases.
RunSpec build_spec(const Config& config, std::vector<Diagnostic>& diags, const std::string& label,
                   const std::string& diag_prefix) {
  Reader r(config, diags, diag_prefix);
  RunSpec spec;
  spec.label = label;

  const int n = r.integer("n_atoms", 0);
  if (!r.has("n_atoms")) r.error("n_atoms", "required");
  else if (n < 1 || n > 12) r.error("n_atoms", "must be between 1 and 12");
  const int N = std::clamp(n, 1, 12);

  // Accelerations.
  std::vector<double> alphas;
  const std::string alpha_rule = r.word("alpha_rule", "equal", {"equal", "mismatch", "explicit"});
  if (alpha_rule == "equal") {
    alphas.assign(N, r.number("alpha_value", 1.0));
  } else if (alpha_rule == "mismatch") {
    const double base = r.number("alpha_base", 0.2);
    const double delta = r.number("alpha_delta", 0.0);
    if (!r.has("alpha_delta")) r.error("alpha_delta", "required for alpha_rule = mismatch");
    for (int j = 0; j < N; ++j) alphas.push_back(base + delta * j);
  } else {
    alphas = r.numbers("alphas");
    if (static_cast<int>(alphas.size()) != N)
      r.error("alphas", "has " + std::to_string(alphas.size()) + " entries, n_atoms is " + std::to_string(N));
    alphas.resize(N, 1.0);
  }
  for (int j = 0; j < N; ++j)
    if (!(alphas[j] > 0.0)) r.error("alphas", "acceleration of atom " + std::to_string(j + 1) + " must be > 0");

  spec.frame.a = r.number("a_ref", alphas.front());
  spec.frame.gamma0 = r.number("gamma0", 0.1);
  spec.frame.eps_res = r.number("eps_res", 1e-6);
  if (!(spec.frame.a > 0.0)) r.error("a_ref", "must be > 0");
  if (!(spec.frame.gamma0 >= 0.0)) r.error("gamma0", "must be >= 0");
  if (!(spec.frame.eps_res > 0.0)) r.error("eps_res", "must be > 0");
  if (const auto beta = r.optional_number("beta")) {
    if (!(*beta > 0.0)) r.error("beta", "must be > 0");
    spec.rate_options.beta_override = *beta;
  }

  // Frequencies.
  std::vector<double> omegas;
  const std::string omega_rule = r.word("omega_rule", "equal", {"equal", "resonant", "explicit"});
  const double omega = r.number("omega", 1.0);
  if (omega_rule == "equal") {
    omegas.assign(N, omega);
  } else if (omega_rule == "resonant") {
    // omega_j = (alpha_j / a) omega puts every red-shifted frequency at omega.
    for (int j = 0; j < N; ++j) omegas.push_back(alphas[j] / spec.frame.a * omega);
  } else {
    omegas = r.numbers("omegas");
    if (static_cast<int>(omegas.size()) != N)
      r.error("omegas", "has " + std::to_string(omegas.size()) + " entries, n_atoms is " + std::to_string(N));
    omegas.resize(N, 1.0);
  }
  for (int j = 0; j < N; ++j)
    if (!(omegas[j] > 0.0)) r.error("omegas", "frequency of atom " + std::to_string(j + 1) + " must be > 0");

  std::vector<Wedge> wedges(N, Wedge::I);
  if (r.has("wedges")) {
    const auto w = r.words("wedges");
    if (static_cast<int>(w.size()) != N)
      r.error("wedges", "has " + std::to_string(w.size()) + " entries, n_atoms is " + std::to_string(N));
    for (std::size_t j = 0; j < w.size() && static_cast<int>(j) < N; ++j) {
      if (w[j] == "I") wedges[j] = Wedge::I;
      else if (w[j] == "II") wedges[j] = Wedge::II;
      else r.error("wedges", "entry '" + w[j] + "' is neither I nor II");
    }
  }

  std::vector<double> couplings(N, 1.0);
  if (r.has("couplings")) {
    couplings = r.numbers("couplings");
    if (static_cast<int>(couplings.size()) != N)
      r.error("couplings", "has " + std::to_string(couplings.size()) + " entries, n_atoms is " + std::to_string(N));
    couplings.resize(N, 1.0);
    for (double g : couplings)
      if (!(g >= 0.0)) r.error("couplings", "must be >= 0");
  }

  if (r.has("positions")) {
    spec.rate_options.positions = r.numbers("positions");
    if (static_cast<int>(spec.rate_options.positions.size()) != N)
      r.error("positions", "has " + std::to_string(spec.rate_options.positions.size()) + " entries, n_atoms is " +
                               std::to_string(N));
  }

  for (int j = 0; j < N; ++j) spec.atoms.push_back({omegas[j], alphas[j], wedges[j], couplings[j]});

  // Initial state.
  const std::string init = config.get_or("initial_state", "all_excited");
  if (init == "all_excited") {
    spec.initial_excited.assign(N, true);
  } else if (init == "all_ground") {
    spec.initial_excited.assign(N, false);
  } else if (init.rfind("product:", 0) == 0) {
    for (const auto& item : split_list(init.substr(8))) {
      if (item == "e") spec.initial_excited.push_back(true);
      else if (item == "g") spec.initial_excited.push_back(false);
      else r.error("initial_state", "product entries must be e or g, got '" + item + "'");
    }
    if (static_cast<int>(spec.initial_excited.size()) != N)
      r.error("initial_state", "product state has " + std::to_string(spec.initial_excited.size()) +
                                   " entries, n_atoms is " + std::to_string(N));
    spec.initial_excited.resize(N, false);
  } else {
    r.error("initial_state", "expected all_excited, all_ground or product:e,g,...");
    spec.initial_excited.assign(N, true);
  }

  auto& ev = spec.evolve;
  ev.t_max = r.number("t_max", 20.0);
  ev.dt = r.number("dt", 1e-3);
  if (!(ev.dt > 0.0)) r.error("dt", "must be > 0");
  if (!(ev.t_max > 0.0)) r.error("t_max", "must be > 0");
  else if (!(ev.dt < ev.t_max)) r.error("dt", "must be smaller than t_max");
  ev.record_every = r.integer("record_every", 10);
  ev.check_every = r.integer("check_every", 100);
  ev.retain_states = r.boolean("retain_states", false);
  ev.retain_every = r.integer("retain_every", 10);
  if (ev.record_every < 1) r.error("record_every", "must be >= 1");
  if (ev.check_every < 1) r.error("check_every", "must be >= 1");
  if (ev.retain_every < 1) r.error("retain_every", "must be >= 1");
  if (N >= 2) {
    const auto pair = r.numbers("concurrence_pair");
    if (r.has("concurrence_pair")) {
      if (pair.size() != 2) {
        r.error("concurrence_pair", "expected two atom numbers");
      } else {
        const int i = static_cast<int>(pair[0]), j = static_cast<int>(pair[1]);
        if (i < 1 || j < 1 || i > N || j > N || i == j || pair[0] != i || pair[1] != j)
          r.error("concurrence_pair", "must name two distinct atoms in 1..n_atoms");
        else
          ev.concurrence_pair = {i - 1, j - 1};
      }
    }
  }

  spec.pairing = r.word("cross_pairing", "anomalous", {"anomalous", "literal"}) == "literal"
                     ? CrossPairing::literal
                     : CrossPairing::anomalous;
  spec.collective = r.boolean("collective", true);
  spec.n_max_dense = r.integer("n_max_dense", 4);
  if (spec.n_max_dense < 0 || spec.n_max_dense > kDenseHardCap)
    r.error("n_max_dense", "must be between 0 and " + std::to_string(kDenseHardCap));
  return spec;
}

bec::BogoliubovBath read_bath(Reader& r) {
  bec::BogoliubovBath b;
  b.m = r.number("bec.m", b.m);
  b.mu = r.number("bec.mu", b.mu);
  b.n0 = r.number("bec.n0", b.n0);
  b.L = r.number("bec.L", b.L);
  b.u0 = r.number("bec.u0", b.u0);
  b.T = r.number("bec.T", b.T);
  for (auto [key, v] : {std::pair{"bec.m", b.m}, {"bec.mu", b.mu}, {"bec.n0", b.n0}, {"bec.L", b.L},
                        {"bec.u0", b.u0}, {"bec.T", b.T}})
    if (!(v > 0.0)) r.error(key, "must be > 0");
  return b;
}

std::vector<bec::TweezerSpec> read_tweezers(Reader& r) {
  bec::TweezerSpec base;
  base.V0 = r.number("tweezer.V0", std::numbers::pi / 2.0);
  base.M = r.number("tweezer.M", 2.0);
  base.g = r.number("tweezer.g", 0.18 * 0.02);
  if (!(base.V0 > 0.0)) r.error("tweezer.V0", "must be > 0");
  if (!(base.M > 0.0)) r.error("tweezer.M", "must be > 0");
  if (!(base.g >= 0.0)) r.error("tweezer.g", "must be >= 0");
  const auto ws = r.numbers("tweezers.w");
  if (ws.empty()) r.error("tweezers.w", "at least one waist is required");
  auto xs = r.numbers("tweezers.x");
  if (xs.empty()) xs.assign(ws.size(), 0.0);
  if (xs.size() != ws.size())
    r.error("tweezers.x", "has " + std::to_string(xs.size()) + " entries, tweezers.w has " + std::to_string(ws.size()));
  std::vector<bec::TweezerSpec> out;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    auto t = base;
    t.w = ws[i];
    t.x = i < xs.size() ? xs[i] : 0.0;
    if (!(t.w > 0.0)) r.error("tweezers.w", "waists must be > 0");
    out.push_back(t);
  }
  return out;
}

struct Plan {
  Kind kind = Kind::custom;
  std::vector<RunSpec> runs;
  // counter_wedge: index of the companion run and the global indices of its atoms
  std::vector<int> companion_atoms;
  // bec_design
  bec::BogoliubovBath bath;
  std::vector<bec::TweezerSpec> tweezers;
  std::optional<bec::DetectorModel> model;
};

Plan plan(const Config& config, std::vector<Diagnostic>& diags) {
  Plan p;
  Reader r(config, diags, "");
  const auto version = config.get("schema_version");
  if (!version) r.error("schema_version", "required (current version is " + std::to_string(kSchemaVersion) + ")");
  else if (trim(*version) != std::to_string(kSchemaVersion))
    r.error("schema_version", "unsupported version '" + *version + "', expected " + std::to_string(kSchemaVersion));

  const std::string kind = r.word("scenario", "custom",
                                  {"equal_acceleration_sweep", "mismatch_cases", "counter_wedge", "bec_design", "custom"});
  if (!config.has("scenario")) r.error("scenario", "required");

  if (kind == "equal_acceleration_sweep") {
    p.kind = Kind::equal_acceleration_sweep;
    const auto sweep = r.numbers("sweep_alpha");
    if (sweep.empty()) r.error("sweep_alpha", "required for equal_acceleration_sweep");
    for (double alpha : sweep) {
      Config c = config;
      c.set("alpha_rule", "equal");
      c.set("alpha_value", fmt17(alpha));
      if (!config.has("a_ref")) c.set("a_ref", fmt17(alpha));
      p.runs.push_back(build_spec(c, diags, "alpha_" + short_number(alpha), "alpha=" + short_number(alpha) + ": "));
    }
  } else if (kind == "mismatch_cases") {
    p.kind = Kind::mismatch_cases;
    const auto cases = r.words("cases");
    if (cases.empty()) r.error("cases", "required for mismatch_cases");
    for (const auto& label : cases) {
      if (label.empty() || label.find_first_of("/\\ ") != std::string::npos)
        r.error("cases", "invalid case label '" + label + "'");
      p.runs.push_back(build_spec(config.for_case(label), diags, "case_" + label, "case." + label + "."));
    }
  } else if (kind == "counter_wedge") {
    p.kind = Kind::counter_wedge;
    RunSpec main = build_spec(config, diags, "counter", "");
    std::vector<int> wedge_I;
    bool any_II = false;
    for (std::size_t j = 0; j < main.atoms.size(); ++j) {
      if (main.atoms[j].wedge == Wedge::I) wedge_I.push_back(static_cast<int>(j));
      else any_II = true;
    }
    if (!any_II) r.error("wedges", "counter_wedge needs at least one wedge-II atom");
    if (wedge_I.empty()) r.error("wedges", "counter_wedge needs at least one wedge-I atom");
    RunSpec companion = main;
    companion.label = "wedge_I_only";
    companion.atoms.clear();
    companion.initial_excited.clear();
    companion.rate_options.positions.clear();
    for (int j : wedge_I) {
      companion.atoms.push_back(main.atoms[j]);
      companion.initial_excited.push_back(main.initial_excited[j]);
      if (!main.rate_options.positions.empty()) companion.rate_options.positions.push_back(main.rate_options.positions[j]);
    }
    companion.evolve.concurrence_pair = {0, 1};
    p.companion_atoms = wedge_I;
    p.runs.push_back(std::move(main));
    if (!wedge_I.empty()) p.runs.push_back(std::move(companion));
  } else if (kind == "bec_design") {
    p.kind = Kind::bec_design;
    p.bath = read_bath(r);
    p.tweezers = read_tweezers(r);
    if (r.boolean("simulate", false) && diags.empty()) {
      try {
        p.model = bec::map_to_detector_model(p.bath, p.tweezers, r.number("gamma0", 0.1), r.number("eps_res", 1e-6));
      } catch (const std::exception& e) {
        r.error("tweezers", e.what());
      }
      if (p.model) {
        Config c = config;
        const int n = static_cast<int>(p.model->atoms.size());
        std::string omegas, couplings, positions;
        for (int j = 0; j < n; ++j) {
          const std::string sep = j ? "," : "";
          omegas += sep + fmt17(p.model->atoms[j].omega);
          couplings += sep + fmt17(p.model->atoms[j].g);
          positions += sep + fmt17(p.model->positions[j]);
        }
        c.set("n_atoms", std::to_string(n));
        c.set("alpha_rule", "equal");
        c.set("alpha_value", fmt17(p.model->frame.a));
        c.set("a_ref", fmt17(p.model->frame.a));
        c.set("omega_rule", "explicit");
        c.set("omegas", omegas);
        c.set("couplings", couplings);
        c.set("positions", positions);
        c.set("gamma0", fmt17(p.model->frame.gamma0));
        c.set("eps_res", fmt17(p.model->frame.eps_res));
        p.runs.push_back(build_spec(c, diags, "detector_model", "simulate: "));
      }
    }
  } else {
    p.kind = Kind::custom;
    p.runs.push_back(build_spec(config, diags, "run", ""));
  }
  return p;
}

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string msg = "invalid configuration:";
  for (const auto& d : diags) msg += "\n  " + d.field + ": " + d.message;
  return msg;
}

RunSummary summarize(const RunSpec& spec, const TimeSeries& series) {
  RunSummary s;
  const auto& last = series.records.back();
  s.P_final = last.populations;
  s.P_tot_final = last.P_tot;
  s.C_coh_final = last.C_coh;
  s.R_initial = series.records.front().R_tot;
  s.R_peak = s.R_initial;
  for (const auto& rec : series.records) {
    if (rec.R_tot > s.R_peak) {
      s.R_peak = rec.R_tot;
      s.t_peak = rec.t;
    }
    s.C_coh_peak = std::max(s.C_coh_peak, rec.C_coh);
    s.C_conc_peak = std::max(s.C_conc_peak, rec.C_conc);
  }
  (void)spec;
  return s;
}

void write_summary(std::ostream& out, const Plan& plan, const Outcome& outcome) {
  out << "scenario = " << to_string(plan.kind) << '\n';
  for (const auto& run : outcome.runs) {
    const auto& s = run.summary;
    const std::string p = run.spec.label + ".";
    out << p << "n_atoms = " << run.spec.atoms.size() << '\n';
    for (std::size_t j = 0; j < s.P_final.size(); ++j)
      out << p << "P_" << j + 1 << "_final = " << fmt17(s.P_final[j]) << '\n';
    out << p << "P_tot_final = " << fmt17(s.P_tot_final) << '\n';
    out << p << "R_initial = " << fmt17(s.R_initial) << '\n';
    out << p << "R_peak = " << fmt17(s.R_peak) << '\n';
    out << p << "t_peak = " << fmt17(s.t_peak) << '\n';
    out << p << "C_coh_final = " << fmt17(s.C_coh_final) << '\n';
    out << p << "C_coh_peak = " << fmt17(s.C_coh_peak) << '\n';
    out << p << "C_conc_peak = " << fmt17(s.C_conc_peak) << '\n';
    if (run.spec.atoms.size() > 1 && std::any_of(run.spec.atoms.begin(), run.spec.atoms.end(),
                                                 [](const AtomSpec& a) { return a.wedge == Wedge::II; }))
      out << p << "max_inter_wedge_coherence = " << fmt17(s.max_inter_wedge_coherence) << '\n';
    if (s.zero_multiplicity >= 0) out << p << "zero_multiplicity = " << s.zero_multiplicity << '\n';
  }
  for (const auto& note : outcome.notes) out << note << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& content, Outcome& outcome) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << content;
  if (!f) throw ConfigError("failed writing " + path.string());
  outcome.files.push_back(path);
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

Config Config::for_case(const std::string& label) const {
  Config out;
  const std::string prefix = "case." + label + ".";
  for (const auto& [k, v] : values_)
    if (k.rfind("case.", 0) != 0) out.values_[k] = v;
  for (const auto& [k, v] : values_)
    if (k.rfind(prefix, 0) == 0) out.values_[k.substr(prefix.size())] = v;
  return out;
}

Config parse_config(std::istream& in, const std::string& source) {
  Config config;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(number) + ": empty key");
    if (config.has(key)) throw ConfigError(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
    config.set(key, value);
  }
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open configuration " + path.string());
  return parse_config(f, path.string());
}

std::vector<Diagnostic> validate(const Config& config) {
  std::vector<Diagnostic> diags;
  plan(config, diags);
  return diags;
}

Kind scenario_kind(const Config& config) {
  std::vector<Diagnostic> diags;
  return plan(config, diags).kind;
}

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::equal_acceleration_sweep: return "equal_acceleration_sweep";
    case Kind::mismatch_cases: return "mismatch_cases";
    case Kind::counter_wedge: return "counter_wedge";
    case Kind::bec_design: return "bec_design";
    case Kind::custom: return "custom";
  }
  return "custom";
}

std::vector<RunSpec> expand(const Config& config) {
  std::vector<Diagnostic> diags;
  Plan p = plan(config, diags);
  if (!diags.empty()) throw ConfigError(join_diagnostics(diags));
  return p.runs;
}

Eigen::MatrixXcd initial_state(const RunSpec& spec) {
  std::vector<char> flags(spec.initial_excited.begin(), spec.initial_excited.end());
  return qubit::product_state(std::span<const bool>(reinterpret_cast<const bool*>(flags.data()), flags.size()));
}

Generator make_generator(const RunSpec& spec) {
  RateSet rates = build_rates(spec.frame, spec.atoms, spec.rate_options);
  if (!spec.collective) rates = rates.without_collective_terms();
  return Generator(build_hamiltonian(rates), rates, spec.pairing);
}

RunResult execute(const RunSpec& spec) {
  RunResult result;
  result.spec = spec;
  const Generator G = make_generator(spec);
  EvolveOptions options = spec.evolve;
  if (spec.atoms.size() < 2) options.concurrence_pair = {0, 0};
  double inter = 0.0;
  const bool counter = G.rates().counter_accelerating();
  if (counter) {
    auto user = options.observer;
    options.observer = [&inter, &G, user](double t, const Eigen::MatrixXcd& rho) {
      inter = std::max(inter, inter_wedge_coherence(rho, G.rates()));
      if (user) user(t, rho);
    };
  }
  result.series = evolve(initial_state(spec), G, options);
  result.summary = summarize(spec, result.series);
  result.summary.max_inter_wedge_coherence = inter;
  if (static_cast<int>(spec.atoms.size()) <= spec.n_max_dense) {
    const auto L = build_superoperator(G.hamiltonian(), G.rates(), spec.pairing, spec.n_max_dense);
    result.summary.zero_multiplicity = steady_state_analysis(L, spec.frame.gamma0).zero_multiplicity;
  }
  return result;
}

void write_csv(std::ostream& out, const TimeSeries& series) {
  out << 't';
  for (int j = 1; j <= series.n_atoms; ++j) out << ",P_" << j;
  out << ",P_tot,R_tot,C_coh,C_conc,trace_err,min_eig\n";
  for (const auto& r : series.records) {
    out << fmt17(r.t);
    for (double p : r.populations) out << ',' << fmt17(p);
    out << ',' << fmt17(r.P_tot) << ',' << fmt17(r.R_tot) << ',' << fmt17(r.C_coh) << ',' << fmt17(r.C_conc) << ','
        << fmt17(r.trace_err) << ',' << fmt17(r.min_eig) << '\n';
  }
}

Outcome run(const Config& config, const std::filesystem::path& out_dir, int threads) {
  std::vector<Diagnostic> diags;
  Plan p = plan(config, diags);
  if (!diags.empty()) throw ConfigError(join_diagnostics(diags));

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  Outcome outcome;
  outcome.runs.resize(p.runs.size());
  std::vector<std::exception_ptr> errors(p.runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < p.runs.size(); i = next++) {
      try {
        outcome.runs[i] = execute(p.runs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(p.runs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  if (p.kind == Kind::counter_wedge && outcome.runs.size() == 2) {
    const auto& main = outcome.runs[0].series.records;
    const auto& solo = outcome.runs[1].series.records;
    double dP = 0.0;
    for (std::size_t k = 0; k < std::min(main.size(), solo.size()); ++k)
      for (std::size_t q = 0; q < p.companion_atoms.size(); ++q)
        dP = std::max(dP, std::abs(main[k].populations[p.companion_atoms[q]] - solo[k].populations[q]));
    outcome.notes.push_back("wedge_I_population_max_deviation = " + fmt17(dP));
  }

  if (p.kind == Kind::bec_design) {
    Reader r(config, diags, "");
    const auto& tw = p.tweezers.front();
    std::ostringstream disp, width, coupling, bound;
    const double kh = std::sqrt(p.bath.m * p.bath.mu);
    bec::write_dispersion_csv(disp, p.bath, 1e-3 * kh, 1e2 * kh, r.integer("sweep.points", 200));
    bec::write_width_sweep_csv(width, tw.V0, tw.M, r.integer("sweep.points", 200));
    double a0 = 0.0;
    try {
      a0 = bec::variational_width(tw);
    } catch (const NumericalError& e) {
      throw ConfigError(std::string("tweezer 1: ") + e.what());
    }
    bec::write_coupling_csv(coupling, p.bath, a0, tw.g, 1e-3 * kh, 4.0 / a0, r.integer("sweep.points", 200));
    const int grid = r.integer("report.grid", 20);
    const int disagree = bec::write_bound_state_report(bound, r.number("report.V0_min", 0.1 * tw.V0),
                                                       r.number("report.V0_max", 4.0 * tw.V0),
                                                       r.number("report.w_min", 0.25 * tw.w),
                                                       r.number("report.w_max", 4.0 * tw.w), tw.M, grid);
    write_file(out_dir / "dispersion.csv", disp.str(), outcome);
    write_file(out_dir / "width_sweep.csv", width.str(), outcome);
    write_file(out_dir / "coupling.csv", coupling.str(), outcome);
    write_file(out_dir / "bound_states.csv", bound.str(), outcome);
    const auto [lo, hi] = bec::two_level_window(tw.V0, tw.M);
    outcome.notes.push_back("two_level_window = " + fmt17(lo) + ", " + fmt17(hi));
    outcome.notes.push_back("bound_state_disagreements = " + std::to_string(disagree) + " of " +
                            std::to_string(grid * grid));
    for (std::size_t i = 0; i < p.tweezers.size(); ++i) {
      const std::string label = "tweezer_" + std::to_string(i + 1) + ".";
      if (!bec::in_two_level_window(p.tweezers[i])) {
        outcome.notes.push_back(label + "in_window = false");
        continue;
      }
      const auto lv = bec::two_level(p.tweezers[i]);
      outcome.notes.push_back(label + "a0 = " + fmt17(lv.a0));
      outcome.notes.push_back(label + "Omega = " + fmt17(lv.Omega));
      outcome.notes.push_back(label + "n_b_closed_form = " + std::to_string(lv.n_b.closed_form));
      outcome.notes.push_back(label + "n_b_numeric = " + std::to_string(lv.n_b.numeric));
    }
    if (p.model) {
      outcome.notes.push_back("detector_model.a = " + fmt17(p.model->frame.a));
      for (std::size_t i = 0; i < p.model->atoms.size(); ++i) {
        const std::string label = "detector_model.atom_" + std::to_string(i + 1) + ".";
        outcome.notes.push_back(label + "Omega = " + fmt17(p.model->atoms[i].omega));
        outcome.notes.push_back(label + "k_res = " + fmt17(p.model->k_res[i]));
        outcome.notes.push_back(label + "coupling = " + fmt17(p.model->atoms[i].g));
        outcome.notes.push_back(label + "xi = " + fmt17(p.model->positions[i]));
      }
      for (const auto& w : p.model->warnings) outcome.notes.push_back("warning: " + w);
    }
  }

  for (const auto& result : outcome.runs) {
    std::ostringstream csv;
    write_csv(csv, result.series);
    write_file(out_dir / (result.spec.label + ".csv"), csv.str(), outcome);
  }
  std::ostringstream summary;
  write_summary(summary, p, outcome);
  write_file(out_dir / "summary.txt", summary.str(), outcome);
  return outcome;
}

std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig4", "counter_wedge", "bec_design"}; }

std::filesystem::path preset_path(const std::string& name, const std::filesystem::path& preset_dir) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (available: " + list + ")");
  }
  return preset_dir / (name + ".cfg");
}

}  // namespace rindler::scenario

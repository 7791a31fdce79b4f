#include "bhlr/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "bhlr/error.hpp"
#include "bhlr/parallel.hpp"

namespace bhlr::cli {

const char* const kCsvHeader = "t,R,value,trace_norm,envelope_trace,envelope_expect";

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Walks one JSON object, remembering which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (j_.contains(key)) convert(j_.at(key), at(key), out);
  }

  template <class F>
  void section(const std::string& key, F f) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader r(j_.at(key), at(key));
    f(r);
    r.finish();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
  }

  static void convert(const json& v, const std::string& path, double& out) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    out = v.get<double>();
  }
  static void convert(const json& v, const std::string& path, int& out) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    auto x = v.get<long long>();
    if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(path, "integer out of range");
    out = static_cast<int>(x);
  }
  static void convert(const json& v, const std::string& path, unsigned long long& out) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
      throw ConfigError(path, "expected a nonnegative integer");
    out = v.get<unsigned long long>();
  }
  static void convert(const json& v, const std::string& path, std::size_t& out) {
    unsigned long long x;
    convert(v, path, x);
    out = static_cast<std::size_t>(x);
  }
  static void convert(const json& v, const std::string& path, bool& out) {
    if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
    out = v.get<bool>();
  }
  static void convert(const json& v, const std::string& path, std::string& out) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    out = v.get<std::string>();
  }
  template <class T>
  static void convert(const json& v, const std::string& path, std::vector<T>& out) {
    if (!v.is_array()) throw ConfigError(path, "expected an array");
    out.clear();
    for (std::size_t k = 0; k < v.size(); ++k) {
      T x{};
      convert(v[k], path + "[" + std::to_string(k) + "]", x);
      out.push_back(x);
    }
  }

  const json& raw(const std::string& key) const { return j_.at(key); }
  void mark(const std::string& key) { seen_.insert(key); }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_observable(Reader& r, ObservableConfig& o) {
  r.get("preset", o.preset);
  r.get("site", o.site);
  r.get("cutoff", o.cutoff);
  r.get("phase", o.phase);
}

// "times" is either an explicit array or {start, stop, count, spacing}.
void read_times(Reader& r, std::vector<double>& times) {
  if (!r.has("times")) {
    r.mark("times");
    return;
  }
  const json& v = r.raw("times");
  if (v.is_array()) {
    r.get("times", times);
    return;
  }
  double start = 0.0, stop = 1.0;
  int count = 2;
  std::string spacing = "linear";
  r.section("times", [&](Reader& g) {
    g.get("start", start);
    g.get("stop", stop);
    g.get("count", count);
    g.get("spacing", spacing);
  });
  if (count < 1) throw ConfigError(r.at("times") + ".count", "must be >= 1");
  if (spacing != "linear" && spacing != "geometric")
    throw ConfigError(r.at("times") + ".spacing", "must be linear or geometric");
  if (spacing == "geometric" && !(start > 0.0 && stop > 0.0))
    throw ConfigError(r.at("times") + ".start", "geometric spacing needs positive bounds");
  times.clear();
  for (int k = 0; k < count; ++k) {
    double f = count == 1 ? 0.0 : double(k) / (count - 1);
    times.push_back(spacing == "linear" ? start + (stop - start) * f
                                        : start * std::pow(stop / start, f));
  }
}

ojson observable_json(const ObservableConfig& o) {
  return {{"preset", o.preset}, {"site", o.site}, {"cutoff", o.cutoff}, {"phase", o.phase}};
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string optional_field(const std::optional<double>& x) {
  return x ? format_double(*x) : std::string();
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ojson read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ojson::parse(in);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  r.section("lattice", [&](Reader& s) {
    s.get("L", c.lattice.L);
    s.get("D", c.lattice.D);
  });
  r.section("sector", [&](Reader& s) {
    s.get("kind", c.sector.kind);
    s.get("N", c.sector.N);
    s.get("n_max", c.sector.n_max);
  });
  r.section("model", [&](Reader& s) {
    s.get("J", c.model.J);
    s.get("interaction", c.model.interaction);
    s.get("p", c.model.p);
    s.get("U", c.model.U);
    s.get("mu", c.model.mu);
    s.get("table", c.model.table);
  });
  r.section("state", [&](Reader& s) {
    s.get("preset", c.state.preset);
    s.get("fill", c.state.fill);
    s.get("pattern", c.state.pattern);
    s.get("members", c.state.members);
    s.get("seed", c.state.seed);
  });
  r.section("observables", [&](Reader& s) {
    s.section("O", [&](Reader& o) { read_observable(o, c.O); });
    s.section("Otilde", [&](Reader& o) { read_observable(o, c.Otilde); });
  });
  read_times(r, c.times);
  r.section("tolerances", [&](Reader& s) {
    s.get("krylov_dim", c.tol.krylov_dim);
    s.get("krylov_tolerance", c.tol.krylov_tolerance);
    s.get("dense_threshold", c.tol.dense_threshold);
    s.get("norm_drift", c.tol.norm_drift);
    s.get("energy_drift", c.tol.energy_drift);
    s.get("number_drift", c.tol.number_drift);
    s.get("quadrature", c.tol.quadrature);
    s.get("psd", c.tol.psd);
    s.get("slope", c.tol.slope);
    s.get("floor", c.tol.floor);
  });
  r.get("seed", c.seed);
  r.section("lightcone", [&](Reader& s) {
    auto& l = c.lightcone;
    s.get("distances", l.distances);
    s.get("trace_norm", l.trace_norm);
    s.get("calibrate", l.calibrate);
    s.get("envelope_C", l.envelope_C);
    s.get("fit_t_min", l.fit_t_min);
    s.get("fit_t_max", l.fit_t_max);
    s.get("fit_points", l.fit_points);
    s.get("slope_distances", l.slope_distances);
  });
  r.section("moments", [&](Reader& s) { s.get("q_list", c.moments.q_list); });
  r.section("truncation", [&](Reader& s) {
    auto& t = c.truncation;
    s.get("center", t.center);
    s.get("radius", t.radius);
    s.get("tau", t.tau);
    s.get("qbar", t.qbar);
    s.get("decay_slack", t.decay_slack);
  });
  r.section("duhamel", [&](Reader& s) {
    auto& d = c.duhamel;
    s.get("center", d.center);
    s.get("radius", d.radius);
    s.get("qbar", d.qbar);
    s.get("tau_fractions", d.tau_fractions);
    s.get("taus", d.taus);
  });
  r.section("opineq", [&](Reader& s) {
    auto& o = c.opineq;
    s.get("instances", o.instances);
    s.get("max_sites", o.max_sites);
    s.get("max_m", o.max_m);
    s.get("max_dim", o.max_dim);
    s.get("hop_max_N", o.hop_max_N);
    s.get("markov_states", o.markov_states);
    s.get("markov_L", o.markov_L);
    s.get("markov_N", o.markov_N);
    s.get("markov_q_max", o.markov_q_max);
    s.get("markov_p", o.markov_p);
  });
  r.section("badstate", [&](Reader& s) {
    s.get("R", c.badstate.R);
    s.get("ell", c.badstate.ell);
    s.get("gamma0", c.badstate.gamma0);
  });
  r.section("interp", [&](Reader& s) { s.get("samples", c.interp.samples); });
  r.section("bounds", [&](Reader& s) {
    s.get("t", c.bounds.t);
    s.get("R", c.bounds.R);
    s.get("r0", c.bounds.r0);
  });
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

ojson config_to_json(const ExperimentConfig& c) {
  ojson j;
  j["lattice"] = {{"L", c.lattice.L}, {"D", c.lattice.D}};
  j["sector"] = {{"kind", c.sector.kind}, {"N", c.sector.N}, {"n_max", c.sector.n_max}};
  j["model"] = {{"J", c.model.J},   {"interaction", c.model.interaction},
                {"p", c.model.p},   {"U", c.model.U},
                {"mu", c.model.mu}, {"table", c.model.table}};
  j["state"] = {{"preset", c.state.preset}, {"fill", c.state.fill},
                {"pattern", c.state.pattern}, {"members", c.state.members},
                {"seed", c.state.seed}};
  j["observables"] = {{"O", observable_json(c.O)}, {"Otilde", observable_json(c.Otilde)}};
  j["times"] = c.times;
  j["tolerances"] = {{"krylov_dim", c.tol.krylov_dim},
                     {"krylov_tolerance", c.tol.krylov_tolerance},
                     {"dense_threshold", c.tol.dense_threshold},
                     {"norm_drift", c.tol.norm_drift},
                     {"energy_drift", c.tol.energy_drift},
                     {"number_drift", c.tol.number_drift},
                     {"quadrature", c.tol.quadrature},
                     {"psd", c.tol.psd},
                     {"slope", c.tol.slope},
                     {"floor", c.tol.floor}};
  j["seed"] = c.seed;
  const auto& l = c.lightcone;
  j["lightcone"] = {{"distances", l.distances},   {"trace_norm", l.trace_norm},
                    {"calibrate", l.calibrate},   {"envelope_C", l.envelope_C},
                    {"fit_t_min", l.fit_t_min},   {"fit_t_max", l.fit_t_max},
                    {"fit_points", l.fit_points}, {"slope_distances", l.slope_distances}};
  j["moments"] = {{"q_list", c.moments.q_list}};
  const auto& t = c.truncation;
  j["truncation"] = {{"center", t.center}, {"radius", t.radius}, {"tau", t.tau},
                     {"qbar", t.qbar},     {"decay_slack", t.decay_slack}};
  const auto& d = c.duhamel;
  j["duhamel"] = {{"center", d.center},
                  {"radius", d.radius},
                  {"qbar", d.qbar},
                  {"tau_fractions", d.tau_fractions},
                  {"taus", d.taus}};
  const auto& o = c.opineq;
  j["opineq"] = {{"instances", o.instances},       {"max_sites", o.max_sites},
                 {"max_m", o.max_m},               {"max_dim", o.max_dim},
                 {"hop_max_N", o.hop_max_N},       {"markov_states", o.markov_states},
                 {"markov_L", o.markov_L},         {"markov_N", o.markov_N},
                 {"markov_q_max", o.markov_q_max}, {"markov_p", o.markov_p}};
  j["badstate"] = {{"R", c.badstate.R}, {"ell", c.badstate.ell}, {"gamma0", c.badstate.gamma0}};
  j["interp"] = {{"samples", c.interp.samples}};
  j["bounds"] = {{"t", c.bounds.t}, {"R", c.bounds.R}, {"r0", c.bounds.r0}};
  return j;
}

void emit_csv(const std::vector<ScanRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("no records to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kCsvHeader << "\n";
  for (const auto& r : records)
    out << format_double(r.t) << ',' << r.R << ',' << format_double(r.value) << ','
        << optional_field(r.trace_norm) << ',' << optional_field(r.envelope_trace) << ','
        << optional_field(r.envelope_expect) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<ScanRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error(path + ": unexpected CSV header");
  std::vector<ScanRecord> out;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw std::runtime_error(path + ": expected 6 fields in '" + line + "'");
    auto opt = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::strtod(s.c_str(), nullptr);
    };
    ScanRecord r{};
    r.t = std::strtod(f[0].c_str(), nullptr);
    r.R = std::stoi(f[1]);
    r.value = std::strtod(f[2].c_str(), nullptr);
    r.trace_norm = opt(f[3]);
    r.envelope_trace = opt(f[4]);
    r.envelope_expect = opt(f[5]);
    out.push_back(r);
  }
  return out;
}

void emit_json(const ojson& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

int run(int argc, char** argv) {
  CLI::App app{"Bose-Hubbard light-cone audits"};
  app.set_version_flag("--version", BHLR_VERSION);
  app.require_subcommand(1);
  std::string out_dir;
  int threads = 0;
  long long seed = -1;
  long long dense = -1;
  bool quiet = false;
  app.add_option("--out", out_dir, "output directory (overrides BHLR_OUTPUT_DIR)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "override the config seeds")->check(CLI::NonNegativeNumber);
  app.add_option("--dense-threshold", dense, "largest dimension for dense linear algebra")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "do not print the report");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"lightcone", "commutator scan with slope fits and envelope calibration"},
      {"moments", "time-uniform moment bound for translation-invariant states"},
      {"truncation", "error of the truncated dynamics against qbar"},
      {"duhamel", "Duhamel inequalities in trace and expectation form"},
      {"opineq", "operator inequalities, hopping bound and Markov tails"},
      {"badstate", "translation-invariant state with a heavy occupation tail"},
      {"interp", "Lyapunov interpolation of occupation moments"},
      {"bounds", "evaluator table for the analytic bounds"}};
  std::string config_path;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "JSON config")->required();
    sub->fallthrough();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  std::string command = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (seed >= 0) cfg.seed = cfg.state.seed = static_cast<unsigned long long>(seed);
    if (dense > 0) cfg.tol.dense_threshold = static_cast<std::size_t>(dense);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (threads > 0) set_worker_count(threads);

  if (out_dir.empty()) {
    const char* env = std::getenv("BHLR_OUTPUT_DIR");
    out_dir = env && *env ? env : "bhlr-output";
  }
  std::string started = utc_now();
  Report rep;
  try {
    if (command == "lightcone") rep = lightcone_audit(cfg);
    else if (command == "moments") rep = moment_conservation_audit(cfg);
    else if (command == "truncation") rep = truncation_error_audit(cfg);
    else if (command == "duhamel") rep = duhamel_inequality_audit(cfg);
    else if (command == "opineq") rep = operator_inequality_audit(cfg);
    else if (command == "badstate") rep = badstate_audit(cfg);
    else if (command == "interp") rep = interpolation_audit(cfg);
    else rep = bounds_table(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SupportError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConstraintError& e) {
    std::cerr << "precondition not met: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  fs::create_directories(out_dir);
  std::vector<std::string> outputs;
  std::string report_path = (fs::path(out_dir) / (command + ".json")).string();
  emit_json(rep.to_json(), report_path);
  outputs.push_back(report_path);
  if (!rep.records.empty()) {
    std::string csv = (fs::path(out_dir) / (command + ".csv")).string();
    emit_csv(rep.records, csv);
    outputs.push_back(csv);
  }

  ojson manifest;
  manifest["version"] = BHLR_VERSION;
  manifest["command"] = command;
  manifest["config_path"] = config_path;
  manifest["config"] = config_to_json(cfg);
  manifest["started"] = started;
  manifest["finished"] = utc_now();
  manifest["threads"] = worker_count();
  manifest["results"] = {{command, rep.pass() ? "PASS" : "FAIL"}};
  manifest["outputs"] = outputs;
  std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
  emit_json(manifest, manifest_path);

  // Every referenced output must parse back.
  for (const auto& p : outputs) {
    if (p.size() > 4 && p.substr(p.size() - 4) == ".csv")
      read_csv(p);
    else
      read_json_file(p);
  }
  read_json_file(manifest_path);

  if (!quiet) std::cout << rep.text();
  return rep.pass() ? 0 : 1;
}

}  // namespace bhlr::cli

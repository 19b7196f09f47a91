// roughquant command-line interface.
//
//   roughquant gaussian-grids --n-max 100 --out grids.csv
//   roughquant allocate --table1
//   roughquant quantizer --N 10 --H 0.1 --variant truncated --T 0.7
//   roughquant price --scenario 2 --N 1000 --paths 100000
//   roughquant benchmark --T 0.25 --budgets 10,100,1000
//
// Settings resolve as flags > --config JSON file > built-in defaults. Errors
// are reported as a JSON object on stderr with a nonzero exit code.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "roughquant/roughquant.hpp"

namespace rq = roughquant;
using nlohmann::json;

namespace {

enum class Type { Real, Count, Text, IntList, Flag };

struct Key {
  const char* flag;
  const char* key;
  Type type;
  const char* help;
};

// Every setting, its flag and its key in the config file.
const std::vector<Key> kKeys{
    {"--N", "N", Type::Count, "Trajectory budget N"},
    {"--H", "H", Type::Real, "Hurst index in (0, 1/2]"},
    {"--eta", "eta", Type::Real, "Vol-of-vol, eta parametrisation"},
    {"--nu", "nu", Type::Real, "Vol-of-vol, nu parametrisation"},
    {"--gamma", "gamma", Type::Real, "Vol-of-vol, gamma parametrisation"},
    {"--T", "T", Type::Real, "Maturity in years (window) or cut point (truncated)"},
    {"--delta", "delta", Type::Real, "VIX window length in years"},
    {"--scenario", "scenario", Type::Count, "Forward variance scenario 1, 2 or 3"},
    {"--grid-size", "grid_size", Type::Count, "Time grid points"},
    {"--grid-kind", "grid_kind", Type::Text, "Pricing grid: graded or uniform"},
    {"--paths", "paths", Type::Count, "Monte Carlo paths"},
    {"--seed", "seed", Type::Count, "Monte Carlo seed"},
    {"--mode", "mode", Type::Text, "optimized, asymptotic, floor-log, floor-log-1 or floor-log-2"},
    {"--variant", "variant", Type::Text, "Kernel variant: full, truncated or window"},
    {"--format", "format", Type::Text, "Output format: csv or json"},
    {"--out", "out", Type::Text, "Output file (default stdout)"},
    {"--threads", "threads", Type::Count, "Worker threads"},
    {"--n-max", "n_max", Type::Count, "Largest Gaussian grid size"},
    {"--maturities", "maturities", Type::IntList, "Maturities in months, comma separated"},
    {"--budgets", "budgets", Type::IntList, "Budgets N for the benchmark, comma separated"},
    {"--payoff", "payoff", Type::Text, "future, call or put"},
    {"--strike", "strike", Type::Real, "Option strike"},
    {"--table1", "table1", Type::Flag, "Sweep N = 10..1e6 with the optimized allocation"},
    {"--table2", "table2", Type::Flag, "Sweep N = 10..1e6 with a rate-optimal allocation"},
    {"--no-mc", "no_mc", Type::Flag, "Skip the Monte Carlo benchmark"},
};

json defaults() {
  return {{"N", 1000},
          {"H", 0.1},
          {"eta", 1.9},
          {"T", 0.25},
          {"delta", 30.0 / 365.0},
          {"scenario", 1},
          {"grid_size", 300},
          {"grid_kind", "graded"},
          {"paths", 100000},
          {"seed", 20240101},
          {"mode", "optimized"},
          {"variant", "full"},
          {"format", "csv"},
          {"out", ""},
          {"threads", 1},
          {"n_max", 100},
          {"maturities", {1, 2, 3, 6, 9, 12}},
          {"budgets", {10, 100, 1000}},
          {"payoff", "future"},
          {"strike", 0.0},
          {"table1", false},
          {"table2", false},
          {"no_mc", false}};
}

[[noreturn]] void bad(const std::string& what) { rq::fail(rq::ErrorKind::InvalidParams, what); }

json parse_value(const Key& k, const std::string& s) {
  try {
    std::size_t used = 0;
    switch (k.type) {
      case Type::Real: {
        const double v = std::stod(s, &used);
        if (used != s.size()) break;
        return v;
      }
      case Type::Count: {
        if (!s.empty() && s[0] == '-') break;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) break;
        return v;
      }
      case Type::IntList: {
        json a = json::array();
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const long long v = std::stoll(item, &used);
          if (used != item.size()) bad(std::string(k.flag) + ": bad list entry '" + item + "'");
          a.push_back(v);
        }
        return a;
      }
      case Type::Text: return s;
      case Type::Flag: return true;
    }
  } catch (const std::logic_error&) {
  }
  bad(std::string(k.flag) + ": cannot parse '" + s + "'");
}

// Later layers win; a layer that names one vol-of-vol parametrisation
// replaces whichever one the earlier layers set.
void overlay(json& acc, const json& layer) {
  const bool vol = layer.contains("eta") || layer.contains("nu") || layer.contains("gamma");
  if (vol) {
    int count = 0;
    for (const char* v : {"eta", "nu", "gamma"}) count += layer.contains(v) ? 1 : 0;
    if (count > 1) bad("give only one of eta, nu, gamma");
    for (const char* v : {"eta", "nu", "gamma"}) acc.erase(v);
  }
  for (const auto& [k, v] : layer.items()) acc[k] = v;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) rq::fail(rq::ErrorKind::Io, "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    bad("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) bad("config file must hold a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const Key& key : kKeys) known = known || k == key.key;
    if (!known) bad("config file: unknown key '" + k + "'");
  }
  return j;
}

struct Settings {
  json resolved;
  std::uint64_t N = 0;
  double H = 0.0;
  rq::VolOfVol vol;
  double T = 0.0;
  double delta = 0.0;
  int scenario = 1;
  std::size_t grid_size = 0;
  rq::TimeGridKind grid_kind = rq::TimeGridKind::Graded;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  std::string mode;
  std::string variant;
  std::string format;
  std::string out;
  unsigned threads = 1;
  std::size_t n_max = 0;
  std::vector<int> maturities;
  std::vector<std::uint64_t> budgets;
  std::string payoff;
  double strike = 0.0;
  bool table1 = false;
  bool table2 = false;
  bool no_mc = false;
};

Settings materialize(const json& j) {
  Settings s;
  s.resolved = j;
  try {
    s.N = j.at("N").get<std::uint64_t>();
    s.H = j.at("H").get<double>();
    if (j.contains("nu")) {
      s.vol = rq::VolOfVol::nu(j.at("nu").get<double>());
    } else if (j.contains("gamma")) {
      s.vol = rq::VolOfVol::gamma(j.at("gamma").get<double>());
    } else {
      s.vol = rq::VolOfVol::eta(j.at("eta").get<double>());
    }
    s.T = j.at("T").get<double>();
    s.delta = j.at("delta").get<double>();
    s.scenario = j.at("scenario").get<int>();
    s.grid_size = j.at("grid_size").get<std::size_t>();
    const auto gk = j.at("grid_kind").get<std::string>();
    if (gk != "graded" && gk != "uniform") bad("grid_kind must be graded or uniform");
    s.grid_kind = gk == "graded" ? rq::TimeGridKind::Graded : rq::TimeGridKind::Uniform;
    s.paths = j.at("paths").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.mode = j.at("mode").get<std::string>();
    s.variant = j.at("variant").get<std::string>();
    s.format = j.at("format").get<std::string>();
    s.out = j.at("out").get<std::string>();
    s.threads = j.at("threads").get<unsigned>();
    s.n_max = j.at("n_max").get<std::size_t>();
    s.maturities = j.at("maturities").get<std::vector<int>>();
    s.budgets = j.at("budgets").get<std::vector<std::uint64_t>>();
    s.payoff = j.at("payoff").get<std::string>();
    s.strike = j.at("strike").get<double>();
    s.table1 = j.at("table1").get<bool>();
    s.table2 = j.at("table2").get<bool>();
    s.no_mc = j.at("no_mc").get<bool>();
  } catch (const json::exception& e) {
    bad(std::string("bad setting: ") + e.what());
  }
  if (s.format != "csv" && s.format != "json") bad("format must be csv or json");
  if (s.threads == 0) s.threads = 1;
  return s;
}

// ---------------------------------------------------------------------------
// Shared helpers

std::optional<rq::RateMode> rate_mode(const std::string& mode) {
  if (mode == "optimized") return std::nullopt;
  if (mode == "asymptotic") return rq::RateMode::Asymptotic;
  if (mode == "floor-log") return rq::RateMode::FloorLog;
  if (mode == "floor-log-1") return rq::RateMode::FloorLogMinus1;
  if (mode == "floor-log-2") return rq::RateMode::FloorLogMinus2;
  bad("unknown mode '" + mode + "'");
}

rq::KernelSpec kernel_of(const Settings& s) {
  rq::KernelSpec k;
  if (s.variant == "full") {
    k = rq::KernelSpec::rl_full(s.H);
  } else if (s.variant == "truncated") {
    k = rq::KernelSpec::rl_truncated(s.H, s.T);
  } else if (s.variant == "window") {
    k = rq::KernelSpec::rl_window(s.H, s.T, s.delta);
  } else {
    bad("variant must be full, truncated or window");
  }
  k.validate();
  return k;
}

rq::Allocation allocation_of(std::uint64_t N, const Settings& s, const rq::KernelSpec& k) {
  if (const auto rm = rate_mode(s.mode)) return rq::rate_optimal_allocation(N, s.H, *rm);
  return rq::optimize_allocation(N, k);
}

rq::PricingConfig pricing_of(const Settings& s) {
  rq::PricingConfig c;
  c.hurst = s.H;
  c.vol = s.vol;
  c.maturity = s.T;
  c.delta = s.delta;
  c.curve = rq::ForwardCurve::scenario(s.scenario);
  c.budget = s.N;
  c.grid_size = s.grid_size;
  c.grid_kind = s.grid_kind;
  if (const auto rm = rate_mode(s.mode)) {
    c.allocation_mode = rq::AllocationMode::RateOptimal;
    c.rate_mode = *rm;
  }
  c.validate();
  return c;
}

rq::McConfig mc_of(const Settings& s) {
  rq::McConfig m;
  m.paths = s.paths;
  m.grid_size = s.grid_size;
  m.seed = s.seed;
  m.threads = s.threads;
  m.validate();
  return m;
}

std::string dashed(const rq::Allocation& a) {
  std::string out;
  for (std::size_t i = 0; i < a.d.size(); ++i) out += (i ? "-" : "") + std::to_string(a.d[i]);
  return out;
}

std::string num(double v) { return rq::detail::format_double(v); }

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Output {
  std::string csv;
  json doc;
  bool uses_seed = false;
};

void emit(const std::string& command, const Settings& s, Output o) {
  json manifest{{"command", command},
                {"config", s.resolved},
                {"version", rq::kVersion},
                {"timestamp", utc_now()},
                {"seeds", o.uses_seed ? json::array({s.seed}) : json::array()},
                {"outputs", s.out.empty() ? json::array() : json::array({s.out})}};
  std::string text;
  if (s.format == "json") {
    o.doc["manifest"] = manifest;
    text = o.doc.dump(2) + "\n";
  } else {
    text = o.csv;
  }
  if (s.out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(s.out, std::ios::binary);
  if (!f) rq::fail(rq::ErrorKind::Io, "cannot write " + s.out);
  f << text;
  if (!f) rq::fail(rq::ErrorKind::Io, "write failed for " + s.out);
  if (s.format == "csv") {
    const std::string side = s.out + ".manifest.json";
    std::ofstream m(side);
    if (!m) rq::fail(rq::ErrorKind::Io, "cannot write " + side);
    m << manifest.dump(2) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Commands

Output cmd_gaussian_grids(const Settings& s) {
  if (s.n_max < 1 || s.n_max > 6000) bad("n_max must lie in 1..6000");
  std::vector<std::shared_ptr<const rq::QuantizerGrid1D>> held;
  std::vector<const rq::QuantizerGrid1D*> grids;
  for (std::size_t n = 1; n <= s.n_max; ++n) {
    held.push_back(rq::GridCache::global().get(n));
    grids.push_back(held.back().get());
  }
  Output o;
  std::ostringstream os;
  rq::write_grids_csv(os, grids);
  o.csv = os.str();
  json a = json::array();
  for (const auto* g : grids) {
    a.push_back({{"n", g->size}, {"points", g->points}, {"probabilities", g->probabilities},
                 {"distortion", g->distortion}});
  }
  o.doc = {{"grids", a}};
  return o;
}

Output cmd_allocate(Settings s) {
  std::vector<std::uint64_t> Ns{s.N};
  if (s.table1 && s.table2) bad("choose one of --table1 and --table2");
  if (s.table1 || s.table2) Ns = {10, 100, 1000, 10000, 100000, 1000000};
  if (s.table1) s.mode = "optimized";
  if (s.table2 && s.mode == "optimized") s.mode = "floor-log";
  if (s.table1 || s.table2) s.variant = "full";
  const rq::KernelSpec k = kernel_of(s);
  const bool rate = rate_mode(s.mode).has_value();

  std::ostringstream os;
  os << "N,mode,m,d,N_traj,A,error_sq" << (rate ? ",relative_error" : "") << "\n";
  json rows = json::array();
  for (std::uint64_t N : Ns) {
    rq::Allocation a;
    try {
      a = allocation_of(N, s, k);
    } catch (const rq::Error& e) {
      // The shorter rate variants are empty for small N; tables skip those rows.
      if (e.kind() != rq::ErrorKind::InvalidBudget || Ns.size() == 1) throw;
      continue;
    }
    const double A = rq::allocation_objective(a, k);
    const double err = rq::quantization_error_sq_exact(a, k);
    json row{{"N", N}, {"mode", s.mode}, {"m", a.m}, {"d", a.d}, {"N_traj", a.trajectories()},
             {"A", A}, {"error_sq", err}};
    os << N << ',' << s.mode << ',' << a.m << ',' << dashed(a) << ',' << a.trajectories() << ',' << num(A)
       << ',' << num(err);
    if (rate) {
      // Relative gap of the L2 errors against the optimized allocation.
      const double best = rq::quantization_error_sq_exact(rq::optimize_allocation(N, k), k);
      const double rel = (std::sqrt(err) - std::sqrt(best)) / std::sqrt(best);
      row["relative_error"] = rel;
      os << ',' << num(rel);
    }
    os << '\n';
    rows.push_back(row);
  }
  Output o;
  o.csv = os.str();
  o.doc = {{"rows", rows}};
  return o;
}

Output cmd_quantizer(const Settings& s) {
  const rq::KernelSpec k = kernel_of(s);
  const rq::Allocation a = allocation_of(s.N, s, k);
  rq::BuildOptions opt;
  opt.threads = s.threads;
  const auto q = rq::build_quantizer(a, k, rq::uniform_time_grid(k, s.grid_size), opt);
  const auto mo = rq::weighted_moments(q);
  double worst = 0.0;
  for (double v : mo.mean) worst = std::max(worst, std::abs(v));

  Output o;
  std::ostringstream os;
  rq::write_trajectories_csv(os, q);
  o.csv = os.str();
  json traj = json::array();
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::vector<std::uint32_t> idx(q.multi_index(i), q.multi_index(i) + a.m);
    for (auto& v : idx) ++v;
    traj.push_back({{"probability", q.probabilities[i]},
                    {"index", idx},
                    {"values", std::vector<double>(q.trajectory(i), q.trajectory(i) + q.grid_size())}});
  }
  o.doc = {{"allocation", {{"m", a.m}, {"d", a.d}, {"N_traj", a.trajectories()}}},
           {"time_grid", q.time_grid},
           {"trajectories", traj},
           {"max_abs_weighted_mean", worst}};
  return o;
}

rq::Payoff payoff_of(const Settings& s) {
  if (s.payoff == "call") return rq::Payoff::call(s.strike);
  if (s.payoff == "put") return rq::Payoff::put(s.strike);
  if (s.payoff != "future") bad("payoff must be future, call or put");
  return rq::Payoff::call(0.0);
}

Output cmd_price(const Settings& s) {
  rq::PricingConfig c = pricing_of(s);
  const rq::Payoff payoff = payoff_of(s);
  const bool future = s.payoff == "future";
  if (!future && !s.no_mc) bad("the Monte Carlo benchmark prices futures only; add --no-mc for options");
  const rq::McConfig mc = s.no_mc ? rq::McConfig{} : mc_of(s);

  Output o;
  o.uses_seed = !s.no_mc;
  std::ostringstream os;
  json rows = json::array();
  int violations = 0;
  std::vector<rq::MaturityPrice> table;
  if (!s.no_mc) os << "maturity_months,quantized,monte_carlo,mc_standard_error,below_benchmark\n";
  for (int mo : s.maturities) {
    if (mo <= 0) bad("maturities must be positive");
    c.maturity = mo / 12.0;
    const rq::PriceReport q = future ? rq::vix_future_price(c) : rq::vix_option_price(c, payoff);
    json row{{"maturity_months", mo}, {"quantization", rq::to_json(q)}};
    if (s.no_mc) {
      table.push_back({mo, q.price});
    } else {
      const rq::PriceReport m = rq::mc_vix_future_price(c, mc);
      const bool ok = q.price <= m.price + 3.0 * m.standard_error;
      if (!ok) {
        ++violations;
        std::cerr << json{{"warning", "quantized price above the Monte Carlo benchmark + 3 SE"},
                          {"maturity_months", mo},
                          {"quantized", q.price},
                          {"monte_carlo", m.price},
                          {"standard_error", m.standard_error}}
                         .dump()
                  << "\n";
      }
      row["monte_carlo"] = rq::to_json(m);
      row["below_benchmark"] = ok;
      os << mo << ',' << num(q.price) << ',' << num(m.price) << ',' << num(m.standard_error) << ','
         << (ok ? 1 : 0) << '\n';
    }
    rows.push_back(row);
  }
  if (s.no_mc) rq::write_maturity_csv(os, table);
  o.csv = os.str();
  o.doc = {{"rows", rows}};
  if (!s.no_mc) o.doc["violations"] = violations;
  return o;
}

Output cmd_benchmark(const Settings& s) {
  rq::PricingConfig c = pricing_of(s);
  const rq::McConfig mc = mc_of(s);
  std::vector<rq::PriceReport> reports;
  for (std::uint64_t N : s.budgets) {
    c.budget = N;
    reports.push_back(rq::vix_future_price(c));
  }
  reports.push_back(rq::mc_vix_future_price(c, mc));

  Output o;
  o.uses_seed = true;
  std::ostringstream os;
  os << "method,n_trajectories,price,standard_error,error_metric,runtime_ms,allocation\n";
  json a = json::array();
  for (const auto& r : reports) {
    os << r.method << ',' << r.n_trajectories << ',' << num(r.price) << ',' << num(r.standard_error) << ','
       << num(r.error_metric) << ',' << num(r.runtime_ms) << ',' << r.allocation << '\n';
    a.push_back(rq::to_json(r));
  }
  o.csv = os.str();
  o.doc = {{"reports", a}};
  return o;
}

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Product functional quantization of Riemann-Liouville processes and VIX pricing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rq::kVersion));

  struct Bound {
    const Key* key;
    std::string text;
    std::vector<CLI::Option*> opts;
  };
  std::vector<Bound> bound(kKeys.size());
  std::string config_path;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"gaussian-grids", "Optimal quadratic quantizers of N(0,1) for n = 1..n_max"},
      {"allocate", "Optimized or rate-optimal allocation (m, d) for a budget N"},
      {"quantizer", "Trajectories and weights of a product functional quantizer"},
      {"price", "Quantized VIX prices across maturities, against Monte Carlo"},
      {"benchmark", "Quantized prices over several budgets next to one Monte Carlo run"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON file with settings (flags take precedence)");
    for (std::size_t i = 0; i < kKeys.size(); ++i) {
      const Key& k = kKeys[i];
      bound[i].key = &k;
      if (k.type == Type::Flag) {
        bound[i].opts.push_back(sub->add_flag(k.flag, k.help));
      } else {
        bound[i].opts.push_back(sub->add_option(k.flag, bound[i].text, k.help));
      }
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("Usage", e.what());
    return 2;
  }

  try {
    std::string command;
    for (auto* sub : subs) {
      if (sub->parsed()) command = sub->get_name();
    }
    json flags = json::object();
    for (const Bound& b : bound) {
      bool given = false;
      for (auto* opt : b.opts) given = given || opt->count() > 0;
      if (given) flags[b.key->key] = parse_value(*b.key, b.text);
    }
    json resolved = defaults();
    if (!config_path.empty()) overlay(resolved, load_config(config_path));
    overlay(resolved, flags);
    const Settings s = materialize(resolved);

    Output out;
    if (command == "gaussian-grids") out = cmd_gaussian_grids(s);
    if (command == "allocate") out = cmd_allocate(s);
    if (command == "quantizer") out = cmd_quantizer(s);
    if (command == "price") out = cmd_price(s);
    if (command == "benchmark") out = cmd_benchmark(s);
    emit(command, s, std::move(out));
  } catch (const rq::Error& e) {
    report_error(std::string(rq::to_string(e.kind())), e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("Internal", e.what());
    return 1;
  }
  return 0;
}

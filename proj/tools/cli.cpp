#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "commcost/adaptive.hpp"
#include "commcost/commodel.hpp"
#include "commcost/config.hpp"
#include "commcost/csv.hpp"
#include "commcost/errors.hpp"
#include "commcost/estimator.hpp"
#include "commcost/netprobe.hpp"
#include "commcost/optimizer.hpp"
#include "commcost/rng.hpp"

namespace commcost::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = ".";
  std::string config_path;
};

/// Reproducibility record written next to every output set.
class Manifest {
 public:
  Manifest(std::string subcommand, const GlobalOptions& global) : subcommand_(std::move(subcommand)) {
    doc_["tool"] = "commcost";
    doc_["version"] = kToolVersion;
    doc_["subcommand"] = subcommand_;
    doc_["seed"] = global.seed;
    doc_["config"] = nlohmann::json::object();
    doc_["outputs"] = nlohmann::json::array();
  }

  template <class T>
  void set(const std::string& key, const T& value) {
    doc_["config"][key] = value;
  }
  void output(const fs::path& p) { doc_["outputs"].push_back(p.filename().string()); }
  void summary(const std::string& key, const nlohmann::json& value) { doc_["summary"][key] = value; }

  void write(const fs::path& dir) const {
    std::ofstream f(dir / (subcommand_ + ".manifest.json"));
    f << doc_.dump(2) << '\n';
  }

 private:
  std::string subcommand_;
  nlohmann::json doc_;
};

fs::path prepare_out(const GlobalOptions& g) {
  fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", g.out_dir, ec.message()));
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", p.string()));
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot open '{}'", path));
  return f;
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& hp) {
  const auto colon = hp.rfind(':');
  if (colon == std::string::npos) throw ConfigError(fmt::format("expected host:port, got '{}'", hp));
  const auto port = parse_uint(hp.substr(colon + 1));
  if (port == 0 || port > 65535) throw ConfigError(fmt::format("bad port in '{}'", hp));
  return {hp.substr(0, colon), static_cast<std::uint16_t>(port)};
}

/// Explicit sizes, or a geometric grid between min and max.
std::vector<double> size_list(const std::vector<double>& explicit_sizes, double lo, double hi, std::size_t points) {
  if (!explicit_sizes.empty()) return explicit_sizes;
  return geometric_grid(lo, hi, points);
}

// ---- simulate ----------------------------------------------------------------

struct SimulateOptions {
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
};

int cmd_simulate(const GlobalOptions& g, const SimulateOptions& opt) {
  KeyValues kv;
  if (!g.config_path.empty()) {
    if (!fs::exists(g.config_path)) throw ConfigError(fmt::format("config file '{}' not found", g.config_path));
    auto in = open_in(g.config_path);
    kv = parse_key_values(in);
  }
  for (const auto& [k, v] : opt.flags) kv[k] = v;
  for (const auto& s : opt.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", s));
    kv[std::string(trim(s.substr(0, eq)))] = std::string(trim(s.substr(eq + 1)));
  }
  if (g.seed_given) kv["seed"] = std::to_string(g.seed);

  const auto settings = resolve_simulation(kv);
  const auto problem = settings.make_problem();
  const auto trace = run_compressed_gd(problem, settings.sim);

  const auto dir = prepare_out(g);
  const auto trace_path = dir / "trace.csv";
  {
    auto f = open_out(trace_path);
    write_trace_csv(f, trace);
  }
  const auto& last = trace.last();
  fmt::print("final_objective={} wall_clock_s={} uplink_bits={} downlink_bits={} uplink_time_s={} downlink_time_s={}\n",
             last.objective, last.wall_clock_s, last.uplink_bits, last.downlink_bits, last.uplink_time_s,
             last.downlink_time_s);

  GlobalOptions with_seed = g;
  with_seed.seed = settings.sim.seed;
  Manifest m("simulate", with_seed);
  for (const auto& [k, v] : settings.resolved) m.set(k, v);
  m.output(trace_path);
  m.summary("final_objective", last.objective);
  m.summary("wall_clock_s", last.wall_clock_s);
  m.summary("uplink_bits", last.uplink_bits);
  m.summary("downlink_bits", last.downlink_bits);
  m.summary("uplink_time_s", last.uplink_time_s);
  m.summary("downlink_time_s", last.downlink_time_s);
  m.summary("optimum_objective", closed_form_optimum(problem).value);
  m.write(dir);
  return kExitOk;
}

// ---- regions -----------------------------------------------------------------

struct RegionsOptions {
  double alpha = 1e-4;
  double beta = 1e-9;
  double rho = kDefaultDominance;
  std::vector<double> sizes;  // bytes
  double min_size = 1;
  double max_size = 1e9;
  std::size_t points = 40;
  std::optional<double> source_size;  // bytes
  std::vector<double> omegas;
  double omega_max = 1e6;
  std::size_t omega_points = 61;
};

int cmd_regions(const GlobalOptions& g, const RegionsOptions& opt) {
  const TimeModelParams params(opt.alpha, opt.beta);
  const auto sizes = size_list(opt.sizes, opt.min_size, opt.max_size, opt.points);
  const auto dir = prepare_out(g);

  const auto regions_path = dir / "regions.csv";
  {
    auto f = open_out(regions_path);
    f << "size_bytes,size_bits,expected_time_s,alpha_share,region\n";
    for (double bytes : sizes) {
      const double bits = bytes * 8.0;
      const double t = expected_time(params, bits);
      fmt::print(f, "{},{},{},{},{}\n", bytes, bits, t, params.alpha() / t, to_string(classify_region(params, bits, opt.rho)));
    }
  }

  const double source_bits = opt.source_size.value_or(*std::max_element(sizes.begin(), sizes.end())) * 8.0;
  auto omegas = opt.omegas.empty() ? geometric_grid(1.0, opt.omega_max, opt.omega_points) : opt.omegas;
  std::sort(omegas.begin(), omegas.end());
  const auto report = speedup_curve(params, source_bits, omegas, opt.rho);
  const auto speedup_path = dir / "speedup.csv";
  {
    auto f = open_out(speedup_path);
    write_speedup_csv(f, report);
  }
  const double plateau = params.alpha() > 0 ? expected_time(params, source_bits) / params.alpha() : INFINITY;
  fmt::print("source_bits={} region={} max_speedup={} plateau={}\n", source_bits,
             to_string(classify_region(params, source_bits, opt.rho)), report.rows.back().speedup, plateau);

  Manifest m("regions", g);
  m.set("alpha", opt.alpha);
  m.set("beta", opt.beta);
  m.set("rho", opt.rho);
  m.set("source_bits", source_bits);
  m.output(regions_path);
  m.output(speedup_path);
  m.write(dir);
  return kExitOk;
}

// ---- fit -----------------------------------------------------------------------

struct FitOptions {
  std::string samples;
  std::string live;
  std::string policy = "grid";
  double p_max = 1 << 20;  // bytes, live mode
  std::size_t count = 64;  // live exchanges
  double forgetting = 1.0;
  int timeout_ms = 5000;
};

int cmd_fit(const GlobalOptions& g, const FitOptions& opt) {
  if (opt.samples.empty() == opt.live.empty()) throw ConfigError("fit needs exactly one of --samples or --live");
  const auto dir = prepare_out(g);
  const auto fit_path = dir / "fit.csv";
  std::ostringstream trace;
  write_fit_trace_header(trace);
  std::optional<FitResult> last;
  Manifest m("fit", g);
  m.set("forgetting", opt.forgetting);

  if (!opt.samples.empty()) {
    auto in = open_in(opt.samples);
    const auto samples = read_sample_csv(in);
    if (samples.size() < 2) throw DegenerateDesignError("degenerate design: fewer than two samples");
    double p_max = 0.0;
    for (const auto& s : samples) p_max = std::max(p_max, s.bits);
    auto state = EstimatorState::empty(p_max, opt.forgetting);
    for (const auto& s : samples) {
      state.add(s.bits, s.seconds);
      if (state.can_fit()) {
        last = state.fit();
        write_fit_trace_row(trace, *last);
      }
    }
    m.set("samples", fs::path(opt.samples).filename().string());
  } else {
    const auto policy = parse_size_policy(opt.policy);
    const auto [host, port] = split_host_port(opt.live);
    const double p_max_bits = opt.p_max * 8.0;
    auto state = EstimatorState::empty(p_max_bits, opt.forgetting);
    std::vector<Sample> samples;
    ProbeClient client(host, port, std::chrono::milliseconds(opt.timeout_ms));
    for (std::size_t i = 0; i < opt.count; ++i) {
      const double proposed = propose_next_size(state, policy, g.seed);
      const auto bytes = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::llround(proposed / 8.0)), 1,
                                                   static_cast<std::uint64_t>(opt.p_max));
      const double rtt = client.exchange(bytes);
      samples.push_back(Sample{static_cast<double>(bytes) * 8.0, rtt});
      state.add(samples.back().bits, rtt);
      if (state.can_fit()) {
        last = state.fit();
        write_fit_trace_row(trace, *last);
      }
    }
    client.close();
    const auto samples_path = dir / "samples.csv";
    auto f = open_out(samples_path);
    write_sample_csv(f, samples);
    m.set("live", opt.live);
    m.set("policy", opt.policy);
    m.set("p_max_bytes", opt.p_max);
    m.output(samples_path);
  }

  if (!last) throw DegenerateDesignError("degenerate design: all message sizes are equal");
  {
    auto f = open_out(fit_path);
    f << trace.str();
  }
  fmt::print("k={} alpha_hat={} beta_hat_per_byte={}\n", last->k, last->alpha_hat, last->beta_hat * 8.0);
  m.output(fit_path);
  m.summary("alpha_hat", last->alpha_hat);
  m.summary("beta_hat_per_bit", last->beta_hat);
  m.write(dir);
  return kExitOk;
}

// ---- select --------------------------------------------------------------------

struct SelectOptions {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::string fit;
  std::string family = "rand_k";
  std::uint64_t d = 1000;
  std::uint64_t n = 8;
  unsigned b = kDefaultBitsPerScalar;
};

int cmd_select(const GlobalOptions& g, const SelectOptions& opt) {
  FitResult fit;
  if (!opt.fit.empty()) {
    if (opt.alpha || opt.beta) throw ConfigError("use either --fit or --alpha/--beta");
    auto in = open_in(opt.fit);
    const auto table = read_csv(in);
    if (table.header != std::vector<std::string>{"k", "alpha_hat", "beta_hat"})
      throw ParseError("fit CSV must have header k,alpha_hat,beta_hat");
    if (table.rows.empty()) throw DegenerateDesignError("fit CSV has no fitted rows");
    const auto& row = table.rows.back();
    if (row.size() != 3) throw ParseError("fit CSV row must have three fields");
    fit = FitResult{parse_double(row[1]), parse_double(row[2]) / 8.0, parse_uint(row[0])};
  } else {
    if (!opt.alpha || !opt.beta) throw ConfigError("select needs --alpha and --beta, or --fit");
    fit = FitResult{*opt.alpha, *opt.beta, 0};
  }
  const auto obj = SelectionObjective::from_fit(parse_compressor_kind(opt.family), opt.d, opt.n, opt.b, fit);
  const auto sel = select_power(obj);

  const auto dir = prepare_out(g);
  const auto decision_path = dir / "select.csv";
  const auto curve_path = dir / "cost_curve.csv";
  {
    auto f = open_out(decision_path);
    write_decision_csv(f, {Decision{fit.k, fit.alpha_hat, fit.beta_hat, sel.k_star, sel.cost}});
  }
  {
    auto f = open_out(curve_path);
    write_cost_curve_csv(f, obj);
  }
  fmt::print("k_star={} predicted_cost={} omega_inf={}\n", sel.k_star, sel.cost,
             omega_inf(CompressorSpec{obj.family, sel.k_star, 0, std::nullopt}, obj.d, obj.b).value());

  Manifest m("select", g);
  m.set("family", opt.family);
  m.set("d", opt.d);
  m.set("n", opt.n);
  m.set("b", opt.b);
  m.set("alpha", obj.alpha);
  m.set("beta", obj.beta);
  m.output(decision_path);
  m.output(curve_path);
  m.summary("k_star", sel.k_star);
  m.summary("predicted_cost", sel.cost);
  m.write(dir);
  return kExitOk;
}

// ---- synth ---------------------------------------------------------------------

struct SynthOptions {
  double alpha = 1e-4;
  double beta = 1e-9;
  double alpha_m = 0.0;
  double beta_m = 0.0;
  std::vector<double> sizes;  // bytes
  double min_size = 1;
  double max_size = 1e6;
  std::size_t count = 1000;
  std::uint64_t reps = 1;
};

int cmd_synth(const GlobalOptions& g, const SynthOptions& opt) {
  const TimeModelParams params(opt.alpha, opt.beta, opt.alpha_m, opt.beta_m);
  std::vector<double> sizes = opt.sizes;
  if (sizes.empty()) {
    if (!(opt.min_size >= 1.0) || !(opt.max_size >= opt.min_size)) throw ConfigError("need 1 <= min-size <= max-size");
    CounterRng rng(derive_key({g.seed, 0x53594e}));
    for (std::size_t i = 0; i < opt.count; ++i)
      sizes.push_back(std::round(opt.min_size + (opt.max_size - opt.min_size) * rng.uniform()));
  }
  std::vector<Sample> samples;
  std::vector<std::uint64_t> reps;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(sizes[i] > 0.0)) throw ConfigError("sizes must be positive");
    for (std::uint64_t r = 0; r < opt.reps; ++r) {
      const double bits = sizes[i] * 8.0;
      samples.push_back(Sample{bits, sample_time(params, bits, derive_key({g.seed, i, r}))});
      reps.push_back(r);
    }
  }
  const auto dir = prepare_out(g);
  const auto path = dir / "samples.csv";
  {
    auto f = open_out(path);
    write_sample_csv(f, samples, reps);
  }
  fmt::print("samples={}\n", samples.size());
  Manifest m("synth", g);
  m.set("alpha", opt.alpha);
  m.set("beta", opt.beta);
  m.set("alpha_m", opt.alpha_m);
  m.set("beta_m", opt.beta_m);
  m.set("count", samples.size());
  m.output(path);
  m.write(dir);
  return kExitOk;
}

// ---- probe / serve -------------------------------------------------------------

struct ProbeOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 9606;
  std::vector<std::uint64_t> sizes{1024, 1 << 20};
  std::uint64_t reps = 10;
  std::uint64_t warmup = 2;
  int timeout_ms = 5000;
};

int cmd_probe(const GlobalOptions& g, const ProbeOptions& opt) {
  const auto result = probe(opt.host, opt.port, opt.sizes, opt.reps, opt.warmup, std::chrono::milliseconds(opt.timeout_ms));
  const auto dir = prepare_out(g);
  const auto path = dir / "samples.csv";
  {
    auto f = open_out(path);
    write_probe_csv(f, result.samples);
  }
  Manifest m("probe", g);
  m.set("host", opt.host);
  m.set("port", opt.port);
  m.set("sizes", opt.sizes);
  m.set("reps", opt.reps);
  m.set("warmup", opt.warmup);
  m.output(path);
  m.summary("bytes_sent", result.bytes_sent);
  m.summary("bytes_received", result.bytes_received);
  m.summary("error", result.error ? result.message : "");
  m.write(dir);
  fmt::print("samples={} bytes_sent={} bytes_received={}\n", result.samples.size(), result.bytes_sent,
             result.bytes_received);
  if (result.error) {
    std::cerr << "probe: " << result.message << " (partial results written)\n";
    return kExitNetwork;
  }
  return kExitOk;
}

struct ServeOptions {
  std::uint16_t port = 9606;
  std::string bind = "0.0.0.0";
  std::uint64_t p_max = 1ULL << 30;
};

std::atomic<ProbeServer*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->request_stop();
}

int cmd_serve(const GlobalOptions&, const ServeOptions& opt) {
  ProbeServer server(opt.port, opt.p_max, opt.bind);
  g_server.store(&server);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << fmt::format("probe server listening on {}:{} (p_max {} bytes)\n", opt.bind, server.port(), opt.p_max);
  server.serve();
  g_server.store(nullptr);
  const auto st = server.stats();
  fmt::print("connections={} frames={} payload_bytes={} resets={}\n", st.connections, st.frames, st.payload_bytes,
             st.resets);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Communication cost modeling for compressed distributed optimization", "commcost"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GlobalOptions g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--config", g.config_path, "Key-value config file (simulate)");
  app.fallthrough();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run (compressed) distributed GD against the time model");
  simulate->add_option("--set", sim.sets, "Override a config key: key=value (repeatable)");
  // convenience flags for the most common keys
  for (const auto& [flag, key] : std::vector<std::pair<std::string, std::string>>{
           {"--n", "n"},
           {"--d", "d"},
           {"--steps", "steps"},
           {"--gamma", "gamma"},
           {"--compressor", "compressor.kind"},
           {"--k", "compressor.k"},
           {"--r", "compressor.r"},
           {"--alpha", "alpha"},
           {"--beta", "beta"},
           {"--alpha-m", "alpha_m"},
           {"--beta-m", "beta_m"},
           {"--downlink-compressed", "downlink_compressed"},
           {"--charge-downlink", "charge_downlink"},
           {"--problem", "problem"},
       }) {
    simulate->add_option_function<std::string>(
        flag, [&sim, key = key](const std::string& v) { sim.flags[key] = v; }, "Sets config key " + key);
  }

  RegionsOptions reg;
  auto* regions = app.add_subcommand("regions", "Classify message sizes into areas and tabulate speedups");
  regions->add_option("--alpha", reg.alpha, "Startup time, seconds")->capture_default_str();
  regions->add_option("--beta", reg.beta, "Seconds per bit")->capture_default_str();
  regions->add_option("--rho", reg.rho, "Dominance ratio between areas")->capture_default_str();
  regions->add_option("--sizes", reg.sizes, "Message sizes in bytes");
  regions->add_option("--min-size", reg.min_size, "Smallest size in bytes (grid)")->capture_default_str();
  regions->add_option("--max-size", reg.max_size, "Largest size in bytes (grid)")->capture_default_str();
  regions->add_option("--points", reg.points, "Grid points")->capture_default_str();
  regions->add_option("--source-size", reg.source_size, "Uncompressed size in bytes for the speedup curve");
  regions->add_option("--omegas", reg.omegas, "Compression factors for the speedup curve");
  regions->add_option("--omega-max", reg.omega_max, "Largest omega on the default grid")->capture_default_str();
  regions->add_option("--omega-points", reg.omega_points, "Points on the default omega grid")->capture_default_str();

  FitOptions fit;
  auto* fitcmd = app.add_subcommand("fit", "Online least-squares fit of alpha and beta");
  fitcmd->add_option("--samples", fit.samples, "CSV with size_bytes,time_seconds");
  fitcmd->add_option("--live", fit.live, "Probe a running server at host:port");
  fitcmd->add_option("--policy", fit.policy, "Live size policy: uniform or grid")->capture_default_str();
  fitcmd->add_option("--p-max", fit.p_max, "Largest live message in bytes")->capture_default_str();
  fitcmd->add_option("--count", fit.count, "Live exchanges")->capture_default_str();
  fitcmd->add_option("--forgetting", fit.forgetting, "Forgetting factor in (0, 1]")->capture_default_str();
  fitcmd->add_option("--timeout-ms", fit.timeout_ms, "Connect timeout")->capture_default_str();

  SelectOptions sel;
  auto* select = app.add_subcommand("select", "Pick the compression power k minimizing predicted cost");
  select->add_option("--alpha", sel.alpha, "Startup time, seconds");
  select->add_option("--beta", sel.beta, "Seconds per bit");
  select->add_option("--fit", sel.fit, "Fit trace CSV from `fit` (last row is used)");
  select->add_option("--family", sel.family, "rand_k or top_k")->capture_default_str();
  select->add_option("--d", sel.d, "Dimension")->capture_default_str();
  select->add_option("--n", sel.n, "Workers")->capture_default_str();
  select->add_option("--b", sel.b, "Bits per scalar")->capture_default_str();

  SynthOptions syn;
  auto* synth = app.add_subcommand("synth", "Generate noisy (size, time) samples from the time model");
  synth->add_option("--alpha", syn.alpha, "Startup time, seconds")->capture_default_str();
  synth->add_option("--beta", syn.beta, "Seconds per bit")->capture_default_str();
  synth->add_option("--alpha-m", syn.alpha_m, "Relative noise on alpha")->capture_default_str();
  synth->add_option("--beta-m", syn.beta_m, "Relative noise on beta")->capture_default_str();
  synth->add_option("--sizes", syn.sizes, "Sizes in bytes (default: random)");
  synth->add_option("--min-size", syn.min_size, "Smallest random size, bytes")->capture_default_str();
  synth->add_option("--max-size", syn.max_size, "Largest random size, bytes")->capture_default_str();
  synth->add_option("--count", syn.count, "Random sizes to draw")->capture_default_str();
  synth->add_option("--reps", syn.reps, "Samples per size")->capture_default_str();

  ProbeOptions prb;
  auto* probecmd = app.add_subcommand("probe", "Measure round-trip times against a running server");
  probecmd->add_option("--host", prb.host)->capture_default_str();
  probecmd->add_option("--port", prb.port)->capture_default_str();
  probecmd->add_option("--sizes", prb.sizes, "Sizes in bytes")->capture_default_str();
  probecmd->add_option("--reps", prb.reps)->capture_default_str();
  probecmd->add_option("--warmup", prb.warmup)->capture_default_str();
  probecmd->add_option("--timeout-ms", prb.timeout_ms, "Connect timeout")->capture_default_str();

  ServeOptions srv;
  auto* serve = app.add_subcommand("serve", "Run the ping-pong server");
  serve->add_option("--port", srv.port)->capture_default_str();
  serve->add_option("--bind", srv.bind)->capture_default_str();
  serve->add_option("--p-max", srv.p_max, "Largest accepted payload, bytes")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*simulate) return cmd_simulate(g, sim);
    if (*regions) return cmd_regions(g, reg);
    if (*fitcmd) return cmd_fit(g, fit);
    if (*select) return cmd_select(g, sel);
    if (*synth) return cmd_synth(g, syn);
    if (*probecmd) return cmd_probe(g, prb);
    if (*serve) return cmd_serve(g, srv);
  } catch (const DegenerateDesignError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const NetworkError& e) {
    std::cerr << "network error: " << e.what() << '\n';
    return kExitNetwork;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace commcost::cli

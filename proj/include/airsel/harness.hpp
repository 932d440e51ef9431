#pragma once

// Experiment orchestration: JSON configuration, seeded Monte-Carlo sweeps,
// CSV persistence and summary statistics.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"

#include <airsel/channel.hpp>
#include <airsel/fl.hpp>
#include <airsel/solve.hpp>

namespace airsel {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kCsvSchema = "airsel-v1";

/// Configuration problem: malformed file, unknown key or violated invariant.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FlSimConfig {
  int dim = 8;
  double mu = 1.0;
  double l_lip = 4.0;
  int l = 4;
  double snr_db = 10.0;
  int rounds = 50;
  double gamma = 0.0;
  int coherence_rounds = 5;
  Algorithm algorithm = Algorithm::fista;
  int seeds = 200;
  double curvature_spread = 0.0;
  double gradient_variance = 1.0;
  double init_distance = 3.0;
};

struct OracleCheckConfig {
  int n = 8;
  int k = 3;
  int l = 2;
  double snr_db = 10.0;
  int instances = 20;
};

struct ExperimentConfig {
  int n = 128;
  int k = 50;
  double power_limit = 1.0;
  ChannelConfig channel{};
  std::vector<double> snr_grid_db{10.0};
  std::vector<int> l_grid{16};
  std::vector<Algorithm> algorithms{Algorithm::pdd, Algorithm::lasso, Algorithm::fista,
                                    Algorithm::random, Algorithm::greedy, Algorithm::all};
  int trials = 1;
  std::uint64_t seed = 0;
  AlgorithmOptions options{};
  std::string output_path;
  bool record_wall_time = true;
  FlSimConfig fl{};
  OracleCheckConfig oracle{};

  void validate() const {
    auto need = [](bool ok, const std::string& what) {
      if (!ok) throw config_error("invalid config: " + what);
    };
    need(n >= 1 && k >= 1, "dims.n and dims.k must be >= 1");
    need(power_limit > 0.0, "power_limit must be > 0");
    need(trials >= 1, "trials must be >= 1");
    need(!snr_grid_db.empty(), "snr_grid_db must be non-empty");
    need(!l_grid.empty(), "l_grid must be non-empty");
    need(!algorithms.empty(), "algorithms must be non-empty");
    for (int l : l_grid) need(l >= 1 && l <= n, "every L in l_grid must satisfy 1 <= L <= N (got " + std::to_string(l) + ")");
    try {
      channel.validate();
      options.ao.validate();
      options.pdd.validate();
      options.lasso.validate();
      options.fista.validate();
    } catch (const validation_error& e) {
      throw config_error(std::string("invalid config: ") + e.what());
    }
    need(fl.dim >= 1 && fl.mu > 0.0 && fl.mu <= fl.l_lip, "fl: need dim >= 1 and 0 < mu <= l_lip");
    need(fl.l >= 1 && fl.l <= n, "fl.l must satisfy 1 <= L <= N");
    need(fl.rounds >= 1 && fl.coherence_rounds >= 1 && fl.seeds >= 1, "fl: rounds, coherence_rounds, seeds must be >= 1");
    need(oracle.l >= 1 && oracle.l <= oracle.n && oracle.k >= 1 && oracle.instances >= 1,
         "oracle: need 1 <= l <= n, k >= 1, instances >= 1");
  }

  NetworkConfig network(int l, double snr_db) const {
    NetworkConfig net;
    net.dims = SystemDims(n, k, l);
    net.channel = channel;
    net.snr_db = snr_db;
    net.power_limit = power_limit;
    return net;
  }
};

// ---------------------------------------------------------------------------
// JSON mapping

namespace detail {

using nlohmann::json;

inline const char* init_policy_name(InitPolicy p) {
  switch (p) {
    case InitPolicy::mmse_warm: return "mmse_warm";
    case InitPolicy::ones: return "ones";
    case InitPolicy::given: return "given";
  }
  return "?";
}

/// Reads keys of one JSON object, rejecting any key that is never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw config_error(where() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw config_error("config key '" + child(key) + "' has the wrong type");
    }
  }

  const json* child_object(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw config_error("unknown config key '" + child(it.key().c_str()) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "config root" : "'" + path_ + "'"; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_ao(const json& j, const std::string& path, AoOptions& ao) {
  ObjectReader r(j, path);
  r.get("max_iters", ao.max_iters);
  r.get("rel_tol", ao.rel_tol);
  r.get("ridge_eps", ao.ridge_eps);
  std::string policy = init_policy_name(ao.init_policy);
  r.get("init_policy", policy);
  if (policy == "mmse_warm") ao.init_policy = InitPolicy::mmse_warm;
  else if (policy == "ones") ao.init_policy = InitPolicy::ones;
  else throw config_error("config key '" + r.child("init_policy") + "' must be mmse_warm or ones");
  r.finish();
}

inline json write_ao(const AoOptions& ao) {
  return {{"max_iters", ao.max_iters}, {"rel_tol", ao.rel_tol}, {"ridge_eps", ao.ridge_eps},
          {"init_policy", init_policy_name(ao.init_policy)}};
}

inline void read_sparse(const json& j, const std::string& path, SparseOptions& sp) {
  ObjectReader r(j, path);
  if (auto* e = r.child_object("eta"); e && !e->is_null()) {
    if (!e->is_number()) throw config_error("config key '" + r.child("eta") + "' has the wrong type");
    sp.eta = e->get<double>();
  }
  r.get("eta_grid", sp.eta_grid);
  r.get("subproblem_tol", sp.subproblem_tol);
  r.get("subproblem_max_iters", sp.subproblem_max_iters);
  if (auto* in = r.child_object("inner")) read_ao(*in, r.child("inner"), sp.inner);
  r.finish();
}

inline json write_sparse(const SparseOptions& sp) {
  json j{{"eta_grid", sp.eta_grid},
         {"subproblem_tol", sp.subproblem_tol},
         {"subproblem_max_iters", sp.subproblem_max_iters},
         {"inner", write_ao(sp.inner)}};
  j["eta"] = sp.eta ? json(*sp.eta) : json(nullptr);
  return j;
}

inline Algorithm read_algorithm(const std::string& name, const std::string& path) {
  auto a = parse_algorithm(name);
  if (!a) throw config_error("config key '" + path + "': unknown algorithm '" + name + "'");
  return *a;
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  const auto end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::ObjectReader;
  ExperimentConfig cfg;
  ObjectReader r(j, "");
  if (auto* d = r.child_object("dims")) {
    ObjectReader dr(*d, "dims");
    dr.get("n", cfg.n);
    dr.get("k", cfg.k);
    dr.finish();
  }
  r.get("power_limit", cfg.power_limit);
  if (auto* c = r.child_object("channel")) {
    ObjectReader cr(*c, "channel");
    cr.get("r_inner", cfg.channel.r_inner);
    cr.get("r_outer", cfg.channel.r_outer);
    cr.get("pathloss_exponent", cfg.channel.pathloss_exponent);
    cr.get("ref_distance", cfg.channel.ref_distance);
    cr.get("ref_gain", cfg.channel.ref_gain);
    cr.get("antenna_spacing", cfg.channel.antenna_spacing);
    std::vector<double> range{cfg.channel.angular_spread_lo, cfg.channel.angular_spread_hi};
    cr.get("angular_spread_range", range);
    if (range.size() != 2) throw config_error("config key 'channel.angular_spread_range' must have two entries");
    cfg.channel.angular_spread_lo = range[0];
    cfg.channel.angular_spread_hi = range[1];
    std::string corr = cfg.channel.correlation == CorrelationMode::iid ? "iid" : "correlated";
    cr.get("correlation", corr);
    if (corr == "iid") cfg.channel.correlation = CorrelationMode::iid;
    else if (corr == "correlated") cfg.channel.correlation = CorrelationMode::correlated;
    else throw config_error("config key 'channel.correlation' must be iid or correlated");
    cr.finish();
  }
  r.get("snr_grid_db", cfg.snr_grid_db);
  r.get("l_grid", cfg.l_grid);
  if (auto* a = r.child_object("algorithms")) {
    std::vector<std::string> names;
    try {
      names = a->get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
      throw config_error("config key 'algorithms' must be a list of names");
    }
    cfg.algorithms.clear();
    for (const auto& name : names) cfg.algorithms.push_back(detail::read_algorithm(name, "algorithms"));
  }
  r.get("trials", cfg.trials);
  r.get("seed", cfg.seed);
  if (auto* ao = r.child_object("ao")) detail::read_ao(*ao, "ao", cfg.options.ao);
  if (auto* p = r.child_object("pdd")) {
    ObjectReader pr(*p, "pdd");
    pr.get("kappa", cfg.options.pdd.kappa);
    pr.get("h_threshold0", cfg.options.pdd.h_threshold0);
    pr.get("rho0", cfg.options.pdd.rho0);
    pr.get("max_outer", cfg.options.pdd.max_outer);
    pr.get("h_stop", cfg.options.pdd.h_stop);
    if (auto* in = pr.child_object("inner")) detail::read_ao(*in, "pdd.inner", cfg.options.pdd.inner);
    pr.finish();
  }
  if (auto* s = r.child_object("lasso")) detail::read_sparse(*s, "lasso", cfg.options.lasso);
  if (auto* s = r.child_object("fista")) detail::read_sparse(*s, "fista", cfg.options.fista);
  r.get("output_path", cfg.output_path);
  r.get("record_wall_time", cfg.record_wall_time);
  if (auto* f = r.child_object("fl")) {
    ObjectReader fr(*f, "fl");
    fr.get("dim", cfg.fl.dim);
    fr.get("mu", cfg.fl.mu);
    fr.get("l_lip", cfg.fl.l_lip);
    fr.get("l", cfg.fl.l);
    fr.get("snr_db", cfg.fl.snr_db);
    fr.get("rounds", cfg.fl.rounds);
    fr.get("gamma", cfg.fl.gamma);
    fr.get("coherence_rounds", cfg.fl.coherence_rounds);
    std::string algo{algorithm_name(cfg.fl.algorithm)};
    fr.get("algorithm", algo);
    cfg.fl.algorithm = detail::read_algorithm(algo, "fl.algorithm");
    fr.get("seeds", cfg.fl.seeds);
    fr.get("curvature_spread", cfg.fl.curvature_spread);
    fr.get("gradient_variance", cfg.fl.gradient_variance);
    fr.get("init_distance", cfg.fl.init_distance);
    fr.finish();
  }
  if (auto* o = r.child_object("oracle")) {
    ObjectReader orr(*o, "oracle");
    orr.get("n", cfg.oracle.n);
    orr.get("k", cfg.oracle.k);
    orr.get("l", cfg.oracle.l);
    orr.get("snr_db", cfg.oracle.snr_db);
    orr.get("instances", cfg.oracle.instances);
    orr.finish();
  }
  r.finish();
  cfg.validate();
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  using nlohmann::json;
  json algos = json::array();
  for (auto a : cfg.algorithms) algos.push_back(std::string(algorithm_name(a)));
  const auto& pdd = cfg.options.pdd;
  return json{
      {"dims", {{"n", cfg.n}, {"k", cfg.k}}},
      {"power_limit", cfg.power_limit},
      {"channel",
       {{"r_inner", cfg.channel.r_inner},
        {"r_outer", cfg.channel.r_outer},
        {"pathloss_exponent", cfg.channel.pathloss_exponent},
        {"ref_distance", cfg.channel.ref_distance},
        {"ref_gain", cfg.channel.ref_gain},
        {"antenna_spacing", cfg.channel.antenna_spacing},
        {"angular_spread_range", {cfg.channel.angular_spread_lo, cfg.channel.angular_spread_hi}},
        {"correlation", cfg.channel.correlation == CorrelationMode::iid ? "iid" : "correlated"}}},
      {"snr_grid_db", cfg.snr_grid_db},
      {"l_grid", cfg.l_grid},
      {"algorithms", algos},
      {"trials", cfg.trials},
      {"seed", cfg.seed},
      {"ao", detail::write_ao(cfg.options.ao)},
      {"pdd",
       {{"kappa", pdd.kappa},
        {"h_threshold0", pdd.h_threshold0},
        {"rho0", pdd.rho0},
        {"max_outer", pdd.max_outer},
        {"h_stop", pdd.h_stop},
        {"inner", detail::write_ao(pdd.inner)}}},
      {"lasso", detail::write_sparse(cfg.options.lasso)},
      {"fista", detail::write_sparse(cfg.options.fista)},
      {"output_path", cfg.output_path},
      {"record_wall_time", cfg.record_wall_time},
      {"fl",
       {{"dim", cfg.fl.dim},
        {"mu", cfg.fl.mu},
        {"l_lip", cfg.fl.l_lip},
        {"l", cfg.fl.l},
        {"snr_db", cfg.fl.snr_db},
        {"rounds", cfg.fl.rounds},
        {"gamma", cfg.fl.gamma},
        {"coherence_rounds", cfg.fl.coherence_rounds},
        {"algorithm", std::string(algorithm_name(cfg.fl.algorithm))},
        {"seeds", cfg.fl.seeds},
        {"curvature_spread", cfg.fl.curvature_spread},
        {"gradient_variance", cfg.fl.gradient_variance},
        {"init_distance", cfg.fl.init_distance}}},
      {"oracle",
       {{"n", cfg.oracle.n},
        {"k", cfg.oracle.k},
        {"l", cfg.oracle.l},
        {"snr_db", cfg.oracle.snr_db},
        {"instances", cfg.oracle.instances}}},
  };
}

/// Parses config text (JSON, comments allowed).  Syntax errors carry the line number.
inline ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(origin + ":" + std::to_string(detail::line_of(text, e.byte)) + ": parse error: " + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

inline std::string serialize_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Sweeps

struct ResultRow {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string algorithm;
  int n = 0;
  int k = 0;
  int l = 0;
  double snr_db = 0.0;
  double error_db = 0.0;
  std::string status = "ok";
  int iters_outer = 0;
  int iters_inner_total = 0;
  double wall_ms = 0.0;
};

/// Shortest decimal representation that round-trips.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kCsvHeader =
    "schema,trial,seed,algorithm,N,K,L,snr_db,error_db,status,iters_outer,iters_inner_total,wall_ms";

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << kCsvSchema << ',' << r.trial << ',' << r.seed << ',' << r.algorithm << ',' << r.n << ',' << r.k << ','
       << r.l << ',' << format_double(r.snr_db) << ',' << format_double(r.error_db) << ',' << r.status << ','
       << r.iters_outer << ',' << r.iters_inner_total << ',' << format_double(r.wall_ms) << '\n';
  }
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

/// Per-cell seed: seed xor a hash of (trial, snr index, L index).
inline std::uint64_t trial_seed(std::uint64_t seed, int trial, int snr_index, int l_index) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(static_cast<std::uint64_t>(trial)) ^
                                                static_cast<std::uint64_t>(snr_index)) ^
                                     static_cast<std::uint64_t>(l_index));
  return seed ^ h;
}

inline unsigned default_threads() {
  if (const char* env = std::getenv("AIRSEL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(i) for i in [0, count) on up to `threads` workers.
template <typename F>
void parallel_for(std::size_t count, unsigned threads, F&& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

/// One row per (trial, snr, L, algorithm) cell, in that nesting order.
///
/// All algorithms of a cell see the same instance.  Rows of the "all"
/// policy report L = N.
inline std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  const auto n_snr = cfg.snr_grid_db.size();
  const auto n_l = cfg.l_grid.size();
  const auto n_alg = cfg.algorithms.size();
  const std::size_t n_cells = static_cast<std::size_t>(cfg.trials) * n_snr * n_l;
  std::vector<ResultRow> rows(n_cells * n_alg);
  parallel_for(n_cells, threads, [&](std::size_t cell) {
    const int trial = static_cast<int>(cell / (n_snr * n_l));
    const int si = static_cast<int>((cell / n_l) % n_snr);
    const int li = static_cast<int>(cell % n_l);
    const double snr = cfg.snr_grid_db[si];
    const int l = cfg.l_grid[li];
    const std::uint64_t seed = trial_seed(cfg.seed, trial, si, li);
    std::optional<ProblemInstance> inst;
    std::string inst_error;
    try {
      inst = sample_network(cfg.network(l, snr), seed);
    } catch (const std::exception& e) {
      inst_error = e.what();
    }
    for (std::size_t ai = 0; ai < n_alg; ++ai) {
      auto& row = rows[cell * n_alg + ai];
      const Algorithm algo = cfg.algorithms[ai];
      row.trial = trial;
      row.seed = seed;
      row.algorithm = std::string(algorithm_name(algo));
      row.n = cfg.n;
      row.k = cfg.k;
      row.l = algo == Algorithm::all ? cfg.n : l;
      row.snr_db = snr;
      if (!inst) {
        row.status = "error";
        row.error_db = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      try {
        const auto algo_seed = derive_seed(seed, 0xA160 + static_cast<std::uint64_t>(algo));
        const auto rep = solve(*inst, l, algo, cfg.options, algo_seed);
        row.error_db = 10.0 * std::log10(rep.error);
        row.status = rep.converged ? "ok" : "not_converged";
        row.iters_outer = rep.iters_outer;
        row.iters_inner_total = rep.iters_inner_total;
        row.wall_ms = cfg.record_wall_time ? rep.wall_ms : 0.0;
      } catch (const std::exception&) {
        row.status = "error";
        row.error_db = std::numeric_limits<double>::quiet_NaN();
      }
    }
  });
  return rows;
}

struct SummaryKey {
  std::string algorithm;
  double snr_db;
  int l;
  auto operator<=>(const SummaryKey&) const = default;
};

struct SummaryStats {
  int count = 0;
  double mean_db = 0.0;
  double median_db = 0.0;
  double stderr_db = 0.0;
  double mean_wall_ms = 0.0;
  double median_wall_ms = 0.0;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline SummaryStats describe(const std::vector<double>& values, const std::vector<double>& walls) {
  SummaryStats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean_db = sum / s.count;
  s.median_db = median_of(values);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean_db) * (v - s.mean_db);
    s.stderr_db = std::sqrt(ss / (s.count - 1)) / std::sqrt(static_cast<double>(s.count));
  }
  double wsum = 0.0;
  for (double w : walls) wsum += w;
  s.mean_wall_ms = walls.empty() ? 0.0 : wsum / static_cast<double>(walls.size());
  s.median_wall_ms = walls.empty() ? 0.0 : median_of(walls);
  return s;
}

/// Mean/median/standard error of error_db per (algorithm, snr, L); failed rows are skipped.
inline std::map<SummaryKey, SummaryStats> summarize(const std::vector<ResultRow>& rows) {
  std::map<SummaryKey, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : rows) {
    if (r.status == "error" || !std::isfinite(r.error_db)) continue;
    auto& g = groups[{r.algorithm, r.snr_db, r.l}];
    g.first.push_back(r.error_db);
    g.second.push_back(r.wall_ms);
  }
  std::map<SummaryKey, SummaryStats> out;
  for (const auto& [key, g] : groups) out[key] = describe(g.first, g.second);
  return out;
}

inline void write_summary(std::ostream& os, const std::map<SummaryKey, SummaryStats>& summary) {
  os << "algorithm,snr_db,L,count,mean_error_db,median_error_db,stderr_error_db,mean_wall_ms\n";
  for (const auto& [key, s] : summary)
    os << key.algorithm << ',' << format_double(key.snr_db) << ',' << key.l << ',' << s.count << ','
       << format_double(s.mean_db) << ',' << format_double(s.median_db) << ',' << format_double(s.stderr_db) << ','
       << format_double(s.mean_wall_ms) << '\n';
}

// ---------------------------------------------------------------------------
// Oracle dominance check

struct OracleCheckRow {
  int instance = 0;
  std::string algorithm;
  double error = 0.0;
  double oracle_error = 0.0;
  double gap_db = 0.0;
  bool dominated = true;  ///< error >= oracle - 1e-9
};

struct OracleCheckResult {
  std::vector<OracleCheckRow> rows;
  bool passed = true;
};

inline OracleCheckResult run_oracle_check(const ExperimentConfig& cfg, unsigned threads = 1) {
  const auto& oc = cfg.oracle;
  const std::vector<Algorithm> algos{Algorithm::pdd, Algorithm::lasso, Algorithm::fista};
  OracleCheckResult out;
  out.rows.resize(static_cast<std::size_t>(oc.instances) * algos.size());
  parallel_for(static_cast<std::size_t>(oc.instances), threads, [&](std::size_t i) {
    NetworkConfig net;
    net.dims = SystemDims(oc.n, oc.k, oc.l);
    net.channel = cfg.channel;
    net.snr_db = oc.snr_db;
    net.power_limit = cfg.power_limit;
    const auto seed = derive_seed(cfg.seed, i);
    const auto inst = sample_network(net, seed);
    const auto oracle = brute_force_oracle(inst, oc.l, cfg.options.ao);
    for (std::size_t a = 0; a < algos.size(); ++a) {
      const auto rep = solve(inst, oc.l, algos[a], cfg.options, seed);
      auto& row = out.rows[i * algos.size() + a];
      row.instance = static_cast<int>(i);
      row.algorithm = std::string(algorithm_name(algos[a]));
      row.error = rep.error;
      row.oracle_error = oracle.best_error;
      row.gap_db = 10.0 * std::log10(rep.error / oracle.best_error);
      row.dominated = rep.error - oracle.best_error >= -1e-9;
    }
  });
  for (const auto& r : out.rows) out.passed = out.passed && r.dominated;
  return out;
}

// ---------------------------------------------------------------------------
// FL simulation

struct FlRow {
  int seed_index = 0;
  RoundRecord record;
};

inline std::vector<FlRow> run_flsim(const ExperimentConfig& cfg, unsigned threads = 1) {
  const auto& f = cfg.fl;
  std::vector<std::vector<RoundRecord>> runs(static_cast<std::size_t>(f.seeds));
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    const auto seed = derive_seed(cfg.seed, 0xF1 + i);
    SyntheticTaskOptions topt;
    topt.curvature_spread = f.curvature_spread;
    topt.gradient_variance = f.gradient_variance;
    const auto task = make_synthetic_task(cfg.k, f.dim, f.mu, f.l_lip, derive_seed(seed, 2), topt);
    FlConfig fc;
    fc.network = cfg.network(f.l, f.snr_db);
    fc.algorithm = f.algorithm;
    fc.options = cfg.options;
    fc.rounds = f.rounds;
    fc.gamma = f.gamma;
    fc.coherence_rounds = f.coherence_rounds;
    fc.init_distance = f.init_distance;
    runs[i] = run_fl(fc, task, seed).records;
  });
  std::vector<FlRow> rows;
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (const auto& r : runs[i]) rows.push_back({static_cast<int>(i), r});
  return rows;
}

inline void write_fl_csv(std::ostream& os, const std::vector<FlRow>& rows) {
  os << "schema,seed_index,t,gap,gap_next,agg_error,bound_rhs\n";
  for (const auto& r : rows)
    os << kCsvSchema << ',' << r.seed_index << ',' << r.record.t << ',' << format_double(r.record.gap) << ','
       << format_double(r.record.gap_next) << ',' << format_double(r.record.agg_error) << ','
       << format_double(r.record.bound_rhs) << '\n';
}

}  // namespace airsel

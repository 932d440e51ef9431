// Command-line front end: solve, sweep, oracle-check, flsim, version.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include <airsel/harness.hpp>

namespace {

using namespace airsel;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string algo;
  std::optional<int> trials;
  std::optional<unsigned> threads;
};

ExperimentConfig load(const Flags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.trials) cfg.trials = *f.trials;
  if (!f.out.empty()) cfg.output_path = f.out;
  if (!f.algo.empty()) {
    auto a = parse_algorithm(f.algo);
    if (!a) throw config_error("--algo: unknown algorithm '" + f.algo + "'");
    cfg.algorithms = {*a};
    cfg.fl.algorithm = *a;
  }
  cfg.validate();
  return cfg;
}

unsigned threads_of(const Flags& f) { return f.threads ? std::max(1u, *f.threads) : default_threads(); }

/// Writes through `emit` to cfg.output_path, or stdout when it is empty.
template <typename Emit>
void write_output(const std::string& path, Emit&& emit) {
  if (path.empty()) {
    emit(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file '" + path + "'");
  emit(os);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

void print_vector(std::ostream& os, const char* name, const rvec& v) {
  os << name << ":";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << format_double(v(i));
  os << '\n';
}

int cmd_solve(const Flags& f) {
  auto cfg = load(f);
  const int l = cfg.l_grid.front();
  const double snr = cfg.snr_grid_db.front();
  const auto seed = trial_seed(cfg.seed, 0, 0, 0);
  const auto inst = sample_network(cfg.network(l, snr), seed);
  for (auto algo : cfg.algorithms) {
    const auto rep = solve(inst, l, algo, cfg.options, seed);
    std::cout << "algorithm: " << rep.algorithm << '\n'
              << "N: " << inst.N() << "  K: " << inst.K() << "  L: " << rep.selection.sum() << '\n'
              << "snr_db: " << format_double(snr) << '\n'
              << "error: " << format_double(rep.error) << '\n'
              << "error_db: " << format_double(10.0 * std::log10(rep.error)) << '\n'
              << "converged: " << (rep.converged ? "true" : "false") << '\n'
              << "iters_outer: " << rep.iters_outer << "  iters_inner_total: " << rep.iters_inner_total << '\n'
              << "wall_ms: " << format_double(rep.wall_ms) << '\n';
    std::cout << "selected:";
    for (Eigen::Index i = 0; i < rep.selection.size(); ++i)
      if (rep.selection(i) > 0.5) std::cout << ' ' << i;
    std::cout << '\n';
    print_vector(std::cout, "|b|", rep.b.cwiseAbs());
    std::cout << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const Flags& f) {
  if (f.config.empty()) {
    std::cerr << "sweep: --config is required\n";
    return kExitValidation;
  }
  auto cfg = load(f);
  const auto rows = run_sweep(cfg, threads_of(f));
  write_output(cfg.output_path, [&](std::ostream& os) { write_csv(os, rows); });
  write_summary(std::cerr, summarize(rows));
  return kExitOk;
}

int cmd_oracle(const Flags& f) {
  auto cfg = load(f);
  const auto res = run_oracle_check(cfg, threads_of(f));
  write_output(cfg.output_path, [&](std::ostream& os) {
    os << "instance,algorithm,error,oracle_error,gap_db,dominated\n";
    for (const auto& r : res.rows)
      os << r.instance << ',' << r.algorithm << ',' << format_double(r.error) << ',' << format_double(r.oracle_error)
         << ',' << format_double(r.gap_db) << ',' << (r.dominated ? "true" : "false") << '\n';
  });
  std::cerr << "oracle-check: " << (res.passed ? "PASS" : "FAIL") << " (" << res.rows.size() << " solves)\n";
  return res.passed ? kExitOk : kExitRuntime;
}

int cmd_flsim(const Flags& f) {
  auto cfg = load(f);
  const auto rows = run_flsim(cfg, threads_of(f));
  write_output(cfg.output_path, [&](std::ostream& os) { write_fl_csv(os, rows); });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Antenna selection for over-the-air federated aggregation"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "experiment config (JSON)");
    sub->add_option("--seed", flags.seed, "override the master seed");
    sub->add_option("--out", flags.out, "output path (default: stdout)");
    sub->add_option("--algo", flags.algo, "restrict to one algorithm")
        ->check(CLI::IsMember({"pdd", "lasso", "fista", "random", "greedy", "all"}));
    sub->add_option("--trials", flags.trials, "override trial count")->check(CLI::PositiveNumber);
    sub->add_option("--threads", flags.threads, "worker cap (default: AIRSEL_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
  };

  auto* solve_cmd = app.add_subcommand("solve", "solve one sampled instance and print the report");
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo sweep over SNR and L, written as CSV");
  auto* oracle_cmd = app.add_subcommand("oracle-check", "small-N dominance check against exhaustive search");
  auto* fl_cmd = app.add_subcommand("flsim", "federated learning simulation, per-round CSV");
  auto* version_cmd = app.add_subcommand("version", "print the version");
  for (auto* sub : {solve_cmd, sweep_cmd, oracle_cmd, fl_cmd}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*version_cmd) {
      std::cout << kVersion << '\n';
      return kExitOk;
    }
    if (*solve_cmd) return cmd_solve(flags);
    if (*sweep_cmd) return cmd_sweep(flags);
    if (*oracle_cmd) return cmd_oracle(flags);
    if (*fl_cmd) return cmd_flsim(flags);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nctails/error.hpp"
#include "nctails/io.hpp"
#include "nctails/ri_norms.hpp"
#include "nctails/sequences.hpp"
#include "nctails/series.hpp"
#include "nctails/stats.hpp"
#include "nctails/verify.hpp"

namespace {

using namespace nctails;

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kIo = 3 };

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("NC_TAILS_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    return parse_seed(v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("NC_TAILS_SEED", e.what());
  }
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    io::write_text_file(out_path, text);
  }
}

struct KfuncArgs {
  std::string seq_file;
  std::vector<double> t_grid;
  std::string out;
};

int cmd_kfunc(const KfuncArgs& a) {
  const RealSequence seq = io::read_sequence_file(a.seq_file);
  const KProfile prof = k_profile(seq, a.t_grid);
  std::string body = "t,k_exact,k_holmstedt\n";
  for (std::size_t i = 0; i < prof.t_grid.size(); ++i) {
    body += io::format_double(prof.t_grid[i]) + "," + io::format_double(prof.k_exact[i]) + "," +
            io::format_double(prof.k_holmstedt[i]) + "\n";
  }
  emit(body, a.out);
  return kOk;
}

struct SimulateArgs {
  std::string config;
  std::string kind;
  std::optional<std::size_t> trials;
  std::string seed;
  std::optional<double> lambda;
  std::string out;
  unsigned workers = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  std::optional<std::uint64_t> seed;
  if (!a.seed.empty()) {
    try {
      seed = parse_seed(a.seed);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--seed", e.what());
    }
  }
  Scenario sc = load_scenario(a.config, seed ? seed : env_seed());
  if (seed) sc.master_seed = *seed;
  const std::size_t trials = a.trials.value_or(sc.trials);
  if (trials < 1) throw ConfigError("--trials", "must be >= 1");
  const double lambda = a.lambda.value_or(sc.lambda);
  SeriesKind kind = SeriesKind::epsilon();
  try {
    kind = SeriesKind::parse(a.kind, lambda);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("--kind", e.what());
  }

  const SampleSet set = monte_carlo(std::span<const BlockSpec>(sc.blocks), kind, trials,
                                    sc.master_seed, a.workers);
  if (!a.out.empty()) {
    std::filesystem::path out(a.out);
    io::write_samples_csv(set, out);
    std::filesystem::path meta = out;
    meta.replace_extension(".meta.json");
    io::write_sample_metadata(set, meta);
  }
  const auto [lo, hi] = std::minmax_element(set.samples.begin(), set.samples.end());
  const double sd = set.samples.size() > 1 ? std::sqrt(stats::variance(set.samples)) : 0.0;
  std::cout << "kind=" << kind.name() << " trials=" << trials
            << " mean=" << io::format_double(stats::mean(set.samples))
            << " std=" << io::format_double(sd) << " min=" << io::format_double(*lo)
            << " max=" << io::format_double(*hi) << "\n";
  return kOk;
}

struct VerifyArgs {
  std::string config;
  std::string report = "report";
  unsigned workers = 0;
};

int cmd_verify(const VerifyArgs& a) {
  const RunResult res = run_scenario(a.config, a.report, a.workers, env_seed());
  for (const CheckReport& r : res.reports) {
    const char* verdict = r.inconclusive ? "INCONCLUSIVE" : (r.passed ? "PASS" : "FAIL");
    std::cout << verdict << " " << r.check_id;
    for (const auto& [k, v] : r.fitted_constants) std::cout << " " << k << "=" << io::format_double(v);
    if (!r.note.empty()) std::cout << " (" << r.note << ")";
    std::cout << "\n";
  }
  std::cout << "report written to " << a.report << "\n";
  return res.exit_status == 0 ? kOk : kCheckFailed;
}

struct NormsArgs {
  std::string samples;
  std::vector<double> orlicz_p;
  std::vector<double> lorentz;
  std::vector<double> orlicz_lorentz;
  std::vector<double> pnorms;
};

int cmd_norms(const NormsArgs& a) {
  if (!a.lorentz.empty() && !(a.lorentz[0] > 0.0 && std::isfinite(a.lorentz[0]) && a.lorentz[1] > 0.0)) {
    throw ConfigError("--lorentz", "need finite q > 0 and r > 0");
  }
  if (!a.orlicz_lorentz.empty() && !(a.orlicz_lorentz[0] > 0.0 && a.orlicz_lorentz[1] > 0.0)) {
    throw ConfigError("--orlicz-lorentz", "need p > 0 and r > 0");
  }
  for (double p : a.orlicz_p) {
    if (!(p > 0.0)) throw ConfigError("--orlicz-p", "need p > 0");
  }
  for (double p : a.pnorms) {
    if (!(p >= 1.0)) throw ConfigError("--pnorms", "need p >= 1");
  }
  const std::vector<double> x = io::read_samples_csv(a.samples);
  if (x.empty()) throw ParseError(1, "no samples", a.samples);

  std::string body = "norm,param,value,reliable\n";
  auto row = [&body](const std::string& norm, const std::string& param, double value, bool reliable) {
    body += norm + "," + param + "," + io::format_double(value) + "," + (reliable ? "1" : "0") + "\n";
  };
  for (double p : a.orlicz_p) row("orlicz_exp", io::format_double(p), orlicz_exp_norm(x, p), true);
  if (!a.lorentz.empty()) {
    row("lorentz", io::format_double(a.lorentz[0]) + ":" + io::format_double(a.lorentz[1]),
        lorentz_norm(x, a.lorentz[0], a.lorentz[1]), true);
  }
  if (!a.orlicz_lorentz.empty()) {
    const OrliczParams params{a.orlicz_lorentz[0], a.orlicz_lorentz[1], WeightMode::Integrable};
    row("orlicz_lorentz",
        io::format_double(a.orlicz_lorentz[0]) + ":" + io::format_double(a.orlicz_lorentz[1]),
        orlicz_lorentz_norm(std::span<const double>(x), params).value, true);
  }
  for (const PNormEntry& e : pnorm_profile(std::span<const double>(x), a.pnorms)) {
    row("p", io::format_double(e.p), e.norm, e.reliable);
  }
  std::cout << body;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail estimates for non-commutative Rademacher series", "nctails"};
  app.require_subcommand(1);

  KfuncArgs kf;
  auto* kfunc = app.add_subcommand("kfunc", "K-functional profile of a sequence (CSV: t,k_exact,k_holmstedt)");
  kfunc->add_option("sequence", kf.seq_file, "File with one number per line")->required();
  kfunc->add_option("--t", kf.t_grid, "Comma-separated t values")->required()->delimiter(',');
  kfunc->add_option("--out", kf.out, "Write CSV here instead of standard output");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw Monte Carlo samples of a series");
  simulate->add_option("config", sim.config, "Scenario JSON")->required();
  simulate->add_option("--kind", sim.kind, "epsilon, gauss, gauss_trunc, gauss_star or commutative")
      ->required();
  simulate->add_option("--trials", sim.trials, "Number of draws (default: from config)");
  simulate->add_option("--seed", sim.seed, "Master seed, decimal or 0x-hex (default: config, then NC_TAILS_SEED)");
  simulate->add_option("--lambda", sim.lambda, "Truncation level (default: from config)");
  simulate->add_option("--out", sim.out, "Samples CSV; metadata goes to <stem>.meta.json");
  simulate->add_option("--workers", sim.workers, "Worker threads, 0 = hardware concurrency");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run a scenario's checks and write a report");
  verify->add_option("config", ver.config, "Scenario JSON")->required();
  verify->add_option("--report", ver.report, "Report directory")->capture_default_str();
  verify->add_option("--workers", ver.workers, "Worker threads, 0 = hardware concurrency");

  NormsArgs nm;
  auto* norms = app.add_subcommand("norms", "Norms of a samples CSV (CSV: norm,param,value,reliable)");
  norms->add_option("samples", nm.samples, "CSV with a `value` column, or one number per line")->required();
  norms->add_option("--orlicz-p", nm.orlicz_p, "Orlicz exp(t^p) norm for each p")->delimiter(',');
  norms->add_option("--lorentz", nm.lorentz, "Lorentz sequence norm l_{q,r} of the values (r may be inf)")
      ->expected(2);
  norms->add_option("--orlicz-lorentz", nm.orlicz_lorentz, "Orlicz-Lorentz exp(t^p), r norm")->expected(2);
  norms->add_option("--pnorms", nm.pnorms, "Comma-separated p values for (mean |x|^p)^(1/p)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*kfunc) return cmd_kfunc(kf);
    if (*simulate) return cmd_simulate(sim);
    if (*verify) return cmd_verify(ver);
    if (*norms) return cmd_norms(nm);
  } catch (const IoError& e) {
    std::cerr << "nctails: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "nctails: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "nctails: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

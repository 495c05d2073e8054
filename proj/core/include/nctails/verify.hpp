#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nctails/matrix.hpp"
#include "nctails/series.hpp"

namespace nctails {

/// Acceptance ceilings for the fitted constants. Every "up to a universal
/// constant" statement is checked by fitting the constant and comparing it
/// against one of these.
struct Tolerances {
  double alpha_max = 10.0;       ///< tail-formula constant
  double c22 = 5.0;              ///< epsilon vs commutative quantile band
  double c23 = 8.0;              ///< moment and Orlicz ratio bands
  double parity_band = 5.0;      ///< epsilon vs truncated Gaussian quantile band
  double censor_count = 10.0;    ///< tails below censor_count / trials are not evidence
  double variance_rel = 0.05;    ///< variance identity
  double ks_max = 0.01;          ///< Gaussian exactness
  double holmstedt_factor = 4.0; ///< k_holmstedt <= factor * k_exact
};

/// One Orlicz (r absent) or Orlicz-Lorentz (r present) comparison; p > 2.
struct OrliczComparison {
  double p = 4.0;
  std::optional<double> r;
};

struct Scenario {
  std::string name;
  std::vector<BlockSpec> blocks;
  std::size_t trials = 100000;
  std::uint64_t master_seed = 0;
  std::vector<double> t_grid{0.5, 1.0, 1.5, 2.0, 2.5};
  double lambda = 4.0;
  std::vector<std::string> checks;
  Tolerances tolerances;
  std::vector<double> p_grid{1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<OrliczComparison> orlicz{{4.0, std::nullopt}, {4.0, 2.0}};
};

/// Recognised check ids, in canonical order.
const std::vector<std::string>& known_check_ids();

/// Parses and validates a scenario config. `fallback_seed` is used when the
/// config has no "seed" field. Throws ConfigError naming the field path.
Scenario parse_scenario(const std::string& json_text,
                        std::optional<std::uint64_t> fallback_seed = std::nullopt);
Scenario load_scenario(const std::filesystem::path& path,
                       std::optional<std::uint64_t> fallback_seed = std::nullopt);

/// Row-oriented numeric table; written as CSV.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct CheckReport {
  std::string check_id;
  bool passed = false;
  bool inconclusive = false;
  bool censored = false;  ///< some grid point fell below the censoring floor
  std::map<std::string, double> fitted_constants;
  Table details;
  std::string note;
};

/// Holds one scenario and memoises its sample sets, so checks that share a
/// series kind share its draws.
class ScenarioRunner {
 public:
  explicit ScenarioRunner(Scenario scenario, unsigned workers = 0);

  const Scenario& scenario() const noexcept { return scenario_; }
  const SeriesModel& model() const noexcept { return model_; }
  const SampleSet& samples(const SeriesKind& kind);

  CheckReport run_check(const std::string& check_id);
  std::vector<CheckReport> run_all();

 private:
  Scenario scenario_;
  SeriesModel model_;
  unsigned workers_;
  std::vector<std::unique_ptr<SampleSet>> cache_;
};

CheckReport check_theorem21(ScenarioRunner& runner);
CheckReport check_corollary22(ScenarioRunner& runner);
CheckReport check_corollary23(ScenarioRunner& runner);
CheckReport check_gaussian_parity(ScenarioRunner& runner);
CheckReport check_variance_identity(ScenarioRunner& runner);
CheckReport check_sup_identity(ScenarioRunner& runner);
CheckReport check_gaussian_exactness(ScenarioRunner& runner);

/// Fitted tail-formula constant for a prepared sample set; exposed for the
/// nested-prefix monotonicity property.
CheckReport fit_tail_constant(const SampleSet& epsilon, std::span<const double> s,
                              std::span<const double> t_grid, const Tolerances& tol);

/// Report body; contains no timestamps, so equal inputs give equal bytes.
std::string report_json(const Scenario& scenario, const std::vector<CheckReport>& reports);

/// Writes report.json, one <check_id>.csv per check and theorem21_plot.tsv
/// when that check ran. Throws IoError.
void write_report(const Scenario& scenario, const std::vector<CheckReport>& reports,
                  const std::filesystem::path& dir);

struct RunResult {
  std::vector<CheckReport> reports;
  int exit_status = 0;  ///< 0 iff every conclusive check passed, else 1
};

RunResult run_scenario(const std::filesystem::path& config_path,
                       const std::filesystem::path& report_dir, unsigned workers = 0,
                       std::optional<std::uint64_t> fallback_seed = std::nullopt);

}  // namespace nctails

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nctails/io.hpp"
#include "nctails/matrix.hpp"
#include "nctails/sampling.hpp"
#include "nctails/sequences.hpp"
#include "nctails/series.hpp"
#include "nctails/stats.hpp"
#include "nctails/verify.hpp"
#include "support.hpp"

using namespace nctails;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarioDir = NCTAILS_SCENARIO_DIR;
const std::vector<std::string> kStandard{"commutative", "oneblock16", "mixed"};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

// Sample sets are shared between criteria; each scenario is run at its own
// trial count (1e5 for all bundled scenarios).
class Scenarios {
 public:
  ScenarioRunner& runner(const std::string& name) {
    auto it = runners_.find(name);
    if (it == runners_.end()) {
      auto r = std::make_unique<ScenarioRunner>(load_scenario(kScenarioDir / (name + ".json")), 0);
      it = runners_.emplace(name, std::move(r)).first;
    }
    return *it->second;
  }

 private:
  std::map<std::string, std::unique_ptr<ScenarioRunner>> runners_;
};

double sq_norm(std::span<const double> s) {
  double acc = 0.0;
  for (double v : s) acc += v * v;
  return acc;
}

double l1(std::span<const double> s) {
  double acc = 0.0;
  for (double v : s) acc += std::abs(v);
  return acc;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void variance_identity(Scenarios& sc, Outcome& out) {
  for (const auto& name : kStandard) {
    ScenarioRunner& r = sc.runner(name);
    const double want = sq_norm(r.model().s());
    const auto& x = r.samples(SeriesKind::epsilon()).samples;
    const double ratio = stats::variance(x) / want;
    out.detail << " " << name << ":var/||s||2^2=" << fmt(ratio);
    out.require(r.samples(SeriesKind::epsilon()).trials == 100000, name + " trials = 1e5");
    out.require(ratio >= 0.95 && ratio <= 1.05, name + " ratio in [0.95, 1.05]");
    if (name == "mixed") out.require(std::abs(want - 19.0) <= 1e-12, "mixed ||s||_2^2 = 19");
  }
}

void sup_identity(Scenarios& sc, Outcome& out) {
  for (const auto& name : kStandard) {
    ScenarioRunner& r = sc.runner(name);
    const double bound = l1(r.model().s());
    const auto& x = r.samples(SeriesKind::epsilon()).samples;
    const double top = *std::max_element(x.begin(), x.end());
    out.detail << " " << name << ":max/||s||1=" << fmt(top / bound);
    out.require(top <= bound * (1 + 1e-9), name + " samples <= ||s||_1");
    const double attained = test_hooks::evaluate_with_identity_rotations(r.model().blocks());
    out.require(std::abs(attained - bound) <= 1e-12 * bound, name + " identity rotations attain ||s||_1");
  }
  const std::vector<BlockSpec> diag{BlockSpec::from_matrix(Matrix{{2, 0, 0}, {0, 0.5, 0}, {0, 0, 0}}),
                                    BlockSpec::from_matrix(Matrix{{1.25}})};
  // 3 * 2.5 + 1.25
  out.require(test_hooks::evaluate_with_identity_rotations(diag) == 8.75, "explicit diagonal blocks attain 8.75");
}

void gaussian_exactness(Scenarios& sc, Outcome& out) {
  for (const auto& name : kStandard) {
    ScenarioRunner& r = sc.runner(name);
    const double sigma = std::sqrt(sq_norm(r.model().s()));
    const auto& x = r.samples(SeriesKind::gauss()).samples;
    const double ks = stats::ks_distance(x, [sigma](double v) { return stats::normal_cdf(v / sigma); });
    out.detail << " " << name << ":KS=" << fmt(ks);
    out.require(ks <= 0.01, name + " KS <= 0.01");
  }
}

void tail_formula(Scenarios& sc, Outcome& out) {
  for (const auto& name : kStandard) {
    ScenarioRunner& r = sc.runner(name);
    const Scenario& s = r.scenario();
    out.require(s.t_grid == std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5}, name + " t_grid");
    out.require(s.tolerances.censor_count == 10.0, name + " censoring floor 10/trials");
    const CheckReport rep = check_theorem21(r);
    const double alpha = rep.fitted_constants.at("alpha");
    out.detail << " " << name << ":alpha=" << fmt(alpha);
    out.require(rep.passed && !rep.inconclusive, name + " check passes");
    out.require(alpha <= 10.0, name + " alpha <= 10");
  }
}

void commutative_comparison(Scenarios& sc, Outcome& out) {
  for (const auto& name : kStandard) {
    ScenarioRunner& r = sc.runner(name);
    const CheckReport rep = check_corollary22(r);
    const double lo = rep.fitted_constants.at("ratio_min");
    const double hi = rep.fitted_constants.at("ratio_max");
    out.detail << " " << name << ":ratios=[" << fmt(lo) << "," << fmt(hi) << "]";
    out.require(lo >= 0.2 && hi <= 5.0, name + " ratios in [1/5, 5]");
    out.require(rep.passed, name + " check passes");
    if (name == "commutative") {
      out.require(rep.fitted_constants.at("ci_contains_one") == 1.0, "commutative CI contains 1");
    }
  }
}

void moment_band(Scenarios& sc, Outcome& out) {
  const std::vector<double> ps{1, 2, 4, 8, 16};
  for (const auto& name : kStandard) {
    ScenarioRunner& r = sc.runner(name);
    const auto& x = r.samples(SeriesKind::epsilon()).samples;
    double lo = INFINITY;
    double hi = 0.0;
    for (double p : ps) {
      double acc = 0.0;
      for (double v : x) acc += std::pow(std::abs(v), p);
      const double ratio = std::pow(acc / x.size(), 1.0 / p) / k12_exact(r.model().s(), std::sqrt(p));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    out.detail << " " << name << ":spread=" << fmt(hi / lo);
    out.require(hi / lo <= 8.0, name + " spread <= 8");
  }
}

void k_functional(Outcome& out) {
  std::mt19937_64 gen(7001);
  std::uniform_real_distribution<double> t_dist(0.05, 4.0);
  double worst_oracle = 0.0;
  for (int i = 0; i < 40; ++i) {
    const auto a = testing_support::abs_normal_sequence(gen, 1 + i % 4);
    const double t = t_dist(gen);
    worst_oracle = std::max(worst_oracle, std::abs(k12_exact(a, t) - testing_support::brute_force_k(a, t)));
  }
  out.detail << " oracle_max_abs_err=" << fmt(worst_oracle);
  out.require(worst_oracle <= 1e-2, "brute-force oracle within 1e-2");

  std::uniform_int_distribution<std::size_t> len(1, 64);
  double worst_ratio = 1.0;
  bool lower_ok = true;
  for (int i = 0; i < 1000; ++i) {
    const auto a = testing_support::abs_normal_sequence(gen, len(gen));
    for (double t : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
      const double ke = k12_exact(a, t);
      const double kh = k12_holmstedt(a, t);
      lower_ok = lower_ok && ke <= kh * (1 + 1e-12);
      worst_ratio = std::max(worst_ratio, kh / ke);
    }
  }
  out.detail << " holmstedt/exact_max=" << fmt(worst_ratio);
  out.require(lower_ok, "k_exact <= k_holmstedt");
  out.require(worst_ratio <= 4.0, "k_holmstedt <= 4 k_exact");
}

void haar_sampler(Outcome& out) {
  double residual = 0.0;
  for (std::size_t d : {1u, 2u, 3u, 4u, 8u, 16u, 32u}) {
    RngSubstream s(8001, {d});
    for (int i = 0; i < 200; ++i) {
      const Matrix q = haar_orthogonal(d, s);
      const Matrix e = q.transpose() * q - Matrix::identity(d);
      for (double v : e.data()) residual = std::max(residual, std::abs(v));
    }
  }
  out.detail << " residual=" << fmt(residual);
  out.require(residual <= 1e-10, "orthogonality residual <= 1e-10");

  RngSubstream s1(8002, {1});
  const int n = 10000;
  int positive = 0;
  for (int i = 0; i < n; ++i) positive += haar_orthogonal(1, s1)(0, 0) > 0;
  const double freq = static_cast<double>(positive) / n;
  out.detail << " d1_sign_freq=" << fmt(freq);
  out.require(std::abs(freq - 0.5) <= 0.02, "d=1 sign frequency 0.5 +- 0.02");

  std::mt19937_64 gen(8003);
  for (std::size_t d : {2u, 4u}) {
    const Matrix u = testing_support::gram_schmidt_orthogonal(gen, d);
    RngSubstream a(8004, {d, 0});
    RngSubstream b(8004, {d, 1});
    std::vector<double> rotated(10000);
    std::vector<double> plain(10000);
    for (std::size_t i = 0; i < rotated.size(); ++i) {
      rotated[i] = (u * haar_orthogonal(d, a))(0, 0);
      plain[i] = haar_orthogonal(d, b)(0, 0);
    }
    const double ks = stats::ks_two_sample_distance(rotated, plain);
    const double crit = stats::ks_two_sample_critical(rotated.size(), plain.size(), 0.01);
    out.detail << " d" << d << "_KS=" << fmt(ks) << "/" << fmt(crit);
    out.require(ks <= crit, "left invariance KS at 0.01, d=" + std::to_string(d));
  }
}

void gaussian_norm_shape(Outcome& out) {
  for (std::size_t d : {1u, 2u, 4u, 8u, 16u, 32u, 64u}) {
    RngSubstream s(9001, {d});
    double sum = 0.0;
    for (int i = 0; i < 1000; ++i) sum += operator_norm(gaussian_matrix(d, s));
    const double mean = sum / 1000;
    out.detail << " E||G||(d=" << d << ")=" << fmt(mean);
    out.require(mean >= 1.0 && mean <= 3.0, "E||G|| in [1, 3] at d=" + std::to_string(d));
  }
  double previous = 1.0;
  for (std::size_t d : {2u, 8u, 32u}) {
    RngSubstream s(9002, {d});
    int above = 0;
    for (int i = 0; i < 10000; ++i) above += operator_norm(gaussian_matrix(d, s)) > 3.0;
    const double p = above / 10000.0;
    out.detail << " Pr(||G||>3,d=" << d << ")=" << fmt(p);
    out.require(p <= previous, "Pr(||G|| > 3) nonincreasing at d=" + std::to_string(d));
    previous = p;
  }
}

void determinism(Outcome& out) {
  const fs::path root = fs::temp_directory_path() / "nctails_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config = kScenarioDir / "mixed.json";
  const Scenario sc = load_scenario(config);
  const SeriesModel model(sc.blocks);
  bool same_samples = true;
  for (const SeriesKind& kind : {SeriesKind::epsilon(), SeriesKind::gauss_star(sc.lambda)}) {
    std::vector<std::string> bodies;
    for (unsigned workers : {1u, 1u, 2u, 5u}) {
      const fs::path p = root / ("samples_" + std::to_string(bodies.size()) + ".csv");
      io::write_samples_csv(monte_carlo(model, kind, sc.trials, sc.master_seed, workers), p);
      bodies.push_back(io::read_text_file(p));
    }
    same_samples = same_samples && std::all_of(bodies.begin(), bodies.end(),
                                               [&](const std::string& b) { return b == bodies[0]; });
  }
  out.require(same_samples, "sample CSVs byte-identical");

  run_scenario(config, root / "r1", 1);
  run_scenario(config, root / "r1b", 1);
  run_scenario(config, root / "r3", 3);
  std::size_t compared = 0;
  bool same_reports = true;
  for (const auto& entry : fs::directory_iterator(root / "r1")) {
    const auto f = entry.path().filename();
    const std::string a = io::read_text_file(root / "r1" / f);
    same_reports = same_reports && a == io::read_text_file(root / "r1b" / f) &&
                   a == io::read_text_file(root / "r3" / f);
    ++compared;
  }
  out.detail << " report_files=" << compared;
  out.require(compared >= 8, "report directory has the report and every table");
  out.require(same_reports, "report bodies byte-identical");
}

}  // namespace

int main() {
  Scenarios scenarios;
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"variance identity", [&](Outcome& o) { variance_identity(scenarios, o); }},
      {"sup identity", [&](Outcome& o) { sup_identity(scenarios, o); }},
      {"gaussian exactness", [&](Outcome& o) { gaussian_exactness(scenarios, o); }},
      {"tail formula alpha fit", [&](Outcome& o) { tail_formula(scenarios, o); }},
      {"commutative quantile comparison", [&](Outcome& o) { commutative_comparison(scenarios, o); }},
      {"moment band", [&](Outcome& o) { moment_band(scenarios, o); }},
      {"K-functional correctness", k_functional},
      {"Haar sampler soundness", haar_sampler},
      {"Gaussian matrix norm shape", gaussian_norm_shape},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ":"
              << out.detail.str() << " (" << fmt(secs) << "s)" << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}

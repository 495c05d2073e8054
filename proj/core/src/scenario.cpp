#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "nctails/error.hpp"
#include "nctails/io.hpp"
#include "nctails/verify.hpp"

namespace nctails {
namespace {

using nlohmann::json;

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

double positive_at(const json& j, const std::string& path) {
  const double v = number_at(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "expected a positive number");
  return v;
}

std::size_t positive_int_at(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1) {
    throw ConfigError(path, "expected a positive integer");
  }
  return static_cast<std::size_t>(j.get<long long>());
}

std::vector<double> number_array_at(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number_at(j[i], index_path(path, i)));
  return out;
}

void reject_unknown_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      throw ConfigError(path.empty() ? item.key() : path + "." + item.key(), "unknown field");
    }
  }
}

BlockSpec parse_block(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown_keys(j, path, {"d", "singular_values", "matrix"});
  if (!j.contains("d")) throw ConfigError(path + ".d", "missing required field");
  const std::size_t d = positive_int_at(j["d"], path + ".d");
  const bool has_sv = j.contains("singular_values");
  const bool has_matrix = j.contains("matrix");
  if (has_sv == has_matrix) {
    throw ConfigError(path, "exactly one of \"singular_values\" or \"matrix\" is required");
  }
  if (has_sv) {
    const std::string sv_path = path + ".singular_values";
    std::vector<double> sv = number_array_at(j["singular_values"], sv_path);
    if (sv.size() != d) throw ConfigError(sv_path, "expected " + std::to_string(d) + " values");
    for (std::size_t i = 0; i < sv.size(); ++i) {
      if (sv[i] < 0.0) throw ConfigError(index_path(sv_path, i), "singular values must be nonnegative");
    }
    return BlockSpec::from_singular_values(d, std::move(sv));
  }
  const std::string m_path = path + ".matrix";
  const json& rows = j["matrix"];
  if (!rows.is_array() || rows.size() != d) {
    throw ConfigError(m_path, "expected " + std::to_string(d) + " rows");
  }
  std::vector<double> data;
  data.reserve(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> row = number_array_at(rows[i], index_path(m_path, i));
    if (row.size() != d) throw ConfigError(index_path(m_path, i), "expected " + std::to_string(d) + " entries");
    data.insert(data.end(), row.begin(), row.end());
  }
  return BlockSpec::from_matrix(Matrix(d, std::move(data)));
}

std::uint64_t parse_seed_field(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<long long>() < 0) throw ConfigError("seed", "expected a nonnegative 64-bit integer");
    return static_cast<std::uint64_t>(j.get<long long>());
  }
  if (j.is_string()) {
    try {
      return parse_seed(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("seed", e.what());
    }
  }
  throw ConfigError("seed", "expected an integer or a decimal/0x-hex string");
}

Tolerances parse_tolerances(const json& j) {
  if (!j.is_object()) throw ConfigError("tolerances", "expected an object");
  Tolerances tol;
  const std::map<std::string, double*> fields{
      {"alpha_max", &tol.alpha_max},     {"c22", &tol.c22},
      {"c23", &tol.c23},                 {"parity_band", &tol.parity_band},
      {"censor_count", &tol.censor_count}, {"variance_rel", &tol.variance_rel},
      {"ks_max", &tol.ks_max},           {"holmstedt_factor", &tol.holmstedt_factor},
  };
  for (const auto& item : j.items()) {
    const auto it = fields.find(item.key());
    if (it == fields.end()) throw ConfigError("tolerances." + item.key(), "unknown tolerance");
    *it->second = positive_at(item.value(), "tolerances." + item.key());
  }
  if (tol.alpha_max < 1.0) throw ConfigError("tolerances.alpha_max", "must be >= 1");
  return tol;
}

bool needs_tail_trials(const std::string& id) {
  return id == "theorem21" || id == "corollary22" || id == "gaussian_parity";
}

}  // namespace

const std::vector<std::string>& known_check_ids() {
  static const std::vector<std::string> ids{
      "variance_identity", "sup_identity",    "gaussian_exactness", "theorem21",
      "corollary22",       "corollary23",     "gaussian_parity",
  };
  return ids;
}

Scenario parse_scenario(const std::string& json_text, std::optional<std::uint64_t> fallback_seed) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("<root>", "expected a JSON object");
  reject_unknown_keys(root, "", {"name", "blocks", "trials", "seed", "t_grid", "lambda", "checks",
                                 "tolerances", "p_grid", "orlicz"});

  Scenario sc;
  if (!root.contains("name") || !root["name"].is_string()) {
    throw ConfigError("name", "expected a string");
  }
  sc.name = root["name"].get<std::string>();

  if (!root.contains("blocks") || !root["blocks"].is_array() || root["blocks"].empty()) {
    throw ConfigError("blocks", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < root["blocks"].size(); ++i) {
    sc.blocks.push_back(parse_block(root["blocks"][i], index_path("blocks", i)));
  }

  if (root.contains("trials")) sc.trials = positive_int_at(root["trials"], "trials");

  if (root.contains("seed")) {
    sc.master_seed = parse_seed_field(root["seed"]);
  } else if (fallback_seed) {
    sc.master_seed = *fallback_seed;
  } else {
    throw ConfigError("seed", "missing (set it in the config or via NC_TAILS_SEED)");
  }

  if (root.contains("t_grid")) {
    sc.t_grid = number_array_at(root["t_grid"], "t_grid");
    for (std::size_t i = 0; i < sc.t_grid.size(); ++i) {
      if (!(sc.t_grid[i] > 0.0)) throw ConfigError(index_path("t_grid", i), "expected a positive number");
      if (i > 0 && !(sc.t_grid[i] > sc.t_grid[i - 1])) {
        throw ConfigError(index_path("t_grid", i), "t_grid must be strictly increasing");
      }
    }
  }

  if (root.contains("lambda")) sc.lambda = positive_at(root["lambda"], "lambda");

  if (root.contains("checks")) {
    const json& checks = root["checks"];
    if (!checks.is_array()) throw ConfigError("checks", "expected an array of check ids");
    const auto& known = known_check_ids();
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const std::string path = index_path("checks", i);
      if (!checks[i].is_string()) throw ConfigError(path, "expected a string");
      const std::string id = checks[i].get<std::string>();
      if (std::find(known.begin(), known.end(), id) == known.end()) {
        throw ConfigError(path, "unknown check id \"" + id + "\"");
      }
      if (needs_tail_trials(id) && sc.trials < 10000) {
        throw ConfigError("trials", "check \"" + id + "\" needs at least 10000 trials");
      }
      sc.checks.push_back(id);
    }
  }

  if (root.contains("tolerances")) sc.tolerances = parse_tolerances(root["tolerances"]);

  if (root.contains("p_grid")) {
    sc.p_grid = number_array_at(root["p_grid"], "p_grid");
    for (std::size_t i = 0; i < sc.p_grid.size(); ++i) {
      if (!(sc.p_grid[i] >= 1.0)) throw ConfigError(index_path("p_grid", i), "expected p >= 1");
    }
  }

  if (root.contains("orlicz")) {
    const json& list = root["orlicz"];
    if (!list.is_array()) throw ConfigError("orlicz", "expected an array");
    sc.orlicz.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = index_path("orlicz", i);
      if (!list[i].is_object() || !list[i].contains("p")) throw ConfigError(path, "expected {\"p\": ..., \"r\": ...}");
      reject_unknown_keys(list[i], path, {"p", "r"});
      OrliczComparison cmp;
      cmp.p = number_at(list[i]["p"], path + ".p");
      if (!(cmp.p > 2.0)) throw ConfigError(path + ".p", "expected p > 2");
      if (list[i].contains("r")) cmp.r = positive_at(list[i]["r"], path + ".r");
      sc.orlicz.push_back(cmp);
    }
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> fallback_seed) {
  return parse_scenario(io::read_text_file(path), fallback_seed);
}

}  // namespace nctails

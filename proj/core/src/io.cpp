#include "nctails/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "nctails/error.hpp"

namespace nctails::io {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ParseError(line, "malformed number \"" + std::string(text) + "\"");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

RealSequence parse_sequence(std::istream& in) {
  RealSequence out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    out.push_back(parse_number(s, line));
  }
  return out;
}

RealSequence read_sequence_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sequence file " + path.string());
  try {
    return parse_sequence(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
}

std::vector<double> read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open samples file " + path.string());
  try {
    return parse_samples(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
}

std::vector<double> parse_samples(std::istream& in) {
  std::vector<double> out;
  std::string raw;
  std::size_t line = 0;
  std::ptrdiff_t column = -1;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = s.find(',', start);
      fields.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (column < 0) {
      // Header row, or the first data row of a single-column file.
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "value") column = static_cast<std::ptrdiff_t>(i);
      }
      if (column >= 0) continue;
      if (fields.size() != 1) throw ParseError(line, "expected a `value` column header");
      column = 0;
    }
    if (static_cast<std::size_t>(column) >= fields.size()) throw ParseError(line, "missing value field");
    out.push_back(parse_number(fields[static_cast<std::size_t>(column)], line));
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_samples_csv(const SampleSet& set, const std::filesystem::path& path) {
  std::string body = "trial,value\n";
  body.reserve(set.samples.size() * 24);
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    body += std::to_string(i);
    body += ',';
    body += format_double(set.samples[i]);
    body += '\n';
  }
  write_text_file(path, body);
}

void write_sample_metadata(const SampleSet& set, const std::filesystem::path& path) {
  nlohmann::json meta;
  meta["kind"] = set.kind.name();
  if (set.kind.truncation()) meta["lambda"] = set.kind.truncation()->lambda;
  meta["seed"] = set.master_seed;
  meta["blocks_digest"] = set.blocks_digest;
  meta["trials"] = set.trials;
  meta["truncated_trials"] = set.truncated_trials;
  write_text_file(path, meta.dump(2) + "\n");
}

}  // namespace nctails::io

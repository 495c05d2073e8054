#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "nctails/sequences.hpp"
#include "nctails/series.hpp"

namespace nctails::io {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// One decimal number per line; blank lines and lines starting with '#'
/// are skipped. Throws ParseError with the 1-based line number.
RealSequence parse_sequence(std::istream& in);
RealSequence read_sequence_file(const std::filesystem::path& path);

/// Reads the `value` column of a `trial,value` CSV, or a headerless
/// single-column file.
std::vector<double> read_samples_csv(const std::filesystem::path& path);
std::vector<double> parse_samples(std::istream& in);

/// `trial,value` header and one row per trial in trial order.
void write_samples_csv(const SampleSet& set, const std::filesystem::path& path);

/// JSON sidecar with kind, lambda, seed, blocks_digest, trials.
void write_sample_metadata(const SampleSet& set, const std::filesystem::path& path);

/// Writes `contents` to `path`, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace nctails::io

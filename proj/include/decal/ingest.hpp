#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace decal {

enum class Split { train, val, test };

Split split_from_string(const std::string& name);
std::string to_string(Split split);

struct SampleRow {
    std::string point_id;
    Split split = Split::train;
    std::vector<double> samples;
    std::optional<double> target;
};

/// Externally produced predictive draws, one row per (point_id, split).
struct SampleTable {
    std::vector<SampleRow> rows;
    std::size_t sample_count = 0;
};

enum class SampleFormat { csv, ndjson };

/// csv for *.csv[.gz], ndjson for *.ndjson / *.jsonl[.gz].
SampleFormat sample_format_from_path(const std::filesystem::path& path);

/// CSV: header point_id,split,s_1..s_S. NDJSON: {"point_id", "split", "samples": [...]} per line.
SampleTable load_samples(const std::filesystem::path& path, SampleFormat format);
SampleTable load_samples(const std::filesystem::path& path);

/// CSV with header point_id,y.
std::map<std::string, double> load_targets(const std::filesystem::path& path);

/// Attaches targets by point_id. Every train/val row must receive one.
void join_targets(SampleTable& table, const std::map<std::string, double>& targets);

/// Canonical CSV: rows sorted by (point_id, split), values with 17 significant digits.
std::string samples_to_csv(const SampleTable& table);
void write_samples_csv(const SampleTable& table, const std::filesystem::path& path);

} // namespace decal

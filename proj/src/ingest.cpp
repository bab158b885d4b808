#include "decal/ingest.hpp"

#include "decal/error.hpp"
#include "decal/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <sstream>
#include <utility>

namespace decal {

namespace {

void validate_table(SampleTable& table)
{
    if (table.rows.empty()) throw FormatError("sample table has no rows");
    table.sample_count = table.rows.front().samples.size();
    for (const auto& row : table.rows)
        if (row.samples.size() != table.sample_count)
            throw FormatError("point " + row.point_id + " has " + std::to_string(row.samples.size()) +
                              " samples, expected " + std::to_string(table.sample_count));
    if (table.sample_count < 2) throw FormatError("each point needs at least two samples");

    std::set<std::pair<Split, std::string>> seen;
    for (const auto& row : table.rows)
        if (!seen.emplace(row.split, row.point_id).second)
            throw ValidationError("duplicate point_id " + row.point_id + " in split " + to_string(row.split));
}

Split parse_split(const std::string& name, std::size_t line)
{
    try {
        return split_from_string(name);
    } catch (const InputError&) {
        throw ParseError("unknown split \"" + name + "\"", line);
    }
}

SampleTable load_csv(const std::string& text)
{
    const auto rows = io::lines(text);
    if (rows.empty()) throw FormatError("empty sample file");
    const auto header = io::split_csv(rows.front());
    if (header.size() < 2 || header[0] != "point_id" || header[1] != "split")
        throw FormatError("sample header must start with point_id,split");

    SampleTable table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].empty()) continue;
        const auto fields = io::split_csv(rows[r]);
        if (fields.size() < 2) throw FormatError("row " + std::to_string(r + 1) + " lacks point_id and split");
        SampleRow row;
        row.point_id = fields[0];
        row.split = parse_split(fields[1], r + 1);
        for (std::size_t c = 2; c < fields.size(); ++c) row.samples.push_back(io::parse_double(fields[c], r + 1));
        table.rows.push_back(std::move(row));
    }
    validate_table(table);
    if (header.size() - 2 != table.sample_count)
        throw FormatError("header declares " + std::to_string(header.size() - 2) + " sample columns but rows have " +
                          std::to_string(table.sample_count));
    return table;
}

SampleTable load_ndjson(const std::string& text)
{
    const auto rows = io::lines(text);
    SampleTable table;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto line = r + 1;
        if (rows[r].find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(rows[r]);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line);
        }
        if (!j.is_object() || !j.contains("point_id") || !j.contains("split") || !j.contains("samples"))
            throw FormatError("line " + std::to_string(line) + " must have point_id, split and samples");
        SampleRow row;
        row.point_id = j.at("point_id").is_string() ? j.at("point_id").get<std::string>() : j.at("point_id").dump();
        if (!j.at("split").is_string()) throw ParseError("split must be a string", line);
        row.split = parse_split(j.at("split").get<std::string>(), line);
        if (!j.at("samples").is_array()) throw ParseError("samples must be an array", line);
        for (const auto& s : j.at("samples")) {
            if (!s.is_number()) throw ParseError("non-numeric sample " + s.dump(), line);
            row.samples.push_back(s.get<double>());
        }
        table.rows.push_back(std::move(row));
    }
    validate_table(table);
    return table;
}

} // namespace

Split split_from_string(const std::string& name)
{
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    throw InputError("unknown split \"" + name + "\"");
}

std::string to_string(Split split)
{
    switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "test";
}

SampleFormat sample_format_from_path(const std::filesystem::path& path)
{
    auto p = path;
    if (p.extension() == ".gz") p = p.stem();
    const auto ext = p.extension().string();
    if (ext == ".csv") return SampleFormat::csv;
    if (ext == ".ndjson" || ext == ".jsonl") return SampleFormat::ndjson;
    throw InputError("cannot infer sample format from " + path.string());
}

SampleTable load_samples(const std::filesystem::path& path, SampleFormat format)
{
    const auto text = io::read_text(path);
    return format == SampleFormat::csv ? load_csv(text) : load_ndjson(text);
}

SampleTable load_samples(const std::filesystem::path& path) { return load_samples(path, sample_format_from_path(path)); }

std::map<std::string, double> load_targets(const std::filesystem::path& path)
{
    const auto rows = io::lines(io::read_text(path));
    if (rows.empty() || rows.front() != "point_id,y") throw FormatError("target header must be point_id,y");
    std::map<std::string, double> targets;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].empty()) continue;
        const auto f = io::split_csv(rows[r]);
        if (f.size() != 2) throw FormatError("target row " + std::to_string(r + 1) + " must have 2 fields");
        if (!targets.emplace(f[0], io::parse_double(f[1], r + 1)).second)
            throw ValidationError("duplicate target for point_id " + f[0]);
    }
    return targets;
}

void join_targets(SampleTable& table, const std::map<std::string, double>& targets)
{
    for (auto& row : table.rows) {
        const auto it = targets.find(row.point_id);
        if (it != targets.end()) {
            row.target = it->second;
        } else if (row.split != Split::test) {
            throw ValidationError("missing target for " + to_string(row.split) + " point " + row.point_id);
        }
    }
}

std::string samples_to_csv(const SampleTable& table)
{
    std::vector<const SampleRow*> rows;
    for (const auto& r : table.rows) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const SampleRow* a, const SampleRow* b) {
        return std::tie(a->point_id, a->split) < std::tie(b->point_id, b->split);
    });

    std::ostringstream out;
    out << "point_id,split";
    for (std::size_t s = 0; s < table.sample_count; ++s) out << ",s_" << s + 1;
    out << '\n';
    for (const auto* r : rows) {
        out << r->point_id << ',' << to_string(r->split);
        for (double v : r->samples) out << ',' << io::format_double(v);
        out << '\n';
    }
    return out.str();
}

void write_samples_csv(const SampleTable& table, const std::filesystem::path& path)
{
    io::write_atomic(path, samples_to_csv(table));
}

} // namespace decal

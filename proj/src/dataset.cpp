#include "decal/dataset.hpp"

#include "decal/error.hpp"
#include "decal/io.hpp"

#include <sstream>

namespace decal {

void validate(const Dataset& data)
{
    if (data.y.empty()) throw InputError("dataset must contain at least one point");
    if (static_cast<std::size_t>(data.x.rows()) != data.y.size() || data.ids.size() != data.y.size())
        throw InputError("dataset ids, covariates and targets differ in length");
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices)
{
    Dataset out;
    out.x.resize(static_cast<Eigen::Index>(indices.size()), data.x.cols());
    out.ids.reserve(indices.size());
    out.y.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto i = indices[r];
        if (i >= data.size()) throw InputError("subset index out of range");
        out.x.row(static_cast<Eigen::Index>(r)) = data.x.row(static_cast<Eigen::Index>(i));
        out.ids.push_back(data.ids[i]);
        out.y.push_back(data.y[i]);
    }
    return out;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path)
{
    validate(data);
    std::ostringstream out;
    out << "point_id";
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) out << ",x_" << c + 1;
    out << ",y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.ids[i];
        for (Eigen::Index c = 0; c < data.x.cols(); ++c)
            out << ',' << io::format_double(data.x(static_cast<Eigen::Index>(i), c));
        out << ',' << io::format_double(data.y[i]) << '\n';
    }
    io::write_atomic(path, out.str());
}

Dataset read_dataset_csv(const std::filesystem::path& path)
{
    const auto rows = io::lines(io::read_text(path));
    if (rows.empty()) throw FormatError("empty dataset file " + path.string());
    const auto header = io::split_csv(rows.front());
    if (header.size() < 2 || header.front() != "point_id" || header.back() != "y")
        throw FormatError("dataset header must be point_id,x_1..x_d,y");
    const auto d = header.size() - 2;

    Dataset data;
    data.x.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(d));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto fields = io::split_csv(rows[r]);
        if (fields.size() != header.size())
            throw FormatError("dataset row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(header.size()));
        data.ids.push_back(fields.front());
        for (std::size_t c = 0; c < d; ++c)
            data.x(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) = io::parse_double(fields[c + 1], r + 1);
        data.y.push_back(io::parse_double(fields.back(), r + 1));
    }
    validate(data);
    return data;
}

} // namespace decal

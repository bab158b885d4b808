#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace decal {

/// Covariates (one row per point) with aligned targets.
struct Dataset {
    std::vector<std::string> ids;
    Eigen::MatrixXd x;
    std::vector<double> y;

    std::size_t size() const noexcept { return y.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

/// Throws InputError unless ids, rows of x and y agree in length and N >= 1.
void validate(const Dataset& data);

/// Rows of `data` in the given order (indices may repeat).
Dataset subset(const Dataset& data, std::span<const std::size_t> indices);

/// CSV with header point_id,x_1..x_d,y and 17-significant-digit values.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

} // namespace decal

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "cmrf/forward.hpp"
#include "cmrf/lattice.hpp"
#include "cmrf/samplers.hpp"

namespace cmrf {

/// Shortest round-trip decimal form of a double (deterministic output).
std::string format_double(double v);

/// 1D fields as "x,value" rows; 2D fields as a row-major value matrix.
void write_field_csv(const std::filesystem::path& path, const Field& f);

/// Named columns of equal length.
void write_columns_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& names,
                       const std::vector<Eigen::VectorXd>& columns);

void write_measurement_json(const std::filesystem::path& path, const Measurement& m);
Measurement read_measurement_json(const std::filesystem::path& path);

/// Samples as flat little-endian 64-bit floats (row-major) next to a JSON
/// sidecar holding the run metadata.
void write_chain(const std::filesystem::path& bin_path, const Chain& chain);
Chain read_chain(const std::filesystem::path& bin_path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace cmrf

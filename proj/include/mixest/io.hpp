#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "mixest/grid.hpp"
#include "mixest/selection.hpp"

namespace mixest {

using Json = nlohmann::json;

/// One observation per line; blank lines and lines starting with '#' are skipped.
Sample read_sample(const std::filesystem::path& path);
std::string format_sample(const Sample& s);

/// {"atoms": [[...], ...], "weights": [...]}. Reading canonicalizes and
/// tolerates a weight-sum error up to 1e-6.
Json to_json(const MixingMeasure& g);
MixingMeasure measure_from_json(const Json& j);

Json to_json(const FitResult& r);
Json to_json(const SelectionResult& r);

/// "x,weight" rows.
std::string grid_csv(const QuadratureGrid& grid);

/// %.17g, enough to round-trip a double.
std::string format_double(double v);

/// Write via a temporary file in the same directory and rename over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace mixest

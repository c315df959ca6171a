#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include <json.hpp>

#include "entangled/graph.hpp"

namespace entangled {

using Json = nlohmann::json;

/// Header row of ROI names, then one comma-separated row per time point.
TimeSeriesMatrix read_time_series_csv(std::istream& in);
TimeSeriesMatrix read_time_series_csv(const std::filesystem::path& path);

/// {"n": int, "edges": [[i, j, w], ...], "features": [[...], ...]} with i < j.
Json graph_to_json(const BrainGraph& g);
BrainGraph graph_from_json(const Json& j);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json dataset_to_json(const LabeledDataset& ds);
LabeledDataset dataset_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline; creates parent directories.
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace entangled

#include "entangled/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "entangled/error.hpp"

namespace entangled {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (t.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::InvalidInput, "bad numeric cell at row " + std::to_string(row) +
                                             ", column " + std::to_string(col) + ": '" + t + "'");
  }
  return v;
}

}  // namespace

TimeSeriesMatrix read_time_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::InvalidInput, "empty CSV");
  }
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
    line = line.substr(3);  // UTF-8 BOM
  }
  std::vector<std::string> names;
  for (auto& c : split_csv_line(line)) {
    names.push_back(trim(c));
  }
  std::vector<std::vector<double>> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) {
      continue;
    }
    auto cells = split_csv_line(line);
    if (cells.size() != names.size()) {
      throw Error(ErrorKind::InvalidInput, "row " + std::to_string(row) + " has " +
                                               std::to_string(cells.size()) + " cells, expected " +
                                               std::to_string(names.size()));
    }
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      values.push_back(parse_real(cells[c], row, c));
    }
    rows.push_back(std::move(values));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      m(r, c) = rows[r][c];
    }
  }
  return TimeSeriesMatrix(std::move(m), std::move(names));
}

TimeSeriesMatrix read_time_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  }
  return read_time_series_csv(in);
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) {
    throw Error(ErrorKind::InvalidInput, "matrix must be an array of rows");
  }
  const auto rows = j.size();
  const auto cols = rows == 0 ? 0 : j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) {
      throw Error(ErrorKind::InvalidInput, "ragged matrix rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

Json graph_to_json(const BrainGraph& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    edges.push_back(Json::array({e.i, e.j, e.weight}));
  }
  return Json{{"n", g.node_count()}, {"edges", std::move(edges)}, {"features", matrix_to_json(g.features())}};
}

BrainGraph graph_from_json(const Json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      Edge edge{e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>()};
      if (edge.i >= edge.j) {
        throw Error(ErrorKind::InvalidGraph, "edge entries must satisfy i < j");
      }
      edges.push_back(edge);
    }
    Matrix features = j.contains("features") ? matrix_from_json(j.at("features"))
                                             : Matrix(Matrix::Identity(n, n));
    return BrainGraph::from_edges(n, edges, std::move(features));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("graph JSON: ") + e.what());
  }
}

Json dataset_to_json(const LabeledDataset& ds) {
  Json graphs = Json::array();
  for (std::size_t g = 0; g < ds.size(); ++g) {
    Json entry = graph_to_json(ds.graphs[g]);
    if (g < ds.metadata.size()) {
      entry["modules"] = ds.metadata[g].modules;
      entry["hubs"] = ds.metadata[g].hubs;
    }
    graphs.push_back(std::move(entry));
  }
  return Json{{"num_classes", ds.num_classes},
              {"labels", ds.labels},
              {"splits", {{"train", ds.splits.train}, {"val", ds.splits.val}, {"test", ds.splits.test}}},
              {"graphs", std::move(graphs)}};
}

LabeledDataset dataset_from_json(const Json& j) {
  LabeledDataset ds;
  try {
    ds.num_classes = j.at("num_classes").get<std::size_t>();
    ds.labels = j.at("labels").get<std::vector<std::size_t>>();
    ds.splits.train = j.at("splits").at("train").get<std::vector<std::size_t>>();
    ds.splits.val = j.at("splits").at("val").get<std::vector<std::size_t>>();
    ds.splits.test = j.at("splits").at("test").get<std::vector<std::size_t>>();
    for (const auto& g : j.at("graphs")) {
      ds.graphs.push_back(graph_from_json(g));
      GraphMetadata meta;
      if (g.contains("modules")) {
        meta.modules = g.at("modules").get<std::vector<std::size_t>>();
      }
      if (g.contains("hubs")) {
        meta.hubs = g.at("hubs").get<std::vector<std::size_t>>();
      }
      ds.metadata.push_back(std::move(meta));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("dataset JSON: ") + e.what());
  }
  ds.validate();
  return ds;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot write " + path.string());
  }
  out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace entangled

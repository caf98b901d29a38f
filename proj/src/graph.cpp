#include "herofilter/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "herofilter/errors.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace herofilter {

namespace {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("missing or unreadable file: " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

json read_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("invalid JSON in " + path.string());
  return j;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("missing or unreadable file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

long parse_int(std::string_view tok, const std::string& ctx) {
  long value = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw FormatError("expected integer in " + ctx + ", got '" + std::string(tok) + "'");
  return value;
}

double parse_double(std::string_view tok, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const std::string s(tok);
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw FormatError("expected number in " + ctx + ", got '" + std::string(tok) + "'");
  }
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::vector<int> parse_split(const json& j, const char* key, int n) {
  if (!j.contains(key) || !j[key].is_array())
    throw FormatError(std::string("splits.json: missing array '") + key + "'");
  std::vector<int> idx;
  for (const auto& v : j[key]) {
    if (!v.is_number_integer()) throw FormatError("splits.json: non-integer index");
    const long i = v.get<long>();
    if (i < 0 || i >= n) throw IndexError("split index out of range: " + std::to_string(i));
    idx.push_back(static_cast<int>(i));
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

// 17 significant digits round-trips IEEE doubles exactly.
void write_double(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

std::vector<Edge> canonicalize_edges(std::vector<Edge> edges) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u == v) continue;
    out.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void validate_graph(const Graph& g) {
  const int n = g.num_nodes;
  if (n <= 0) throw ShapeError("graph must have at least one node");
  for (auto [u, v] : g.edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw IndexError("edge endpoint out of range: (" + std::to_string(u) + "," +
                       std::to_string(v) + ")");
    if (u >= v) throw FormatError("edge list not canonical");
  }
  if (static_cast<int>(g.features.rows) != n)
    throw ShapeError("features.csv row count " + std::to_string(g.features.rows) +
                     " != num_nodes " + std::to_string(n));
  if (static_cast<int>(g.labels.size()) != n)
    throw ShapeError("labels.csv row count " + std::to_string(g.labels.size()) +
                     " != num_nodes " + std::to_string(n));
  for (int y : g.labels)
    if (y < 0 || y >= g.num_classes)
      throw IndexError("label out of range: " + std::to_string(y));
  std::set<int> seen;
  for (const auto* split : {&g.train_idx, &g.val_idx, &g.test_idx}) {
    for (int i : *split) {
      if (i < 0 || i >= n) throw IndexError("split index out of range");
      if (!seen.insert(i).second) throw FormatError("splits overlap at node " + std::to_string(i));
    }
  }
}

std::vector<int> degree_vector(const Graph& g) {
  std::vector<int> deg(g.num_nodes, 0);
  for (auto [u, v] : g.edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

NormalizedAdjacency normalize_adjacency(const Graph& g, NormMode mode) {
  const int n = g.num_nodes;
  Matrix a(n, n);
  for (auto [u, v] : g.edges) {
    a.at(u, v) = 1.0;
    a.at(v, u) = 1.0;
  }
  if (mode == NormMode::sym_selfloop)
    for (int i = 0; i < n; ++i) a.at(i, i) += 1.0;

  Vec dinv_sqrt(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) deg += a.at(i, j);
    dinv_sqrt[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a.at(i, j) *= dinv_sqrt[i] * dinv_sqrt[j];
  return NormalizedAdjacency{std::move(a), mode};
}

Graph load_dataset(const std::string& dir) {
  const fs::path root(dir);
  const json meta = read_json_file(root / "meta.json");
  for (const char* key : {"num_nodes", "num_classes", "feature_dim"})
    if (!meta.contains(key) || !meta[key].is_number_integer())
      throw FormatError(std::string("meta.json: missing integer field '") + key + "'");

  Graph g;
  g.num_nodes = meta["num_nodes"].get<int>();
  g.num_classes = meta["num_classes"].get<int>();
  const int d = meta["feature_dim"].get<int>();
  if (g.num_nodes <= 0 || g.num_classes <= 0 || d <= 0)
    throw FormatError("meta.json: non-positive dimensions");

  std::vector<Edge> raw;
  if (fs::exists(root / "edges.csv")) {
    for (const auto& line : read_lines(root / "edges.csv")) {
      const auto toks = split_csv(line);
      if (toks.size() != 2) throw FormatError("edges.csv: expected 'src,dst' per line");
      const long u = parse_int(toks[0], "edges.csv");
      const long v = parse_int(toks[1], "edges.csv");
      if (u < 0 || u >= g.num_nodes || v < 0 || v >= g.num_nodes)
        throw IndexError("edges.csv: node id out of range");
      raw.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
  } else {
    throw FormatError("missing or unreadable file: " + (root / "edges.csv").string());
  }
  g.edges = canonicalize_edges(std::move(raw));

  const auto feature_lines = read_lines(root / "features.csv");
  if (static_cast<int>(feature_lines.size()) != g.num_nodes)
    throw ShapeError("features.csv row count " + std::to_string(feature_lines.size()) +
                     " != num_nodes " + std::to_string(g.num_nodes));
  g.features = Matrix(g.num_nodes, d);
  for (int i = 0; i < g.num_nodes; ++i) {
    const auto toks = split_csv(feature_lines[i]);
    if (static_cast<int>(toks.size()) != d)
      throw ShapeError("features.csv row " + std::to_string(i) + " has " +
                       std::to_string(toks.size()) + " columns, expected " + std::to_string(d));
    for (int j = 0; j < d; ++j) g.features.at(i, j) = parse_double(toks[j], "features.csv");
  }

  const auto label_lines = read_lines(root / "labels.csv");
  if (static_cast<int>(label_lines.size()) != g.num_nodes)
    throw ShapeError("labels.csv row count " + std::to_string(label_lines.size()) +
                     " != num_nodes " + std::to_string(g.num_nodes));
  g.labels.resize(g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i)
    g.labels[i] = static_cast<int>(parse_int(label_lines[i], "labels.csv"));

  const json splits = read_json_file(root / "splits.json");
  g.train_idx = parse_split(splits, "train", g.num_nodes);
  g.val_idx = parse_split(splits, "val", g.num_nodes);
  g.test_idx = parse_split(splits, "test", g.num_nodes);

  validate_graph(g);
  return g;
}

void save_dataset(const Graph& g, const std::string& dir) {
  validate_graph(g);
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);

  auto open = [&](const char* name) {
    std::ofstream out(root / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (root / name).string());
    return out;
  };

  {
    json meta;
    meta["num_nodes"] = g.num_nodes;
    meta["num_classes"] = g.num_classes;
    meta["feature_dim"] = g.feature_dim();
    auto out = open("meta.json");
    out << meta.dump(2) << "\n";
    if (!out) throw IoError("write failed: meta.json");
  }
  {
    auto out = open("edges.csv");
    for (auto [u, v] : g.edges) out << u << "," << v << "\n";
    if (!out) throw IoError("write failed: edges.csv");
  }
  {
    auto out = open("features.csv");
    for (int i = 0; i < g.num_nodes; ++i) {
      for (int j = 0; j < g.feature_dim(); ++j) {
        if (j) out << ",";
        write_double(out, g.features.at(i, j));
      }
      out << "\n";
    }
    if (!out) throw IoError("write failed: features.csv");
  }
  {
    auto out = open("labels.csv");
    for (int y : g.labels) out << y << "\n";
    if (!out) throw IoError("write failed: labels.csv");
  }
  {
    json splits;
    splits["train"] = g.train_idx;
    splits["val"] = g.val_idx;
    splits["test"] = g.test_idx;
    auto out = open("splits.json");
    out << splits.dump(2) << "\n";
    if (!out) throw IoError("write failed: splits.json");
  }
}

}  // namespace herofilter

#include "gdim/graph_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "gdim/error.hpp"

namespace gdim::io {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t parse_index(std::string_view tok, std::size_t line_no) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad index '" + std::string(tok) + "'");
  return v;
}

double parse_weight(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !(v >= 0.0))
    throw ParseError("line " + std::to_string(line_no) + ": bad weight '" + std::string(tok) + "'");
  return v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void write_weight(std::ostream& out, double w) {
  char buf[32];
  if (std::floor(w) == w && w < 9.0e15)
    std::snprintf(buf, sizeof buf, "%.0f", w);
  else
    std::snprintf(buf, sizeof buf, "%.17g", w);
  out << buf;
}

}  // namespace

RawMatrix parse_edge_list(std::istream& in) {
  RawMatrix raw;
  bool have_dims = false;
  std::size_t max_row = 0, max_col = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    const auto hash = view.find('#');
    if (hash != std::string_view::npos) {
      const auto comment = split_ws(view.substr(hash + 1));
      if (comment.size() == 3 && comment[0] == "dimensions:") {
        raw.rows = parse_index(comment[1], line_no);
        raw.cols = parse_index(comment[2], line_no);
        have_dims = true;
      }
      view = view.substr(0, hash);
    }
    const auto tok = split_ws(view);
    if (tok.empty()) continue;
    if (tok.size() != 2 && tok.size() != 3)
      throw ParseError("line " + std::to_string(line_no) + ": expected 'i j [w]'");
    Triple t{parse_index(tok[0], line_no), parse_index(tok[1], line_no),
             tok.size() == 3 ? parse_weight(tok[2], line_no) : 1.0};
    max_row = std::max(max_row, t.row);
    max_col = std::max(max_col, t.col);
    raw.entries.push_back(t);
  }
  if (!have_dims) {
    if (raw.entries.empty()) throw ParseError("edge list is empty");
    raw.rows = max_row + 1;
    raw.cols = max_col + 1;
  } else if (!raw.entries.empty() && (max_row >= raw.rows || max_col >= raw.cols)) {
    throw ParseError("edge list index exceeds declared dimensions");
  }
  return raw;
}

RawMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  const auto header = split_ws(line);
  if (header.size() != 5 || header[0] != "%%MatrixMarket" || lower(header[1]) != "matrix" ||
      lower(header[2]) != "coordinate")
    throw ParseError("matrix market: expected '%%MatrixMarket matrix coordinate <field> <symmetry>'");
  const std::string field = lower(header[3]);
  const std::string sym = lower(header[4]);
  if (field != "pattern" && field != "integer" && field != "real")
    throw ParseError("matrix market: unsupported field '" + field + "'");
  if (sym != "general" && sym != "symmetric") throw ParseError("matrix market: unsupported symmetry '" + sym + "'");

  RawMatrix raw;
  raw.declared_symmetric = sym == "symmetric";
  std::size_t line_no = 1;
  std::size_t expected = 0;
  bool have_size = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '%') continue;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (!have_size) {
      if (tok.size() != 3) throw ParseError("matrix market: bad size line");
      raw.rows = parse_index(tok[0], line_no);
      raw.cols = parse_index(tok[1], line_no);
      expected = parse_index(tok[2], line_no);
      have_size = true;
      raw.entries.reserve(expected);
      continue;
    }
    const std::size_t want = field == "pattern" ? 2 : 3;
    if (tok.size() != want) throw ParseError("line " + std::to_string(line_no) + ": wrong number of fields");
    const std::size_t i = parse_index(tok[0], line_no);
    const std::size_t j = parse_index(tok[1], line_no);
    if (i == 0 || j == 0 || i > raw.rows || j > raw.cols)
      throw ParseError("line " + std::to_string(line_no) + ": index out of range");
    const double w = field == "pattern" ? 1.0 : parse_weight(tok[2], line_no);
    if (field == "integer" && std::floor(w) != w)
      throw ParseError("line " + std::to_string(line_no) + ": non-integer value in integer matrix");
    raw.entries.push_back({i - 1, j - 1, w});
  }
  if (!have_size) throw ParseError("matrix market: missing size line");
  if (raw.entries.size() != expected)
    throw ParseError("matrix market: expected " + std::to_string(expected) + " entries, found " +
                     std::to_string(raw.entries.size()));
  return raw;
}

RawMatrix read_matrix(const std::string& path, Format format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return format == Format::kEdgeList ? parse_edge_list(in) : parse_matrix_market(in);
}

namespace {

SparseGraph to_graph_unchecked(const RawMatrix& raw, InputMode mode) {
  std::vector<Triple> entries = raw.entries;
  if (raw.declared_symmetric) {
    for (const Triple& t : raw.entries)
      if (t.row != t.col) entries.push_back({t.col, t.row, t.weight});
  }
  switch (mode) {
    case InputMode::kRectangular:
      return from_edge_list(raw.rows, raw.cols, entries, Symmetry::kGeneral);
    case InputMode::kSymmetrize: {
      const std::size_t n = std::max(raw.rows, raw.cols);
      return symmetrize(from_edge_list(n, n, entries, Symmetry::kGeneral));
    }
    case InputMode::kUndirected:
      break;
  }
  if (raw.rows != raw.cols) {
    // Edge lists infer each side independently; an undirected graph is square.
    if (raw.declared_symmetric) throw ParseError("symmetric matrix must be square");
  }
  const std::size_t n = std::max(raw.rows, raw.cols);
  return from_edge_list(n, n, entries, Symmetry::kSymmetric);
}

}  // namespace

SparseGraph to_graph(const RawMatrix& raw, InputMode mode) {
  try {
    return to_graph_unchecked(raw, mode);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

void write_edge_list(std::ostream& out, const SparseGraph& g) {
  out << "# dimensions: " << g.rows() << ' ' << g.cols() << '\n';
  for (const Triple& t : g.triples()) {
    if (g.symmetric() && t.col < t.row) continue;
    out << t.row << ' ' << t.col << ' ';
    write_weight(out, t.weight);
    out << '\n';
  }
}

void write_matrix_market(std::ostream& out, const SparseGraph& g) {
  std::vector<Triple> entries;
  for (const Triple& t : g.triples())
    if (!g.symmetric() || t.row >= t.col) entries.push_back(t);
  // Column-major order within the stored triangle, as most readers expect.
  std::stable_sort(entries.begin(), entries.end(), [](const Triple& a, const Triple& b) { return a.col < b.col; });
  out << "%%MatrixMarket matrix coordinate " << (g.is_integral() ? "integer" : "real") << ' '
      << (g.symmetric() ? "symmetric" : "general") << '\n';
  out << g.rows() << ' ' << g.cols() << ' ' << entries.size() << '\n';
  for (const Triple& t : entries) {
    out << t.row + 1 << ' ' << t.col + 1 << ' ';
    write_weight(out, t.weight);
    out << '\n';
  }
}

Format parse_format(const std::string& name) {
  if (name == "edgelist") return Format::kEdgeList;
  if (name == "matrixmarket") return Format::kMatrixMarket;
  throw std::invalid_argument("unknown format '" + name + "' (expected edgelist or matrixmarket)");
}

}  // namespace gdim::io

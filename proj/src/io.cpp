#include "rprecon/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rprecon/error.hpp"

namespace rprecon::io {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::ifstream open_in(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::ParseError, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::ParseError, "cannot write " + path.string());
  return out;
}

// Next line that is neither blank nor a comment.
bool next_data_line(std::istream &in, std::string &line) {
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t[0] != '%') {
      line = t;
      return true;
    }
  }
  return false;
}

} // namespace

Matrix read_matrix_market(std::istream &in) {
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::ParseError, "empty MatrixMarket stream");
  std::istringstream banner(lower(line));
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix")
    fail(ErrorCode::ParseError, "missing %%MatrixMarket matrix banner");
  if (format != "array" && format != "coordinate")
    fail(ErrorCode::ParseError, "unsupported format '" + format + "'");
  if (field != "real" && field != "integer" && field != "double")
    fail(ErrorCode::ParseError, "unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    fail(ErrorCode::ParseError, "unsupported symmetry '" + symmetry + "'");
  const bool symmetric = symmetry == "symmetric";

  if (!next_data_line(in, line))
    fail(ErrorCode::ParseError, "missing size line");
  std::istringstream size_line(line);
  long long rows = -1, cols = -1, entries = -1;
  size_line >> rows >> cols;
  if (format == "coordinate")
    size_line >> entries;
  if (!size_line || rows < 0 || cols < 0 ||
      (format == "coordinate" && entries < 0))
    fail(ErrorCode::ParseError, "bad size line '" + line + "'");
  if (symmetric && rows != cols)
    fail(ErrorCode::ParseError, "symmetric matrix must be square");

  Matrix m = Matrix::Zero(rows, cols);
  auto read_value = [&](std::istringstream &s) {
    std::string token;
    if (!(s >> token))
      fail(ErrorCode::ParseError, "missing value in '" + line + "'");
    return parse_double(token);
  };

  if (format == "array") {
    for (Index j = 0; j < cols; ++j) {
      for (Index i = symmetric ? j : 0; i < rows; ++i) {
        if (!next_data_line(in, line))
          fail(ErrorCode::ParseError, "array data ends early");
        std::istringstream s(line);
        m(i, j) = read_value(s);
        if (symmetric)
          m(j, i) = m(i, j);
      }
    }
  } else {
    for (long long k = 0; k < entries; ++k) {
      if (!next_data_line(in, line))
        fail(ErrorCode::ParseError, "coordinate data ends early");
      std::istringstream s(line);
      long long i = 0, j = 0;
      if (!(s >> i >> j) || i < 1 || j < 1 || i > rows || j > cols)
        fail(ErrorCode::ParseError, "bad entry '" + line + "'");
      const double v = read_value(s);
      m(i - 1, j - 1) += v;
      if (symmetric && i != j)
        m(j - 1, i - 1) += v;
    }
  }
  return m;
}

Matrix read_matrix_market(const std::filesystem::path &path) {
  auto in = open_in(path);
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream &out, const Matrix &m) {
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      out << format_double(m(i, j)) << '\n';
}

void write_matrix_market(const std::filesystem::path &path, const Matrix &m) {
  auto out = open_out(path);
  write_matrix_market(out, m);
}

std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string &text) {
  const std::string t = trim(text);
  if (t.empty())
    fail(ErrorCode::ParseError, "empty number");
  char *end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    fail(ErrorCode::ParseError, "not a number: '" + t + "'");
  return v;
}

void write_trace_csv(std::ostream &out, const SolveTrace &trace) {
  out << kTraceHeader << '\n';
  for (const TraceRow &row : trace.rows) {
    out << row.iter << ',' << format_double(row.cost) << ','
        << format_double(row.grad_norm) << ',' << format_double(row.omega)
        << ',' << format_double(row.step) << ','
        << format_double(row.error_measure) << ','
        << format_double(row.elapsed_ms) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path &path,
                     const SolveTrace &trace) {
  auto out = open_out(path);
  write_trace_csv(out, trace);
}

std::vector<TraceRow> read_trace_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTraceHeader)
    fail(ErrorCode::ParseError, "trace header mismatch");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty())
      continue;
    std::vector<std::string> cells;
    std::istringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ','))
      cells.push_back(cell);
    if (cells.size() != 7)
      fail(ErrorCode::ParseError, "expected 7 columns in '" + line + "'");
    TraceRow row;
    const double iter = parse_double(cells[0]);
    if (iter < 0 || iter != std::floor(iter))
      fail(ErrorCode::ParseError, "bad iteration index '" + cells[0] + "'");
    row.iter = static_cast<int>(iter);
    row.cost = parse_double(cells[1]);
    row.grad_norm = parse_double(cells[2]);
    row.omega = parse_double(cells[3]);
    row.step = parse_double(cells[4]);
    row.error_measure = parse_double(cells[5]);
    row.elapsed_ms = parse_double(cells[6]);
    rows.push_back(row);
  }
  return rows;
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path &path) {
  auto in = open_in(path);
  return read_trace_csv(in);
}

KeyValues read_key_values(std::istream &in) {
  KeyValues out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string t = trim(line.substr(0, hash));
    if (t.empty())
      continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ParseError,
           "line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    if (key.empty())
      fail(ErrorCode::ParseError,
           "line " + std::to_string(number) + ": empty key");
    out.emplace_back(std::move(key), trim(t.substr(eq + 1)));
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path &path) {
  auto in = open_in(path);
  return read_key_values(in);
}

} // namespace rprecon::io

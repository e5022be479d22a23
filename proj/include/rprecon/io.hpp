#pragma once

// MatrixMarket matrices, CSV traces and key = value config files.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rprecon/solver.hpp"
#include "rprecon/types.hpp"

namespace rprecon::io {

/// Array or coordinate format, real or integer field, general or symmetric
/// storage. Throws ParseError.
Matrix read_matrix_market(std::istream &in);
Matrix read_matrix_market(const std::filesystem::path &path);

/// Dense array format, column-major, 17 significant digits.
void write_matrix_market(std::ostream &out, const Matrix &m);
void write_matrix_market(const std::filesystem::path &path, const Matrix &m);

/// Shortest text that parses back to the same double (17 significant
/// digits); NaN and infinities print as nan / inf / -inf.
std::string format_double(double v);
double parse_double(const std::string &text);

inline constexpr const char *kTraceHeader =
    "iter,cost,grad_norm,omega,step,error_measure,elapsed_ms";

void write_trace_csv(std::ostream &out, const SolveTrace &trace);
void write_trace_csv(const std::filesystem::path &path,
                     const SolveTrace &trace);
/// Reads the rows back; the status is not part of the file.
std::vector<TraceRow> read_trace_csv(std::istream &in);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path &path);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Lines of the form `key = value`; `#` starts a comment. Throws ParseError
/// on a line without '=' or with an empty key.
KeyValues read_key_values(std::istream &in);
KeyValues read_key_values(const std::filesystem::path &path);

} // namespace rprecon::io

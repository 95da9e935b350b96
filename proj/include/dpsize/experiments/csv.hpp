#pragma once

// Numeric CSV input and the output writers. Values use '.' as the decimal
// mark; infinities and NaN are written as inf, -inf and nan.

#include <string>
#include <vector>

#include "dpsize/rjmcmc.hpp"

namespace dpsize {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Index of a header column; throws invalid-input when absent.
  std::size_t column(const std::string& name) const;
};

// Header row plus numeric rows of equal width.
CsvTable read_csv(const std::string& path);

std::string format_double(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_text(const std::string& path, const std::string& text);

// Creates the directory (and parents); throws io when it is not writable.
void ensure_output_dir(const std::string& dir);

// One row per iteration: iteration, n, theta..., within/between diagnostics.
void write_trace_csv(const Trace& trace, const std::string& path);
// Run metadata and post-burn-in summaries as JSON.
std::string trace_sidecar_json(const Trace& trace);

}  // namespace dpsize

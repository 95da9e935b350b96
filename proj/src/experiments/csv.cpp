#include "dpsize/experiments/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dpsize {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\"");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t line) {
  const std::string s = trim(raw);
  if (s == "inf" || s == "Inf") return kInf;
  if (s == "-inf" || s == "-Inf") return kNegInf;
  if (s == "nan" || s == "NaN" || s == "NA") return std::nan("");
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::kInvalidInput,
                "non-numeric CSV cell \"" + s + "\" on line " + std::to_string(line));
  }
  return v;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorKind::kInvalidInput, "CSV has no column \"" + name + "\"");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      for (auto& c : cells) t.header.push_back(trim(c));
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw Error(ErrorKind::kInvalidInput,
                  "line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(t.header.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_cell(c, lineno));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw Error(ErrorKind::kInvalidInput, path + " has no header row");
  return t;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path);
}

void ensure_output_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::kIo, "cannot create output directory " + dir);
  }
  const auto probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw Error(ErrorKind::kIo, "output directory " + dir + " is not writable");
  }
  fs::remove(probe, ec);
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::vector<std::string> header{"iteration", "n"};
  for (const auto& p : trace.param_names) header.push_back(p);
  const bool acc = !trace.within_accepts.empty();
  if (acc) {
    for (const char* h : {"within_accepts", "within_proposals", "within_min_prob",
                          "between_direction", "between_from", "between_accepted",
                          "between_in_support", "between_prob"}) {
      header.emplace_back(h);
    }
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(trace.n.size());
  const bool has_theta = !trace.theta.empty();
  for (std::int64_t it = 0; it < trace.iterations(); ++it) {
    const auto i = static_cast<std::size_t>(it);
    std::vector<double> r{static_cast<double>(it), static_cast<double>(trace.n[i])};
    for (std::size_t j = 0; j < trace.param_dim(); ++j) {
      r.push_back(has_theta ? trace.theta_at(it, j) : std::nan(""));
    }
    if (acc) {
      r.push_back(trace.within_accepts[i]);
      r.push_back(trace.within_proposals[i]);
      r.push_back(trace.within_min_prob[i]);
      r.push_back(trace.between_direction[i]);
      r.push_back(static_cast<double>(trace.between_from[i]));
      r.push_back(trace.between_accepted[i]);
      r.push_back(trace.between_in_support[i]);
      r.push_back(trace.between_prob[i]);
    }
    rows.push_back(std::move(r));
  }
  write_csv(path, header, rows);
}

std::string trace_sidecar_json(const Trace& trace) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); };
  json j;
  j["model"] = trace.model_name;
  j["param_names"] = trace.param_names;
  j["iterations"] = trace.config.iterations;
  j["burn_in"] = trace.config.burn_in;
  j["seed"] = trace.config.seed;
  j["t_refresh_period"] = trace.config.t_refresh_period;
  j["n_dp"] = num(trace.n_dp);
  j["epsilon_s"] = num(trace.epsilon_s);
  j["epsilon_n"] = num(trace.epsilon_n);
  j["count_family"] = trace.count_family;
  j["n_max"] = trace.n_max;
  j["capacity_growths"] = trace.capacity_growths;
  j["max_refresh_drift"] = num(trace.max_refresh_drift());
  if (!trace.theta.empty()) {
    json mean = json::array();
    json var = json::array();
    for (double v : trace.theta_mean()) mean.push_back(num(v));
    for (double v : trace.theta_variance()) var.push_back(num(v));
    j["theta_mean"] = mean;
    j["theta_variance"] = var;
  }
  j["n_mean"] = num(trace.n_mean());
  j["n_variance"] = num(trace.n_variance());
  return j.dump(2);
}

}  // namespace dpsize

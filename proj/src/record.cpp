#include "vahrs/record.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vahrs {

namespace {

const char* kPrefix[] = {
    "t",
    "R.0", "R.1", "R.2", "R.3", "R.4", "R.5", "R.6", "R.7", "R.8",
    "v.0", "v.1", "v.2",
    "omega.0", "omega.1", "omega.2",
    "vdot.0", "vdot.1", "vdot.2",
    "y_v.0", "y_v.1", "y_v.2",
    "y_g.0", "y_g.1", "y_g.2",
    "y_a.0", "y_a.1", "y_a.2",
    "y_m.0", "y_m.1", "y_m.2",
};
constexpr size_t kPrefixCount = sizeof(kPrefix) / sizeof(kPrefix[0]);

void append_num(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& tok, size_t row, size_t col) {
  const char* s = tok.c_str();
  char* end = nullptr;
  const double x = std::strtod(s, &end);
  if (end == s || *end != '\0') {
    throw std::runtime_error("replay_run: row " + std::to_string(row) +
                             ", column " + std::to_string(col + 1) +
                             ": cannot parse '" + tok + "'");
  }
  return x;
}

}  // namespace

void record_run(const RunRecord& rec, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("record_run: cannot open " + path);

  std::string line;
  for (size_t i = 0; i < kPrefixCount; ++i) {
    if (i) line += ',';
    line += kPrefix[i];
  }
  for (const auto& c : rec.est_columns) {
    line += ',';
    line += c;
  }
  f << line << '\n';

  const size_t rows = rec.truth.size();
  if (rec.samples.size() != rows ||
      (!rec.est_columns.empty() && rec.est_values.size() != rows)) {
    throw std::runtime_error("record_run: inconsistent row counts");
  }
  for (size_t k = 0; k < rows; ++k) {
    const TrueState& s = rec.truth[k];
    const ImuSample& y = rec.samples[k];
    line.clear();
    append_num(line, s.t);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        line += ',';
        append_num(line, s.R(r, c));
      }
    }
    for (const Vec3* v : {&s.v, &s.omega, &s.vdot, &y.y_v, &y.y_g, &y.y_a,
                          &y.y_m}) {
      for (int i = 0; i < 3; ++i) {
        line += ',';
        append_num(line, (*v)(i));
      }
    }
    if (!rec.est_columns.empty()) {
      const auto& vals = rec.est_values[k];
      if (vals.size() != rec.est_columns.size()) {
        throw std::runtime_error("record_run: inconsistent estimator row");
      }
      for (double x : vals) {
        line += ',';
        append_num(line, x);
      }
    }
    f << line << '\n';
  }
  if (!f) throw std::runtime_error("record_run: write failure on " + path);
}

RunRecord replay_run(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("replay_run: cannot open " + path);

  std::string line;
  if (!std::getline(f, line)) {
    throw std::runtime_error("replay_run: missing header in " + path);
  }
  const auto header = split_csv(line);
  if (header.size() < kPrefixCount) {
    throw std::runtime_error("replay_run: header too short in " + path);
  }
  for (size_t i = 0; i < kPrefixCount; ++i) {
    if (header[i] != kPrefix[i]) {
      throw std::runtime_error("replay_run: unexpected header column " +
                               std::to_string(i + 1) + " '" + header[i] + "'");
    }
  }

  RunRecord rec;
  rec.est_columns.assign(header.begin() + kPrefixCount, header.end());
  const size_t ncols = header.size();

  size_t row = 0;
  while (std::getline(f, line)) {
    ++row;
    if (line.empty()) continue;
    const auto toks = split_csv(line);
    if (toks.size() != ncols) {
      throw std::runtime_error("replay_run: row " + std::to_string(row) +
                               " has " + std::to_string(toks.size()) +
                               " columns, expected " + std::to_string(ncols));
    }
    size_t i = 0;
    TrueState s;
    ImuSample y;
    s.t = parse_num(toks[i], row, i);
    ++i;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        s.R(r, c) = parse_num(toks[i], row, i);
        ++i;
      }
    }
    for (Vec3* v : {&s.v, &s.omega, &s.vdot, &y.y_v, &y.y_g, &y.y_a, &y.y_m}) {
      for (int j = 0; j < 3; ++j) {
        (*v)(j) = parse_num(toks[i], row, i);
        ++i;
      }
    }
    y.t = s.t;
    std::vector<double> est;
    est.reserve(ncols - kPrefixCount);
    for (; i < ncols; ++i) est.push_back(parse_num(toks[i], row, i));
    rec.truth.push_back(s);
    rec.samples.push_back(y);
    if (!rec.est_columns.empty()) rec.est_values.push_back(std::move(est));
  }
  return rec;
}

}  // namespace vahrs

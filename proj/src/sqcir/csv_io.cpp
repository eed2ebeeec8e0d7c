#include "sqcir/csv_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "sqcir/error.hpp"

namespace sqcir {

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

namespace {

void write_state(std::ostream& out, const StateVector& x) {
  out << format_number(x.s) << ',' << format_number(x.q) << ',' << format_number(x.c) << ','
      << format_number(x.i) << ',' << format_number(x.r);
}

std::string trim(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
    line.pop_back();
  }
  std::size_t start = 0;
  while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
  return line.substr(start);
}

bool parse_double(const std::string& field, double& out) {
  const std::string text = trim(field);
  if (text.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(text.c_str(), &end);
  return errno == 0 && end == text.c_str() + text.size();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void row_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,S,Q,C,I,R,epsilon\n";
  for (std::size_t n = 0; n < traj.size(); ++n) {
    out << format_number(traj.times[n]) << ',';
    write_state(out, traj.states[n]);
    out << ',' << format_number(traj.epsilon_used[n]) << '\n';
  }
}

void write_trajectory_csv(const NetworkTrajectory& traj, std::ostream& out) {
  out << "t,region,S,Q,C,I,R,epsilon\n";
  for (std::size_t n = 0; n < traj.size(); ++n) {
    for (std::size_t r = 0; r < traj.states[n].regions.size(); ++r) {
      out << format_number(traj.times[n]) << ',' << r << ',';
      write_state(out, traj.states[n].regions[r]);
      out << ',' << format_number(traj.epsilon_used[n]) << '\n';
    }
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t,S,Q,C,I,R,epsilon") {
    throw Error(ErrorCode::InvalidInput, "line 1: expected header t,S,Q,C,I,R,epsilon");
  }
  Trajectory traj;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != 7) row_error(number, "expected 7 fields");
    double v[7];
    for (std::size_t k = 0; k < 7; ++k) {
      if (!parse_double(fields[k], v[k])) row_error(number, "malformed number");
    }
    traj.times.push_back(v[0]);
    traj.states.push_back({v[1], v[2], v[3], v[4], v[5]});
    traj.epsilon_used.push_back(v[6]);
  }
  return traj;
}

ObservedSeries parse_series_csv(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  // Skip leading blank lines; an input with nothing else is empty.
  while (std::getline(in, line)) {
    ++number;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw Error(ErrorCode::InvalidInput, "series input is empty");
  if (trim(line) != "t,cumulative") {
    row_error(number, "expected header t,cumulative");
  }
  ObservedSeries series;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != 2) row_error(number, "expected 2 fields");
    double t = 0.0;
    double y = 0.0;
    if (!parse_double(fields[0], t) || !parse_double(fields[1], y)) {
      row_error(number, "malformed number");
    }
    if (!std::isfinite(t) || !std::isfinite(y) || y < 0.0) {
      row_error(number, "values must be finite with cumulative >= 0");
    }
    if (!series.times.empty() && !(t > series.times.back())) {
      row_error(number, "times must increase");
    }
    if (!series.cumulative.empty() && y < series.cumulative.back()) {
      row_error(number, "cumulative count decreases");
    }
    series.times.push_back(t);
    series.cumulative.push_back(y);
  }
  if (series.size() == 0) throw Error(ErrorCode::InvalidInput, "series has no data rows");
  return series;
}

ObservedSeries load_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open series file '" + path + "'");
  try {
    return parse_series_csv(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_series_csv(const ObservedSeries& series, std::ostream& out) {
  out << "t,cumulative\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << format_number(series.times[k]) << ',' << format_number(series.cumulative[k]) << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

}  // namespace sqcir

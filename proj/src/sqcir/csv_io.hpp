#pragma once

#include <iosfwd>
#include <string>

#include "sqcir/fitting.hpp"
#include "sqcir/integrator.hpp"

namespace sqcir {

/// Ten significant digits, the precision of every CSV this library writes.
std::string format_number(double value);

/// Header "t,S,Q,C,I,R,epsilon".
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
/// Header "t,region,S,Q,C,I,R,epsilon"; rows ordered by time, then region.
void write_trajectory_csv(const NetworkTrajectory& traj, std::ostream& out);
Trajectory read_trajectory_csv(std::istream& in);

/// Header "t,cumulative". Errors name the 1-based line of the bad row.
ObservedSeries parse_series_csv(std::istream& in);
ObservedSeries load_series(const std::string& path);
void write_series_csv(const ObservedSeries& series, std::ostream& out);

/// Writes `text` to `path`, raising an Io error that names the path.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sqcir

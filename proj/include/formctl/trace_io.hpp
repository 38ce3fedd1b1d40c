#pragma once

#include <string>

#include "formctl/sim.hpp"

namespace formctl {

// Writes positions.csv, errors.csv, joints.csv, controls.csv (plus
// estimates.csv / compensator.csv when those states exist) and a summary.txt of
// scalar run metrics into dir (created if missing).
void write_trace(const std::string& dir, const RunResult& result);

// Reads a directory produced by write_trace back into a Trace (summary fields
// other than the sampled series are not restored).
Trace read_trace(const std::string& dir);

// Renders paths.svg (task-space trajectories; XY and XZ panes for 3D runs),
// errors.svg, joints.svg and, when present, estimates.svg into out_dir.
void write_plots(const std::string& out_dir, const Trace& trace);

}  // namespace formctl

#pragma once

#include <array>
#include <string>
#include <vector>

#include "inphys/engine.hpp"

namespace inphys {

// World-space box (xmin, ymin, xmax, ymax) covering every snapshot of the
// given trajectories plus a relative margin.
std::array<double, 4> trajectory_bounds(const std::vector<const Trajectory*>& trajectories,
                                        double margin = 0.08);

// One frame: the scene's shapes at the truth snapshot, with an optional
// model snapshot overlaid. Output is a standalone SVG document with
// deterministic formatting.
std::string render_frame(const Scene& scene, const std::vector<Trajectory::State>& truth,
                         const std::vector<Trajectory::State>* model,
                         const std::array<double, 4>& bounds, int pixels = 480);

} // namespace inphys

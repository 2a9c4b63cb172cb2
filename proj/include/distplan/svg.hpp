#pragma once

#include <string>
#include <vector>

#include "distplan/artifacts.hpp"
#include "distplan/scenario.hpp"

namespace distplan {

struct PlotInput {
  std::vector<Polyline> paths;        // workspace positions
  std::vector<Gaussian> ellipses;     // beliefs drawn as 1 and 2 sigma ellipses
};

/// SVG 1.1 view of the x-y plane: obstacles, goal, paths and covariance
/// ellipses. Output depends only on the inputs.
std::string render_svg(const Scenario& scenario, const PlotInput& input);

}  // namespace distplan

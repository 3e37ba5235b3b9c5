#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dqrb/dualquat.hpp"
#include "dqrb/simulator.hpp"

namespace dqrb {

// One curve in a panel; x is the step index 0..n-1.
struct Series {
  std::string label;
  std::vector<double> y;
  std::string color = "#1a6feb";
  bool dashed = false;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

// Self-contained SVG document: panels in a two-column grid, each with a
// frame, fitted y range with min/max labels, and a colored legend.
std::string svg_line_panels(const std::string& title, const std::vector<Panel>& panels);

// Four panels comparing state histories step by step: centre of mass,
// orientation quaternion, velocity, angular velocity. Truth is drawn solid,
// the prediction dashed in the same colors. DegenerateInput if either side
// is empty.
std::string trajectory_svg(const std::vector<RigidBodyRecord>& truth,
                           const std::vector<RigidBodyRecord>& predicted);

// Orthographic wireframe of one cuboid drawn at several unit poses, with the
// world axes triad for reference. labels must be empty (auto-numbered) or one
// per pose. DegenerateInput on empty poses or non-positive half_dims,
// ShapeError on a label count mismatch.
std::string cuboid_poses_svg(const Eigen::Vector3d& half_dims,
                             const std::vector<DualQuaternion>& poses,
                             const std::vector<std::string>& labels);

}  // namespace dqrb

// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "funnelforge/bp_synth.hpp"
#include "funnelforge/world.hpp"

namespace funnelforge::svg {

/// {y : (y - center)' shape^-1 (y - center) <= 1}.
struct Ellipse {
  Eigen::Vector2d center;
  Eigen::Matrix2d shape;
  double rx = 0.0;
  double ry = 0.0;
  double angle_deg = 0.0;  // rotation of the rx axis from +x
};

/// Display projection of B <= 0 into the workspace through the nominal
/// Jacobian: shape J1 Q_qq J1'. Not a certified set.
Ellipse workspace_ellipse(const bp::BarrierPair& bp);

struct Figure {
  std::string title;
  const world::Workspace* workspace = nullptr;
  std::vector<const bp::BarrierPair*> funnels;
  std::vector<Eigen::Vector2d> path;   // end-effector trajectory
  std::vector<Eigen::Vector2d> points; // tree vertices, drawn as dots
};

/// Regions (obstacle and base striped), funnel ellipses, tree vertices and the
/// trajectory, workspace y up. Output is deterministic text.
std::string render(const Figure& figure);

}  // namespace funnelforge::svg

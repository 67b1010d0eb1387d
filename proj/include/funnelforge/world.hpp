// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <Eigen/Dense>

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace funnelforge::world {

/// Facet inequality a . x <= offset with unit outward normal a.
struct HalfSpace {
  Eigen::Vector2d normal;
  double offset = 0.0;

  double residual(const Eigen::Vector2d& x) const { return normal.dot(x) - offset; }

  bool operator==(const HalfSpace&) const = default;
};

/// Convex polygon, vertices counterclockwise. Facet i joins vertex i to i+1.
class Polytope {
 public:
  Polytope() = default;
  /// Throws ValidationError for fewer than 3 vertices, clockwise order or
  /// a non-convex vertex list.
  Polytope(std::string name, std::vector<Eigen::Vector2d> vertices);

  /// Rebuilds the vertex form from facet half-spaces (adjacent facets intersected).
  static Polytope from_half_spaces(std::string name, const std::vector<HalfSpace>& facets);

  /// Axis-aligned square helper.
  static Polytope square(std::string name, const Eigen::Vector2d& center, double half_width);

  const std::string& name() const { return name_; }
  const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }
  const std::vector<HalfSpace>& half_spaces() const { return half_spaces_; }
  std::size_t facet_count() const { return half_spaces_.size(); }

  /// Vertex centroid.
  Eigen::Vector2d geometric_center() const;

  bool operator==(const Polytope&) const = default;

 private:
  std::string name_;
  std::vector<Eigen::Vector2d> vertices_;
  std::vector<HalfSpace> half_spaces_;
};

constexpr double kContainsTol = 1e-12;

/// Boundary counts as inside.
bool contains(const Polytope& p, const Eigen::Vector2d& x);

/// Vertices plus per_edge - 2 evenly spaced interior points on every edge.
std::vector<Eigen::Vector2d> sample_edges(const Polytope& p, int per_edge);

struct FacetDistance {
  bool satisfied = false;  // x satisfies the facet's inward inequality
  double distance = 0.0;   // distance from x to the facet's supporting line
};

std::vector<FacetDistance> facet_distance(const Polytope& p, const Eigen::Vector2d& x);

enum class RegionRole { Task, Obstacle, Base };

RegionRole region_role_from_string(std::string_view s);
std::string_view to_string(RegionRole role);

struct Region {
  Polytope polytope;
  RegionRole role = RegionRole::Task;

  bool operator==(const Region&) const = default;
};

inline constexpr std::string_view kFreeLabel = "free";

struct Labeling {
  std::set<std::string> labels;
  bool out_of_workspace = false;

  bool has(std::string_view name) const { return labels.contains(std::string(name)); }
};

/// Regions and the convex reach disk of the end effector.
struct Workspace {
  std::vector<Region> regions;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double reach_radius = 1.5;

  const Region& region(std::string_view name) const;
  bool has_region(std::string_view name) const;

  /// Throws ValidationError on duplicate names or a non-positive radius.
  void validate() const;

  /// Obstacle and base regions plus every task region except the leg endpoints.
  std::vector<Polytope> obstacles_for_leg(std::string_view from, std::string_view to) const;
};

Labeling label(const Workspace& ws, const Eigen::Vector2d& x);

}  // namespace funnelforge::world

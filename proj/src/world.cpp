// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/world.hpp"

#include <cmath>
#include <set>

#include "funnelforge/error.hpp"

namespace funnelforge::world {

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace

Polytope::Polytope(std::string name, std::vector<Eigen::Vector2d> vertices)
    : name_(std::move(name)), vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) {
    throw Error(ErrorCode::ValidationError,
                "region '" + name_ + "': a polytope needs at least 3 vertices");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = vertices_[i];
    const Eigen::Vector2d& b = vertices_[(i + 1) % n];
    const Eigen::Vector2d& c = vertices_[(i + 2) % n];
    if (cross(b - a, c - b) <= 0.0) {
      throw Error(ErrorCode::ValidationError,
                  "region '" + name_ + "': vertices must be convex and counterclockwise");
    }
  }
  half_spaces_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d edge = vertices_[(i + 1) % n] - vertices_[i];
    const Eigen::Vector2d normal = Eigen::Vector2d(edge.y(), -edge.x()).normalized();
    half_spaces_.push_back({normal, normal.dot(vertices_[i])});
  }
}

Polytope Polytope::from_half_spaces(std::string name, const std::vector<HalfSpace>& facets) {
  const std::size_t n = facets.size();
  if (n < 3) {
    throw Error(ErrorCode::ValidationError,
                "region '" + name + "': a polytope needs at least 3 facets");
  }
  // Vertex i is where facet i-1 meets facet i.
  std::vector<Eigen::Vector2d> vertices;
  vertices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const HalfSpace& prev = facets[(i + n - 1) % n];
    const HalfSpace& cur = facets[i];
    Eigen::Matrix2d A;
    A.row(0) = prev.normal.transpose();
    A.row(1) = cur.normal.transpose();
    vertices.push_back(A.partialPivLu().solve(Eigen::Vector2d(prev.offset, cur.offset)));
  }
  return Polytope(std::move(name), std::move(vertices));
}

Polytope Polytope::square(std::string name, const Eigen::Vector2d& center, double half_width) {
  const double h = half_width;
  return Polytope(std::move(name), {center + Eigen::Vector2d(-h, -h), center + Eigen::Vector2d(h, -h),
                                    center + Eigen::Vector2d(h, h), center + Eigen::Vector2d(-h, h)});
}

Eigen::Vector2d Polytope::geometric_center() const {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

bool contains(const Polytope& p, const Eigen::Vector2d& x) {
  for (const auto& h : p.half_spaces()) {
    if (h.residual(x) > kContainsTol) return false;
  }
  return true;
}

std::vector<Eigen::Vector2d> sample_edges(const Polytope& p, int per_edge) {
  if (per_edge < 2) throw Error(ErrorCode::ValidationError, "sample_edges: per_edge must be >= 2");
  const auto& v = p.vertices();
  std::vector<Eigen::Vector2d> out;
  out.reserve(v.size() * static_cast<std::size_t>(per_edge - 1));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::Vector2d& a = v[i];
    const Eigen::Vector2d& b = v[(i + 1) % v.size()];
    for (int k = 0; k < per_edge - 1; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(per_edge - 1);
      out.push_back(a + s * (b - a));
    }
  }
  return out;
}

std::vector<FacetDistance> facet_distance(const Polytope& p, const Eigen::Vector2d& x) {
  std::vector<FacetDistance> out;
  out.reserve(p.facet_count());
  for (const auto& h : p.half_spaces()) {
    const double r = h.residual(x);
    out.push_back({r <= kContainsTol, std::abs(r)});
  }
  return out;
}

RegionRole region_role_from_string(std::string_view s) {
  if (s == "task") return RegionRole::Task;
  if (s == "obstacle") return RegionRole::Obstacle;
  if (s == "base") return RegionRole::Base;
  throw Error(ErrorCode::ValidationError, "unknown region role '" + std::string(s) + "'");
}

std::string_view to_string(RegionRole role) {
  switch (role) {
    case RegionRole::Task: return "task";
    case RegionRole::Obstacle: return "obstacle";
    case RegionRole::Base: return "base";
  }
  return "task";
}

const Region& Workspace::region(std::string_view name) const {
  for (const auto& r : regions) {
    if (r.polytope.name() == name) return r;
  }
  throw Error(ErrorCode::ConfigError, "unknown region '" + std::string(name) + "'");
}

bool Workspace::has_region(std::string_view name) const {
  for (const auto& r : regions) {
    if (r.polytope.name() == name) return true;
  }
  return false;
}

void Workspace::validate() const {
  if (!(reach_radius > 0.0)) {
    throw Error(ErrorCode::ValidationError, "workspace.reach_radius: must be positive");
  }
  std::set<std::string> seen;
  for (const auto& r : regions) {
    if (r.polytope.name() == kFreeLabel) {
      throw Error(ErrorCode::ValidationError, "workspace.regions: 'free' is a reserved label");
    }
    if (!seen.insert(r.polytope.name()).second) {
      throw Error(ErrorCode::ValidationError,
                  "workspace.regions: duplicate region name '" + r.polytope.name() + "'");
    }
  }
}

std::vector<Polytope> Workspace::obstacles_for_leg(std::string_view from, std::string_view to) const {
  std::vector<Polytope> out;
  for (const auto& r : regions) {
    const auto& name = r.polytope.name();
    if (r.role == RegionRole::Task && (name == from || name == to)) continue;
    out.push_back(r.polytope);
  }
  return out;
}

Labeling label(const Workspace& ws, const Eigen::Vector2d& x) {
  Labeling out;
  if ((x - ws.center).norm() > ws.reach_radius + kContainsTol) {
    out.out_of_workspace = true;
    return out;
  }
  for (const auto& r : ws.regions) {
    if (contains(r.polytope, x)) out.labels.insert(r.polytope.name());
  }
  if (out.labels.empty()) out.labels.insert(std::string(kFreeLabel));
  return out;
}

}  // namespace funnelforge::world

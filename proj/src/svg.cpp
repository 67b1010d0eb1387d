// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/svg.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "funnelforge/error.hpp"

namespace funnelforge::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5f", v);
  std::string s = buf;
  if (s == "-0.00000") s = "0.00000";
  return s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string points_attr(const std::vector<Eigen::Vector2d>& pts) {
  std::string s;
  for (const auto& p : pts) {
    if (!s.empty()) s += ' ';
    s += num(p.x()) + "," + num(p.y());
  }
  return s;
}

}  // namespace

Ellipse workspace_ellipse(const bp::BarrierPair& bp) {
  const int n = bp.dof();
  const Eigen::MatrixXd J1 = bp.ldi().J.N1;
  if (J1.rows() != 2 || J1.cols() != n) throw Error(ErrorCode::DimensionMismatch, "workspace_ellipse: J1 must be 2 x n");
  Ellipse e;
  e.center = bp.x_e();
  e.shape = J1 * bp.Q().topLeftCorner(n, n) * J1.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(e.shape);
  const Eigen::Vector2d lambda = eig.eigenvalues().cwiseMax(0.0);
  e.rx = std::sqrt(lambda[1]);
  e.ry = std::sqrt(lambda[0]);
  const Eigen::Vector2d major = eig.eigenvectors().col(1);
  e.angle_deg = std::atan2(major.y(), major.x()) * 180.0 / std::numbers::pi;
  return e;
}

std::string render(const Figure& f) {
  if (!f.workspace) throw Error(ErrorCode::ValidationError, "svg: figure has no workspace");
  const world::Workspace& ws = *f.workspace;
  const double r = ws.reach_radius * 1.07;
  const double stroke = ws.reach_radius / 400.0;
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"720\" viewBox=\"" << num(ws.center.x() - r) << ' '
    << num(-ws.center.y() - r) << ' ' << num(2 * r) << ' ' << num(2 * r) << "\">\n";
  o << "  <title>" << escape(f.title) << "</title>\n";
  o << "  <defs>\n"
    << "    <pattern id=\"stripes\" patternUnits=\"userSpaceOnUse\" width=\"" << num(8 * stroke) << "\" height=\""
    << num(8 * stroke) << "\" patternTransform=\"rotate(45)\">\n"
    << "      <rect width=\"" << num(8 * stroke) << "\" height=\"" << num(8 * stroke) << "\" fill=\"#eeeeee\"/>\n"
    << "      <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"" << num(8 * stroke) << "\" stroke=\"#555555\" stroke-width=\""
    << num(3 * stroke) << "\"/>\n"
    << "    </pattern>\n"
    << "  </defs>\n";
  o << "  <rect x=\"" << num(ws.center.x() - r) << "\" y=\"" << num(-ws.center.y() - r) << "\" width=\"" << num(2 * r)
    << "\" height=\"" << num(2 * r) << "\" fill=\"white\"/>\n";
  o << "  <g transform=\"scale(1,-1)\">\n";
  o << "    <circle cx=\"" << num(ws.center.x()) << "\" cy=\"" << num(ws.center.y()) << "\" r=\"" << num(ws.reach_radius)
    << "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"" << num(stroke) << "\"/>\n";
  for (const auto& reg : ws.regions) {
    const bool task = reg.role == world::RegionRole::Task;
    o << "    <polygon points=\"" << points_attr(reg.polytope.vertices()) << "\" fill=\""
      << (task ? "#cfe3ff" : "url(#stripes)") << "\" stroke=\"#222222\" stroke-width=\"" << num(stroke) << "\"/>\n";
  }
  for (const auto* bp : f.funnels) {
    const Ellipse e = workspace_ellipse(*bp);
    o << "    <ellipse cx=\"" << num(e.center.x()) << "\" cy=\"" << num(e.center.y()) << "\" rx=\"" << num(e.rx)
      << "\" ry=\"" << num(e.ry) << "\" transform=\"rotate(" << num(e.angle_deg) << ' ' << num(e.center.x()) << ' '
      << num(e.center.y()) << ")\" fill=\"#ffb000\" fill-opacity=\"0.15\" stroke=\"#c05000\" stroke-width=\""
      << num(stroke) << "\"/>\n";
  }
  for (const auto& p : f.points) {
    o << "    <circle cx=\"" << num(p.x()) << "\" cy=\"" << num(p.y()) << "\" r=\"" << num(2 * stroke)
      << "\" fill=\"#666666\"/>\n";
  }
  if (!f.path.empty()) {
    o << "    <polyline points=\"" << points_attr(f.path) << "\" fill=\"none\" stroke=\"black\" stroke-width=\""
      << num(2 * stroke) << "\"/>\n";
  }
  o << "  </g>\n";
  for (const auto& reg : ws.regions) {
    const Eigen::Vector2d c = reg.polytope.geometric_center();
    o << "  <text x=\"" << num(c.x()) << "\" y=\"" << num(-c.y()) << "\" font-size=\"" << num(20 * stroke)
      << "\" text-anchor=\"middle\" dominant-baseline=\"middle\">" << escape(reg.polytope.name()) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace funnelforge::svg

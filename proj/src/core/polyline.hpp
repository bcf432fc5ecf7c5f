#pragma once

#include <vector>

#include "error.hpp"
#include "motion.hpp"
#include "vec.hpp"

namespace ppp {

// Piecewise linear curve. Consecutive vertices must be distinct.
struct Polyline {
  std::vector<Vec3> pts;
  bool closed = false;

  Polyline() = default;
  Polyline(std::vector<Vec3> p, bool c) : pts(std::move(p)), closed(c) { validate(); }

  void validate() const;

  int edge_count() const {
    if (pts.size() < 2) return 0;
    return int(pts.size()) - (closed ? 0 : 1);
  }
  Vec3 edge_vector(int e) const { return pts[(e + 1) % pts.size()] - pts[e]; }

  double length() const;
  // Arclength-parametrized point, t in [0,1] over the whole polyline.
  Vec3 eval(double t) const;
  // Arclength fractions of the interior polyline vertices (corner parameters),
  // excluding the endpoints (and, for closed curves, excluding t=0).
  std::vector<double> corner_params() const;

  Polyline transformed(const RigidMotion& m) const;
  Polyline reversed() const;
};

// Sum of turning angles between consecutive unit tangents; for closed
// polylines includes the wrap-around angle. Equals the total curvature
// (the length of the tangent indicatrix).
double tangent_indicatrix_length(const Polyline& p);

// Minimum distance between a point and a segment.
double point_segment_dist(const Vec3& p, const Vec3& a, const Vec3& b);
// Minimum distance between two segments.
double segment_segment_dist(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1);
// Minimum distance between two polylines.
double polyline_dist(const Polyline& a, const Polyline& b);

}  // namespace ppp

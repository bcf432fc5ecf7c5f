#include "polyline.hpp"

#include <algorithm>
#include <limits>

namespace ppp {

void Polyline::validate() const {
  for (int e = 0; e < edge_count(); ++e) {
    if (norm(edge_vector(e)) <= 0)
      throw Error(ErrorCode::zero_edge, "polyline has a zero-length edge");
  }
  for (const Vec3& p : pts) {
    if (!finite(p)) throw Error(ErrorCode::invalid_argument, "non-finite polyline vertex");
  }
}

double Polyline::length() const {
  double l = 0;
  for (int e = 0; e < edge_count(); ++e) l += norm(edge_vector(e));
  return l;
}

Vec3 Polyline::eval(double t) const {
  if (pts.empty()) throw Error(ErrorCode::invalid_argument, "empty polyline");
  const double total = length();
  double s = std::clamp(t, 0.0, 1.0) * total;
  for (int e = 0; e < edge_count(); ++e) {
    double el = norm(edge_vector(e));
    if (s <= el || e == edge_count() - 1) return pts[e] + edge_vector(e) * std::clamp(s / el, 0.0, 1.0);
    s -= el;
  }
  return pts.back();
}

std::vector<double> Polyline::corner_params() const {
  std::vector<double> out;
  const double total = length();
  double acc = 0;
  for (int e = 0; e + 1 < edge_count(); ++e) {
    acc += norm(edge_vector(e));
    out.push_back(acc / total);
  }
  return out;
}

Polyline Polyline::transformed(const RigidMotion& m) const {
  Polyline out = *this;
  for (Vec3& p : out.pts) p = m(p);
  return out;
}

Polyline Polyline::reversed() const {
  Polyline out = *this;
  std::reverse(out.pts.begin(), out.pts.end());
  return out;
}

double tangent_indicatrix_length(const Polyline& p) {
  const int ne = p.edge_count();
  if (ne < 2) throw Error(ErrorCode::zero_edge, "need at least 2 edges for total curvature");
  double total = 0;
  const int pairs = p.closed ? ne : ne - 1;
  for (int e = 0; e < pairs; ++e) {
    Vec3 t0 = p.edge_vector(e);
    Vec3 t1 = p.edge_vector((e + 1) % ne);
    total += angle_between(t0, t1);
  }
  return total;
}

double point_segment_dist(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double den = norm2(ab);
  double t = den > 0 ? std::clamp(dot(p - a, ab) / den, 0.0, 1.0) : 0.0;
  return dist(p, a + ab * t);
}

double segment_segment_dist(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1) {
  // Standard closest-point parametrization with clamping.
  Vec3 d1 = a1 - a0, d2 = b1 - b0, r = a0 - b0;
  double A = norm2(d1), E = norm2(d2), F = dot(d2, r);
  double s = 0, t = 0;
  if (A <= 1e-300 && E <= 1e-300) return dist(a0, b0);
  if (A <= 1e-300) {
    t = std::clamp(F / E, 0.0, 1.0);
  } else {
    double C = dot(d1, r);
    if (E <= 1e-300) {
      s = std::clamp(-C / A, 0.0, 1.0);
    } else {
      double B = dot(d1, d2);
      double denom = A * E - B * B;
      if (denom > 0) s = std::clamp((B * F - C * E) / denom, 0.0, 1.0);
      t = (B * s + F) / E;
      if (t < 0) {
        t = 0;
        s = std::clamp(-C / A, 0.0, 1.0);
      } else if (t > 1) {
        t = 1;
        s = std::clamp((B - C) / A, 0.0, 1.0);
      }
    }
  }
  return dist(a0 + d1 * s, b0 + d2 * t);
}

double polyline_dist(const Polyline& a, const Polyline& b) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.edge_count(); ++i)
    for (int j = 0; j < b.edge_count(); ++j)
      best = std::min(best, segment_segment_dist(a.pts[i], a.pts[(i + 1) % a.pts.size()],
                                                 b.pts[j], b.pts[(j + 1) % b.pts.size()]));
  return best;
}

}  // namespace ppp

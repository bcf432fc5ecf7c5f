#include "curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ppp {

const char* periodicity_kind_name(PeriodicityKind k) {
  switch (k) {
    case PeriodicityKind::translational: return "translational";
    case PeriodicityKind::helical: return "helical";
    case PeriodicityKind::rotational: return "rotational";
    case PeriodicityKind::reflective: return "reflective";
  }
  return "?";
}

PeriodicityKind periodicity_kind_from_name(const std::string& s) {
  if (s == "translational") return PeriodicityKind::translational;
  if (s == "helical") return PeriodicityKind::helical;
  if (s == "rotational") return PeriodicityKind::rotational;
  if (s == "reflective") return PeriodicityKind::reflective;
  throw Error(ErrorCode::parse_error, "unknown periodicity kind: " + s);
}

Vec3 PeriodicCurve::eval(int ci, double t) const {
  const double k = std::floor(t);
  Vec3 p = piece.components.at(ci).eval(t - k);
  return generator.rigid_power(int(k))(p);
}

double PeriodicCurve::scale() const {
  double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {-1e300, -1e300, -1e300};
  for (const Polyline& c : piece.components)
    for (const Vec3& p : c.pts)
      for (int i = 0; i < 3; ++i) {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
      }
  double d2 = 0;
  for (int i = 0; i < 3; ++i) d2 += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  return std::max(std::sqrt(d2), std::abs(generator.shift));
}

double PeriodicCurve::min_component_distance(int periods) const {
  if (component_count() < 2) return std::numeric_limits<double>::infinity();
  auto unroll = [&](int ci) {
    Polyline out;
    for (int k = -periods; k <= periods; ++k) {
      RigidMotion m = generator.rigid_power(k);
      const auto& pts = piece.components[ci].pts;
      for (size_t i = (out.pts.empty() ? 0 : 1); i < pts.size(); ++i) out.pts.push_back(m(pts[i]));
    }
    return out;
  };
  return polyline_dist(unroll(0), unroll(1));
}

void PeriodicCurve::validate() const {
  if (piece.components.empty())
    throw Error(ErrorCode::invalid_argument, "periodic curve has no components");
  const double s = scale();
  if (!(s > 0)) throw Error(ErrorCode::zero_edge, "degenerate periodic curve");
  RigidMotion g = generator.rigid();
  for (const Polyline& c : piece.components) {
    c.validate();
    if (c.closed) continue;
    // One generator step must carry the start of each open component to its end.
    if (dist(c.pts.back(), g(c.pts.front())) > 1e-9 * s)
      throw Error(ErrorCode::seam_mismatch, "fundamental piece does not continue across the generator");
  }
  if (kind == PeriodicityKind::translational || kind == PeriodicityKind::helical) {
    if (!(std::abs(generator.shift) > 0))
      throw Error(ErrorCode::invalid_argument, "periodic generator has zero shift");
  }
  if (component_count() >= 2 && !(min_component_distance() > 0))
    throw Error(ErrorCode::invalid_argument, "curve components intersect");
}

double ProjectedTriangle::diam() const {
  return std::max({dist(verts[0], verts[1]), dist(verts[1], verts[2]), dist(verts[2], verts[0])});
}

std::array<double, 3> ProjectedTriangle::to_barycentric(const Vec3& p) const {
  Vec3 e0 = verts[1] - verts[0], e1 = verts[2] - verts[0], r = p - verts[0];
  double a = dot(e0, e0), b = dot(e0, e1), c = dot(e1, e1);
  double d0 = dot(r, e0), d1 = dot(r, e1);
  double den = a * c - b * b;
  double b1 = (c * d0 - b * d1) / den;
  double b2 = (a * d1 - b * d0) / den;
  return {1 - b1 - b2, b1, b2};
}

double ProjectedTriangle::inner_distance(const Vec3& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) d = std::min(d, point_segment_dist(p, verts[i], verts[(i + 1) % 3]));
  auto b = to_barycentric(p);
  bool inside = b[0] >= 0 && b[1] >= 0 && b[2] >= 0;
  return inside ? d : -d;
}

Vec3 ProjectedTriangle::nearest_edge_inward_normal(const Vec3& p) const {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    double d = point_segment_dist(p, verts[i], verts[(i + 1) % 3]);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  Vec3 e = verts[(best + 1) % 3] - verts[best];
  Vec3 n = normalized(cross(plane_normal, e));
  if (dot(n, centroid() - verts[best]) < 0) n = -n;
  return n;
}

Polyline smyth_quadrilateral(const ConvexPolyhedron& tet, const std::array<int, 4>& ordering) {
  if (tet.face_count() != 4)
    throw Error(ErrorCode::not_a_tetrahedron, "quadrilateral construction needs a tetrahedron");
  std::array<bool, 4> seen{};
  for (int f : ordering) {
    if (f < 0 || f > 3 || seen[f])
      throw Error(ErrorCode::invalid_argument, "face ordering must be a permutation of 0..3");
    seen[f] = true;
  }
  std::vector<Vec3> pts;
  Vec3 p{0, 0, 0};
  for (int k = 0; k < 4; ++k) {
    pts.push_back(p);
    const FaceData& fd = tet.face_data()[ordering[k]];
    p += fd.normal * fd.area;
  }
  if (norm(p) > 1e-9 * tet.total_face_area())
    throw Error(ErrorCode::degenerate_face, "quadrilateral of face normals fails to close");
  return Polyline(std::move(pts), true);
}

ProjectedTriangle projected_triangle(const ConvexPolyhedron& tet, int face) {
  if (tet.face_count() != 4)
    throw Error(ErrorCode::not_a_tetrahedron, "projected triangle needs a tetrahedron");
  if (face < 0 || face > 3) throw Error(ErrorCode::invalid_argument, "face index out of range");

  ProjectedTriangle tri;
  tri.face = face;
  const FaceData& fj = tet.face_data()[face];
  tri.plane_normal = fj.normal;
  tri.plane_offset = fj.offset;

  int k = 0;
  for (int i = 0; i < 4; ++i)
    if (i != face) tri.other_faces[k++] = i;

  auto project = [&](const Vec3& v) { return v - tri.plane_normal * dot(tri.plane_normal, v); };

  Vec3 w{0, 0, 0};
  std::array<Vec3, 3> raw;
  for (int i = 0; i < 3; ++i) {
    raw[i] = w;
    const FaceData& fi = tet.face_data()[tri.other_faces[i]];
    w += project(fi.normal * fi.area);
  }
  if (norm(w) > 1e-9 * tet.total_face_area())
    throw Error(ErrorCode::degenerate_face, "projected edges fail to close");

  double area2 = norm(cross(raw[1] - raw[0], raw[2] - raw[0]));
  double d = std::max({dist(raw[0], raw[1]), dist(raw[1], raw[2]), dist(raw[2], raw[0])});
  if (area2 <= 1e-12 * d * d)
    throw Error(ErrorCode::degenerate_projection, "projected triangle is degenerate");

  // Anchor the triangle so its centroid sits at the face centroid; a rotation
  // of the solid fixing the face then maps the triangle onto itself.
  Vec3 fc = tet.face_centroid(face);
  Vec3 shift = fc - (raw[0] + raw[1] + raw[2]) / 3.0;
  for (int i = 0; i < 3; ++i) tri.verts[i] = raw[i] + shift;

  // Similarity ratio against the face: each projected edge is perpendicular to
  // the shared solid edge of the corresponding pair of faces; the length
  // ratios must agree.
  double ratio = -1;
  for (int i = 0; i < 3; ++i) {
    int fi = tri.other_faces[i];
    const PolyEdge* shared = nullptr;
    for (const PolyEdge& e : tet.edges())
      if ((e.f0 == face && e.f1 == fi) || (e.f0 == fi && e.f1 == face)) shared = &e;
    if (!shared) throw Error(ErrorCode::not_a_tetrahedron, "faces do not share an edge");
    Vec3 ev = tet.vertices()[shared->v1] - tet.vertices()[shared->v0];
    Vec3 pe = tri.verts[(i + 1) % 3] - tri.verts[i];
    if (std::abs(dot(normalized(ev), normalized(pe))) > 1e-9)
      throw Error(ErrorCode::degenerate_projection, "projected edge not perpendicular to solid edge");
    double r = norm(pe) / norm(ev);
    if (ratio < 0) ratio = r;
    else if (std::abs(r - ratio) > 1e-9 * ratio)
      throw Error(ErrorCode::degenerate_projection, "projected triangle is not similar to the face");
  }
  tri.ratio = ratio;
  return tri;
}

PeriodicCurve gamma_q(const ConvexPolyhedron& tet, int face, const Vec3& q) {
  ProjectedTriangle tri = projected_triangle(tet, face);
  Vec3 nu = tri.plane_normal;
  Vec3 qp = q - nu * (dot(nu, q) - tri.plane_offset);
  const double eps_q = 1e-3 * tri.diam();
  if (tri.inner_distance(qp) <= eps_q)
    throw Error(ErrorCode::point_on_boundary,
                "axis point too close to the boundary of the projected triangle");

  const double cj = tet.face_data()[face].area;
  const Vec3 up = -nu;  // toward the solid's interior side

  PeriodicCurve curve;
  curve.kind = PeriodicityKind::translational;
  curve.axis_point = qp;
  curve.axis_dir = up;
  curve.generator = ScrewMotion::translation(up * cj);

  Polyline axis_piece;
  axis_piece.pts = {qp, qp + up * cj};

  Polyline winding;
  Vec3 p = tri.verts[0];
  winding.pts.push_back(p);
  for (int i = 0; i < 3; ++i) {
    const FaceData& fi = tet.face_data()[tri.other_faces[i]];
    p += fi.normal * fi.area;
    winding.pts.push_back(p);
  }
  curve.piece.components = {std::move(axis_piece), std::move(winding)};
  curve.validate();
  return curve;
}

Polyline gamma_1q_tilde(const ConvexPolyhedron& tet, int face, const Vec3& q_tilde) {
  ProjectedTriangle tri = projected_triangle(tet, face);
  Vec3 nu = tri.plane_normal;
  Vec3 qp = q_tilde - nu * (dot(nu, q_tilde) - tri.plane_offset);
  // Snap onto the triangle boundary.
  Vec3 best{};
  double bd = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    Vec3 a = tri.verts[i], b = tri.verts[(i + 1) % 3];
    Vec3 ab = b - a;
    double t = std::clamp(dot(qp - a, ab) / norm2(ab), 0.0, 1.0);
    Vec3 c = a + ab * t;
    double d = dist(qp, c);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  if (bd > 1e-6 * tri.diam())
    throw Error(ErrorCode::invalid_argument, "point is not on the projected triangle boundary");
  qp = best;

  const double cj = tet.face_data()[face].area;
  const Vec3 shift = -nu * cj;  // one period of the winding component
  auto project = [&](const Vec3& v) { return v - nu * (dot(nu, v) - tri.plane_offset); };

  // Two periods of the winding component.
  std::vector<Vec3> chain;
  {
    Vec3 p = tri.verts[0];
    chain.push_back(p);
    for (int rep = 0; rep < 2; ++rep)
      for (int i = 0; i < 3; ++i) {
        const FaceData& fi = tet.face_data()[tri.other_faces[i]];
        p += fi.normal * fi.area;
        chain.push_back(p);
      }
  }

  // First chain point over qp.
  const double tol = 1e-9 * tri.diam();
  int edge = -1;
  Vec3 p0{};
  for (int e = 0; e + 1 < int(chain.size()) && edge < 0; ++e) {
    Vec3 a = project(chain[e]), b = project(chain[e + 1]);
    Vec3 ab = b - a;
    double t = std::clamp(dot(qp - a, ab) / norm2(ab), 0.0, 1.0);
    if (dist(a + ab * t, qp) <= tol) {
      edge = e;
      p0 = chain[e] + (chain[e + 1] - chain[e]) * t;
    }
  }
  if (edge < 0)
    throw Error(ErrorCode::invalid_argument, "point not reached by the projected curve");

  Vec3 p1 = p0 + shift;  // next visit of the vertical line, one period later
  std::vector<Vec3> pts;
  pts.push_back(p0);
  for (int e = edge; e + 1 < int(chain.size()); ++e) {
    const Vec3& c = chain[e + 1];
    if (dist(c, p1) <= tol) break;
    if (dist(c, pts.back()) > tol) pts.push_back(c);
    if (e - edge >= 3) break;  // safety: one period spans three edges
  }
  if (dist(pts.back(), p1) > tol) pts.push_back(p1);
  // Closing edge p1 -> p0 is the vertical segment through q~.
  return Polyline(std::move(pts), true);
}

PyramidFrame pyramidal_frame_impl(const ConvexPolyhedron& py, bool require_regular) {
  const int nf = py.face_count();
  const int nv = int(py.vertices().size());
  const double tol = 1e-8 * py.diameter();

  for (int f = 0; f < nf; ++f) {
    const auto& loop = py.faces()[f];
    if (int(loop.size()) != nv - 1) continue;
    // The single vertex off this face is the apex candidate.
    std::vector<bool> in(nv, false);
    for (int v : loop) in[v] = true;
    int apex = -1;
    for (int v = 0; v < nv; ++v)
      if (!in[v]) apex = v;
    if (apex < 0) continue;

    Vec3 bc = py.face_centroid(f);
    Vec3 ax = py.vertices()[apex] - bc;
    Vec3 n = py.face_data()[f].normal;
    if (norm(cross(ax, n)) > tol * norm(ax) * 10) continue;  // apex not over the centroid

    if (require_regular) {
      bool ok = true;
      double r0 = dist(py.vertices()[loop[0]], bc);
      double e0 = dist(py.vertices()[loop[0]], py.vertices()[loop[1]]);
      for (size_t i = 0; i < loop.size() && ok; ++i) {
        if (std::abs(dist(py.vertices()[loop[i]], bc) - r0) > tol) ok = false;
        if (std::abs(dist(py.vertices()[loop[i]], py.vertices()[loop[(i + 1) % loop.size()]]) - e0) > tol)
          ok = false;
      }
      if (!ok) continue;
    }

    PyramidFrame fr;
    fr.base_face = f;
    fr.apex = py.vertices()[apex];
    fr.base_center = bc;
    fr.axis_dir = normalized(ax);
    // Order the slant faces by angle around the axis.
    Vec3 u{}, v{};
    {
      Vec3 seed = py.face_centroid(f == 0 ? 1 : 0) - bc;
      u = normalized(seed - fr.axis_dir * dot(fr.axis_dir, seed));
      v = cross(fr.axis_dir, u);
    }
    std::vector<std::pair<double, int>> order;
    for (int g = 0; g < nf; ++g) {
      if (g == f) continue;
      Vec3 r = py.face_centroid(g) - bc;
      order.push_back({std::atan2(dot(r, v), dot(r, u)), g});
    }
    std::sort(order.begin(), order.end());
    for (auto& [a, g] : order) fr.slant_faces.push_back(g);

    Vec3 s{0, 0, 0};
    if (require_regular) {
      for (int g : fr.slant_faces) s += py.face_data()[g].normal;
    } else {
      for (int g : fr.slant_faces) s += py.face_data()[g].normal * py.face_data()[g].area;
    }
    if (norm(s - fr.axis_dir * dot(s, fr.axis_dir)) > 1e-9 * norm(s))
      continue;  // slant normals do not balance around this axis
    fr.c = dot(s, fr.axis_dir);
    if (!(fr.c > 0)) continue;
    return fr;
  }
  throw Error(ErrorCode::not_right_pyramid, "solid is not a right pyramid of the required kind");
}

PyramidFrame pyramid_frame(const ConvexPolyhedron& py) { return pyramidal_frame_impl(py, true); }

static PeriodicCurve pyramidal_curve(const ConvexPolyhedron& py, const PyramidFrame& fr,
                                     bool unit_normals, int subfold) {
  // Orthonormal frame with the axis as x3.
  Vec3 w = fr.axis_dir;
  Vec3 seed = py.face_centroid(fr.slant_faces[0]) - fr.base_center;
  Vec3 u = normalized(seed - w * dot(w, seed));
  Vec3 v = cross(w, u);
  auto local = [&](const Vec3& g) { return Vec3{dot(g, u), dot(g, v), dot(g, w)}; };

  const int n = int(fr.slant_faces.size());
  std::vector<Vec3> edge;
  for (int g : fr.slant_faces) {
    Vec3 e = py.face_data()[g].normal;
    if (!unit_normals) e *= py.face_data()[g].area;
    edge.push_back(local(e));
  }

  // Winding piece: partial sums, anchored so the projected polygon is
  // centered on the axis and starts at height 0.
  std::vector<Vec3> pts(n + 1);
  pts[0] = {0, 0, 0};
  for (int i = 0; i < n; ++i) pts[i + 1] = pts[i] + edge[i];
  Vec3 m{0, 0, 0};
  for (int i = 0; i < n; ++i) m += pts[i];
  m /= n;
  Vec3 anchor{-m.x, -m.y, 0};
  for (auto& p : pts) p += anchor;

  PeriodicCurve curve;
  curve.kind = PeriodicityKind::helical;
  curve.axis_point = {0, 0, 0};
  curve.axis_dir = {0, 0, 1};
  curve.generator = ScrewMotion::translation({0, 0, fr.c});
  if (subfold > 1) {
    curve.has_sub_generator = true;
    curve.sub_generator = {{0, 0, 0}, {0, 0, 1}, 2 * M_PI / subfold, fr.c / subfold};
  }

  Polyline axis_piece;
  axis_piece.pts = {{0, 0, 0}, {0, 0, fr.c}};
  Polyline winding;
  winding.pts = std::move(pts);
  curve.piece.components = {std::move(axis_piece), std::move(winding)};
  curve.validate();
  return curve;
}

PeriodicCurve pyramid_curve(const ConvexPolyhedron& py, int n) {
  PyramidFrame fr = pyramidal_frame_impl(py, true);
  if (int(fr.slant_faces.size()) != n)
    throw Error(ErrorCode::not_right_pyramid, "pyramid does not have the requested number of slant faces");
  PeriodicCurve c = pyramidal_curve(py, fr, /*unit_normals=*/true, /*subfold=*/n);
  // Check the claimed helical sub-symmetry: it must map the winding piece
  // into the curve (edge i onto edge i+1).
  const Polyline& wpl = c.piece.components[1];
  RigidMotion sg = c.sub_generator.rigid();
  for (int i = 0; i + 1 < int(wpl.pts.size()); ++i) {
    Vec3 img = sg(wpl.pts[i]);
    Vec3 ref = i + 1 < n ? wpl.pts[i + 1] : c.generator.rigid()(wpl.pts[0]);
    if (dist(img, ref) > 1e-9 * c.scale())
      throw Error(ErrorCode::not_right_pyramid, "curve lacks the helical sub-symmetry");
  }
  return c;
}

PeriodicCurve rhombic_pyramid_curve(const ConvexPolyhedron& pr) {
  PyramidFrame fr = pyramidal_frame_impl(pr, false);
  if (int(fr.slant_faces.size()) != 4)
    throw Error(ErrorCode::not_right_pyramid, "rhombic pyramid needs four slant faces");
  PeriodicCurve c = pyramidal_curve(pr, fr, /*unit_normals=*/false, /*subfold=*/2);
  c.kind = PeriodicityKind::translational;
  return c;
}

bool projection_convexity_check(const PeriodicCurve& c, ConvexityDiagnostic* diag) {
  ConvexityDiagnostic local;
  ConvexityDiagnostic& d = diag ? *diag : local;
  d.ok = false;
  if (c.component_count() < 2) {
    d.reason = "curve has no winding component";
    return false;
  }
  const Polyline& w = c.piece.components[1];
  Vec3 ax = normalized(c.axis_dir);
  auto project = [&](const Vec3& p) {
    Vec3 r = p - c.axis_point;
    return r - ax * dot(r, ax);
  };
  const double s = c.scale();

  std::vector<Vec3> poly;
  for (const Vec3& p : w.pts) {
    Vec3 q = project(p);
    if (poly.empty() || dist(q, poly.back()) > 1e-9 * s) poly.push_back(q);
  }
  if (poly.size() >= 2 && dist(poly.front(), poly.back()) <= 1e-9 * s) poly.pop_back();
  if (poly.size() < 3) {
    d.reason = "projection collapses to fewer than three vertices";
    return false;
  }
  // Single-signed turning, total 2 pi.
  const int n = int(poly.size());
  double total = 0;
  int sign = 0;
  for (int i = 0; i < n; ++i) {
    Vec3 e0 = poly[(i + 1) % n] - poly[i];
    Vec3 e1 = poly[(i + 2) % n] - poly[(i + 1) % n];
    double cr = dot(cross(e0, e1), ax);
    double turn = std::atan2(cr, dot(e0, e1));
    int ts = turn > 1e-12 ? 1 : (turn < -1e-12 ? -1 : 0);
    if (ts != 0) {
      if (sign == 0) sign = ts;
      else if (ts != sign) {
        d.reason = "projected curve has turns of both signs";
        return false;
      }
    }
    total += turn;
  }
  if (std::abs(std::abs(total) - 2 * M_PI) > 1e-6) {
    d.reason = "projected curve does not wind exactly once";
    return false;
  }
  // No self-intersections among non-adjacent edges.
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      double dd = segment_segment_dist(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]);
      if (dd <= 1e-9 * s) {
        d.reason = "projected curve self-intersects";
        return false;
      }
    }
  d.ok = true;
  d.reason = "convex";
  return true;
}

}  // namespace ppp

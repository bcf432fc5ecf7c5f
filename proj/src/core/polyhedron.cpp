#include "polyhedron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

namespace ppp {

namespace {

constexpr double kPlanarityRel = 1e-9;
constexpr double kClosureRel = 1e-9;

// Newell's method: robust polygon normal (unnormalized, length = 2*area for
// planar polygons).
Vec3 newell_normal(const std::vector<Vec3>& verts, const std::vector<int>& loop) {
  Vec3 n{0, 0, 0};
  const int k = int(loop.size());
  for (int i = 0; i < k; ++i) {
    const Vec3& a = verts[loop[i]];
    const Vec3& b = verts[loop[(i + 1) % k]];
    n.x += (a.y - b.y) * (a.z + b.z);
    n.y += (a.z - b.z) * (a.x + b.x);
    n.z += (a.x - b.x) * (a.y + b.y);
  }
  return n;
}

// Recover the faces of the convex hull of a small vertex set: every support
// plane containing >= 3 vertices with all others strictly inside contributes
// one face. Throws InvalidSolid if some vertex lies on no face (i.e. the set
// is not in convex position).
std::vector<std::vector<int>> faces_from_vertices(const std::vector<Vec3>& verts, double diameter) {
  const int nv = int(verts.size());
  const double tol = 1e-9 * diameter;
  std::vector<std::vector<int>> faces;
  std::set<std::vector<int>> seen;
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j)
      for (int k = j + 1; k < nv; ++k) {
        Vec3 n = cross(verts[j] - verts[i], verts[k] - verts[i]);
        double nl = norm(n);
        if (nl <= tol * diameter) continue;
        n /= nl;
        double d = dot(n, verts[i]);
        double lo = 0, hi = 0;
        for (int v = 0; v < nv; ++v) {
          double s = dot(n, verts[v]) - d;
          lo = std::min(lo, s);
          hi = std::max(hi, s);
        }
        if (lo < -tol && hi > tol) continue;  // not a support plane
        std::vector<int> on;
        for (int v = 0; v < nv; ++v)
          if (std::abs(dot(n, verts[v]) - d) <= tol) on.push_back(v);
        std::sort(on.begin(), on.end());
        if (!seen.insert(on).second) continue;
        // Order the loop by angle around the face centroid.
        Vec3 c{0, 0, 0};
        for (int v : on) c += verts[v];
        c /= double(on.size());
        Vec3 u = normalized(verts[on[0]] - c);
        Vec3 w = cross(n, u);
        std::sort(on.begin(), on.end(), [&](int a, int b) {
          Vec3 pa = verts[a] - c, pb = verts[b] - c;
          return std::atan2(dot(pa, w), dot(pa, u)) < std::atan2(dot(pb, w), dot(pb, u));
        });
        faces.push_back(on);
      }
  std::vector<char> used(nv, 0);
  for (const auto& f : faces)
    for (int v : f) used[v] = 1;
  for (int v = 0; v < nv; ++v)
    if (!used[v]) throw Error(ErrorCode::invalid_solid, "vertex not in convex position");
  return faces;
}

}  // namespace

ConvexPolyhedron::ConvexPolyhedron(std::vector<Vec3> vertices, std::vector<std::vector<int>> faces)
    : verts_(std::move(vertices)), faces_(std::move(faces)) {
  if (verts_.size() < 4) throw Error(ErrorCode::invalid_solid, "need at least 4 vertices");
  for (const Vec3& v : verts_)
    if (!finite(v)) throw Error(ErrorCode::invalid_solid, "non-finite vertex");
  centroid_ = {0, 0, 0};
  for (const Vec3& v : verts_) centroid_ += v;
  centroid_ /= double(verts_.size());
  Vec3 lo = verts_[0], hi = verts_[0];
  for (const Vec3& v : verts_) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  diameter_ = norm(hi - lo);
  if (diameter_ <= 0) throw Error(ErrorCode::invalid_solid, "degenerate vertex set");
  if (faces_.empty()) faces_ = faces_from_vertices(verts_, diameter_);
  build();
}

void ConvexPolyhedron::build() {
  face_data_.clear();
  for (size_t f = 0; f < faces_.size(); ++f) {
    const auto& loop = faces_[f];
    if (loop.size() < 3) throw Error(ErrorCode::invalid_solid, "face with fewer than 3 vertices");
    Vec3 nn = newell_normal(verts_, loop);
    double area = 0.5 * norm(nn);
    if (area < 1e-12 * diameter_ * diameter_)
      throw Error(ErrorCode::degenerate_face, "face area below floor");
    Vec3 n = nn / (2 * area);
    Vec3 fc = face_centroid(int(f));
    // Outward orientation: away from the interior centroid.
    if (dot(n, fc - centroid_) < 0) {
      std::reverse(faces_[f].begin(), faces_[f].end());
      n = -n;
    }
    double off = dot(n, fc);
    for (int v : loop) {
      if (std::abs(dot(n, verts_[v]) - off) > kPlanarityRel * diameter_)
        throw Error(ErrorCode::non_planar_face, "face planarity tolerance violated");
    }
    face_data_.push_back({n, area, off});
  }
  // Convexity: all vertices weakly inside every face plane.
  for (const auto& fd : face_data_)
    for (const Vec3& v : verts_)
      if (dot(fd.normal, v) - fd.offset > 1e-8 * diameter_)
        throw Error(ErrorCode::invalid_solid, "vertex outside a face plane (nonconvex input)");
  Vec3 defect = closure_defect();
  if (norm(defect) > kClosureRel * total_face_area())
    throw Error(ErrorCode::invalid_solid, "Minkowski closure defect too large (open surface?)");

  // Edge adjacency.
  edges_.clear();
  std::map<std::pair<int, int>, std::vector<int>> inc;
  for (size_t f = 0; f < faces_.size(); ++f) {
    const auto& loop = faces_[f];
    for (size_t i = 0; i < loop.size(); ++i) {
      int a = loop[i], b = loop[(i + 1) % loop.size()];
      inc[{std::min(a, b), std::max(a, b)}].push_back(int(f));
    }
  }
  for (const auto& [key, fs] : inc) {
    if (fs.size() != 2) throw Error(ErrorCode::non_manifold_edge, "edge not shared by exactly 2 faces");
    double dihedral = M_PI - angle_between(face_data_[fs[0]].normal, face_data_[fs[1]].normal);
    edges_.push_back({key.first, key.second, fs[0], fs[1], dihedral});
  }
}

double ConvexPolyhedron::total_face_area() const {
  double s = 0;
  for (const auto& fd : face_data_) s += fd.area;
  return s;
}

Vec3 ConvexPolyhedron::closure_defect() const {
  Vec3 s{0, 0, 0};
  for (const auto& fd : face_data_) s += fd.normal * fd.area;
  return s;
}

std::vector<double> ConvexPolyhedron::dihedral_angles() const {
  std::vector<double> out;
  for (const auto& e : edges_) out.push_back(e.dihedral);
  return out;
}

double ConvexPolyhedron::max_dihedral() const {
  double m = 0;
  for (const auto& e : edges_) m = std::max(m, e.dihedral);
  return m;
}

Vec3 ConvexPolyhedron::face_centroid(int f) const {
  Vec3 c{0, 0, 0};
  for (int v : faces_[f]) c += verts_[v];
  return c / double(faces_[f].size());
}

Polyline ConvexPolyhedron::face_polygon(int f) const {
  std::vector<Vec3> pts;
  for (int v : faces_[f]) pts.push_back(verts_[v]);
  return Polyline(std::move(pts), true);
}

ConvexPolyhedron ConvexPolyhedron::transformed(const RigidMotion& m) const {
  std::vector<Vec3> v;
  v.reserve(verts_.size());
  for (const Vec3& p : verts_) v.push_back(m(p));
  return ConvexPolyhedron(std::move(v), faces_);
}

bool ConvexPolyhedron::contains(const Vec3& p, double tol) const {
  return signed_excess(p) <= tol;
}

double ConvexPolyhedron::signed_excess(const Vec3& p) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& fd : face_data_) worst = std::max(worst, dot(fd.normal, p) - fd.offset);
  return worst;
}

std::vector<RigidMotion> ConvexPolyhedron::symmetry_group() const {
  const double tol = 1e-6 * diameter_;
  // Neighbors of vertex 0 along edges.
  std::vector<int> nbr0;
  for (const auto& e : edges_) {
    if (e.v0 == 0) nbr0.push_back(e.v1);
    if (e.v1 == 0) nbr0.push_back(e.v0);
  }
  if (nbr0.size() < 2) return {RigidMotion::identity()};
  const Vec3 c = centroid_;
  auto frame = [&](const Vec3& a, const Vec3& b, int sign) {
    Vec3 u = normalized(a);
    Vec3 w = normalized(cross(a, b)) * double(sign);
    Vec3 v = cross(w, u);
    Mat3 m;
    m.a = {u.x, v.x, w.x, u.y, v.y, w.y, u.z, v.z, w.z};  // columns u, v, w
    return m;
  };
  const Vec3 p0 = verts_[0] - c, p1 = verts_[nbr0[0]] - c;
  Mat3 ref = frame(p0, p1, 1);
  std::vector<RigidMotion> group;
  auto try_candidate = [&](const Mat3& rot) {
    for (const auto& g : group) {
      double diff = 0;
      for (int i = 0; i < 9; ++i) diff = std::max(diff, std::abs(g.rot.a[i] - rot.a[i]));
      if (diff < 1e-6) return;
    }
    // Verify the vertex set maps onto itself.
    for (const Vec3& v : verts_) {
      Vec3 img = rot * (v - c) + c;
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& w : verts_) best = std::min(best, dist(img, w));
      if (best > tol) return;
    }
    group.push_back({rot, c - rot * c});
  };
  for (size_t i = 0; i < verts_.size(); ++i) {
    if (std::abs(norm(verts_[i] - c) - norm(p0)) > tol) continue;
    for (size_t j = 0; j < verts_.size(); ++j) {
      if (j == i) continue;
      if (std::abs(dist(verts_[i], verts_[j]) - dist(verts_[0], verts_[nbr0[0]])) > tol) continue;
      for (size_t k = 0; k < verts_.size(); ++k) {
        if (k == i || k == j) continue;
        if (std::abs(dist(verts_[i], verts_[k]) - dist(verts_[0], verts_[nbr0[1]])) > tol) continue;
        if (std::abs(dist(verts_[j], verts_[k]) - dist(verts_[nbr0[0]], verts_[nbr0[1]])) > tol)
          continue;
        for (int sign : {1, -1}) {
          Mat3 img = frame(verts_[i] - c, verts_[j] - c, 1);
          // rot maps the reference frame to the image frame; sign -1 composes
          // an improper flip in the frame's third axis.
          Mat3 flip = Mat3::identity();
          flip(2, 2) = sign;
          Mat3 rot = img * flip * ref.transposed();
          try_candidate(rot);
        }
      }
    }
  }
  return group;
}

ConvexPolyhedron ConvexPolyhedron::tetrahedron(const Vec3& a, const Vec3& b, const Vec3& c,
                                               const Vec3& d) {
  return ConvexPolyhedron({a, b, c, d}, {});
}

ConvexPolyhedron ConvexPolyhedron::platonic(const std::string& name, double edge) {
  std::vector<Vec3> v;
  double model_edge = 1;
  if (name == "tetrahedron") {
    v = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    model_edge = 2 * std::sqrt(2.0);
  } else if (name == "cube") {
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1}) v.push_back({double(sx), double(sy), double(sz)});
    model_edge = 2;
  } else if (name == "octahedron") {
    v = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    model_edge = std::sqrt(2.0);
  } else if (name == "icosahedron") {
    const double phi = (1 + std::sqrt(5.0)) / 2;
    for (int s1 : {-1, 1})
      for (int s2 : {-1, 1}) {
        v.push_back({0, s1 * 1.0, s2 * phi});
        v.push_back({s1 * 1.0, s2 * phi, 0});
        v.push_back({s2 * phi, 0, s1 * 1.0});
      }
    model_edge = 2;
  } else if (name == "dodecahedron") {
    const double phi = (1 + std::sqrt(5.0)) / 2;
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1}) v.push_back({double(sx), double(sy), double(sz)});
    for (int s1 : {-1, 1})
      for (int s2 : {-1, 1}) {
        v.push_back({0, s1 / phi, s2 * phi});
        v.push_back({s1 / phi, s2 * phi, 0});
        v.push_back({s2 * phi, 0, s1 / phi});
      }
    model_edge = 2 / phi;
  } else {
    throw Error(ErrorCode::invalid_solid, "unknown platonic solid: " + name);
  }
  const double s = edge / model_edge;
  for (Vec3& p : v) p *= s;
  return ConvexPolyhedron(std::move(v), {});
}

ConvexPolyhedron ConvexPolyhedron::right_pyramid(int n, double base_edge, double height) {
  if (n < 3) throw Error(ErrorCode::not_right_pyramid, "base gon count must be >= 3");
  if (base_edge <= 0 || height <= 0)
    throw Error(ErrorCode::not_right_pyramid, "base edge and height must be positive");
  const double R = base_edge / (2 * std::sin(M_PI / n));
  std::vector<Vec3> v;
  for (int i = 0; i < n; ++i) {
    double th = 2 * M_PI * i / n;
    v.push_back({R * std::cos(th), R * std::sin(th), 0});
  }
  v.push_back({0, 0, height});
  return ConvexPolyhedron(std::move(v), {});
}

ConvexPolyhedron ConvexPolyhedron::rhombic_pyramid(double d1, double d2, double height) {
  if (d1 <= 0 || d2 <= 0 || height <= 0)
    throw Error(ErrorCode::not_right_pyramid, "diagonals and height must be positive");
  std::vector<Vec3> v = {{d1 / 2, 0, 0}, {0, d2 / 2, 0}, {-d1 / 2, 0, 0}, {0, -d2 / 2, 0},
                         {0, 0, height}};
  return ConvexPolyhedron(std::move(v), {});
}

}  // namespace ppp

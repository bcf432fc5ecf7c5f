#include "verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace ppp {

namespace {

double corner_angle(const Vec3& apex, const Vec3& a, const Vec3& b) {
  return angle_between(a - apex, b - apex);
}

// Interval overlap on a separating axis, with strict margin.
bool intervals_overlap(double lo1, double hi1, double lo2, double hi2, double eps) {
  return hi1 > lo2 + eps && hi2 > lo1 + eps;
}

// Strict overlap of two 2d triangles (separating-axis test).
bool tri_overlap_2d(const double p[3][2], const double q[3][2], double eps) {
  const double (*tris[2])[2] = {p, q};
  for (int t = 0; t < 2; ++t)
    for (int e = 0; e < 3; ++e) {
      const double (*a)[2] = tris[t];
      double ax = a[(e + 1) % 3][0] - a[e][0], ay = a[(e + 1) % 3][1] - a[e][1];
      double nx = -ay, ny = ax;  // edge normal
      double len = std::hypot(nx, ny);
      if (len <= 0) continue;
      nx /= len;
      ny /= len;
      double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
      for (int k = 0; k < 3; ++k) {
        double s1 = nx * p[k][0] + ny * p[k][1];
        double s2 = nx * q[k][0] + ny * q[k][1];
        lo1 = std::min(lo1, s1), hi1 = std::max(hi1, s1);
        lo2 = std::min(lo2, s2), hi2 = std::max(hi2, s2);
      }
      if (!intervals_overlap(lo1, hi1, lo2, hi2, eps)) return false;
    }
  return true;
}

// Segment (a, b) against triangle (t0, t1, t2), non-coplanar case.
bool segment_hits_triangle(const Vec3& a, const Vec3& b, const Vec3& t0, const Vec3& t1,
                           const Vec3& t2, double eps) {
  Vec3 n = cross(t1 - t0, t2 - t0);
  double nn = norm(n);
  if (nn <= 0) return false;
  n /= nn;
  double da = dot(n, a - t0), db = dot(n, b - t0);
  if ((da > eps && db > eps) || (da < -eps && db < -eps)) return false;
  if (std::abs(da - db) <= 1e-300) return false;  // parallel, handled as coplanar
  double s = da / (da - db);
  if (s < -eps || s > 1 + eps) return false;
  Vec3 x = a + (b - a) * s;
  // barycentric inside test
  Vec3 e0 = t1 - t0, e1 = t2 - t0, d = x - t0;
  double a00 = dot(e0, e0), a01 = dot(e0, e1), a11 = dot(e1, e1);
  double b0 = dot(d, e0), b1 = dot(d, e1);
  double det = a00 * a11 - a01 * a01;
  if (det <= 0) return false;
  double u = (a11 * b0 - a01 * b1) / det, v = (a00 * b1 - a01 * b0) / det;
  double m = eps / std::sqrt(det);  // tolerance in barycentric units
  return u > -m && v > -m && u + v < 1 + m;
}

bool tri_tri_intersect(const Vec3 p[3], const Vec3 q[3], double eps) {
  Vec3 n1 = cross(p[1] - p[0], p[2] - p[0]);
  Vec3 n2 = cross(q[1] - q[0], q[2] - q[0]);
  double l1 = norm(n1), l2 = norm(n2);
  if (l1 <= 0 || l2 <= 0) return false;
  n1 /= l1;
  n2 /= l2;
  double dq[3], dp[3];
  for (int k = 0; k < 3; ++k) {
    dq[k] = dot(n1, q[k] - p[0]);
    dp[k] = dot(n2, p[k] - q[0]);
  }
  auto all_off = [&](const double d[3]) {
    return (d[0] > eps && d[1] > eps && d[2] > eps) ||
           (d[0] < -eps && d[1] < -eps && d[2] < -eps);
  };
  if (all_off(dq) || all_off(dp)) return false;
  auto all_on = [&](const double d[3]) {
    return std::abs(d[0]) <= eps && std::abs(d[1]) <= eps && std::abs(d[2]) <= eps;
  };
  if (all_on(dq) && all_on(dp)) {
    // coplanar: project on the dominant plane of n1
    int ax = std::abs(n1.x) > std::abs(n1.y)
                 ? (std::abs(n1.x) > std::abs(n1.z) ? 0 : 2)
                 : (std::abs(n1.y) > std::abs(n1.z) ? 1 : 2);
    int u = (ax + 1) % 3, v = (ax + 2) % 3;
    double pp[3][2], qq[3][2];
    for (int k = 0; k < 3; ++k) {
      pp[k][0] = p[k][u], pp[k][1] = p[k][v];
      qq[k][0] = q[k][u], qq[k][1] = q[k][v];
    }
    return tri_overlap_2d(pp, qq, eps);
  }
  for (int k = 0; k < 3; ++k) {
    if (segment_hits_triangle(p[k], p[(k + 1) % 3], q[0], q[1], q[2], eps)) return true;
    if (segment_hits_triangle(q[k], q[(k + 1) % 3], p[0], p[1], p[2], eps)) return true;
  }
  return false;
}

}  // namespace

std::string CheckReport::line() const {
  std::ostringstream os;
  os << name << " " << (pass ? "pass" : "FAIL") << " measured=" << measured
     << " tolerance=" << tolerance;
  if (!note.empty()) os << " (" << note << ")";
  return os.str();
}

std::vector<Vec3> vertex_normals(const PeriodicMesh& mesh) {
  std::vector<Vec3> n(mesh.pos.size(), Vec3{0, 0, 0});
  RigidMotion G[5];
  for (int k = -2; k <= 2; ++k)
    G[k + 2] = mesh.periodic ? mesh.generator.rigid_power(k) : RigidMotion::identity();
  for (const WrapTri& t : mesh.tris) {
    Vec3 p[3] = {mesh.position(t.r[0]), mesh.position(t.r[1]), mesh.position(t.r[2])};
    Vec3 an = cross(p[1] - p[0], p[2] - p[0]);  // area-weighted
    for (const WrapRef& r : t.r) n[r.v] += G[-r.w + 2].rot * an;
  }
  for (Vec3& v : n) {
    double l = norm(v);
    if (l > 0) v /= l;
  }
  return n;
}

CheckReport perpendicularity(const PeriodicMesh& mesh, int loop, int k0, int k1,
                             const Vec3& plane_normal, double tol_deg) {
  CheckReport rep;
  rep.name = "perpendicularity";
  rep.tolerance = tol_deg;
  const BoundaryLoop& l = mesh.loops.at(loop);
  const int nb = int(l.verts.size());
  auto normals = vertex_normals(mesh);
  const Vec3 pn = normalized(plane_normal);
  double worst = 0;
  Vec3 at{0, 0, 0};
  for (int k = k0; k <= k1; ++k) {
    const int w = k >= nb ? 1 : (k < 0 ? -1 : 0);
    const int idx = ((k % nb) + nb) % nb;
    WrapRef r{l.verts[idx], w};
    Vec3 nv = mesh.periodic ? mesh.generator.rigid_power(w).rot * normals[r.v] : normals[r.v];
    // orthogonal contact <=> surface normal parallel to the plane
    double dev = std::abs(M_PI / 2 - angle_between(nv, pn));
    if (dev > worst) {
      worst = dev;
      at = mesh.position(r);
    }
  }
  rep.measured = worst * 180 / M_PI;
  rep.pass = rep.measured < tol_deg;
  rep.worst = {at};
  return rep;
}

CheckReport planar_convexity(const std::vector<Vec3>& pts, bool closed, const Vec3& plane_normal,
                             double noise) {
  CheckReport rep;
  rep.name = "planar_convexity";
  rep.tolerance = 1e-8;
  const Vec3 pn = normalized(plane_normal);
  const int n = int(pts.size());
  if (n < 3) {
    rep.pass = false;
    rep.note = "fewer than 3 points";
    return rep;
  }
  double total = 0, worst = 0, thr_sum = 0;
  int sign = 0;
  bool ok = true;
  Vec3 at{0, 0, 0};
  const int turns = closed ? n : n - 2;
  for (int k = 0; k < turns; ++k) {
    const Vec3& a = pts[k % n];
    const Vec3& b = pts[(k + 1) % n];
    const Vec3& c = pts[(k + 2) % n];
    Vec3 u = b - a, v = c - b;
    u -= pn * dot(pn, u);
    v -= pn * dot(pn, v);
    if (norm(u) <= 0 || norm(v) <= 0) continue;
    double ang = std::atan2(dot(pn, cross(u, v)), dot(u, v));
    total += ang;
    // A position error of `noise` tilts a turning angle by up to roughly
    // 2 noise / (shorter adjacent edge); turns below that cannot carry a
    // trustworthy sign (edges near a graded corner are far shorter than the
    // sampling error there).
    const double thr = std::max(1e-8, 2 * noise / std::min(norm(u), norm(v)));
    rep.tolerance = std::max(rep.tolerance, thr);
    thr_sum += thr;
    if (std::abs(ang) < thr) continue;
    int s = ang > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign && std::abs(ang) > worst) {
      ok = false;
      worst = std::abs(ang);
      at = b;
    }
  }
  if (closed && std::abs(std::abs(total) - 2 * M_PI) > std::max(1e-6, thr_sum)) {
    ok = false;
    rep.note = "total turning != 2 pi";
  }
  rep.measured = ok ? 0 : worst;
  rep.pass = ok;
  if (!ok && rep.note.empty()) rep.note = "sign change in turning";
  rep.worst = {at};
  return rep;
}

namespace {

// Candidate vertex-disjoint triangle pairs from a uniform bbox grid.
// Each instance is a triangle with an extra generator shift applied.
struct TriInst {
  int tri;
  int shift;
};

template <typename Hit>
void for_close_pairs(const PeriodicMesh& mesh, const std::vector<TriInst>& inst, Hit&& hit) {
  const int ni = int(inst.size());
  std::vector<Vec3> lo(ni), hi(ni);
  double cell = 0;
  for (int i = 0; i < ni; ++i) {
    RigidMotion g = mesh.periodic ? mesh.generator.rigid_power(inst[i].shift)
                                  : RigidMotion::identity();
    const WrapTri& t = mesh.tris[inst[i].tri];
    Vec3 l{1e300, 1e300, 1e300}, h{-1e300, -1e300, -1e300};
    for (const WrapRef& r : t.r) {
      Vec3 p = g(mesh.position(r));
      for (int c = 0; c < 3; ++c) {
        l[c] = std::min(l[c], p[c]);
        h[c] = std::max(h[c], p[c]);
      }
    }
    lo[i] = l;
    hi[i] = h;
    cell = std::max({cell, h.x - l.x, h.y - l.y, h.z - l.z});
  }
  if (cell <= 0) return;
  std::map<std::array<long long, 3>, std::vector<int>> grid;
  auto key = [&](const Vec3& p) {
    return std::array<long long, 3>{(long long)std::floor(p.x / cell),
                                    (long long)std::floor(p.y / cell),
                                    (long long)std::floor(p.z / cell)};
  };
  for (int i = 0; i < ni; ++i) {
    auto klo = key(lo[i]), khi = key(hi[i]);
    for (long long x = klo[0]; x <= khi[0]; ++x)
      for (long long y = klo[1]; y <= khi[1]; ++y)
        for (long long z = klo[2]; z <= khi[2]; ++z) grid[{x, y, z}].push_back(i);
  }
  auto share_vertex = [&](int i, int j) {
    for (const WrapRef& a : mesh.tris[inst[i].tri].r)
      for (const WrapRef& b : mesh.tris[inst[j].tri].r)
        if (a.v == b.v && a.w + inst[i].shift == b.w + inst[j].shift) return true;
    return false;
  };
  std::map<std::pair<int, int>, char> seen;
  for (auto& [k, v] : grid)
    for (size_t a = 0; a < v.size(); ++a)
      for (size_t b = a + 1; b < v.size(); ++b) {
        int i = std::min(v[a], v[b]), j = std::max(v[a], v[b]);
        if (inst[i].shift != 0 && inst[j].shift != 0) continue;  // covered by base pair
        if (seen.count({i, j})) continue;
        seen[{i, j}] = 1;
        bool apart = false;
        for (int c = 0; c < 3; ++c)
          if (lo[i][c] > hi[j][c] || lo[j][c] > hi[i][c]) apart = true;
        if (apart || share_vertex(i, j)) continue;
        if (hit(i, j)) return;
      }
}

}  // namespace

CheckReport graph_check(const PeriodicMesh& mesh, const Vec3& direction) {
  CheckReport rep;
  rep.name = "graph_check";
  const Vec3 d = normalized(direction);
  const double diam = mesh.diameter();

  // global orientation sign from the area-weighted normal sum
  double ssum = 0;
  for (const WrapTri& t : mesh.tris) {
    Vec3 p[3] = {mesh.position(t.r[0]), mesh.position(t.r[1]), mesh.position(t.r[2])};
    ssum += dot(cross(p[1] - p[0], p[2] - p[0]), d);
  }
  const double sign = ssum >= 0 ? 1.0 : -1.0;

  double worst = 1e300;
  Vec3 at{0, 0, 0};
  for (const WrapTri& t : mesh.tris) {
    Vec3 p[3] = {mesh.position(t.r[0]), mesh.position(t.r[1]), mesh.position(t.r[2])};
    Vec3 an = cross(p[1] - p[0], p[2] - p[0]);
    double l = norm(an);
    if (l <= 0) continue;
    double c = sign * dot(an, d) / l;
    if (c < worst) {
      worst = c;
      at = (p[0] + p[1] + p[2]) / 3;
    }
  }
  rep.measured = worst;  // min normal component along direction
  rep.worst = {at};
  // A surface meeting its support plane orthogonally along a free boundary
  // has genuinely vertical tangent planes there, so the sign condition only
  // rejects clearly reversed triangles; single-valuedness is decided by the
  // projected overlap sweep below.
  rep.tolerance = -1e-3;
  if (worst <= rep.tolerance) {
    rep.pass = false;
    rep.note = "reversed tangent plane";
    return rep;
  }

  // projected overlap sweep
  Vec3 e1 = std::abs(d.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  e1 = normalized(e1 - d * dot(d, e1));
  Vec3 e2 = cross(d, e1);
  const double eps = 1e-9 * std::max(diam, 1e-300);
  std::vector<TriInst> inst;
  for (int t = 0; t < int(mesh.tris.size()); ++t) inst.push_back({t, 0});
  bool overlap = false;
  for_close_pairs(mesh, inst, [&](int i, int j) {
    double pp[3][2], qq[3][2];
    for (int c = 0; c < 3; ++c) {
      Vec3 a = mesh.position(mesh.tris[inst[i].tri].r[c]);
      Vec3 b = mesh.position(mesh.tris[inst[j].tri].r[c]);
      pp[c][0] = dot(a, e1), pp[c][1] = dot(a, e2);
      qq[c][0] = dot(b, e1), qq[c][1] = dot(b, e2);
    }
    if (tri_overlap_2d(pp, qq, eps)) {
      overlap = true;
      rep.worst = {mesh.position(mesh.tris[inst[i].tri].r[0])};
      return true;
    }
    return false;
  });
  if (overlap) {
    rep.pass = false;
    rep.note = "projected triangles overlap";
    return rep;
  }
  rep.pass = true;
  return rep;
}

CheckReport embeddedness(const PeriodicMesh& mesh) {
  CheckReport rep;
  rep.name = "embeddedness";
  const double diam = mesh.diameter();
  const double eps = 1e-9 * std::max(diam, 1e-300);
  rep.tolerance = eps;

  std::vector<TriInst> inst;
  for (int t = 0; t < int(mesh.tris.size()); ++t) inst.push_back({t, 0});
  if (mesh.periodic) {
    // Skip the copy check when the generator is numerically the identity
    // (closed-up conjugate annuli): the base pairs already cover everything.
    RigidMotion g = mesh.generator.rigid_power(1);
    double dev = norm(g.trans);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dev += std::abs(g.rot(i, j) - (i == j ? 1.0 : 0.0)) * diam;
    if (dev > 1e-9 * diam)
      for (int t = 0; t < int(mesh.tris.size()); ++t) {
        inst.push_back({t, 1});
        inst.push_back({t, -1});
      }
  }

  bool hit_found = false;
  for_close_pairs(mesh, inst, [&](int i, int j) {
    RigidMotion gi = mesh.periodic ? mesh.generator.rigid_power(inst[i].shift)
                                   : RigidMotion::identity();
    RigidMotion gj = mesh.periodic ? mesh.generator.rigid_power(inst[j].shift)
                                   : RigidMotion::identity();
    Vec3 p[3], q[3];
    for (int c = 0; c < 3; ++c) {
      p[c] = gi(mesh.position(mesh.tris[inst[i].tri].r[c]));
      q[c] = gj(mesh.position(mesh.tris[inst[j].tri].r[c]));
    }
    if (tri_tri_intersect(p, q, eps)) {
      hit_found = true;
      rep.worst = {(p[0] + p[1] + p[2]) / 3};
      return true;
    }
    return false;
  });
  rep.measured = hit_found ? 1 : 0;
  rep.pass = !hit_found;
  if (hit_found) rep.note = "intersecting triangle pair";
  return rep;
}

CheckReport axis_curvature_sign(const PeriodicMesh& mesh, int loop) {
  CheckReport rep;
  rep.name = "axis_curvature_sign";
  rep.tolerance = 0;
  const BoundaryLoop& l = mesh.loops.at(loop);
  std::vector<double> sum(mesh.pos.size(), 0.0);
  for (const WrapTri& t : mesh.tris) {
    Vec3 p[3] = {mesh.position(t.r[0]), mesh.position(t.r[1]), mesh.position(t.r[2])};
    for (int c = 0; c < 3; ++c)
      sum[t.r[c].v] += corner_angle(p[c], p[(c + 1) % 3], p[(c + 2) % 3]);
  }
  double worst = 1e300;
  Vec3 at{0, 0, 0};
  for (int v : l.verts)
    if (sum[v] - M_PI < worst) {
      worst = sum[v] - M_PI;
      at = mesh.pos[v];
    }
  rep.measured = worst;  // min angle-sum excess over pi
  rep.pass = worst > 0;
  rep.worst = {at};
  if (!rep.pass) rep.note = worst < -1e-12 ? "positive curvature" : "zero margin";
  return rep;
}

CheckReport axis_gauss_modulus(const PeriodicMesh& mesh, int loop, const Vec3& axis_dir) {
  CheckReport rep;
  rep.name = "axis_gauss_modulus";
  rep.tolerance = 1e-2;
  const BoundaryLoop& l = mesh.loops.at(loop);
  auto normals = vertex_normals(mesh);
  const Vec3 a = normalized(axis_dir);
  double worst = 0;
  Vec3 at{0, 0, 0};
  for (int v : l.verts) {
    double c = dot(normals[v], a);
    double s = norm(normals[v] - a * c);
    double g = 1 - c <= 0 ? std::numeric_limits<double>::infinity() : s / (1 - c);
    double dev = std::abs(g - 1);
    if (dev > worst) {
      worst = dev;
      at = mesh.pos[v];
    }
  }
  rep.measured = worst;
  rep.pass = worst < rep.tolerance;
  rep.worst = {at};
  return rep;
}

CheckReport conjugate_height_sign(const PeriodicMesh& mesh, const Vec3& plane_normal,
                                  double plane_offset) {
  CheckReport rep;
  rep.name = "conjugate_height_sign";
  const double diam = mesh.diameter();
  rep.tolerance = 1e-6 * diam;
  const Vec3 pn = normalized(plane_normal);
  double worst = 1e300;
  Vec3 at{0, 0, 0};
  for (const Vec3& p : mesh.pos) {
    double h = dot(pn, p) - plane_offset;
    if (h < worst) {
      worst = h;
      at = p;
    }
  }
  rep.measured = worst;
  rep.pass = worst >= -rep.tolerance;
  rep.worst = {at};
  return rep;
}

CheckReport total_curvature_gate(const Polyline& p) {
  CheckReport rep;
  rep.name = "total_curvature_gate";
  rep.tolerance = 4 * M_PI;
  rep.measured = tangent_indicatrix_length(p);
  rep.pass = rep.measured < rep.tolerance;
  return rep;
}

}  // namespace ppp

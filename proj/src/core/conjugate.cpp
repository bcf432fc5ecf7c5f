#include "conjugate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "solver.hpp"

namespace ppp {

namespace {

struct EdgeKey {
  long a, b;
  bool operator<(const EdgeKey& o) const { return a != o.a ? a < o.a : b < o.b; }
};

long encode(const WrapRef& r) { return long(r.v) * 8 + (r.w + 2); }

EdgeKey key_of(const WrapRef& x, const WrapRef& y) {
  long ex = encode(x), ey = encode(y);
  return ex < ey ? EdgeKey{ex, ey} : EdgeKey{ey, ex};
}

// Unique triangle owning the boundary edge between vertex ids v0, v1,
// together with the matching corner indices.
struct OwnedEdge {
  int tri;
  int ca, cb;  // corners of v0 and v1 within the triangle
};

OwnedEdge find_owner(const PeriodicMesh& mesh, int v0, int v1) {
  for (int ti = 0; ti < int(mesh.tris.size()); ++ti) {
    const WrapTri& t = mesh.tris[ti];
    int ca = -1, cb = -1;
    for (int c = 0; c < 3; ++c) {
      if (t.r[c].v == v0) ca = c;
      if (t.r[c].v == v1) cb = c;
    }
    if (ca >= 0 && cb >= 0) return {ti, ca, cb};
  }
  throw Error(ErrorCode::invalid_argument, "boundary edge has no incident triangle");
}

}  // namespace

Vec3 boundary_flux(const PeriodicMesh& mesh, int loop) {
  const BoundaryLoop& l = mesh.loops.at(loop);
  const int nb = int(l.verts.size());
  Vec3 flux{0, 0, 0};
  for (int k = 0; k < nb; ++k) {
    int v0 = l.verts[k], v1 = l.verts[(k + 1) % nb];
    OwnedEdge oe = find_owner(mesh, v0, v1);
    const WrapTri& t = mesh.tris[oe.tri];
    Vec3 p[3] = {mesh.position(t.r[0]), mesh.position(t.r[1]), mesh.position(t.r[2])};
    Vec3 n = normalized(cross(p[1] - p[0], p[2] - p[0]));
    Vec3 d = p[oe.cb] - p[oe.ca];
    int cc = 3 - oe.ca - oe.cb;
    Vec3 co = normalized(cross(n, d));
    if (dot(co, p[cc] - p[oe.ca]) < 0) co = -co;
    // Express in the fundamental frame of the loop edge.
    int w = t.r[oe.ca].w;
    if (w != 0) co = mesh.generator.rigid_power(-w).rot * co;
    flux += co * norm(d);
  }
  return flux;
}

ConjugateMesh conjugate(const PeriodicMesh& mesh, double tol) {
  const double res = mesh_residual(mesh);
  if (res > 10 * tol)
    throw Error(ErrorCode::not_minimal, "mesh residual too large for conjugation");
  if (mesh.periodic) {
    Mat3 R = mesh.generator.rigid_power(1).rot;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (std::abs(R(i, j) - (i == j ? 1.0 : 0.0)) > 1e-9)
          throw Error(ErrorCode::invalid_argument,
                      "conjugation supports only translational quotients");
  }

  const int nt = int(mesh.tris.size());
  const int nv = mesh.vertex_count();
  const double diam = mesh.diameter();

  // Rotated differentials per triangle.
  std::vector<std::array<Vec3, 3>> rot_edge(nt);  // rot_edge[t][c]: value at corner c rel corner 0
  for (int ti = 0; ti < nt; ++ti) {
    const WrapTri& t = mesh.tris[ti];
    Vec3 p[3] = {mesh.position(t.r[0]), mesh.position(t.r[1]), mesh.position(t.r[2])};
    Vec3 n = normalized(cross(p[1] - p[0], p[2] - p[0]));
    rot_edge[ti][0] = {0, 0, 0};
    rot_edge[ti][1] = cross(n, p[1] - p[0]);
    rot_edge[ti][2] = cross(n, p[2] - p[0]);
  }

  // Dual adjacency on the cut surface (wraps distinguish the two seam sides).
  std::map<EdgeKey, std::vector<std::pair<int, std::array<int, 2>>>> edge_tris;
  for (int ti = 0; ti < nt; ++ti) {
    const WrapTri& t = mesh.tris[ti];
    for (int c = 0; c < 3; ++c) {
      int c2 = (c + 1) % 3;
      edge_tris[key_of(t.r[c], t.r[c2])].push_back({ti, {c, c2}});
    }
  }

  // Root: lowest-index triangle touching the axis loop.
  std::vector<char> on_axis(nv, 0);
  for (int v : mesh.loops.at(0).verts) on_axis[v] = 1;
  int root = -1;
  for (int ti = 0; ti < nt && root < 0; ++ti)
    for (const WrapRef& r : mesh.tris[ti].r)
      if (on_axis[r.v]) {
        root = ti;
        break;
      }
  if (root < 0) throw Error(ErrorCode::invalid_argument, "no triangle touches the axis loop");

  ConjugateMesh cm;
  cm.source_diameter = diam;
  cm.tri_conj.assign(nt, {Vec3{}, Vec3{}, Vec3{}});
  std::vector<char> visited(nt, 0);
  std::vector<Vec3> base(nt);  // value at corner 0
  base[root] = {0, 0, 0};
  visited[root] = 1;
  std::queue<int> bfs;
  bfs.push(root);
  double max_hol = 0;
  while (!bfs.empty()) {
    int ti = bfs.front();
    bfs.pop();
    const WrapTri& t = mesh.tris[ti];
    for (int c = 0; c < 3; ++c) {
      int c2 = (c + 1) % 3;
      Vec3 mid = base[ti] + (rot_edge[ti][c] + rot_edge[ti][c2]) * 0.5;
      for (auto& [tj, cc] : edge_tris[key_of(t.r[c], t.r[c2])]) {
        if (tj == ti) continue;
        Vec3 mid_j_rel = (rot_edge[tj][cc[0]] + rot_edge[tj][cc[1]]) * 0.5;
        if (!visited[tj]) {
          base[tj] = mid - mid_j_rel;
          visited[tj] = 1;
          bfs.push(tj);
        } else {
          max_hol = std::max(max_hol, norm(base[tj] + mid_j_rel - mid));
        }
      }
    }
  }
  for (int ti = 0; ti < nt; ++ti)
    if (!visited[ti])
      throw Error(ErrorCode::invalid_argument, "mesh is not edge-connected");
  cm.max_holonomy = max_hol;
  for (int ti = 0; ti < nt; ++ti)
    for (int c = 0; c < 3; ++c) cm.tri_conj[ti][c] = base[ti] + rot_edge[ti][c];

  // Loop periods: conjugate increments along each boundary loop over one
  // fundamental piece.
  for (int li = 0; li < int(mesh.loops.size()); ++li) {
    const BoundaryLoop& l = mesh.loops[li];
    const int nb = int(l.verts.size());
    Vec3 period{0, 0, 0};
    for (int k = 0; k < nb; ++k) {
      OwnedEdge oe = find_owner(mesh, l.verts[k], l.verts[(k + 1) % nb]);
      period += cm.tri_conj[oe.tri][oe.cb] - cm.tri_conj[oe.tri][oe.ca];
    }
    cm.loop_periods.push_back(period);
  }

  // Conjugate seam translation: pull back w = 1 corners by it.
  std::vector<Vec3> val(nv, Vec3{0, 0, 0});
  std::vector<int> cnt(nv, 0);
  for (int ti = 0; ti < nt; ++ti)
    for (int c = 0; c < 3; ++c)
      if (mesh.tris[ti].r[c].w == 0) {
        val[mesh.tris[ti].r[c].v] += cm.tri_conj[ti][c];
        cnt[mesh.tris[ti].r[c].v]++;
      }
  for (int v = 0; v < nv; ++v)
    if (cnt[v]) val[v] /= cnt[v];
  Vec3 tstar{0, 0, 0};
  int tcnt = 0;
  for (int ti = 0; ti < nt; ++ti)
    for (int c = 0; c < 3; ++c) {
      const WrapRef& r = mesh.tris[ti].r[c];
      if (r.w == 1 && cnt[r.v]) {
        tstar += cm.tri_conj[ti][c] - val[r.v];
        ++tcnt;
      }
    }
  if (tcnt) tstar /= tcnt;

  // Vertex export values: averaged, with wrapped corners pulled back.
  std::vector<Vec3> out(nv, Vec3{0, 0, 0});
  std::vector<int> ocnt(nv, 0);
  for (int ti = 0; ti < nt; ++ti)
    for (int c = 0; c < 3; ++c) {
      const WrapRef& r = mesh.tris[ti].r[c];
      out[r.v] += cm.tri_conj[ti][c] - tstar * r.w;
      ocnt[r.v]++;
    }
  for (int v = 0; v < nv; ++v)
    if (ocnt[v]) out[v] /= ocnt[v];

  // Boundary vertices: chain-integrated so straight source arcs map to
  // exactly planar conjugate arcs.
  for (const BoundaryLoop& l : mesh.loops) {
    const int nb = int(l.verts.size());
    OwnedEdge oe0 = find_owner(mesh, l.verts[0], l.verts[1 % nb]);
    Vec3 acc = cm.tri_conj[oe0.tri][oe0.ca] - tstar * mesh.tris[oe0.tri].r[oe0.ca].w;
    out[l.verts[0]] = acc;
    for (int k = 0; k + 1 < nb; ++k) {
      OwnedEdge oe = find_owner(mesh, l.verts[k], l.verts[k + 1]);
      acc += cm.tri_conj[oe.tri][oe.cb] - cm.tri_conj[oe.tri][oe.ca];
      out[l.verts[k + 1]] = acc;
    }
  }

  // Gauge: axis-loop conjugate centroid at the origin.
  Vec3 g{0, 0, 0};
  for (int v : mesh.loops[0].verts) g += out[v];
  g /= double(mesh.loops[0].verts.size());
  for (Vec3& p : out) p -= g;
  for (auto& t : cm.tri_conj)
    for (Vec3& p : t) p -= g;

  cm.mesh = mesh;  // copy combinatorics, loops, params
  cm.mesh.pos = std::move(out);
  cm.mesh.curve_components.clear();
  if (mesh.periodic) cm.mesh.generator = ScrewMotion::translation(tstar);
  return cm;
}

double closure_gap(const ConjugateMesh& cm, int loop) { return norm(cm.loop_periods.at(loop)); }

PlaneFit fit_plane(const std::vector<Vec3>& pts) {
  if (pts.size() < 3) throw Error(ErrorCode::invalid_argument, "plane fit needs 3+ points");
  Vec3 c{0, 0, 0};
  for (const Vec3& p : pts) c += p;
  c /= double(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : pts) {
    Eigen::Vector3d d(p.x - c.x, p.y - c.y, p.z - c.z);
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  Eigen::Vector3d n = es.eigenvectors().col(0);  // smallest eigenvalue
  PlaneFit f;
  f.normal = normalized(Vec3{n[0], n[1], n[2]});
  f.offset = dot(f.normal, c);
  for (const Vec3& p : pts) f.max_dev = std::max(f.max_dev, std::abs(dot(f.normal, p) - f.offset));
  return f;
}

PerpReport perpendicularity_data(const ConjugateMesh& cm, int loop, int k0, int k1) {
  const BoundaryLoop& l = cm.mesh.loops.at(loop);
  const int nb = int(l.verts.size());
  std::vector<Vec3> pts;
  std::vector<char> on_arc(cm.mesh.vertex_count(), 0);
  for (int k = k0; k <= k1; ++k) {
    int v = l.verts[((k % nb) + nb) % nb];
    Vec3 p = cm.mesh.pos[v];
    if (k >= nb && cm.mesh.periodic) p = cm.mesh.generator.rigid_power(k / nb)(p);
    pts.push_back(p);
    on_arc[v] = 1;
  }
  PerpReport rep;
  rep.plane = fit_plane(pts);
  for (size_t ti = 0; ti < cm.tri_conj.size(); ++ti) {
    bool touches = false;
    for (const WrapRef& r : cm.mesh.tris[ti].r)
      if (on_arc[r.v]) touches = true;
    if (!touches) continue;
    const auto& t = cm.tri_conj[ti];
    Vec3 n = normalized(cross(t[1] - t[0], t[2] - t[0]));
    double s = std::abs(dot(n, rep.plane.normal));
    rep.max_angle_dev = std::max(rep.max_angle_dev, std::asin(std::min(1.0, s)));
  }
  return rep;
}

std::vector<std::array<int, 2>> loop_arcs(const PeriodicMesh& mesh, int loop) {
  const BoundaryLoop& l = mesh.loops.at(loop);
  const int nb = int(l.verts.size());
  std::vector<int> pins;
  for (int k = 0; k < nb; ++k)
    if (l.pinned[k]) pins.push_back(k);
  std::vector<std::array<int, 2>> arcs;
  if (pins.empty()) {
    arcs.push_back({0, nb});
    return arcs;
  }
  for (size_t i = 0; i < pins.size(); ++i) {
    int a = pins[i];
    int b = i + 1 < pins.size() ? pins[i + 1] : pins[0] + nb;
    arcs.push_back({a, b});
  }
  return arcs;
}

}  // namespace ppp

#include "annulus.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "curves.hpp"

namespace ppp {

namespace {

// Vertex values recomputed from the exact per-triangle conjugate data by
// plain averaging (wrapped corners pulled back by the conjugate seam
// translation). Unlike the chained boundary export this is globally
// consistent with the interior, at the price of small planarity error on the
// boundary arcs; the snapping step restores exact planarity later.
void rebuild_averaged(PeriodicMesh& mesh, const ConjugateMesh& cm) {
  const Vec3 tstar = mesh.periodic ? mesh.generator.translation_vector() : Vec3{0, 0, 0};
  std::vector<Vec3> out(mesh.pos.size(), Vec3{0, 0, 0});
  std::vector<int> cnt(mesh.pos.size(), 0);
  for (size_t ti = 0; ti < mesh.tris.size(); ++ti)
    for (int c = 0; c < 3; ++c) {
      const WrapRef& r = mesh.tris[ti].r[c];
      out[r.v] += cm.tri_conj[ti][c] - tstar * r.w;
      cnt[r.v]++;
    }
  for (size_t v = 0; v < out.size(); ++v)
    if (cnt[v]) mesh.pos[v] = out[v] / cnt[v];
}

// Absorb the residual conjugate period: subtract the seam translation
// linearly in the column fraction, leaving an exactly closed annulus with an
// identity generator.
void close_period(PeriodicMesh& mesh) {
  if (!mesh.periodic) return;
  const Vec3 tstar = mesh.generator.translation_vector();
  if (mesh.param.size() != mesh.pos.size() || mesh.param_period.y == 0)
    throw Error(ErrorCode::invalid_argument, "period closing needs a parameter chart");
  for (size_t v = 0; v < mesh.pos.size(); ++v)
    mesh.pos[v] -= tstar * (mesh.param[v].y / mesh.param_period.y);
  mesh.generator = ScrewMotion::translation({0, 0, 0});
}

struct ArcData {
  int loop = 0, k0 = 0, k1 = 0;
  std::vector<int> verts;  // vertex indices along the arc (k1 wrap dropped)
  Vec3 normal;             // exact contact-plane normal (source line direction)
  double offset = 0;       // fitted plane offset over the current positions
  double max_dev = 0;
  int face = -1;
  double perp_deg = 0;
};

// Boundary arcs of the mesh with exact plane normals taken from the straight
// source boundary lines (the conjugate arc of a straight line is planar with
// the line direction as normal).
std::vector<ArcData> collect_arcs(const PeriodicMesh& source, const PeriodicMesh& placed) {
  std::vector<ArcData> arcs;
  for (int loop = 0; loop < int(source.loops.size()); ++loop) {
    const BoundaryLoop& l = source.loops[loop];
    const int nb = int(l.verts.size());
    for (auto [k0, k1] : loop_arcs(source, loop)) {
      ArcData a;
      a.loop = loop;
      a.k0 = k0;
      a.k1 = k1;
      for (int k = k0; k <= k1; ++k) {
        if (k == k1 && k1 % nb == k0 % nb && k1 > k0) break;  // wrap duplicate
        a.verts.push_back(l.verts[((k % nb) + nb) % nb]);
      }
      Vec3 pa = source.position({l.verts[k0 % nb], k0 >= nb ? 1 : 0});
      int km = k0 + std::max(1, (k1 - k0) / 2);
      Vec3 pb = source.position({l.verts[km % nb], km >= nb ? 1 : 0});
      a.normal = normalized(pb - pa);
      arcs.push_back(std::move(a));
    }
  }
  // offsets and deviations over the placed positions
  for (ArcData& a : arcs) {
    double o = 0;
    for (int v : a.verts) o += dot(a.normal, placed.pos[v]);
    a.offset = o / double(a.verts.size());
    for (int v : a.verts)
      a.max_dev = std::max(a.max_dev, std::abs(dot(a.normal, placed.pos[v]) - a.offset));
  }
  return arcs;
}

// Worst deviation from orthogonal contact along an arc, from the exact
// per-triangle conjugate data (angles are similarity invariants, so this is
// valid before placement).
double arc_perpendicularity(const ConjugateMesh& cm, const ArcData& a) {
  std::vector<char> on_arc(cm.mesh.vertex_count(), 0);
  for (int v : a.verts) on_arc[v] = 1;
  double worst = 0;
  for (size_t ti = 0; ti < cm.tri_conj.size(); ++ti) {
    bool touches = false;
    for (const WrapRef& r : cm.mesh.tris[ti].r)
      if (on_arc[r.v]) touches = true;
    if (!touches) continue;
    const auto& t = cm.tri_conj[ti];
    Vec3 n = cross(t[1] - t[0], t[2] - t[0]);
    double ln = norm(n);
    if (ln <= 0) continue;
    double s = std::abs(dot(n / ln, a.normal));
    worst = std::max(worst, std::asin(std::min(1.0, s)));
  }
  return worst * 180 / M_PI;
}

Mat3 to_mat3(const Eigen::Matrix3d& e) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = e(i, j);
  return m;
}

}  // namespace

SimilarityFit fit_planes_to_faces(const std::vector<PlaneFit>& planes,
                                  const std::vector<int>& faces,
                                  const ConvexPolyhedron& target) {
  if (planes.size() != faces.size() || planes.size() < 3)
    throw Error(ErrorCode::invalid_argument, "plane fit needs 3+ assigned planes");
  const auto& fd = target.face_data();
  const int n = int(planes.size());

  // Signs: orient each plane normal along its target face normal (the
  // rotation between the two frames is assumed smaller than a face flip).
  std::vector<Vec3> nrm(n);
  std::vector<double> off(n);
  for (int i = 0; i < n; ++i) {
    int f = faces.at(i);
    if (f < 0 || f >= target.face_count())
      throw Error(ErrorCode::invalid_argument, "face index out of range");
    double s = dot(planes[i].normal, fd[f].normal) < 0 ? -1.0 : 1.0;
    nrm[i] = planes[i].normal * s;
    off[i] = planes[i].offset * s;
  }

  // Best orthogonal map (improper allowed) from plane normals onto face
  // normals: polar factor of the cross-covariance.
  Eigen::Matrix3d B = Eigen::Matrix3d::Zero();
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d m(fd[faces[i]].normal.x, fd[faces[i]].normal.y, fd[faces[i]].normal.z);
    Eigen::Vector3d v(nrm[i].x, nrm[i].y, nrm[i].z);
    B += m * v.transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = to_mat3(svd.matrixU() * svd.matrixV().transpose());

  double worst_angle = 0;
  for (int i = 0; i < n; ++i)
    worst_angle = std::max(worst_angle, angle_between(R * nrm[i], fd[faces[i]].normal));
  if (worst_angle > 1e-3)
    throw Error(ErrorCode::incompatible_normals,
                "contact-plane normals do not match the target's face normals");

  // Scale and translation in least squares: s * off_i + n_f . t = off_f.
  Eigen::MatrixXd A(n, 4);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const Vec3& m = fd[faces[i]].normal;
    A(i, 0) = off[i];
    A(i, 1) = m.x;
    A(i, 2) = m.y;
    A(i, 3) = m.z;
    b(i) = fd[faces[i]].offset;
  }
  Eigen::Vector4d x = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  SimilarityFit fit;
  fit.scale = x(0);
  if (!(fit.scale > 0))
    throw Error(ErrorCode::incompatible_normals, "similarity scale is not positive");
  fit.motion = RigidMotion{R, {x(1), x(2), x(3)}};
  fit.faces = faces;
  for (int i = 0; i < n; ++i)
    fit.residual = std::max(fit.residual,
                            std::abs(fit.scale * off[i] + dot(fd[faces[i]].normal,
                                                              fit.motion.trans) -
                                     fd[faces[i]].offset));
  return fit;
}

SimilarityFit homothety_fit(const ConjugateMesh& conj, const ConvexPolyhedron& target) {
  // Planes from the conjugate's boundary arcs, faces by nearest normal.
  std::vector<PlaneFit> planes;
  std::vector<int> faces;
  const auto& fd = target.face_data();
  for (int loop = 0; loop < int(conj.mesh.loops.size()); ++loop) {
    const BoundaryLoop& l = conj.mesh.loops[loop];
    const int nb = int(l.verts.size());
    for (auto [k0, k1] : loop_arcs(conj.mesh, loop)) {
      std::vector<Vec3> pts;
      for (int k = k0; k <= k1 && k - k0 < nb; ++k) pts.push_back(conj.mesh.pos[l.verts[k % nb]]);
      PlaneFit pf = fit_plane(pts);
      double best = 1e300;
      int bf = -1;
      for (int f = 0; f < target.face_count(); ++f) {
        double a = angle_between(pf.normal, fd[f].normal);
        a = std::min(a, M_PI - a);
        if (a < best) {
          best = a;
          bf = f;
        }
      }
      planes.push_back(pf);
      faces.push_back(bf);
    }
  }
  return fit_planes_to_faces(planes, faces, target);
}

namespace {

// Snap boundary vertices onto their assigned target face planes (corners
// onto the intersection line of their two planes), tapering the displacement
// linearly into the interior rows of the structured grid so triangle quality
// is preserved. Returns the worst boundary displacement.
double snap_to_planes(PeriodicMesh& mesh, const std::vector<ArcData>& arcs,
                      const ConvexPolyhedron& target) {
  const auto& fd = target.face_data();
  // planes per boundary vertex (one for arc interiors, two at shared corners)
  std::map<int, std::vector<int>> vertex_faces;
  for (const ArcData& a : arcs)
    for (int v : a.verts) {
      auto& fs = vertex_faces[v];
      if (std::find(fs.begin(), fs.end(), a.face) == fs.end()) fs.push_back(a.face);
    }
  std::map<int, Vec3> disp;
  double worst = 0;
  for (auto& [v, fs] : vertex_faces) {
    const Vec3 p = mesh.pos[v];
    Vec3 d{0, 0, 0};
    if (fs.size() == 1) {
      const Vec3& nf = fd[fs[0]].normal;
      d = nf * (fd[fs[0]].offset - dot(nf, p));
    } else {
      // least-norm move onto the intersection of the first two planes
      const Vec3 &n1 = fd[fs[0]].normal, &n2 = fd[fs[1]].normal;
      double r1 = fd[fs[0]].offset - dot(n1, p), r2 = fd[fs[1]].offset - dot(n2, p);
      double c = dot(n1, n2), det = 1 - c * c;
      if (det < 1e-12) {
        d = n1 * r1;
      } else {
        double a1 = (r1 - c * r2) / det, a2 = (r2 - c * r1) / det;
        d = n1 * a1 + n2 * a2;
      }
    }
    disp[v] = d;
    worst = std::max(worst, norm(d));
  }

  // A corner vertex moves onto the intersection line while its arc
  // neighbours move onto a single plane; over the tiny graded corner cells
  // that difference would be a near-jump in the displacement field. Ramp the
  // corner correction linearly (in arclength) along each arc instead. The
  // correction is parallel to the arc's target plane, so snapped arcs stay
  // exactly planar.
  for (const ArcData& a : arcs) {
    const int L = int(a.verts.size());
    if (L < 2) continue;
    const Vec3& nf = fd[a.face].normal;
    const double off = fd[a.face].offset;
    auto plane_d = [&](int v) { return nf * (off - dot(nf, mesh.pos[v])); };
    const Vec3 d_s = disp[a.verts.front()] - plane_d(a.verts.front());
    const Vec3 d_e = disp[a.verts.back()] - plane_d(a.verts.back());
    std::vector<double> t(L, 0.0);
    for (int k = 1; k < L; ++k)
      t[k] = t[k - 1] + dist(mesh.pos[a.verts[k]], mesh.pos[a.verts[k - 1]]);
    const double len = t.back() > 0 ? t.back() : 1.0;
    for (int k = 0; k < L; ++k) {
      const double f = t[k] / len;
      disp[a.verts[k]] = plane_d(a.verts[k]) + d_s * (1 - f) + d_e * f;
    }
  }

  if (mesh.grid_m > 0 && mesh.grid_n > 0 && mesh.periodic &&
      int(mesh.pos.size()) == (mesh.grid_m + 1) * mesh.grid_n) {
    // annulus grid: blend the two boundary rows' displacements by row fraction
    const int m = mesh.grid_m, n = mesh.grid_n;
    for (int i = 0; i <= m; ++i) {
      double g = mesh.row_s.size() == size_t(m + 1) ? mesh.row_s[i] : double(i) / m;
      for (int j = 0; j < n; ++j) {
        int v = i * n + j;
        auto d0 = disp.find(j), d1 = disp.find(m * n + j);
        Vec3 a = d0 != disp.end() ? d0->second : Vec3{0, 0, 0};
        Vec3 b = d1 != disp.end() ? d1->second : Vec3{0, 0, 0};
        mesh.pos[v] += a * (1 - g) + b * g;
      }
    }
  } else if (mesh.grid_m > 0 && !mesh.periodic &&
             int(mesh.pos.size()) == (mesh.grid_m + 1) * (mesh.grid_m + 1)) {
    // disk grid: transfinite blend of the perimeter displacements
    const int m = mesh.grid_m, side = m + 1;
    auto at = [&](int i, int j) {
      auto it = disp.find(i * side + j);
      return it != disp.end() ? it->second : Vec3{0, 0, 0};
    };
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m; ++j) {
        double u = double(i) / m, v = double(j) / m;
        Vec3 d = at(0, j) * (1 - u) + at(m, j) * u + at(i, 0) * (1 - v) + at(i, m) * v -
                 (at(0, 0) * (1 - u) * (1 - v) + at(0, m) * (1 - u) * v +
                  at(m, 0) * u * (1 - v) + at(m, m) * u * v);
        mesh.pos[i * side + j] += d;
      }
  } else {
    for (auto& [v, d] : disp) mesh.pos[v] += d;
  }
  return worst;
}

// Shared tail of the pipelines: average the conjugate export, close the
// period, fit the similarity onto the target, snap, and verify.
void place_and_verify(AnnulusResult& res, const PeriodicMesh& source, const ConjugateMesh& cm,
                      int base_face) {
  const double cdiam = cm.mesh.diameter();
  res.annulus = cm.mesh;
  rebuild_averaged(res.annulus, cm);
  if (res.annulus.periodic) close_period(res.annulus);

  for (size_t li = 0; li < cm.loop_periods.size(); ++li)
    res.closure_gap_rel = std::max(res.closure_gap_rel, norm(cm.loop_periods[li]) / cdiam);

  std::vector<ArcData> arcs = collect_arcs(source, res.annulus);
  const auto& fd = res.target.face_data();
  for (ArcData& a : arcs) {
    double best = 1e300;
    for (int f = 0; f < res.target.face_count(); ++f) {
      double ang = angle_between(a.normal, fd[f].normal);
      ang = std::min(ang, M_PI - ang);
      if (ang < best) {
        best = ang;
        a.face = f;
      }
    }
    a.perp_deg = arc_perpendicularity(cm, a);
    res.max_plane_dev_rel = std::max(res.max_plane_dev_rel, a.max_dev / cdiam);
  }

  std::vector<PlaneFit> planes;
  std::vector<int> faces;
  for (const ArcData& a : arcs) {
    planes.push_back(PlaneFit{a.normal, a.offset, a.max_dev});
    faces.push_back(a.face);
  }
  SimilarityFit fit = fit_planes_to_faces(planes, faces, res.target);
  res.scale = fit.scale;
  res.motion = fit.motion;
  res.fit_residual_rel = fit.residual / res.target.diameter();

  for (Vec3& p : res.annulus.pos) p = fit.motion(p * fit.scale);
  if (res.annulus.periodic)
    res.annulus.generator = ScrewMotion::translation({0, 0, 0});

  double snap = snap_to_planes(res.annulus, arcs, res.target);
  res.snap_rel = snap / res.target.diameter();

  const double tdiam = res.target.diameter();

  // containment / plane-side condition
  const bool acute = res.target.max_dihedral() <= M_PI / 2 + 1e-12;
  double excess = -1e300;
  for (const Vec3& p : res.annulus.pos) excess = std::max(excess, res.target.signed_excess(p));
  res.outside_solid = excess > 1e-6 * tdiam;
  {
    CheckReport rep;
    rep.name = acute ? "containment" : "plane_side";
    rep.tolerance = 1e-6 * tdiam;
    if (acute) {
      rep.measured = excess;
      rep.pass = !res.outside_solid;
    } else {
      // obtuse case: only the side condition against each contact plane,
      // near the boundary arcs (two outermost rows per side)
      double worst = -1e300;
      for (const ArcData& a : arcs) {
        const Vec3& nf = fd[a.face].normal;
        for (int v : a.verts)
          worst = std::max(worst, dot(nf, res.annulus.pos[v]) - fd[a.face].offset);
      }
      rep.measured = worst;
      rep.pass = worst <= rep.tolerance;
    }
    res.checks.push_back(rep);
  }

  // per-arc reports: orthogonal contact and convexity inside the face plane
  for (const ArcData& a : arcs) {
    CheckReport perp;
    perp.name = "orthogonal_contact";
    perp.tolerance = 1.0;
    perp.measured = a.perp_deg;
    perp.pass = a.perp_deg < 1.0;
    perp.note = "loop " + std::to_string(a.loop) + " face " + std::to_string(a.face);
    res.checks.push_back(perp);

    std::vector<Vec3> pts;
    for (int v : a.verts) pts.push_back(res.annulus.pos[v]);
    bool closed = (a.k1 - a.k0) == int(source.loops[a.loop].verts.size());
    CheckReport cvx = planar_convexity(pts, closed, fd[a.face].normal,
                                       a.max_dev * fit.scale);
    cvx.note = "loop " + std::to_string(a.loop) + " face " + std::to_string(a.face);
    res.checks.push_back(cvx);
  }

  if (base_face >= 0)
    res.checks.push_back(graph_check(res.annulus, fd[base_face].normal));
  res.checks.push_back(embeddedness(res.annulus));

  for (const ArcData& a : arcs)
    res.contacts.push_back(
        ContactArc{a.loop, a.k0, a.k1, a.face, PlaneFit{a.normal, a.offset, a.max_dev},
                   a.perp_deg});
}

}  // namespace

AnnulusResult tetra_annulus(const ConvexPolyhedron& tet, int face, const BuildConfig& cfg) {
  AnnulusResult res(tet);
  FluxField field(tet, face, cfg.root_solver);
  ZeroResult zr = find_zero(field, cfg.root_find);
  res.q4 = zr.q4;
  res.has_q4 = true;

  PeriodicCurve curve = gamma_q(tet, face, zr.q4);
  auto [mesh, rep] = solve(curve, cfg.solver);
  res.minimal = mesh;
  res.solve_report = rep;
  if (!rep.converged)
    throw Error(ErrorCode::no_convergence, "periodic solve did not converge");

  ConjugateMesh cm = conjugate(mesh, cfg.conj_tol);

  // structural identity: loop period against the source boundary flux
  {
    CheckReport rep2;
    rep2.name = "closure_is_flux";
    rep2.tolerance = 1e-9 * cm.mesh.diameter();
    rep2.measured = std::abs(closure_gap(cm, 0) - norm(boundary_flux(mesh, 0)));
    rep2.pass = rep2.measured <= rep2.tolerance;
    res.checks.push_back(rep2);
  }

  place_and_verify(res, mesh, cm, face);
  return res;
}

std::vector<AnnulusResult> tetra_annuli(const ConvexPolyhedron& tet, const BuildConfig& cfg) {
  if (tet.face_count() != 4)
    throw Error(ErrorCode::not_a_tetrahedron, "tetra_annuli needs a tetrahedron");
  std::vector<AnnulusResult> out;
  for (int face = 0; face < 4; ++face) {
    try {
      out.push_back(tetra_annulus(tet, face, cfg));
    } catch (const Error& e) {
      AnnulusResult res(tet);
      res.status = e.what();
      out.push_back(std::move(res));
    }
  }
  return out;
}

}  // namespace ppp

#include "solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>

namespace ppp {

namespace {

double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

// Half-cotangent of the angle at `apex` seen from the edge (a, b).
double half_cot(const Vec3& apex, const Vec3& a, const Vec3& b) {
  Vec3 u = a - apex, v = b - apex;
  double cr = norm(cross(u, v));
  return 0.5 * dot(u, v) / std::max(cr, 1e-300);
}

// The three edges of a triangle as (corner, corner, opposite corner).
constexpr int kEdge[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};

struct EdgeTerm {
  WrapRef a, b;
  double w;
};

template <typename PosFn>
void collect_edges(const PeriodicMesh& mesh, PosFn&& posf, std::vector<EdgeTerm>& out,
                   int* neg_count = nullptr) {
  out.clear();
  out.reserve(mesh.tris.size() * 3);
  for (const WrapTri& t : mesh.tris) {
    Vec3 p[3] = {posf(t.r[0]), posf(t.r[1]), posf(t.r[2])};
    for (auto& e : kEdge) {
      double w = half_cot(p[e[2]], p[e[0]], p[e[1]]);
      if (neg_count && w < 0) ++*neg_count;
      out.push_back({t.r[e[0]], t.r[e[1]], w});
    }
  }
}

}  // namespace

double mesh_area(const PeriodicMesh& mesh) { return mesh.area(); }

int harmonic_step(PeriodicMesh& mesh) {
  const int nv = mesh.vertex_count();
  auto bflag = mesh.boundary_flags();
  std::vector<int> fid(nv, -1);
  int nf = 0;
  for (int v = 0; v < nv; ++v)
    if (!bflag[v]) fid[v] = nf++;
  if (nf == 0) return 0;

  // Weights come from the flat parameter domain: the surface is sought as the
  // harmonic image of the fixed conformal cylinder, not as a self-map fixed
  // point (which degenerates the parametrization).
  int negw = 0;
  std::vector<EdgeTerm> edges;
  collect_edges(mesh, [&](const WrapRef& r) { return mesh.param_position(r); }, edges, &negw);

  RigidMotion G[5];  // generator powers -2..2 (wrap deltas are in -1..1)
  for (int k = -2; k <= 2; ++k)
    G[k + 2] = mesh.periodic ? mesh.generator.rigid_power(k) : RigidMotion::identity();

  bool pure = true;
  for (int i = 0; i < 3 && pure; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::abs(G[3].rot(i, j) - (i == j ? 1.0 : 0.0)) > 1e-12) {
        pure = false;
        break;
      }

  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trips;

  if (pure) {
    Eigen::VectorXd rhs[3];
    for (auto& r : rhs) r = Eigen::VectorXd::Zero(nf);
    auto add_dir = [&](const WrapRef& a, const WrapRef& b, double w) {
      if (bflag[a.v]) return;
      int row = fid[a.v];
      trips.emplace_back(row, row, w);
      int d = b.w - a.w;
      Vec3 td = G[d + 2].trans;
      Vec3 q = bflag[b.v] ? mesh.pos[b.v] + td : td;
      if (!bflag[b.v]) trips.emplace_back(row, fid[b.v], -w);
      for (int c = 0; c < 3; ++c) rhs[c][row] += w * q[c];
    };
    for (const EdgeTerm& e : edges) {
      add_dir(e.a, e.b, e.w);
      add_dir(e.b, e.a, e.w);
    }
    SpMat A(nf, nf);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_system, "quotient Laplacian factorization failed");
    Eigen::VectorXd sol[3];
    for (int c = 0; c < 3; ++c) {
      sol[c] = ldlt.solve(rhs[c]);
      if (ldlt.info() != Eigen::Success)
        throw Error(ErrorCode::singular_system, "quotient Laplacian solve failed");
      sol[c] += ldlt.solve(rhs[c] - A * sol[c]);  // one refinement pass
    }
    for (int v = 0; v < nv; ++v)
      if (!bflag[v]) mesh.pos[v] = {sol[0][fid[v]], sol[1][fid[v]], sol[2][fid[v]]};
  } else {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * nf);
    auto add_dir = [&](const WrapRef& a, const WrapRef& b, double w) {
      if (bflag[a.v]) return;
      int row = 3 * fid[a.v];
      for (int c = 0; c < 3; ++c) trips.emplace_back(row + c, row + c, w);
      int d = b.w - a.w;
      const Mat3& R = G[d + 2].rot;
      const Vec3& td = G[d + 2].trans;
      if (!bflag[b.v]) {
        int col = 3 * fid[b.v];
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) trips.emplace_back(row + i, col + j, -w * R(i, j));
        for (int c = 0; c < 3; ++c) rhs[row + c] += w * td[c];
      } else {
        Vec3 q = R * mesh.pos[b.v] + td;
        for (int c = 0; c < 3; ++c) rhs[row + c] += w * q[c];
      }
    };
    for (const EdgeTerm& e : edges) {
      add_dir(e.a, e.b, e.w);
      add_dir(e.b, e.a, e.w);
    }
    SpMat A(3 * nf, 3 * nf);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_system, "twisted quotient Laplacian factorization failed");
    Eigen::VectorXd sol = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_system, "twisted quotient Laplacian solve failed");
    sol += ldlt.solve(rhs - A * sol);  // one refinement pass
    for (int v = 0; v < nv; ++v)
      if (!bflag[v]) mesh.pos[v] = {sol[3 * fid[v]], sol[3 * fid[v] + 1], sol[3 * fid[v] + 2]};
  }
  return negw;
}

namespace {

// Max mean-curvature residual together with the roundoff floor of its own
// evaluation: eps times the sum of term magnitudes, normalized the same way.
// Graded grids push the floor above usable tolerances (huge cotangent weights
// over tiny mixed areas), so a residual at the floor counts as zero.
std::pair<double, double> residual_and_floor(const PeriodicMesh& mesh) {
  const int nv = mesh.vertex_count();
  auto bflag = mesh.boundary_flags();
  std::vector<EdgeTerm> edges;
  collect_edges(mesh, [&](const WrapRef& r) { return mesh.param_position(r); }, edges);

  RigidMotion G[5];
  for (int k = -2; k <= 2; ++k)
    G[k + 2] = mesh.periodic ? mesh.generator.rigid_power(k) : RigidMotion::identity();

  std::vector<Vec3> r(nv, Vec3{0, 0, 0});
  std::vector<double> mag(nv, 0), lump(nv, 0);
  auto add_dir = [&](const WrapRef& a, const WrapRef& b, double w) {
    if (bflag[a.v]) return;
    int d = b.w - a.w;
    Vec3 pb = G[d + 2](mesh.pos[b.v]);
    r[a.v] += (mesh.pos[a.v] - pb) * w;
    // Positions are stored in double; |w|*eps*|p| is the irreducible noise of
    // each term no matter how accurately the system was solved.
    mag[a.v] += std::abs(w) * (norm(mesh.pos[a.v]) + norm(pb));
  };
  for (const EdgeTerm& e : edges) {
    add_dir(e.a, e.b, e.w);
    add_dir(e.b, e.a, e.w);
  }
  for (const WrapTri& t : mesh.tris) {
    double a = tri_area(mesh.position(t.r[0]), mesh.position(t.r[1]), mesh.position(t.r[2]));
    for (const WrapRef& ref : t.r) lump[ref.v] += a / 3;
  }
  const double diam = mesh.diameter();
  double res = 0, floor = 0;
  for (int v = 0; v < nv; ++v)
    if (!bflag[v] && lump[v] > 0) {
      res = std::max(res, norm(r[v]) * diam / lump[v]);
      floor = std::max(floor, 2.22e-16 * mag[v] * diam / lump[v]);
    }
  return {res, floor};
}

}  // namespace

double mesh_residual(const PeriodicMesh& mesh) { return residual_and_floor(mesh).first; }

int boundary_slide_step(PeriodicMesh& mesh) {
  const int nv = mesh.vertex_count();
  std::vector<std::vector<std::pair<int, int>>> inc(nv);  // (tri, corner)
  for (int ti = 0; ti < int(mesh.tris.size()); ++ti)
    for (int k = 0; k < 3; ++k) inc[mesh.tris[ti].r[k].v].push_back({ti, k});

  RigidMotion G[5];
  for (int k = -2; k <= 2; ++k)
    G[k + 2] = mesh.periodic ? mesh.generator.rigid_power(k) : RigidMotion::identity();

  const double total_area = mesh.area();
  int moved = 0;

  for (BoundaryLoop& loop : mesh.loops) {
    const int nb = int(loop.verts.size());
    const Polyline& comp = mesh.curve_components[loop.component];
    std::vector<double> corners = comp.corner_params();
    for (int k = 0; k < nb; ++k) {
      if (loop.pinned[k]) continue;
      const int v = loop.verts[k];
      const double t_lo = k > 0 ? loop.t[k - 1] : loop.t[nb - 1] - 1.0;
      const double t_hi = k + 1 < nb ? loop.t[k + 1] : loop.t[0] + 1.0;
      const double mgn = 1e-6 * (t_hi - t_lo);

      // Incident edges in the uniform parametric metric; neighbor positions
      // pulled into v's frame.
      std::vector<std::pair<Vec3, double>> terms;
      for (auto [ti, ck] : inc[v]) {
        const WrapTri& tr = mesh.tris[ti];
        Vec3 pp[3] = {mesh.param_position(tr.r[0]), mesh.param_position(tr.r[1]),
                      mesh.param_position(tr.r[2])};
        for (auto& e : kEdge) {
          if (e[0] != ck && e[1] != ck) continue;
          int other = e[0] == ck ? e[1] : e[0];
          double w = half_cot(pp[e[2]], pp[e[0]], pp[e[1]]);
          int d = tr.r[other].w - tr.r[ck].w;
          terms.push_back({G[d + 2](mesh.pos[tr.r[other].v]), w});
        }
      }
      auto energy = [&](const Vec3& p) {
        double s = 0;
        for (auto& [q, w] : terms) s += w * norm2(p - q);
        return s;
      };
      const double e_cur = energy(mesh.pos[v]);

      // Breakpoints of the boundary curve inside (t_lo, t_hi).
      std::vector<double> bs = {t_lo + mgn, t_hi - mgn};
      for (int rep = -1; rep <= 1; ++rep) {
        for (double c : corners) {
          double b = c + rep;
          if (b > t_lo + mgn && b < t_hi - mgn) bs.push_back(b);
        }
        double b = double(rep);
        if (b > t_lo + mgn && b < t_hi - mgn) bs.push_back(b);
      }
      std::sort(bs.begin(), bs.end());

      double best_e = e_cur, best_t = loop.t[k];
      Vec3 best_p = mesh.pos[v];
      for (size_t s = 0; s + 1 < bs.size(); ++s) {
        double ta = bs[s], tb = bs[s + 1];
        if (!(tb > ta)) continue;
        Vec3 pa = mesh.boundary_point(loop.component, ta);
        Vec3 pb = mesh.boundary_point(loop.component, tb);
        Vec3 dir = (pb - pa) / (tb - ta);
        double wsum = 0, proj = 0;
        for (auto& [q, w] : terms) {
          wsum += w * norm2(dir);
          proj += w * dot(q - pa, dir);
        }
        double ts = wsum > 1e-300 ? std::clamp(ta + proj / wsum, ta, tb) : ta;
        for (double tc : {ts, ta, tb}) {
          Vec3 pc = pa + dir * (tc - ta);
          double ec = energy(pc);
          if (ec < best_e) {
            best_e = ec;
            best_t = tc;
            best_p = pc;
          }
        }
      }
      if (!(best_e < e_cur - 1e-14 * (1 + e_cur))) continue;

      // Area guard over the incident triangles only.
      double a_old = 0, a_new = 0;
      for (auto [ti, ck] : inc[v]) {
        const WrapTri& tr = mesh.tris[ti];
        Vec3 p[3], pn[3];
        for (int c = 0; c < 3; ++c) {
          p[c] = mesh.position(tr.r[c]);
          pn[c] = c == ck ? G[tr.r[c].w + 2](best_p) : p[c];
        }
        a_old += tri_area(p[0], p[1], p[2]);
        a_new += tri_area(pn[0], pn[1], pn[2]);
      }
      if (a_new > a_old + 1e-12 * total_area) continue;

      mesh.pos[v] = best_p;
      loop.t[k] = best_t;
      ++moved;
    }
  }
  return moved;
}

namespace {

// Dirichlet energy D(u) of the 0/1 boundary potential with image-metric
// cotangent weights; the annulus's conformal width is beta / D(u).
double potential_energy(const PeriodicMesh& mesh) {
  const int nv = mesh.vertex_count();
  std::vector<int> fixed(nv, -1);
  for (int v : mesh.loops.at(0).verts) fixed[v] = 0;
  for (int v : mesh.loops.at(1).verts) fixed[v] = 1;
  std::vector<int> fid(nv, -1);
  int nf = 0;
  for (int v = 0; v < nv; ++v)
    if (fixed[v] < 0) fid[v] = nf++;

  std::vector<EdgeTerm> edges;
  collect_edges(mesh, [&](const WrapRef& r) { return mesh.position(r); }, edges);

  std::vector<double> u(nv, 0.0);
  for (int v = 0; v < nv; ++v)
    if (fixed[v] >= 0) u[v] = fixed[v];
  if (nf > 0) {
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    auto add_dir = [&](int a, int b, double w) {
      if (fixed[a] >= 0) return;
      int row = fid[a];
      trips.emplace_back(row, row, w);
      if (fixed[b] >= 0) rhs[row] += w * fixed[b];
      else trips.emplace_back(row, fid[b], -w);
    };
    for (const EdgeTerm& e : edges) {
      add_dir(e.a.v, e.b.v, e.w);
      add_dir(e.b.v, e.a.v, e.w);
    }
    Eigen::SparseMatrix<double> A(nf, nf);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    Eigen::VectorXd sol = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_system, "potential solve failed");
    for (int v = 0; v < nv; ++v)
      if (fixed[v] < 0) u[v] = sol[fid[v]];
  }
  double e = 0;
  for (const EdgeTerm& ed : edges) {
    double d = u[ed.a.v] - u[ed.b.v];
    e += ed.w * d * d;
  }
  if (!(e > 0)) throw Error(ErrorCode::singular_system, "degenerate potential energy");
  return e;
}

// Rescale the parameter grid to [0, a] x [0, beta], keeping the grid's
// grading fractions. Column angles are blended between the axis-row and
// outer-row vectors, so each loop sees only its own corner clustering.
void set_param_aspect(PeriodicMesh& mesh, double a, double beta) {
  const int m = mesh.grid_m, n = mesh.grid_n;
  if (int(mesh.row_s.size()) != m + 1) {
    mesh.row_s.resize(m + 1);
    for (int i = 0; i <= m; ++i) mesh.row_s[i] = double(i) / m;
  }
  for (auto* cs : {&mesh.col_s, &mesh.col_s_axis})
    if (int(cs->size()) != n) {
      cs->resize(n);
      for (int j = 0; j < n; ++j) (*cs)[j] = double(j) / n;
    }
  for (int i = 0; i <= m; ++i) {
    const double g = mesh.row_s[i];
    for (int j = 0; j < n; ++j)
      mesh.param[size_t(i) * n + j] = {
          g * a, ((1 - g) * mesh.col_s_axis[j] + g * mesh.col_s[j]) * beta, 0};
  }
  mesh.param_period = {0, beta, 0};
}

// One pass of corner-angle updates: the parameter angle of each sharp-corner
// column is a free variable of the Dirichlet minimization (the image stays
// pinned to the corner). Positions are stationary under the harmonic and
// slide steps, so the reduced energy is evaluated with positions frozen;
// interior columns of the two adjacent segments are carried affinely.
int corner_theta_step(PeriodicMesh& mesh) {
  const int m = mesh.grid_m, n = mesh.grid_n;
  const int S = int(mesh.corner_cols.size());
  if (!mesh.periodic || S < 2) return 0;
  const double beta = mesh.param_period.y;

  RigidMotion G[5];
  for (int k = -2; k <= 2; ++k) G[k + 2] = mesh.generator.rigid_power(k);
  // Image positions per (i, lifted j); lifted columns outside [0, n) are
  // carried through the seam by the period generator.
  auto ppos = [&](int i, int j) {
    int jj = ((j % n) + n) % n;
    return G[(j - jj) / n + 2](mesh.pos[size_t(i) * n + jj]);
  };

  std::vector<double>& cs = mesh.corner_side == 1 ? mesh.col_s : mesh.col_s_axis;
  const std::vector<double>& other = mesh.corner_side == 1 ? mesh.col_s_axis : mesh.col_s;
  // Angles lift by one whole turn per period in either vector.
  auto lift = [n](const std::vector<double>& v, int j) {
    int jj = ((j % n) + n) % n;
    return v[jj] + double((j - jj) / n);
  };
  // Blended parameter angle at grid row i, lifted column j, with the
  // corner-side angle at j replaced by the trial value.
  auto yof = [&](int i, int j, double sang) {
    const double g = mesh.row_s[i];
    const double oth = lift(other, j);
    return (mesh.corner_side == 1 ? (1 - g) * oth + g * sang : (1 - g) * sang + g * oth) * beta;
  };
  // Lifted knot column / angle for knot index t in (-1 .. S).
  auto kcol = [&](int t) {
    return t < 0 ? mesh.corner_cols[t + S] - n
                 : (t < S ? mesh.corner_cols[t] : mesh.corner_cols[t - S] + n);
  };
  auto kang = [&](int t) { return lift(cs, kcol(t)); };

  // Cot-weighted energy of the column span [j, j+1] with trial angles at the
  // span ends (positions frozen).
  auto span_energy = [&](int j, double aa, double ab) {
    double e = 0;
    for (int i = 0; i < m; ++i) {
      Vec3 q[4] = {{mesh.param[size_t(i) * n + ((j % n) + n) % n].x, yof(i, j, aa), 0},
                   {mesh.param[size_t(i + 1) * n + ((j % n) + n) % n].x, yof(i + 1, j, aa), 0},
                   {mesh.param[size_t(i + 1) * n + ((j % n) + n) % n].x, yof(i + 1, j + 1, ab), 0},
                   {mesh.param[size_t(i) * n + ((j % n) + n) % n].x, yof(i, j + 1, ab), 0}};
      Vec3 p[4] = {ppos(i, j), ppos(i + 1, j), ppos(i + 1, j + 1), ppos(i, j + 1)};
      // cells split as (a, ca, d), (a, d, b)
      for (auto& tr : {std::array<int, 3>{0, 1, 2}, std::array<int, 3>{0, 2, 3}})
        for (auto& ed : kEdge)
          e += half_cot(q[tr[ed[2]]], q[tr[ed[0]]], q[tr[ed[1]]]) *
               norm2(p[tr[ed[0]]] - p[tr[ed[1]]]);
    }
    return e;
  };

  // Coordinate-wise optimal angle for every knot, all measured against the
  // same frozen state. Updates are applied afterwards relative to knot 0's
  // proposal, so a pure rotation of the whole chart (which leaves the energy
  // unchanged) proposes no move and symmetric configurations stay symmetric.
  std::vector<double> best(S);
  for (int s = 0; s < S; ++s) {
    const int ja = kcol(s - 1), jk = kcol(s), jb = kcol(s + 1);
    const double tha = kang(s - 1), thk = kang(s), thb = kang(s + 1);

    auto band_energy = [&](double th) {
      auto ang = [&](int j) -> double {
        if (j <= ja) return tha;
        if (j >= jb) return thb;
        double t0 = lift(cs, j);
        return j < jk ? tha + (t0 - tha) * (th - tha) / (thk - tha)
                      : thb - (thb - t0) * (thb - th) / (thb - thk);
      };
      double e = 0;
      for (int j = ja; j < jb; ++j) e += span_energy(j, ang(j), ang(j + 1));
      return e;
    };

    // Golden-section search in a bracket around the current angle.
    const double half = 0.2 * std::min(thk - tha, thb - thk);
    double lo = thk - half, hi = thk + half;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = band_energy(x1), f2 = band_energy(x2);
    for (int it = 0; it < 10; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = band_energy(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = band_energy(x2);
      }
    }
    best[s] = f1 < f2 ? x1 : x2;
  }

  std::vector<double> rel(S);
  double relmax = 0;
  for (int s = 0; s < S; ++s) {
    rel[s] = (best[s] - kang(s)) - (best[0] - kang(0));
    relmax = std::max(relmax, std::fabs(rel[s]));
  }
  if (relmax < 1e-14) return 0;

  // Full trial angle vector with all knots moved by t * rel and interior
  // columns carried affinely within each span.
  auto trial_cs = [&](double t) {
    std::vector<double> out = cs;
    for (int s = 0; s < S; ++s) {
      const double k0 = kang(s), k1 = kang(s + 1);
      const double n0 = k0 + t * rel[s], n1 = k1 + t * rel[(s + 1) % S];
      for (int j = kcol(s); j < kcol(s + 1); ++j) {
        int jj = ((j % n) + n) % n;
        out[jj] = n0 + (lift(cs, j) - k0) * (n1 - n0) / (k1 - k0) - double((j - jj) / n);
      }
    }
    return out;
  };
  auto total_energy = [&](const std::vector<double>& v) {
    double e = 0;
    for (int j = 0; j < n; ++j) e += span_energy(j, v[j], lift(v, j + 1));
    return e;
  };

  const double e0 = total_energy(cs);
  for (double t : {1.0, 0.5, 0.25}) {
    // Keep every span from collapsing under the simultaneous move.
    bool ok = true;
    for (int s = 0; s < S && ok; ++s) {
      double g = kang(s + 1) - kang(s);
      ok = g + t * (rel[(s + 1) % S] - rel[s]) > 0.1 * g;
    }
    if (!ok) continue;
    std::vector<double> cand = trial_cs(t);
    double e = total_energy(cand);
    if (e < e0 - 1e-15 * (1 + e0)) {
      cs = std::move(cand);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i <= m; ++i) mesh.param[size_t(i) * n + j].y = yof(i, j, cs[j]);
      return 1;
    }
  }
  return 0;
}

// Harmonic solve with the boundary correspondence free: every non-pinned
// boundary vertex moves along its straight polyline segment (one scalar
// unknown), interior vertices are fully free. This minimizes the Dirichlet
// energy of the map jointly over interior positions and boundary
// parametrization in a single SPD solve, instead of crawling there with
// per-vertex slides (which can take thousands of sweeps on graded grids and
// may pile vertices onto pinned neighbors).
void coupled_step(PeriodicMesh& mesh) {
  const int nv = mesh.vertex_count();

  // Per-vertex constraint: dim 0 = pinned boundary, 1 = on a boundary
  // segment (pos = base + dir * s), 3 = interior.
  std::vector<int> dim(nv, 3), off(nv, -1);
  std::vector<Vec3> base(nv, Vec3{0, 0, 0}), dir(nv, Vec3{0, 0, 0});
  struct SegVert {
    int loop, k;     // loop index and position within the loop
    double ta, tb;   // parameter range of the straight segment
  };
  std::vector<SegVert> seg(nv);

  for (int li = 0; li < int(mesh.loops.size()); ++li) {
    const BoundaryLoop& loop = mesh.loops[li];
    const Polyline& comp = mesh.curve_components[loop.component];
    std::vector<double> brk = {0.0};
    for (double c : comp.corner_params()) brk.push_back(c);
    for (int k = 0; k < int(loop.verts.size()); ++k) {
      const int v = loop.verts[k];
      if (loop.pinned[k]) {
        dim[v] = 0;
        continue;
      }
      double t = loop.t[k];
      int s = std::max(0, int(std::upper_bound(brk.begin(), brk.end(), t) - brk.begin()) - 1);
      double ta = brk[s], tb = s + 1 < int(brk.size()) ? brk[s + 1] : 1.0;
      dim[v] = 1;
      base[v] = mesh.boundary_point(loop.component, ta);
      dir[v] = mesh.boundary_point(loop.component, tb) - base[v];
      seg[v] = {li, k, ta, tb};
    }
  }

  int ndof = 0;
  for (int v = 0; v < nv; ++v)
    if (dim[v] > 0) {
      off[v] = ndof;
      ndof += dim[v];
    }
  if (ndof == 0) return;

  std::vector<EdgeTerm> edges;
  collect_edges(mesh, [&](const WrapRef& r) { return mesh.param_position(r); }, edges);

  RigidMotion G[5];
  for (int k = -2; k <= 2; ++k)
    G[k + 2] = mesh.periodic ? mesh.generator.rigid_power(k) : RigidMotion::identity();

  // Each endpoint contributes P = c + M x with x the vertex's dofs:
  // interior c = t_w, M = R_w; segment c = R_w base + t_w, M = R_w dir;
  // pinned c = R_w pos + t_w, no dofs.
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ndof);
  auto endpoint = [&](const WrapRef& r, Vec3& c, Vec3 M[3]) {
    const RigidMotion& g = G[r.w + 2];
    if (dim[r.v] == 3) {
      c = g.trans;
      for (int j = 0; j < 3; ++j) M[j] = {g.rot(0, j), g.rot(1, j), g.rot(2, j)};
    } else if (dim[r.v] == 1) {
      c = g(base[r.v]);
      M[0] = g.rot * dir[r.v];
    } else {
      c = g(mesh.pos[r.v]);
    }
  };
  for (const EdgeTerm& e : edges) {
    if (dim[e.a.v] == 0 && dim[e.b.v] == 0) continue;
    Vec3 ca, cb, Ma[3], Mb[3];
    endpoint(e.a, ca, Ma);
    endpoint(e.b, cb, Mb);
    const Vec3 cd = ca - cb;
    const int da = dim[e.a.v], db = dim[e.b.v];
    for (int i = 0; i < da; ++i) {
      rhs[off[e.a.v] + i] -= e.w * dot(Ma[i], cd);
      for (int j = 0; j < da; ++j)
        trips.emplace_back(off[e.a.v] + i, off[e.a.v] + j, e.w * dot(Ma[i], Ma[j]));
      for (int j = 0; j < db; ++j)
        trips.emplace_back(off[e.a.v] + i, off[e.b.v] + j, -e.w * dot(Ma[i], Mb[j]));
    }
    for (int i = 0; i < db; ++i) {
      rhs[off[e.b.v] + i] += e.w * dot(Mb[i], cd);
      for (int j = 0; j < db; ++j)
        trips.emplace_back(off[e.b.v] + i, off[e.b.v] + j, e.w * dot(Mb[i], Mb[j]));
      for (int j = 0; j < da; ++j)
        trips.emplace_back(off[e.b.v] + i, off[e.a.v] + j, -e.w * dot(Mb[i], Ma[j]));
    }
  }

  Eigen::SparseMatrix<double> A(ndof, ndof);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw Error(ErrorCode::singular_system, "coupled Laplacian factorization failed");
  Eigen::VectorXd sol = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success)
    throw Error(ErrorCode::singular_system, "coupled Laplacian solve failed");
  sol += ldlt.solve(rhs - A * sol);  // one refinement pass

  for (int v = 0; v < nv; ++v)
    if (dim[v] == 3) mesh.pos[v] = {sol[off[v]], sol[off[v] + 1], sol[off[v] + 2]};

  // Segment scalars, kept strictly inside their segment and strictly ordered
  // along each loop (the unconstrained optimum can push a vertex against a
  // pinned neighbor; the clamp keeps the correspondence monotone).
  const double mgn = 1e-6;
  for (BoundaryLoop& loop : mesh.loops) {
    std::vector<std::pair<int, int>> run;  // (k, v) of one segment's vertices
    auto flush = [&]() {
      if (run.empty()) return;
      std::vector<double> s(run.size());
      for (size_t i = 0; i < run.size(); ++i) s[i] = sol[off[run[i].second]];
      if (!std::is_sorted(s.begin(), s.end())) std::sort(s.begin(), s.end());
      const double step = mgn / double(run.size());
      // A run spanning a whole pin-free loop slides on a single straight
      // segment whose chart wraps through the period; only ordering is
      // enforced there, so the end vertices may pass slightly beyond the
      // seam (the segment extends linearly).
      const bool whole = run.size() == loop.verts.size();
      double lo = whole ? s[0] : mgn;
      for (size_t i = 0; i < run.size(); ++i) {
        s[i] = std::max(s[i], lo);
        lo = s[i] + step;
      }
      double hi = whole ? s[run.size() - 1] : 1.0 - mgn;
      for (size_t i = run.size(); i-- > 0;) {
        s[i] = std::min(s[i], hi);
        hi = s[i] - step;
      }
      for (size_t i = 0; i < run.size(); ++i) {
        auto [k, v] = run[i];
        loop.t[k] = seg[v].ta + s[i] * (seg[v].tb - seg[v].ta);
        mesh.pos[v] = base[v] + dir[v] * s[i];
      }
      run.clear();
    };
    for (int k = 0; k < int(loop.verts.size()); ++k) {
      if (loop.pinned[k]) {
        flush();
        continue;
      }
      run.push_back({k, loop.verts[k]});
    }
    flush();
  }
}

int count_negative_image_weights(const PeriodicMesh& mesh) {
  int neg = 0;
  std::vector<EdgeTerm> edges;
  collect_edges(mesh, [&](const WrapRef& r) { return mesh.position(r); }, edges, &neg);
  return neg;
}

}  // namespace

SolveReport solve_mesh(PeriodicMesh& mesh, const SolverConfig& cfg) {
  cfg.validate();
  SolveReport rep;
  rep.area_history.push_back(mesh.area());
  const double floor_scale = 1e-12;
  const bool annulus = mesh.periodic && mesh.loops.size() == 2;
  const double beta = annulus ? period_beta(mesh.generator) : 0;
  if (annulus) set_param_aspect(mesh, beta / potential_energy(mesh), beta);
  std::vector<Vec3> prev;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    prev = mesh.pos;
    if (annulus && it > 1) set_param_aspect(mesh, beta / potential_energy(mesh), beta);
    // Chart first, positions second: the residual then certifies that the
    // positions solve the current chart's system, and the move test covers
    // stationarity of the chart updates themselves.
    if (annulus && cfg.slide && it > 1) corner_theta_step(mesh);
    if (cfg.slide) coupled_step(mesh);
    else harmonic_step(mesh);
    rep.iterations = it;
    double a = mesh.area();
    rep.area_history.push_back(a);
    double d = mesh.diameter();
    if (mesh.min_relative_triangle_area() <= floor_scale * d * d)
      throw Error(ErrorCode::mesh_degenerated, "triangle collapsed below the area floor");
    double move = 0;
    for (size_t v = 0; v < mesh.pos.size(); ++v) move = std::max(move, dist(prev[v], mesh.pos[v]));
    auto [res, floor] = residual_and_floor(mesh);
    rep.residual = res;
    // A residual at its own evaluation's roundoff floor counts as converged.
    if ((res < cfg.tol || res < 8 * floor) && move < cfg.tol * d && it > 1) {
      rep.converged = true;
      break;
    }
  }
  rep.negative_weight_count = count_negative_image_weights(mesh);
  rep.area = rep.area_history.back();
  if (mesh.periodic && mesh.loops.size() == 2) {
    ConformalData cd = conformal_energy(mesh);
    rep.dirichlet = cd.dirichlet;
    rep.has_conformal = true;
  }
  return rep;
}

std::pair<PeriodicMesh, SolveReport> solve(const PeriodicCurve& c, const SolverConfig& cfg) {
  cfg.validate();
  PeriodicMesh mesh = init_mesh(c, cfg.m, cfg.n);
  SolveReport rep = solve_mesh(mesh, cfg);
  return {std::move(mesh), rep};
}

std::pair<PeriodicMesh, SolveReport> disk_solve(const Polyline& jordan, const SolverConfig& cfg) {
  cfg.validate();
  // Reject self-touching Jordan curves (non-adjacent edge pairs must be apart).
  const int ne = jordan.edge_count();
  double scale = 0;
  for (int e = 0; e < ne; ++e) scale = std::max(scale, norm(jordan.edge_vector(e)));
  for (int i = 0; i < ne; ++i)
    for (int j = i + 2; j < ne; ++j) {
      if (i == 0 && j == ne - 1) continue;
      int npts = int(jordan.pts.size());
      if (segment_segment_dist(jordan.pts[i], jordan.pts[(i + 1) % npts], jordan.pts[j],
                               jordan.pts[(j + 1) % npts]) <= 1e-12 * scale)
        throw Error(ErrorCode::invalid_argument, "boundary polyline is not simple");
    }
  PeriodicMesh mesh = init_disk_mesh(jordan, cfg.m);
  SolveReport rep = solve_mesh(mesh, cfg);
  return {std::move(mesh), rep};
}

double period_beta(const ScrewMotion& generator) {
  double r = std::abs(std::remainder(generator.angle, 2 * M_PI));
  return r > 1e-9 ? r : std::abs(generator.shift);
}

ConformalData conformal_energy(const PeriodicMesh& mesh) {
  if (!mesh.periodic || mesh.loops.size() != 2)
    throw Error(ErrorCode::invalid_argument, "conformal energy needs a periodic annulus mesh");
  const int nv = mesh.vertex_count();

  // Scalar potential: 0 on the axis loop, 1 on the outer loop.
  std::vector<int> fixed(nv, -1);
  for (int v : mesh.loops[0].verts) fixed[v] = 0;
  for (int v : mesh.loops[1].verts) fixed[v] = 1;
  std::vector<int> fid(nv, -1);
  int nf = 0;
  for (int v = 0; v < nv; ++v)
    if (fixed[v] < 0) fid[v] = nf++;

  std::vector<EdgeTerm> edges;
  collect_edges(mesh, [&](const WrapRef& r) { return mesh.position(r); }, edges);

  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(std::max(nf, 1));
  auto add_dir = [&](int a, int b, double w) {
    if (fixed[a] >= 0) return;
    int row = fid[a];
    trips.emplace_back(row, row, w);
    if (fixed[b] >= 0) rhs[row] += w * fixed[b];
    else trips.emplace_back(row, fid[b], -w);
  };
  for (const EdgeTerm& e : edges) {
    add_dir(e.a.v, e.b.v, e.w);
    add_dir(e.b.v, e.a.v, e.w);
  }

  ConformalData cd;
  cd.u.assign(nv, 0.0);
  for (int v = 0; v < nv; ++v)
    if (fixed[v] >= 0) cd.u[v] = fixed[v];
  if (nf > 0) {
    SpMat A(nf, nf);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_system, "potential factorization failed");
    Eigen::VectorXd sol = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_system, "potential solve failed");
    for (int v = 0; v < nv; ++v)
      if (fixed[v] < 0) cd.u[v] = sol[fid[v]];
  }

  double du_energy = 0;
  for (const EdgeTerm& e : edges) {
    double d = cd.u[e.a.v] - cd.u[e.b.v];
    du_energy += e.w * d * d;  // half-cot weights give int |grad u|^2 directly
  }
  cd.scalar_energy = du_energy;
  cd.beta = period_beta(mesh.generator);
  if (!(du_energy > 0))
    throw Error(ErrorCode::singular_system, "degenerate potential energy");
  cd.conformal_width = cd.beta / du_energy;

  // Least-squares harmonic conjugate y of x = a u, with jump beta across the
  // seam; gauge y = 0 at the axis-loop start.
  const double a = cd.conformal_width;
  const int gauge = mesh.loops[0].verts[0];
  std::vector<int> yid(nv, -1);
  int ny = 0;
  for (int v = 0; v < nv; ++v)
    if (v != gauge) yid[v] = ny++;

  trips.clear();
  Eigen::VectorXd yrhs = Eigen::VectorXd::Zero(std::max(ny, 1));
  for (const WrapTri& t : mesh.tris) {
    Vec3 p[3] = {mesh.position(t.r[0]), mesh.position(t.r[1]), mesh.position(t.r[2])};
    double at = tri_area(p[0], p[1], p[2]);
    Vec3 nrm = normalized(cross(p[1] - p[0], p[2] - p[0]));
    Vec3 grad_l[3];
    for (int c = 0; c < 3; ++c)
      grad_l[c] = cross(nrm, p[(c + 2) % 3] - p[(c + 1) % 3]) / (2 * at);
    Vec3 gx{0, 0, 0};
    for (int c = 0; c < 3; ++c) gx += grad_l[c] * (a * cd.u[t.r[c].v]);
    Vec3 target = cross(nrm, gx);
    for (int i = 0; i < 3; ++i) {
      int vi = t.r[i].v;
      if (vi == gauge) continue;
      int row = yid[vi];
      yrhs[row] += at * dot(grad_l[i], target);
      for (int j = 0; j < 3; ++j) {
        int vj = t.r[j].v;
        double m = at * dot(grad_l[i], grad_l[j]);
        yrhs[row] -= m * (t.r[j].w * cd.beta);  // known seam jump contribution
        if (vj == gauge) continue;              // gauge value is 0
        trips.emplace_back(row, yid[vj], m);
      }
    }
  }
  cd.y.assign(nv, 0.0);
  if (ny > 0) {
    SpMat M(ny, ny);
    M.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<SpMat> ldlt(M);
    if (ldlt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_system, "conjugate coordinate factorization failed");
    Eigen::VectorXd sol = ldlt.solve(yrhs);
    if (ldlt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_system, "conjugate coordinate solve failed");
    for (int v = 0; v < nv; ++v)
      if (v != gauge) cd.y[v] = sol[yid[v]];
  }

  // Dirichlet energy of the map from the flat annulus [0, a] x [0, beta],
  // measured in the grid chart rescaled to the period-matched width a. The
  // per-vertex (x, y) chart above can fold at sharp boundary corners (the
  // conjugate coordinate is not monotone through the singularity), which
  // would blow up the cotangent weights; the grid chart stays embedded.
  double ax = 0;
  for (const Vec3& q : mesh.param) ax = std::max(ax, q.x);
  if (!(ax > 0))
    throw Error(ErrorCode::singular_system, "degenerate parameter chart");
  const double xscale = a / ax;
  double dmap = 0;
  for (const WrapTri& t : mesh.tris) {
    Vec3 p[3], q[3];
    for (int c = 0; c < 3; ++c) {
      p[c] = mesh.position(t.r[c]);
      q[c] = mesh.param_position(t.r[c]);
      q[c].x *= xscale;
      q[c].y *= cd.beta / std::max(mesh.param_period.y, 1e-300);
    }
    for (auto& e : kEdge)
      dmap += half_cot(q[e[2]], q[e[0]], q[e[1]]) * norm2(p[e[0]] - p[e[1]]);
  }
  cd.area = mesh.area();
  cd.dirichlet = dmap;
  cd.defect = 0.5 * dmap - cd.area;
  return cd;
}

std::pair<double, double> energy_lower_bounds(const PeriodicCurve& c, double a) {
  if (c.component_count() < 2)
    throw Error(ErrorCode::invalid_argument, "lower bounds need a two-component curve");
  if (!(a > 0)) throw Error(ErrorCode::invalid_argument, "conformal width must be positive");
  const double beta = period_beta(c.generator);
  const double e = std::abs(c.generator.shift);
  const double d = c.min_component_distance();
  return {a * e * e / beta, beta * d * d / a};
}

}  // namespace ppp

#include "flux_zero.hpp"

#include <algorithm>
#include <cmath>

namespace ppp {

FluxField::FluxField(const ConvexPolyhedron& tet, int face, const SolverConfig& cfg)
    : tet_(tet), face_(face), cfg_(cfg), tri_(projected_triangle(tet, face)) {
  cfg_.validate();
  origin_ = tri_.centroid();
  e1_ = normalized(tri_.verts[1] - tri_.verts[0]);
  e2_ = cross(tri_.plane_normal, e1_);
  quant_ = 1e-9 * tri_.diam();
}

void FluxField::plane_coords(const Vec3& q, double& u, double& v) const {
  Vec3 d = q - origin_;
  u = dot(d, e1_);
  v = dot(d, e2_);
}

Vec3 FluxField::eval(const Vec3& q) {
  // Project into the plane, then quantize for the cache key.
  Vec3 qp = q - tri_.plane_normal * (dot(tri_.plane_normal, q) - tri_.plane_offset);
  double u, v;
  plane_coords(qp, u, v);
  std::pair<long long, long long> key{llround(u / quant_), llround(v / quant_)};
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  PeriodicCurve c = gamma_q(tet_, face_, qp);
  auto [mesh, report] = solve(c, cfg_);
  Vec3 f = boundary_flux(mesh, 0);
  last_vertical_ = dot(f, tri_.plane_normal);
  f -= tri_.plane_normal * last_vertical_;
  ++eval_count_;
  cache_.emplace(key, f);
  return f;
}

static double default_inset(const ProjectedTriangle& tri, double inset) {
  return inset > 0 ? inset : 2e-3 * tri.diam();
}

std::vector<Vec3> near_boundary_samples(const ProjectedTriangle& tri, int per_edge,
                                        double inset) {
  const double d = default_inset(tri, inset);
  std::vector<Vec3> out;
  for (int e = 0; e < 3; ++e) {
    Vec3 a = tri.verts[e], b = tri.verts[(e + 1) % 3];
    Vec3 in = normalized(cross(tri.plane_normal, b - a));
    if (dot(in, tri.verts[(e + 2) % 3] - a) < 0) in = -in;
    for (int k = 0; k < per_edge; ++k) {
      double t = (k + 0.5) / per_edge;
      out.push_back(a + (b - a) * t + in * d);
    }
  }
  return out;
}

std::vector<Vec3> inset_loop(const ProjectedTriangle& tri, int per_edge, double inset) {
  const double d = default_inset(tri, inset);
  Vec3 c = tri.centroid();
  // Largest homothety of the triangle about its centroid whose vertices stay
  // d inside the boundary.
  double lo = 0, hi = 1;
  auto ok = [&](double s) {
    for (int i = 0; i < 3; ++i)
      if (tri.inner_distance(c + (tri.verts[i] - c) * s) < d) return false;
    return true;
  };
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  std::vector<Vec3> out;
  for (int e = 0; e < 3; ++e) {
    Vec3 a = c + (tri.verts[e] - c) * lo, b = c + (tri.verts[(e + 1) % 3] - c) * lo;
    for (int k = 0; k < per_edge; ++k) out.push_back(a + (b - a) * (double(k) / per_edge));
  }
  return out;
}

std::vector<std::pair<Vec3, double>> boundary_inwardness(FluxField& field,
                                                         const std::vector<Vec3>& samples) {
  std::vector<std::pair<Vec3, double>> out;
  for (const Vec3& q : samples) {
    Vec3 f = field.eval(q);
    Vec3 in = field.triangle().nearest_edge_inward_normal(q);
    out.push_back({q, dot(f, in)});
  }
  return out;
}

int winding_number(FluxField& field, const std::vector<Vec3>& loop, double eps_f) {
  if (loop.size() < 3) throw Error(ErrorCode::invalid_argument, "winding loop too short");
  std::vector<double> ang;
  for (const Vec3& q : loop) {
    Vec3 f = field.eval(q);
    if (norm(f) <= eps_f) throw Error(ErrorCode::zero_on_loop, "flux vanishes on winding loop");
    double fu = dot(f, field.to_plane(1, 0) - field.to_plane(0, 0));
    double fv = dot(f, field.to_plane(0, 1) - field.to_plane(0, 0));
    ang.push_back(std::atan2(fv, fu));
  }
  double total = 0;
  const double two_pi = 2 * std::acos(-1.0);
  for (size_t k = 0; k < ang.size(); ++k) {
    double d = ang[(k + 1) % ang.size()] - ang[k];
    d -= two_pi * std::round(d / two_pi);
    total += d;
  }
  double w = total / two_pi;
  double r = w - std::round(w);
  if (std::abs(r) >= 0.2)
    throw Error(ErrorCode::winding_lost, "turning total not close to an integer");
  return int(std::lround(w));
}

namespace {

struct Chart {
  FluxField* field;
  double eval2(double u, double v, double& fu, double& fv) {
    Vec3 f = field->eval(field->to_plane(u, v));
    Vec3 du = field->to_plane(1, 0) - field->to_plane(0, 0);
    Vec3 dv = field->to_plane(0, 1) - field->to_plane(0, 0);
    fu = dot(f, du);
    fv = dot(f, dv);
    return std::hypot(fu, fv);
  }
};

}  // namespace

ZeroResult find_zero(FluxField& field, const RootFindConfig& cfg) {
  cfg.validate();
  const ProjectedTriangle& tri = field.triangle();
  const double diam = tri.diam();
  const double eps_q = 1e-3 * diam;
  const double eps_f = cfg.eps_f > 0 ? cfg.eps_f : 1e-6 * field.solid().diameter();
  const double cap = cfg.newton_cap > 0 ? cfg.newton_cap : 0.25 * diam;

  ZeroResult res;
  Chart ch{&field};

  // Symmetric cases land the zero exactly at the centroid.
  Vec3 c = tri.centroid();
  {
    Vec3 f = field.eval(c);
    if (norm(f) <= eps_f) {
      res.q4 = c;
      res.fnorm = norm(f);
      res.evals = field.eval_count();
      return res;
    }
  }

  std::array<Vec3, 3> cur = tri.verts;
  auto shrink = [&](std::array<Vec3, 3>& t) {
    // Pull vertices toward the centroid until they clear 2 eps_q.
    Vec3 tc = (t[0] + t[1] + t[2]) / 3.0;
    double lo = 0, hi = 1;
    auto ok = [&](double s) {
      for (int i = 0; i < 3; ++i)
        if (tri.inner_distance(tc + (t[i] - tc) * s) < 2 * eps_q) return false;
      return true;
    };
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
    }
    for (int i = 0; i < 3; ++i) t[i] = tc + (t[i] - tc) * lo;
  };
  shrink(cur);

  for (int depth = 1; depth <= cfg.max_depth; ++depth) {
    res.depth_used = depth;

    // Quasi-Newton from the current triangle's centroid; finite-difference
    // Jacobian, Broyden updates, step capped and kept clear of the boundary.
    Vec3 start = (cur[0] + cur[1] + cur[2]) / 3.0;
    double u, v;
    field.plane_coords(start, u, v);
    double fu, fv;
    double fn = ch.eval2(u, v, fu, fv);
    double h = 1e-5 * diam;
    double J[2][2];
    auto fd_jacobian = [&]() {
      double au, av, bu, bv;
      ch.eval2(u + h, v, au, av);
      ch.eval2(u, v + h, bu, bv);
      J[0][0] = (au - fu) / h;
      J[1][0] = (av - fv) / h;
      J[0][1] = (bu - fu) / h;
      J[1][1] = (bv - fv) / h;
    };
    fd_jacobian();
    bool done = false;
    for (int it = 0; it < cfg.max_newton_iter && !done; ++it) {
      ++res.newton_iters;
      if (fn <= eps_f) {
        done = true;
        break;
      }
      double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
      if (std::abs(det) < 1e-30) {
        fd_jacobian();
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        if (std::abs(det) < 1e-30) break;
      }
      double du = -(J[1][1] * fu - J[0][1] * fv) / det;
      double dv = -(-J[1][0] * fu + J[0][0] * fv) / det;
      double sl = std::hypot(du, dv);
      if (sl > cap) {
        du *= cap / sl;
        dv *= cap / sl;
      }
      // Backtrack to stay strictly inside and to decrease |f|.
      double s = 1;
      double nu = u, nv = v, nfu = 0, nfv = 0, nfn = 0;
      bool accepted = false;
      for (int bt = 0; bt < 8; ++bt, s *= 0.5) {
        nu = u + s * du;
        nv = v + s * dv;
        if (tri.inner_distance(field.to_plane(nu, nv)) < 1.5 * eps_q) continue;
        nfn = ch.eval2(nu, nv, nfu, nfv);
        if (nfn < fn) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        fd_jacobian();
        continue;
      }
      // Broyden rank-one update.
      double su = nu - u, sv = nv - v;
      double ss = su * su + sv * sv;
      double ru = (nfu - fu) - (J[0][0] * su + J[0][1] * sv);
      double rv = (nfv - fv) - (J[1][0] * su + J[1][1] * sv);
      J[0][0] += ru * su / ss;
      J[0][1] += ru * sv / ss;
      J[1][0] += rv * su / ss;
      J[1][1] += rv * sv / ss;
      u = nu;
      v = nv;
      fu = nfu;
      fv = nfv;
      fn = nfn;
      if (s * std::hypot(du, dv) < 1e-13 * diam) break;
    }
    if (fn <= eps_f || done) {
      res.q4 = field.to_plane(u, v);
      res.fnorm = fn;
      res.evals = field.eval_count();
      return res;
    }

    // Newton did not finish: subdivide by winding number and recurse on the
    // sub-triangle that carries the zero.
    if (depth == cfg.max_depth) break;
    Vec3 m01 = (cur[0] + cur[1]) * 0.5, m12 = (cur[1] + cur[2]) * 0.5,
         m20 = (cur[2] + cur[0]) * 0.5;
    std::array<std::array<Vec3, 3>, 4> subs = {{{cur[0], m01, m20},
                                                {m01, cur[1], m12},
                                                {m20, m12, cur[2]},
                                                {m01, m12, m20}}};
    int keep = -1;
    for (int si = 0; si < 4; ++si) {
      std::vector<Vec3> loop;
      for (int e = 0; e < 3; ++e) {
        Vec3 a = subs[si][e], b = subs[si][(e + 1) % 3];
        for (int k = 0; k < cfg.boundary_samples; ++k)
          loop.push_back(a + (b - a) * (double(k) / cfg.boundary_samples));
      }
      int w;
      try {
        w = winding_number(field, loop, 0.0);
      } catch (const Error&) {
        continue;  // a zero on a sub-boundary: neighbor will claim it
      }
      if (w != 0) {
        if (keep >= 0) res.winding_split = true;
        if (keep < 0) keep = si;
      }
    }
    if (keep < 0)
      throw Error(ErrorCode::winding_lost, "no sub-triangle carries the winding");
    cur = subs[keep];
  }
  throw Error(ErrorCode::no_convergence, "flux zero not located at depth cap");
}

}  // namespace ppp

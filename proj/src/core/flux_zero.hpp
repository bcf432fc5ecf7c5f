#pragma once

#include <map>
#include <vector>

#include "conjugate.hpp"
#include "curves.hpp"
#include "solver.hpp"

namespace ppp {

// Axis-flux field of a tetrahedron face: each evaluation runs a full periodic
// Plateau solve for the curve with axis point q and integrates the inward
// conormal along the axis loop, projected into the face plane. Evaluations
// are cached on a 1e-9 * diam position grid.
class FluxField {
 public:
  FluxField(const ConvexPolyhedron& tet, int face, const SolverConfig& cfg);

  // In-plane flux at q (q is projected into the plane first).
  Vec3 eval(const Vec3& q);
  // Vertical (out-of-plane) component discarded at the last evaluation.
  double last_vertical() const { return last_vertical_; }

  const ProjectedTriangle& triangle() const { return tri_; }
  const ConvexPolyhedron& solid() const { return tet_; }
  int face() const { return face_; }
  const SolverConfig& config() const { return cfg_; }
  int eval_count() const { return eval_count_; }

  // 2d chart in the face plane used for root finding.
  Vec3 to_plane(double u, double v) const { return origin_ + e1_ * u + e2_ * v; }
  void plane_coords(const Vec3& q, double& u, double& v) const;

 private:
  ConvexPolyhedron tet_;
  int face_;
  SolverConfig cfg_;
  ProjectedTriangle tri_;
  Vec3 origin_, e1_, e2_;
  double quant_;
  std::map<std::pair<long long, long long>, Vec3> cache_;
  double last_vertical_ = 0;
  int eval_count_ = 0;
};

struct RootFindConfig {
  double eps_f = 0;          // flux tolerance, length units (0: 1e-6 * solid scale)
  int max_depth = 6;         // subdivision depth cap
  int boundary_samples = 4;  // winding samples per sub-triangle edge
  double newton_cap = 0;     // max Newton step (0: 0.25 * diam)
  int max_newton_iter = 40;

  void validate() const {
    if (max_depth < 1 || boundary_samples < 2)
      throw Error(ErrorCode::invalid_argument, "root-find config out of range");
  }
};

// Inner products <f(q~), inward edge normal> for near-boundary samples;
// the degree argument expects all of them positive.
std::vector<std::pair<Vec3, double>> boundary_inwardness(FluxField& field,
                                                         const std::vector<Vec3>& samples);

// Near-boundary sample points: per triangle edge, `per_edge` points at
// distance inset inside the edge (default inset: 2 * eps_q = 2e-3 * diam).
std::vector<Vec3> near_boundary_samples(const ProjectedTriangle& tri, int per_edge,
                                        double inset = 0);

// Closed sample loop at constant inset from the triangle boundary (a shrunk
// copy of the triangle about its centroid).
std::vector<Vec3> inset_loop(const ProjectedTriangle& tri, int per_edge, double inset = 0);

// Total signed turning of f along the loop divided by 2 pi, rounded with
// guard 0.2. Throws ZeroOnLoop when |f| <= eps_f at a sample, WindingLost
// when the total is not near an integer.
int winding_number(FluxField& field, const std::vector<Vec3>& loop, double eps_f);

struct ZeroResult {
  Vec3 q4;
  double fnorm = 0;
  int evals = 0;
  int depth_used = 0;
  int newton_iters = 0;
  bool winding_split = false;  // more than one sub-triangle carried winding 1
};

// Zero of the flux field inside the triangle: centroid short-circuit, then
// finite-difference quasi-Newton, with barycentric subdivision by winding
// number as fallback.
ZeroResult find_zero(FluxField& field, const RootFindConfig& cfg = {});

}  // namespace ppp

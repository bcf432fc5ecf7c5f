#pragma once

#include <vector>

#include "curves.hpp"
#include "error.hpp"
#include "motion.hpp"
#include "polyline.hpp"
#include "vec.hpp"

namespace ppp {

// Reference to a vertex of the fundamental domain, possibly seen through a
// power of the generator motion (w = generator exponent).
struct WrapRef {
  int v = -1;
  int w = 0;
};

struct WrapTri {
  WrapRef r[3];
};

// One boundary loop of the quotient mesh. For periodic meshes the loop is a
// fundamental piece of one curve component, closing through the seam; for
// disk meshes it is a closed Jordan polyline.
struct BoundaryLoop {
  int component = 0;           // index into curve_components
  std::vector<int> verts;      // vertex indices, in order of increasing t
  std::vector<double> t;       // strictly increasing curve parameters
  std::vector<char> pinned;    // polyline corners (and the seam start)
};

// Triangle mesh of one fundamental domain. Seam vertices are stored once;
// triangles crossing the seam refer to them through wrap exponents, so
// generator-invariance is exact by construction.
struct PeriodicMesh {
  std::vector<Vec3> pos;
  std::vector<WrapTri> tris;
  bool periodic = false;
  ScrewMotion generator;

  std::vector<Polyline> curve_components;  // boundary curves (per component)
  std::vector<BoundaryLoop> loops;         // loops[0] = axis side when annulus

  // Parametric coordinates used by the boundary-slide metric (z unused) and
  // the period offset applied per wrap exponent.
  std::vector<Vec3> param;
  Vec3 param_period{0, 0, 0};

  int grid_m = -1, grid_n = -1;  // structured-grid dimensions when applicable

  // Normalized grid fractions (annulus grids): row_s[i] in [0,1] across the
  // strip; column angles in [0,1) around the period, given separately at the
  // axis row (col_s_axis) and the outer row (col_s) and blended linearly in
  // between. The angles are graded toward sharp boundary corners of their own
  // loop, where the parametrization has algebraic singularities that a
  // uniform grid resolves only at a fractional rate; the blend keeps the
  // opposite loop free of collateral clustering.
  std::vector<double> row_s, col_s, col_s_axis;
  // Columns holding a sharp boundary corner (plus the seam column 0), sorted,
  // on loop `corner_side`. Their knot angles are free variables of the
  // minimization; column 0 is the rotational gauge and stays fixed.
  std::vector<int> corner_cols;
  int corner_side = 1;

  int vertex_count() const { return int(pos.size()); }
  Vec3 position(const WrapRef& r) const {
    return r.w == 0 ? pos[r.v] : generator.rigid_power(r.w)(pos[r.v]);
  }
  Vec3 param_position(const WrapRef& r) const { return param[r.v] + param_period * r.w; }

  // Point on the boundary curve of a component at parameter t; open
  // components continue through the generator, closed ones wrap mod 1.
  Vec3 boundary_point(int component, double t) const;

  double area() const;
  double diameter() const;
  double min_triangle_area() const;
  // Smallest image triangle area normalized by the triangle's share of the
  // parameter domain (the degeneration measure for graded grids).
  double min_relative_triangle_area() const;
  std::vector<char> boundary_flags() const;
  // Throws MeshDegenerated / SeamMismatch on broken invariants.
  void check_valid() const;
};

// Ruled-surface initial mesh between the two components of a periodic curve:
// rows 0..m from the axis component to the winding component, n columns per
// period, every polyline corner realized as a boundary vertex.
PeriodicMesh init_mesh(const PeriodicCurve& c, int m, int n);

// Structured disk mesh spanning a closed Jordan polyline: (m+1)x(m+1) grid,
// 4m boundary vertices distributed over the curve with corners included,
// interior transfinitely interpolated.
PeriodicMesh init_disk_mesh(const Polyline& jordan, int m);

// Boundary samples over an open (spans [0,1]) or closed polyline: n strictly
// increasing parameters starting at 0, containing every corner parameter;
// pinned marks corners. Throws ResolutionTooCoarse.
std::vector<std::pair<double, bool>> boundary_sample_params(const Polyline& pl, int n);

}  // namespace ppp

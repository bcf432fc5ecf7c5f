#pragma once

#include <array>
#include <vector>

#include "mesh.hpp"

namespace ppp {

// Conormal integral (inward, per boundary edge, times edge length) over one
// fundamental piece of the given boundary loop.
Vec3 boundary_flux(const PeriodicMesh& mesh, int loop);

struct ConjugateMesh {
  PeriodicMesh mesh;  // vertex-based export: averaged interior, chained boundary
  std::vector<std::array<Vec3, 3>> tri_conj;  // exact nonconforming values
  std::vector<Vec3> loop_periods;             // holonomy per boundary loop
  double max_holonomy = 0;  // worst midpoint mismatch over non-tree dual edges
  double source_diameter = 0;
};

// Discrete conjugate surface: per-triangle differential rotated 90 degrees
// about the triangle normal, integrated over a dual spanning tree rooted at
// the lowest-index triangle touching the axis loop; gauge places the
// axis-loop conjugate centroid at the origin. Throws NotMinimal when the
// source residual exceeds 10x tol.
ConjugateMesh conjugate(const PeriodicMesh& mesh, double tol = 1e-6);

// Norm of a loop's conjugate period vector; equals |boundary_flux| of the
// source structurally.
double closure_gap(const ConjugateMesh& cm, int loop);

struct PlaneFit {
  Vec3 normal;
  double offset = 0;   // normal . x = offset
  double max_dev = 0;  // worst point-to-plane distance
};
PlaneFit fit_plane(const std::vector<Vec3>& pts);

struct PerpReport {
  PlaneFit plane;            // best-fit plane of the conjugate arc
  double max_angle_dev = 0;  // worst |90 deg - angle(tangent plane, plane)|, radians
};
// Planarity and orthogonal-contact data for the conjugate image of the
// boundary arc loop.verts[k0..k1] (indices into the loop, k1 inclusive).
PerpReport perpendicularity_data(const ConjugateMesh& cm, int loop, int k0, int k1);

// Maximal straight arcs of a boundary loop: (start, end) positions within the
// loop, split at pinned (corner) vertices; end may exceed the loop size by
// one period when the arc wraps through the seam.
std::vector<std::array<int, 2>> loop_arcs(const PeriodicMesh& mesh, int loop);

}  // namespace ppp

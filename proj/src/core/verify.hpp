#pragma once

#include <string>
#include <vector>

#include "conjugate.hpp"
#include "mesh.hpp"
#include "polyline.hpp"

namespace ppp {

// Result of one machine check: worst measured value against its tolerance,
// with the locations responsible for the worst margin.
struct CheckReport {
  std::string name;
  bool pass = false;
  double measured = 0;   // worst measured value (units per check, see note)
  double tolerance = 0;  // pass iff the check's predicate holds at this tolerance
  std::vector<Vec3> worst;  // locations of worst violations (may be empty)
  std::string note;

  std::string line() const;  // one-line serialization for reports
};

// Area-weighted unit vertex normals; each triangle's contribution is rotated
// into the vertex's own copy of the fundamental domain.
std::vector<Vec3> vertex_normals(const PeriodicMesh& mesh);

// Orthogonal contact: max over the boundary vertices loop[k0..k1] (k1
// inclusive, indices may wrap past the loop size by one period) of the angle
// between the surface tangent plane and the given plane, measured away from
// 90 degrees. Pass iff below tol_deg.
CheckReport perpendicularity(const PeriodicMesh& mesh, int loop, int k0, int k1,
                             const Vec3& plane_normal, double tol_deg = 1.0);

// Convexity of a (nearly) planar polyline: all turning angles about the plane
// normal single-signed (|angle| < 1e-8 treated as zero); closed curves must
// additionally have total turning 2 pi.
CheckReport planar_convexity(const std::vector<Vec3>& pts, bool closed, const Vec3& plane_normal,
                             double noise = 0);

// Graph property along `direction`: every triangle normal has a strictly
// positive component along it (up to one global sign), and no two
// vertex-disjoint triangles overlap in the projection.
CheckReport graph_check(const PeriodicMesh& mesh, const Vec3& direction);

// No intersecting vertex-disjoint triangle pairs; periodic meshes are also
// checked against one adjacent generator copy on each side.
CheckReport embeddedness(const PeriodicMesh& mesh);

// Discrete negative-curvature criterion along a straight boundary line:
// interior angle sum > pi at every vertex of the loop.
CheckReport axis_curvature_sign(const PeriodicMesh& mesh, int loop);

// Stereographic modulus of the vertex normals on the loop, projected from the
// pole aligned with axis_dir: |g| = 1 within 1e-2 (horizontal normals).
CheckReport axis_gauss_modulus(const PeriodicMesh& mesh, int loop, const Vec3& axis_dir);

// Min signed height of the mesh above the oriented plane (normal . x =
// offset); pass iff >= -1e-6 * diameter.
CheckReport conjugate_height_sign(const PeriodicMesh& mesh, const Vec3& plane_normal,
                                  double plane_offset);

// Total curvature of a closed curve below 4 pi.
CheckReport total_curvature_gate(const Polyline& p);

}  // namespace ppp

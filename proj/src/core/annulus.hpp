#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conjugate.hpp"
#include "flux_zero.hpp"
#include "polyhedron.hpp"
#include "solver.hpp"
#include "verify.hpp"

namespace ppp {

// One boundary arc of a placed annulus, assigned to a face plane of the
// target solid.
struct ContactArc {
  int loop = 0;    // boundary loop index in the annulus mesh
  int k0 = 0;      // arc runs over loop vertices k0..k1 inclusive; k1 may
  int k1 = 0;      // exceed the loop size by one period (wrapping arcs)
  int face = -1;   // target face index the arc lies in
  PlaneFit pre_fit;      // plane fit before snapping (planarity metric)
  double perp_deg = 0;   // worst orthogonal-contact deviation, degrees
};

// A free boundary minimal annulus placed inside a target solid: the conjugate
// surface scaled and moved so its contact planes coincide with the solid's
// face planes, boundary arcs snapped into those planes exactly.
struct AnnulusResult {
  PeriodicMesh annulus;
  ConvexPolyhedron target;
  std::vector<ContactArc> contacts;
  double scale = 0;       // similarity ratio applied to the conjugate
  RigidMotion motion;     // rigid part of the similarity (may be improper)
  Vec3 q4{0, 0, 0};       // axis point used (tetrahedron pipeline)
  bool has_q4 = false;
  bool outside_solid = false;  // some vertex left the solid (obtuse case)
  std::string status = "ok";   // "ok" or the error text for this build
  std::vector<CheckReport> checks;

  // Discretization metrics of the raw conjugate, before placement and
  // snapping (all relative to the conjugate's diameter).
  double closure_gap_rel = 0;   // worst boundary-loop period
  double max_plane_dev_rel = 0; // worst arc planarity deviation
  double snap_rel = 0;          // worst boundary displacement of the snap
  double fit_residual_rel = 0;  // homothety plane-offset residual

  PeriodicMesh minimal;  // the periodic minimal surface the annulus came from
  SolveReport solve_report;

  explicit AnnulusResult(ConvexPolyhedron t) : target(std::move(t)) {}
  bool ok() const { return status == "ok"; }
};

// Multi-patch surface obtained by reflecting a seed patch through the
// tessellation orbit of a solid and welding coincident seam vertices.
struct ContinuedSurface {
  PeriodicMesh surface;                 // welded mesh (non-periodic)
  ConvexPolyhedron solid;
  std::vector<RigidMotion> copies;      // group elements used, one per patch
  std::vector<int> face_boundary_count; // boundary loops per solid face
  int boundary_loops = 0;
  int euler_v = 0, euler_e = 0, euler_f = 0;
  int genus = 0;
  std::vector<CheckReport> checks;

  explicit ContinuedSurface(ConvexPolyhedron s) : solid(std::move(s)) {}
};

struct BuildConfig {
  SolverConfig solver;        // final solve resolution
  SolverConfig root_solver;   // resolution inside flux-field evaluations
  RootFindConfig root_find;
  double conj_tol = 1e-6;     // residual gate for conjugation

  BuildConfig() {
    root_solver.m = 24;
    root_solver.n = 24;
  }
};

// Similarity fitting the contact-plane arrangement of a conjugate onto the
// face planes of a target solid.
struct SimilarityFit {
  double scale = 0;
  RigidMotion motion;       // applied after scaling: p -> motion(scale * p)
  double residual = 0;      // worst plane-offset mismatch after the map
  std::vector<int> faces;   // target face per input plane
};

// Fit planes (with their assigned target faces) onto the target's face
// planes: rotation from normal correspondence (improper part allowed), then
// scale and translation in least squares. Throws IncompatibleNormals when a
// normal is off its face normal by more than 1e-3 rad after alignment.
SimilarityFit fit_planes_to_faces(const std::vector<PlaneFit>& planes,
                                  const std::vector<int>& faces,
                                  const ConvexPolyhedron& target);

// Same with the planes taken from the conjugate's boundary arcs and faces
// assigned by nearest normal.
SimilarityFit homothety_fit(const ConjugateMesh& conj, const ConvexPolyhedron& target);

// The four free boundary minimal annuli of a tetrahedron, one per face:
// projected triangle -> flux-field root -> periodic solve -> conjugate ->
// homothety into the tetrahedron. Solver or root-finder failures are caught
// per face and reported in the result's status; the list always has 4 entries.
std::vector<AnnulusResult> tetra_annuli(const ConvexPolyhedron& tet, const BuildConfig& cfg);

// Single-face version of the above.
AnnulusResult tetra_annulus(const ConvexPolyhedron& tet, int face, const BuildConfig& cfg);

// Free boundary minimal annulus of a right pyramid over a regular n-gon.
// The axis flux vanishes by symmetry (verified against 10x the
// discretization tolerance, no root finding); the conjugate fundamental
// piece is assembled into a rotationally periodic annulus.
AnnulusResult pyramid_annulus(const ConvexPolyhedron& py, int n, const BuildConfig& cfg);

// Same pipeline for a right pyramid over a rhombus (2-fold symmetry).
AnnulusResult rhombic_pyramid_annulus(const ConvexPolyhedron& pr, const BuildConfig& cfg);

// Smyth's three free boundary minimal disks of a tetrahedron, one per
// ordering class of the face normals. Each disk meets all four face planes
// orthogonally.
std::vector<AnnulusResult> smyth_disks(const ConvexPolyhedron& tet, const BuildConfig& cfg);

enum class PlatonicSurfaceKind { s1, s2, s3, s4, s5, s6 };

// Genus-zero free boundary minimal surface of a Platonic solid, built by
// reflecting a seed patch (pyramid annulus, tessellation-tetrahedron annulus
// or Smyth disk) through the solid's symmetry orbit and welding seams.
ContinuedSurface platonic_surface(const ConvexPolyhedron& solid, PlatonicSurfaceKind which,
                                  const BuildConfig& cfg);

}  // namespace ppp

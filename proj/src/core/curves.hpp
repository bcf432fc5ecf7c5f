#pragma once

#include <array>
#include <optional>
#include <vector>

#include "polyhedron.hpp"
#include "polyline.hpp"

namespace ppp {

enum class PeriodicityKind { translational, helical, rotational, reflective };

const char* periodicity_kind_name(PeriodicityKind k);
PeriodicityKind periodicity_kind_from_name(const std::string& s);

// One generator-orbit representative of a periodic curve.
struct FundamentalPiece {
  // components[0]: axis-side piece (gamma_0 / gamma_q), components[1]: winding
  // piece (gamma_1). Rotational/reflective curves may carry more components.
  std::vector<Polyline> components;
};

struct PeriodicCurve {
  FundamentalPiece piece;
  PeriodicityKind kind = PeriodicityKind::translational;
  ScrewMotion generator;  // full-period generator (angle may be 0)
  Vec3 axis_point{0, 0, 0};
  Vec3 axis_dir{0, 0, 1};
  bool has_sub_generator = false;
  ScrewMotion sub_generator;  // helical sub-symmetry (pyramid construction)

  int component_count() const { return int(piece.components.size()); }
  // Point on the infinite curve: t in [0,1) covers the fundamental piece of
  // component ci, integer offsets apply powers of the generator.
  Vec3 eval(int ci, double t) const;
  // Minimum distance d between the two full components, sampled over
  // 2*periods+1 copies.
  double min_component_distance(int periods = 3) const;
  double scale() const;  // bounding scale of one fundamental piece
  void validate() const;
};

// Triangle of projected face normals in the plane of face j.
struct ProjectedTriangle {
  Vec3 plane_normal;   // nu_j
  double plane_offset; // plane constant of P_j
  std::array<Vec3, 3> verts;  // verts[0] starts the oriented edge pi_j(c_i1 nu_i1)
  double ratio = 0;           // similarity ratio to the face F_j
  int face = 0;               // face index j
  std::array<int, 3> other_faces{};  // the three remaining faces, ascending

  Vec3 centroid() const { return (verts[0] + verts[1] + verts[2]) / 3.0; }
  double diam() const;
  // Distance from p (assumed in the plane) to the triangle boundary,
  // positive inside.
  double inner_distance(const Vec3& p) const;
  Vec3 from_barycentric(double b0, double b1, double b2) const {
    return verts[0] * b0 + verts[1] * b1 + verts[2] * b2;
  }
  std::array<double, 3> to_barycentric(const Vec3& p) const;
  // Inward unit normal (in the plane) of the triangle edge nearest to p.
  Vec3 nearest_edge_inward_normal(const Vec3& p) const;
};

// Closed skew quadrilateral with edge vectors c_i nu_i in the given face order.
Polyline smyth_quadrilateral(const ConvexPolyhedron& tet, const std::array<int, 4>& ordering);

ProjectedTriangle projected_triangle(const ConvexPolyhedron& tet, int face);

// Translationally periodic curve Gamma_q = gamma_q U gamma_1 for face j of a
// tetrahedron, with the axis segment through q. q must be strictly inside the
// projected triangle (distance > eps_q = 1e-3 * diam).
PeriodicCurve gamma_q(const ConvexPolyhedron& tet, int face, const Vec3& q);

// Degenerate boundary configuration: the Jordan curve gamma_{1 q~} obtained
// when the axis point sits on the boundary of the projected triangle.
Polyline gamma_1q_tilde(const ConvexPolyhedron& tet, int face, const Vec3& q_tilde);

// Helically periodic curve for a right pyramid over a regular n-gon, built
// from the unit face normals. Axis on the x3-axis of the curve frame.
PeriodicCurve pyramid_curve(const ConvexPolyhedron& py, int n);

// Same construction for a right pyramid over a rhombus (uses c_i nu_i with
// the actual face areas; 2-fold symmetric).
PeriodicCurve rhombic_pyramid_curve(const ConvexPolyhedron& pr);

struct ConvexityDiagnostic {
  bool ok = false;
  std::string reason;
};

// True iff one fundamental piece of gamma_1 projects injectively onto a
// convex closed curve in the plane perpendicular to the axis.
bool projection_convexity_check(const PeriodicCurve& c, ConvexityDiagnostic* diag = nullptr);

// Pyramid face/axis description used by pyramid_curve and the annulus builder.
struct PyramidFrame {
  int base_face = -1;             // index of the n-gon base face
  Vec3 apex;                      // apex vertex
  Vec3 base_center;               // centroid of the base
  Vec3 axis_dir;                  // unit, from base toward apex
  std::vector<int> slant_faces;   // ordered by angle around the axis
  double c = 0;                   // axis length constant: c nu_0 + sum nu_i = 0
};
PyramidFrame pyramid_frame(const ConvexPolyhedron& py);

}  // namespace ppp

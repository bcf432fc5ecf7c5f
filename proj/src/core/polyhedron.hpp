#pragma once

#include <vector>

#include "error.hpp"
#include "motion.hpp"
#include "polyline.hpp"
#include "vec.hpp"

namespace ppp {

struct FaceData {
  Vec3 normal;    // outward unit normal
  double area;    // face area
  double offset;  // plane constant: normal . x == offset on the face
};

struct PolyEdge {
  int v0, v1;      // vertex indices, v0 < v1
  int f0, f1;      // incident faces
  double dihedral; // interior dihedral angle, radians
};

// Convex polyhedron given by vertices and face index loops (counterclockwise
// seen from outside after normal fixing). Face data is derived on
// construction and the polyhedron is validated: faces planar within
// 1e-9 * diameter, normals outward, Minkowski closure within 1e-9 * total area.
class ConvexPolyhedron {
 public:
  ConvexPolyhedron(std::vector<Vec3> vertices, std::vector<std::vector<int>> faces);

  const std::vector<Vec3>& vertices() const { return verts_; }
  const std::vector<std::vector<int>>& faces() const { return faces_; }
  const std::vector<FaceData>& face_data() const { return face_data_; }
  int face_count() const { return int(faces_.size()); }

  Vec3 centroid() const { return centroid_; }
  double diameter() const { return diameter_; }
  double total_face_area() const;

  // Sum c_i nu_i over the faces; vanishes for a closed polyhedron.
  Vec3 closure_defect() const;

  // Interior dihedral angle per edge. Throws NonManifoldEdge on bad topology.
  const std::vector<PolyEdge>& edges() const { return edges_; }
  std::vector<double> dihedral_angles() const;
  double max_dihedral() const;

  Vec3 face_centroid(int f) const;
  Polyline face_polygon(int f) const;

  ConvexPolyhedron transformed(const RigidMotion& m) const;

  // True if p is inside or on the boundary (within tol).
  bool contains(const Vec3& p, double tol) const;
  // Largest signed distance of p outside any face plane (<= 0 inside).
  double signed_excess(const Vec3& p) const;

  // All orthogonal symmetries (about the centroid) mapping the vertex set
  // onto itself, as rigid motions. Includes the identity and reflections.
  std::vector<RigidMotion> symmetry_group() const;

  // --- presets ---
  static ConvexPolyhedron tetrahedron(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
  static ConvexPolyhedron platonic(const std::string& name, double edge);
  // Right pyramid over a regular n-gon (base centered at origin in the
  // x1x2-plane, apex on +x3 axis).
  static ConvexPolyhedron right_pyramid(int n, double base_edge, double height);
  // Right pyramid over a rhombus with diagonals d1 (x1 axis) and d2 (x2 axis).
  static ConvexPolyhedron rhombic_pyramid(double d1, double d2, double height);

 private:
  void build();

  std::vector<Vec3> verts_;
  std::vector<std::vector<int>> faces_;
  std::vector<FaceData> face_data_;
  std::vector<PolyEdge> edges_;
  Vec3 centroid_;
  double diameter_ = 0;
};

}  // namespace ppp

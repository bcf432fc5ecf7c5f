#pragma once

#include "vec.hpp"

namespace ppp {

// Proper or improper rigid motion p -> R p + t.
struct RigidMotion {
  Mat3 rot;
  Vec3 trans;

  Vec3 operator()(const Vec3& p) const { return rot * p + trans; }
  Vec3 apply_vector(const Vec3& v) const { return rot * v; }

  RigidMotion then(const RigidMotion& outer) const {
    // outer(this(p))
    return {outer.rot * rot, outer.rot * trans + outer.trans};
  }
  RigidMotion inverse() const {
    Mat3 rt = rot.transposed();
    return {rt, -(rt * trans)};
  }
  RigidMotion power(int k) const;

  bool is_orthogonal(double tol = 1e-12) const;

  static RigidMotion identity() { return {Mat3::identity(), {0, 0, 0}}; }
  static RigidMotion translation(const Vec3& t) { return {Mat3::identity(), t}; }
  // Reflection across the plane through `point` with unit normal `n`.
  static RigidMotion reflection(const Vec3& point, const Vec3& n);
  // Rotation by `angle` about the axis through `point` with unit direction `dir`.
  static RigidMotion rotation(const Vec3& point, const Vec3& dir, double angle);
};

// Screw motion: rotation by `angle` about the axis (axis_point, axis_dir)
// composed with translation by `shift` along the axis. angle == 0 gives a
// pure translation.
struct ScrewMotion {
  Vec3 axis_point{0, 0, 0};
  Vec3 axis_dir{0, 0, 1};
  double angle = 0;
  double shift = 0;

  Vec3 operator()(const Vec3& p) const { return rigid()(p); }
  RigidMotion rigid() const;
  RigidMotion rigid_power(int k) const;
  ScrewMotion power(int k) const { return {axis_point, axis_dir, k * angle, k * shift}; }
  bool is_translation(double tol = 1e-14) const { return std::abs(angle) <= tol; }
  // Translation vector when angle == 0.
  Vec3 translation_vector() const { return axis_dir * shift; }

  static ScrewMotion translation(const Vec3& t) {
    double l = norm(t);
    return {{0, 0, 0}, l > 0 ? t / l : Vec3{0, 0, 1}, 0, l};
  }
};

}  // namespace ppp

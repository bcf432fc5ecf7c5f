#include "motion.hpp"

#include "error.hpp"

namespace ppp {

bool RigidMotion::is_orthogonal(double tol) const {
  Mat3 g = rot * rot.transposed();
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return worst <= tol;
}

RigidMotion RigidMotion::power(int k) const {
  RigidMotion m = identity();
  RigidMotion base = k >= 0 ? *this : inverse();
  int reps = k >= 0 ? k : -k;
  for (int i = 0; i < reps; ++i) m = m.then(base);
  return m;
}

RigidMotion RigidMotion::reflection(const Vec3& point, const Vec3& n) {
  Mat3 r = Mat3::reflection(n);
  return {r, point - r * point};
}

RigidMotion RigidMotion::rotation(const Vec3& point, const Vec3& dir, double angle) {
  Mat3 r = Mat3::rotation(dir, angle);
  return {r, point - r * point};
}

RigidMotion ScrewMotion::rigid() const {
  RigidMotion rot = RigidMotion::rotation(axis_point, axis_dir, angle);
  rot.trans += axis_dir * shift;
  return rot;
}

RigidMotion ScrewMotion::rigid_power(int k) const { return power(k).rigid(); }

}  // namespace ppp

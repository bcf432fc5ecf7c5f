#pragma once

#include <vector>

#include "curves.hpp"
#include "mesh.hpp"

namespace ppp {

struct SolverConfig {
  int m = 48;              // rows across the annulus
  int n = 48;              // columns along the period
  int max_iter = 500;      // outer iterations
  double tol = 1e-6;       // mean-curvature residual tolerance (relative)
  bool slide = true;       // boundary sliding enabled
  double linear_tol = 1e-12;

  void validate() const {
    if (m < 4 || n < 4) throw Error(ErrorCode::resolution_too_coarse, "resolution must be >= 4");
    if (!(tol > 0) || !(linear_tol > 0))
      throw Error(ErrorCode::invalid_argument, "tolerances must be positive");
  }
};

struct SolveReport {
  int iterations = 0;
  double area = 0;
  double dirichlet = 0;        // conformal-parametrization energy D (annuli)
  bool has_conformal = false;  // false for disk solves
  double residual = 0;
  bool converged = false;
  int negative_weight_count = 0;  // negative cotangent weights at the last step
  std::vector<double> area_history;
};

// Sum of triangle areas of one fundamental domain.
double mesh_area(const PeriodicMesh& mesh);

// One quotient-harmonic reposition of all non-boundary vertices with
// cotangent weights from the current mesh; seam coupling through the
// generator. Returns the number of negative cotangent weights encountered.
int harmonic_step(PeriodicMesh& mesh);

// One sweep of boundary-vertex slides along the boundary polylines; corners
// stay pinned, parameters stay strictly monotone, mesh area never increases
// beyond 1e-12 relative. Returns the number of vertices moved.
int boundary_slide_step(PeriodicMesh& mesh);

// Max over free vertices of |cotangent Laplacian of positions| * diameter /
// lumped vertex area (dimensionless mean-curvature residual).
double mesh_residual(const PeriodicMesh& mesh);

SolveReport solve_mesh(PeriodicMesh& mesh, const SolverConfig& cfg);

// Periodic Plateau solve: ruled initial mesh, then alternate harmonic_step
// and boundary_slide_step until the residual drops under cfg.tol.
std::pair<PeriodicMesh, SolveReport> solve(const PeriodicCurve& c, const SolverConfig& cfg);

// Disk Plateau solve for a simple closed polyline (same scheme, no seam).
std::pair<PeriodicMesh, SolveReport> disk_solve(const Polyline& jordan, const SolverConfig& cfg);

struct ConformalData {
  double area = 0;             // A
  double dirichlet = 0;        // D of the conformal-coordinates map
  double defect = 0;           // D/2 - A >= 0
  double conformal_width = 0;  // a, from period matching
  double scalar_energy = 0;    // D(u) of the 0/1 potential
  double beta = 0;             // period parameter used (angle, or shift when 0)
  std::vector<double> u;       // potential (0 axis loop, 1 outer loop)
  std::vector<double> y;       // conjugate coordinate (jump beta across seam)
};

// Discrete conformal parametrization of a converged annulus mesh:
// quotient-harmonic u in [0,1] across, conjugate coordinate with period
// matched to beta, energy of the resulting map.
ConformalData conformal_energy(const PeriodicMesh& mesh);

// Analytic lower bounds (a e^2 / beta, beta d^2 / a) on the Dirichlet energy,
// with beta := shift for pure translations and d the distance between the two
// full curve components.
std::pair<double, double> energy_lower_bounds(const PeriodicCurve& c, double a);

// Period parameter convention: generator angle when nonzero mod 2 pi,
// otherwise the translation shift.
double period_beta(const ScrewMotion& generator);

}  // namespace ppp

#pragma once

#include <stdexcept>
#include <string>

namespace ppp {

enum class ErrorCode {
  ok = 0,
  non_planar_face,
  degenerate_face,
  non_manifold_edge,
  zero_edge,
  not_a_tetrahedron,
  degenerate_projection,
  point_on_boundary,
  not_right_pyramid,
  resolution_too_coarse,
  singular_system,
  no_convergence,
  mesh_degenerated,
  not_minimal,
  zero_on_loop,
  winding_lost,
  flux_not_zero,
  seam_mismatch,
  incompatible_normals,
  parse_error,
  invalid_solid,
  io_error,
  invalid_argument,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ok: return "Ok";
    case ErrorCode::non_planar_face: return "NonPlanarFace";
    case ErrorCode::degenerate_face: return "DegenerateFace";
    case ErrorCode::non_manifold_edge: return "NonManifoldEdge";
    case ErrorCode::zero_edge: return "ZeroEdge";
    case ErrorCode::not_a_tetrahedron: return "NotATetrahedron";
    case ErrorCode::degenerate_projection: return "DegenerateProjection";
    case ErrorCode::point_on_boundary: return "PointOnBoundary";
    case ErrorCode::not_right_pyramid: return "NotRightPyramid";
    case ErrorCode::resolution_too_coarse: return "ResolutionTooCoarse";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::mesh_degenerated: return "MeshDegenerated";
    case ErrorCode::not_minimal: return "NotMinimal";
    case ErrorCode::zero_on_loop: return "ZeroOnLoop";
    case ErrorCode::winding_lost: return "WindingLost";
    case ErrorCode::flux_not_zero: return "FluxNotZero";
    case ErrorCode::seam_mismatch: return "SeamMismatch";
    case ErrorCode::incompatible_normals: return "IncompatibleNormals";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::invalid_solid: return "InvalidSolid";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace ppp

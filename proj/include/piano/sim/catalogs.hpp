#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "piano/core/errors.hpp"

namespace piano::sim {

// The 14 external forces of the varying-force Burgers experiment, in the
// label order 0..13 used throughout clustering/probing.
inline constexpr int kNumForces = 14;

inline double force_value(int id, double x) {
  switch (id) {
    case 0: return 0.0;
    case 1: return 1.0;
    case 2: return std::cos(x);
    case 3: return std::sin(x);
    case 4: return -std::tanh(x);
    case 5: return std::tanh(x);
    case 6: return std::cos(2.0 * x);
    case 7: return std::sin(2.0 * x);
    case 8: return std::tanh(2.0 * x);
    case 9: return -std::tanh(2.0 * x);
    case 10: return std::cos(3.0 * x);
    case 11: return std::sin(3.0 * x);
    case 12: return std::tanh(3.0 * x);
    case 13: return -std::tanh(3.0 * x);
    default:
      throw ConfigError("force id out of catalog: " + std::to_string(id));
  }
}

inline std::string force_name(int id) {
  static const char* names[kNumForces] = {
      "0",        "1",        "cos(x)",   "sin(x)",  "-tanh(x)",
      "tanh(x)",  "cos(2x)",  "sin(2x)",  "tanh(2x)", "-tanh(2x)",
      "cos(3x)",  "sin(3x)",  "tanh(3x)", "-tanh(3x)"};
  if (id < 0 || id >= kNumForces)
    throw ConfigError("force id out of catalog: " + std::to_string(id));
  return names[id];
}

// The 10 spatially varying diffusivities of the varying-diffusivity
// Burgers experiment.
inline constexpr int kNumDiffusivities = 10;

inline double diffusivity_value(int id, double x) {
  switch (id) {
    case 0: return 1.0;
    case 1: return 2.0;
    case 2: return 1.0 + std::cos(x);
    case 3: return 1.0 - std::cos(x);
    case 4: return 1.0 + std::sin(x);
    case 5: return 1.0 - std::sin(x);
    case 6: return 1.0 + std::cos(2.0 * x);
    case 7: return 1.0 - std::cos(2.0 * x);
    case 8: return 1.0 + std::sin(2.0 * x);
    case 9: return 1.0 - std::sin(2.0 * x);
    default:
      throw ConfigError("diffusivity id out of catalog: " +
                        std::to_string(id));
  }
}

// Boundary condition kinds for the convection-diffusion experiment.
// All conditions use the constant 0.2 on both ends.
enum class BoundaryKind : int {
  dirichlet = 0,   // u = 0.2
  neumann = 1,     // d_n u = 0.2
  curvature = 2,   // d_n^2 u = 0.2
  robin = 3,       // d_n u + u = 0.2
};

inline constexpr int kNumBoundaryKinds = 4;

inline BoundaryKind boundary_kind_from_id(int id) {
  if (id < 0 || id >= kNumBoundaryKinds)
    throw ConfigError("boundary kind out of catalog: " + std::to_string(id));
  return static_cast<BoundaryKind>(id);
}

}  // namespace piano::sim

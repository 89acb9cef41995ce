#pragma once

#include <string>
#include <variant>
#include <vector>

#include "piano/core/errors.hpp"

namespace piano {

// Cell-centered 1D grid: x_j = x_min + (j + 0.5) dx. Boundary conditions are
// imposed through ghost cells in the solver; no boundary nodes are stored.
struct Grid1D {
  int n_points = 0;
  double x_min = 0.0, x_max = 0.0;

  double dx() const { return (x_max - x_min) / n_points; }
  double node(int j) const { return x_min + (j + 0.5) * dx(); }
  std::vector<double> nodes() const {
    std::vector<double> xs(n_points);
    for (int j = 0; j < n_points; ++j) xs[j] = node(j);
    return xs;
  }
};

// Vertex-anchored periodic grid on [0,1]x[0,1]: x_j = j/n_x, y_k = k/n_y.
struct Grid2D {
  int n_x = 0, n_y = 0;

  double dx() const { return 1.0 / n_x; }
  double dy() const { return 1.0 / n_y; }
  double x(int j) const { return static_cast<double>(j) / n_x; }
  double y(int k) const { return static_cast<double>(k) / n_y; }
};

inline Grid1D make_grid_1d(int n_points, double x_min, double x_max) {
  if (n_points < 2)
    throw ConfigError("make_grid_1d: n_points must be >= 2, got " +
                      std::to_string(n_points));
  if (!(x_max > x_min))
    throw ConfigError("make_grid_1d: require x_max > x_min");
  return Grid1D{n_points, x_min, x_max};
}

inline Grid2D make_grid_2d(int n_x, int n_y) {
  if (n_x < 2 || n_y < 2)
    throw ConfigError("make_grid_2d: counts must be >= 2");
  return Grid2D{n_x, n_y};
}

using Grid = std::variant<Grid1D, Grid2D>;

inline int spatial_size(const Grid& g) {
  if (std::holds_alternative<Grid1D>(g))
    return std::get<Grid1D>(g).n_points;
  const auto& g2 = std::get<Grid2D>(g);
  return g2.n_x * g2.n_y;
}

}  // namespace piano

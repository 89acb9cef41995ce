#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "piano/core/errors.hpp"
#include "piano/core/rng.hpp"

namespace piano::nn {

struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<double> v;  // values
  std::vector<double> g;  // gradient accumulator

  Param() = default;
  Param(std::string n, std::vector<int> sh) : name(std::move(n)), shape(std::move(sh)) {
    std::size_t sz = 1;
    for (int d : shape) sz *= static_cast<std::size_t>(d);
    v.assign(sz, 0.0);
    g.assign(sz, 0.0);
  }
  std::size_t size() const { return v.size(); }
  void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
};

using ParamRefs = std::vector<Param*>;

inline std::size_t total_params(const ParamRefs& ps) {
  std::size_t n = 0;
  for (const auto* p : ps) n += p->size();
  return n;
}

inline void zero_grads(const ParamRefs& ps) {
  for (auto* p : ps) p->zero_grad();
}

// U(-b, b) with b = 1/sqrt(fan_in).
inline void init_fan_in(Param& p, int fan_in, Rng& rng) {
  double b = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& w : p.v) w = rng.uniform(-b, b);
}

// Complex spectral weights: U(0, s) per component, s = 1/(cin*cout).
inline void init_spectral(Param& p, int cin, int cout, Rng& rng) {
  double s = 1.0 / (static_cast<double>(cin) * cout);
  for (auto& w : p.v) w = rng.uniform(0.0, s);
}

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
}

inline double gelu_grad(double x) {
  double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * phi;
}

}  // namespace piano::nn

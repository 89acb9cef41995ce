#pragma once

#include <cstdint>
#include <string>

#include "piano/core/errors.hpp"
#include "piano/field/series.hpp"

namespace piano {

// Six-layer PI encoder: two spectral layers, two strided convolutions, two
// fully connected layers, GeLU activations throughout.
struct EncoderConfig {
  int dim = 1;        // 1 or 2
  int t_patch = 20;   // patch length in frames (= input channels)
  int patch_n = 32;   // spatial patch size per axis
  int d_h = 32;       // embedding dim
  int proj_hidden = 64, proj_out = 32;
  int spec_width = 16;  // channels of the two spectral layers
  int conv_width = 16;  // channels of the two convolutional layers
  int modes = 8;        // retained Fourier modes per spectral layer
  int fc_hidden = 64;

  int flat_size() const {
    int side = patch_n / 4;
    int sp = dim == 1 ? side : side * side;
    return conv_width * sp;
  }

  void validate() const {
    if (dim != 1 && dim != 2) throw ConfigError("EncoderConfig: dim must be 1 or 2");
    if (t_patch < 1 || patch_n < 4 || patch_n % 4 != 0)
      throw ConfigError("EncoderConfig: patch_n must be a positive multiple of 4");
    if (d_h < 1) throw ConfigError("EncoderConfig: d_h must be >= 1");
    if (modes < 1 || modes > patch_n / 2)
      throw ConfigError("EncoderConfig: modes must lie in [1, patch_n/2]");
  }
};

inline EncoderConfig default_encoder_config(int dim) {
  EncoderConfig c;
  c.dim = dim;
  if (dim == 2) {
    c.spec_width = 12;
    c.conv_width = 12;
    c.modes = 6;
  }
  return c;
}

struct ContrastiveConfig {
  double tau = 0.5;
  int batch = 64;  // |A|
  int steps = 5000;
  double lr = 1e-3;
  double weight_decay = 0.0;
  double noise_std = 0.0;  // iid Gaussian noise added to each crop view
  std::uint64_t seed = 0;
  // Eq-as-printed excludes the positive pair from the denominator; this
  // flag switches to the canonical SimCLR denominator for comparison.
  bool include_positive_in_denominator = false;

  void validate() const {
    if (!(tau > 0.0)) throw ConfigError("ContrastiveConfig: tau must be > 0");
    if (batch < 2) throw ConfigError("ContrastiveConfig: batch must be >= 2");
    if (steps < 1) throw ConfigError("ContrastiveConfig: steps must be >= 1");
  }
};

enum class CropStrategy { spatiotemporal, temporal, boundary, global };

inline std::string to_string(CropStrategy s) {
  switch (s) {
    case CropStrategy::spatiotemporal: return "spatiotemporal";
    case CropStrategy::temporal: return "temporal";
    case CropStrategy::boundary: return "boundary";
    case CropStrategy::global: return "global";
  }
  throw ConfigError("bad crop strategy");
}

inline CropStrategy crop_strategy_from_string(const std::string& s) {
  if (s == "spatiotemporal") return CropStrategy::spatiotemporal;
  if (s == "temporal") return CropStrategy::temporal;
  if (s == "boundary") return CropStrategy::boundary;
  if (s == "global") return CropStrategy::global;
  throw ConfigError("unknown crop strategy: " + s);
}

// Strategy matched to each experiment's invariant type.
inline CropStrategy default_crop_strategy(ExperimentId id) {
  switch (id) {
    case ExperimentId::E1:
    case ExperimentId::E2:
      return CropStrategy::temporal;
    case ExperimentId::E3:
      return CropStrategy::boundary;
    default:
      return CropStrategy::spatiotemporal;
  }
}

// The swapped-cropping ablation exchanges the 1D and 2D strategies.
inline CropStrategy swapped_crop_strategy(ExperimentId id) {
  return is_1d_experiment(id) ? CropStrategy::spatiotemporal
                              : CropStrategy::temporal;
}

}  // namespace piano

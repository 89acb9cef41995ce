#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "piano/core/errors.hpp"
#include "piano/field/series.hpp"

namespace piano {

// Relative l2 error over one frame: |pred - ref| / |ref|.
inline double rel_l2_error(const double* pred, const double* ref,
                           std::size_t n) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = pred[i] - ref[i];
    num += d * d;
    den += ref[i] * ref[i];
  }
  if (!(den > 0.0)) throw ConfigError("rel_l2_error: zero reference frame");
  return std::sqrt(num / den);
}

// l-infinity error, relative to the reference sup norm by default.
inline double linf_error(const double* pred, const double* ref, std::size_t n,
                         bool relative = true) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num = std::max(num, std::abs(pred[i] - ref[i]));
    den = std::max(den, std::abs(ref[i]));
  }
  if (!relative) return num;
  if (!(den > 0.0)) throw ConfigError("linf_error: zero reference frame");
  return num / den;
}

// Per-frame error curves plus domain averages for one trajectory. Frames
// [t_in, n_train) fall in the training-time domain; frames
// [n_train, n_total) in the future-time domain beyond the training horizon.
struct ForecastReport {
  std::vector<double> l2_per_frame;    // indexed from frame t_in
  std::vector<double> linf_per_frame;
  double l2_train = 0.0, l2_future = 0.0;
  double linf_train = 0.0, linf_future = 0.0;
};

// pred: [n_total - t_in, spatial] predicted frames; ref: full series.
inline ForecastReport evaluate_forecast(const std::vector<double>& pred,
                                        const FieldSeries& ref, int t_in,
                                        int n_train, int n_total,
                                        bool linf_relative = true) {
  const int sp = spatial_size(ref.grid);
  if (n_total > ref.n_frames || t_in >= n_train || n_train > n_total)
    throw ConfigError("evaluate_forecast: bad frame partition");
  if (pred.size() != static_cast<std::size_t>(n_total - t_in) * sp)
    throw ConfigError("evaluate_forecast: prediction size mismatch");

  ForecastReport rep;
  double l2a = 0.0, l2b = 0.0, lia = 0.0, lib = 0.0;
  for (int k = t_in; k < n_total; ++k) {
    const double* p = pred.data() + static_cast<std::size_t>(k - t_in) * sp;
    double e2 = rel_l2_error(p, ref.frame(k), sp);
    double ei = linf_error(p, ref.frame(k), sp, linf_relative);
    rep.l2_per_frame.push_back(e2);
    rep.linf_per_frame.push_back(ei);
    if (k < n_train) {
      l2a += e2;
      lia += ei;
    } else {
      l2b += e2;
      lib += ei;
    }
  }
  int na = n_train - t_in, nb = n_total - n_train;
  rep.l2_train = l2a / na;
  rep.linf_train = lia / na;
  rep.l2_future = nb ? l2b / nb : 0.0;
  rep.linf_future = nb ? lib / nb : 0.0;
  return rep;
}

// Dataset-level averages of the per-trajectory domain means.
struct MetricReport {
  double l2_train = 0.0, l2_future = 0.0;
  double linf_train = 0.0, linf_future = 0.0;
  int n_trajectories = 0;

  void add(const ForecastReport& r) {
    l2_train += r.l2_train;
    l2_future += r.l2_future;
    linf_train += r.linf_train;
    linf_future += r.linf_future;
    ++n_trajectories;
  }
  void finish() {
    if (!n_trajectories) return;
    l2_train /= n_trajectories;
    l2_future /= n_trajectories;
    linf_train /= n_trajectories;
    linf_future /= n_trajectories;
  }
};

}  // namespace piano

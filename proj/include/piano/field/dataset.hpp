#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "piano/core/binio.hpp"
#include "piano/core/errors.hpp"
#include "piano/field/series.hpp"

namespace piano {

// On-disk dataset: fixed header, contiguous float32 LE frame data per sample,
// then a labels section. Hidden labels are readable only through the
// eval-only accessor; training code receives a label-stripped view.
//
//   "PIANODS1" | version u32 | experiment u32 | n_samples u32 | n_frames u32
//   channels u32 | ndim u32 | nx u32 | ny u32 | dt_frame f64 | t0 f64
//   x_min f64 | x_max f64
//   per sample: sample_seed i64, frames f32[n_frames*channels*spatial]
//   "PIANOLBL" | per sample: kind u32, has_cat u32, cat i64, n_real u32,
//   reals f64...
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<PdeSample> samples)
      : samples_(std::move(samples)) {}

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  // Label-stripped surface (training paths).
  const FieldSeries& series(std::size_t i) const {
    return samples_.at(i).series;
  }
  std::int64_t sample_seed(std::size_t i) const {
    return samples_.at(i).sample_seed;
  }
  ExperimentId experiment(std::size_t i) const {
    return samples_.at(i).experiment_id;
  }

  // Eval-only surface. Never call from encoder/operator training code.
  const HiddenParameter& eval_only_label(std::size_t i) const {
    return samples_.at(i).theta;
  }

  const std::vector<PdeSample>& eval_only_samples() const { return samples_; }
  std::vector<PdeSample>& mutable_samples() { return samples_; }

 private:
  std::vector<PdeSample> samples_;
};

// Read-only view exposing only series data; handed to training loops.
class DatasetView {
 public:
  explicit DatasetView(const Dataset& ds) : ds_(&ds) {}
  std::size_t size() const { return ds_->size(); }
  const FieldSeries& series(std::size_t i) const { return ds_->series(i); }

 private:
  const Dataset* ds_;
};

// Quantize to float32 so in-memory values match the on-disk representation.
inline void quantize_to_f32(FieldSeries& s) {
  for (double& v : s.values) v = static_cast<double>(static_cast<float>(v));
}

inline void write_dataset(const Dataset& ds, const std::string& path) {
  if (ds.empty()) throw ConfigError("write_dataset: empty dataset");
  const auto& s0 = ds.series(0);
  const bool is1d = std::holds_alternative<Grid1D>(s0.grid);
  for (std::size_t i = 1; i < ds.size(); ++i) {
    const auto& s = ds.series(i);
    if (s.n_frames != s0.n_frames || s.channels != s0.channels ||
        s.values.size() != s0.values.size())
      throw ConfigError("write_dataset: inhomogeneous sample shapes");
  }
  binio::Writer w(path);
  w.magic("PIANODS1");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(ds.experiment(0)));
  w.u32(static_cast<std::uint32_t>(ds.size()));
  w.u32(static_cast<std::uint32_t>(s0.n_frames));
  w.u32(static_cast<std::uint32_t>(s0.channels));
  if (is1d) {
    const auto& g = std::get<Grid1D>(s0.grid);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(g.n_points));
    w.u32(0);
    w.f64(s0.dt_frame);
    w.f64(s0.t0);
    w.f64(g.x_min);
    w.f64(g.x_max);
  } else {
    const auto& g = std::get<Grid2D>(s0.grid);
    w.u32(2);
    w.u32(static_cast<std::uint32_t>(g.n_x));
    w.u32(static_cast<std::uint32_t>(g.n_y));
    w.f64(s0.dt_frame);
    w.f64(s0.t0);
    w.f64(0.0);
    w.f64(1.0);
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    w.i64(ds.sample_seed(i));
    w.f32_array(ds.series(i).values);
  }
  // Eval-only labels section.
  w.magic("PIANOLBL");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& th = ds.eval_only_label(i);
    w.u32(static_cast<std::uint32_t>(th.kind));
    w.u32(th.categorical_label.has_value() ? 1u : 0u);
    w.i64(th.categorical_label.value_or(0));
    w.u32(static_cast<std::uint32_t>(th.real_values.size()));
    for (double v : th.real_values) w.f64(v);
  }
  if (!w.good()) throw FormatError("write_dataset: write failed: " + path);
}

inline Dataset read_dataset(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("PIANODS1");
  std::uint32_t version = r.u32();
  if (version != 1)
    throw FormatError(path + ": unsupported version " +
                      std::to_string(version));
  auto exp = static_cast<ExperimentId>(r.u32());
  std::uint32_t n_samples = r.u32();
  std::uint32_t n_frames = r.u32();
  std::uint32_t channels = r.u32();
  std::uint32_t ndim = r.u32();
  std::uint32_t nx = r.u32();
  std::uint32_t ny = r.u32();
  double dt_frame = r.f64();
  double t0 = r.f64();
  double x_min = r.f64();
  double x_max = r.f64();
  if (ndim != 1 && ndim != 2)
    throw FormatError(path + ": bad dimensionality " + std::to_string(ndim));

  Grid grid;
  std::size_t spatial;
  if (ndim == 1) {
    grid = make_grid_1d(static_cast<int>(nx), x_min, x_max);
    spatial = nx;
  } else {
    grid = make_grid_2d(static_cast<int>(nx), static_cast<int>(ny));
    spatial = static_cast<std::size_t>(nx) * ny;
  }

  std::vector<PdeSample> samples(n_samples);
  for (auto& smp : samples) {
    smp.experiment_id = exp;
    smp.sample_seed = r.i64();
    auto& s = smp.series;
    s.n_frames = static_cast<int>(n_frames);
    s.channels = static_cast<int>(channels);
    s.grid = grid;
    s.dt_frame = dt_frame;
    s.t0 = t0;
    r.f32_array(s.values, static_cast<std::size_t>(n_frames) * channels *
                              spatial);
  }
  r.expect_magic("PIANOLBL");
  for (auto& smp : samples) {
    auto& th = smp.theta;
    th.kind = static_cast<HiddenKind>(r.u32());
    bool has_cat = r.u32() != 0;
    std::int64_t cat = r.i64();
    if (has_cat) th.categorical_label = static_cast<int>(cat);
    std::uint32_t n_real = r.u32();
    th.real_values.resize(n_real);
    for (auto& v : th.real_values) v = r.f64();
  }
  return Dataset(std::move(samples));
}

}  // namespace piano

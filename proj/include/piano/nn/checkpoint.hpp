#pragma once

#include <string>
#include <vector>

#include "piano/core/binio.hpp"
#include "piano/nn/param.hpp"

namespace piano::nn {

// Checkpoint: "PIANOCK1" | schema hash u64 | config json string |
// n_arrays u32 | per array: name, ndim u32, dims u32..., f32 data.
// The schema hash is the FNV-1a hash of the config string.
inline void save_checkpoint(const std::string& path, const ParamRefs& params,
                            const std::string& config_json) {
  binio::Writer w(path);
  w.magic("PIANOCK1");
  w.u64(binio::fnv1a(config_json));
  w.str(config_json);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    w.str(p->name);
    w.u32(static_cast<std::uint32_t>(p->shape.size()));
    for (int d : p->shape) w.u32(static_cast<std::uint32_t>(d));
    w.f32_array(p->v);
  }
  if (!w.good()) throw FormatError("save_checkpoint: write failed: " + path);
}

// Loads into an existing parameter set; names and shapes must match.
// Returns the embedded config string.
inline std::string load_checkpoint(const std::string& path,
                                   const ParamRefs& params) {
  binio::Reader r(path);
  r.expect_magic("PIANOCK1");
  std::uint64_t schema = r.u64();
  std::string config = r.str();
  if (schema != binio::fnv1a(config))
    throw FormatError(path + ": schema hash mismatch");
  std::uint32_t n = r.u32();
  if (n != params.size())
    throw FormatError(path + ": expected " + std::to_string(params.size()) +
                      " arrays, file has " + std::to_string(n));
  for (auto* p : params) {
    std::string name = r.str();
    if (name != p->name)
      throw FormatError(path + ": array name mismatch: expected " + p->name +
                        ", got " + name);
    std::uint32_t ndim = r.u32();
    if (ndim != p->shape.size())
      throw FormatError(path + ": rank mismatch for " + name);
    std::size_t sz = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      std::uint32_t dim = r.u32();
      if (dim != static_cast<std::uint32_t>(p->shape[d]))
        throw FormatError(path + ": shape mismatch for " + name);
      sz *= dim;
    }
    r.f32_array(p->v, sz);
  }
  return config;
}

// Peek at the embedded config without needing the parameter layout.
inline std::string checkpoint_config(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("PIANOCK1");
  r.u64();
  return r.str();
}

}  // namespace piano::nn

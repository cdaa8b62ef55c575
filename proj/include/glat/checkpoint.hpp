#pragma once

#include "glat/model.hpp"

#include <filesystem>

namespace glat {

/// Text checkpoint, versioned header `#glat-checkpoint v1`, then per tensor
/// a record line `<name> <ndims> <dims...>` and one line of row-major values
/// in shortest round-trip decimal form. All tensors are always written:
/// glat.Wq, glat.Wk, glat.Wv, filter.coeffs, agg.logits, cls.W, cls.b.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);

/// Loads tensor values into a structurally initialized model. Each stored
/// tensor's dimensions must match the skeleton's, otherwise DimensionError
/// naming the tensor and both shapes. Missing or extra tensors are a
/// FormatError.
ModelParams load_checkpoint(const std::filesystem::path& path, const ModelParams& skeleton);

}  // namespace glat

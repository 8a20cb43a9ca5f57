#pragma once

#include <filesystem>
#include <variant>

#include "spforest/covariate_forest.hpp"
#include "spforest/spatial_forest.hpp"

namespace spforest {

// Model files are line-oriented text:
//
//   spforest-model <version>
//   kind spatial|covariate
//   seed <seed> <stream>
//   ...kind-specific records...
//   end
//
// Spatial models reference label rasters and the domain raster by paths
// relative to the model file. Reals use 17 significant digits, so a save/load
// cycle reproduces predictions bit for bit.

inline constexpr int kModelFormatVersion = 1;

void save_model(const std::filesystem::path& path, const SpatialForest& forest);
void save_model(const std::filesystem::path& path, const CovariateForest& forest);

using Model = std::variant<SpatialForest, CovariateForest>;

/// Throws DataError on a malformed file or an unsupported version.
Model load_model(const std::filesystem::path& path);

}  // namespace spforest

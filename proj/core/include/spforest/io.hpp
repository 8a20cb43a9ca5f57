#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "spforest/geometry.hpp"

namespace spforest {

// Text raster format:
//   ncols nrows xmin ymin cellsize
//   <nrows lines of ncols whitespace-separated values, top row first, NA for missing>
// Reals are written with 17 significant digits so a write/read cycle is bit-exact.

/// Shortest-safe decimal form of `v` at 17 significant digits ("NA" for NaN).
std::string format_real(double v);
/// Parses a real or the NA token. Throws DataError on garbage.
double parse_real(const std::string& token);

RasterGrid read_raster(std::istream& in);
RasterGrid read_raster(const std::filesystem::path& path);
void write_raster(std::ostream& out, const RasterGrid& grid);
void write_raster(const std::filesystem::path& path, const RasterGrid& grid);

/// CSV with header `x,y`. Points outside `window` are a DataError.
PointPattern read_points_csv(std::istream& in, const Window& window);
PointPattern read_points_csv(const std::filesystem::path& path, const Window& window);
/// Coordinates from a points CSV, unvalidated (used to infer a window).
std::vector<Point> read_point_coordinates(const std::filesystem::path& path);
/// Points are expanded by multiplicity.
void write_points_csv(std::ostream& out, const PointPattern& pattern);
void write_points_csv(const std::filesystem::path& path, const PointPattern& pattern);

/// Loads every `*.grid` / `*.asc` file in `dir` (sorted by file name); the
/// file stem is the covariate name.
CovariateStack read_covariate_dir(const std::filesystem::path& dir);
void write_covariate_dir(const std::filesystem::path& dir, const CovariateStack& stack);

}  // namespace spforest

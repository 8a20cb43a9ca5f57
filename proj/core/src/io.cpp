#include "spforest/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace spforest {

namespace fs = std::filesystem;

std::string format_real(double v) {
  if (is_na(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& token) {
  if (token == "NA" || token == "nan" || token == "NaN") return kNA;
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw DataError("cannot parse number: '" + token + "'");
  return v;
}

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RasterGrid read_raster(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("raster: missing header");
  std::istringstream hs(header);
  std::string tok[5];
  for (auto& t : tok)
    if (!(hs >> t)) throw DataError("raster: header needs 'ncols nrows xmin ymin cellsize'");
  GridGeometry g;
  const double nc = parse_real(tok[0]);
  const double nr = parse_real(tok[1]);
  if (!(nc >= 1) || !(nr >= 1) || nc != std::floor(nc) || nr != std::floor(nr))
    throw DataError("raster: ncols/nrows must be positive integers");
  g.ncols = static_cast<std::size_t>(nc);
  g.nrows = static_cast<std::size_t>(nr);
  g.xmin = parse_real(tok[2]);
  g.ymin = parse_real(tok[3]);
  g.cellsize = parse_real(tok[4]);
  if (!(g.cellsize > 0)) throw DataError("raster: cellsize must be positive");

  std::vector<double> values;
  values.reserve(g.size());
  std::string line;
  std::size_t row = 0;
  while (row < g.nrows && std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string t;
    std::size_t col = 0;
    while (ls >> t) {
      values.push_back(parse_real(t));
      ++col;
    }
    if (col != g.ncols)
      throw DataError("raster: row " + std::to_string(row) + " has " + std::to_string(col) + " values, expected " +
                      std::to_string(g.ncols));
    ++row;
  }
  if (row != g.nrows) throw DataError("raster: expected " + std::to_string(g.nrows) + " rows");
  return RasterGrid(g, std::move(values));
}

RasterGrid read_raster(const fs::path& path) {
  auto in = open_in(path);
  return read_raster(in);
}

void write_raster(std::ostream& out, const RasterGrid& grid) {
  const auto& g = grid.geometry();
  out << g.ncols << ' ' << g.nrows << ' ' << format_real(g.xmin) << ' ' << format_real(g.ymin) << ' '
      << format_real(g.cellsize) << '\n';
  for (std::size_t r = 0; r < g.nrows; ++r) {
    for (std::size_t c = 0; c < g.ncols; ++c) {
      if (c) out << ' ';
      out << format_real(grid[g.index(r, c)]);
    }
    out << '\n';
  }
}

void write_raster(const fs::path& path, const RasterGrid& grid) {
  auto out = open_out(path);
  write_raster(out, grid);
}

namespace {

std::vector<Point> parse_points(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("points: empty file");
  std::string header = trim(line);
  header.erase(std::remove(header.begin(), header.end(), ' '), header.end());
  if (header != "x,y") throw DataError("points: header must be 'x,y'");
  std::vector<Point> pts;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("points: line " + std::to_string(lineno) + " lacks a comma");
    const double x = parse_real(trim(line.substr(0, comma)));
    const double y = parse_real(trim(line.substr(comma + 1)));
    if (!std::isfinite(x) || !std::isfinite(y))
      throw DataError("points: non-finite coordinate on line " + std::to_string(lineno));
    pts.push_back({x, y});
  }
  return pts;
}

}  // namespace

PointPattern read_points_csv(std::istream& in, const Window& window) {
  return PointPattern(window, parse_points(in));
}

PointPattern read_points_csv(const fs::path& path, const Window& window) {
  auto in = open_in(path);
  return read_points_csv(in, window);
}

std::vector<Point> read_point_coordinates(const fs::path& path) {
  auto in = open_in(path);
  return parse_points(in);
}

void write_points_csv(std::ostream& out, const PointPattern& pattern) {
  out << "x,y\n";
  const auto pts = pattern.points();
  const auto mult = pattern.multiplicities();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::uint32_t m = 0; m < mult[i]; ++m) out << format_real(pts[i].x) << ',' << format_real(pts[i].y) << '\n';
}

void write_points_csv(const fs::path& path, const PointPattern& pattern) {
  auto out = open_out(path);
  write_points_csv(out, pattern);
}

CovariateStack read_covariate_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("covariate directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".grid" || ext == ".asc")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no covariate grids in " + dir.string());
  std::vector<std::string> names;
  std::vector<RasterGrid> grids;
  for (const auto& f : files) {
    names.push_back(f.stem().string());
    grids.push_back(read_raster(f));
  }
  return CovariateStack(std::move(names), std::move(grids));
}

void write_covariate_dir(const fs::path& dir, const CovariateStack& stack) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < stack.size(); ++k) write_raster(dir / (stack.names()[k] + ".grid"), stack.grid(k));
}

}  // namespace spforest

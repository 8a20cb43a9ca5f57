#include "spforest/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spforest {

Partition::Partition(GridGeometry geom, std::vector<std::int32_t> labels, PartitionOrigin origin)
    : geom_(geom), labels_(std::move(labels)), origin_(origin) {
  if (labels_.size() != geom_.size()) throw std::invalid_argument("partition labels do not match the lattice");
  std::int32_t max_label = -1;
  for (auto l : labels_) {
    if (l < kOutside) throw std::invalid_argument("partition label below -1");
    max_label = std::max(max_label, l);
  }
  pixel_counts_.assign(static_cast<std::size_t>(max_label + 1), 0);
  for (auto l : labels_)
    if (l >= 0) ++pixel_counts_[static_cast<std::size_t>(l)];
  areas_.resize(pixel_counts_.size());
  for (std::size_t j = 0; j < pixel_counts_.size(); ++j) {
    if (pixel_counts_[j] == 0) throw std::invalid_argument("partition cell ids are not contiguous");
    areas_[j] = static_cast<double>(pixel_counts_[j]) * geom_.pixel_area();
  }
}

double Partition::total_area() const {
  const std::size_t pixels = std::accumulate(pixel_counts_.begin(), pixel_counts_.end(), std::size_t{0});
  return static_cast<double>(pixels) * geom_.pixel_area();
}

std::optional<std::size_t> Partition::cell_of(double x, double y) const {
  const auto p = geom_.locate(x, y);
  if (!p || labels_[*p] < 0) return std::nullopt;
  return static_cast<std::size_t>(labels_[*p]);
}

RasterGrid Partition::to_raster() const {
  RasterGrid out(geom_, kNA);
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] >= 0) out[i] = static_cast<double>(labels_[i]);
  return out;
}

Partition Partition::from_raster(const RasterGrid& grid, PartitionOrigin origin) {
  std::vector<std::int32_t> labels(grid.size(), kOutside);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = grid[i];
    if (is_na(v)) continue;
    if (v < 0 || v != std::floor(v) || v > std::numeric_limits<std::int32_t>::max())
      throw DataError("label grid values must be nonnegative integers or NA");
    labels[i] = static_cast<std::int32_t>(v);
  }
  try {
    return Partition(grid.geometry(), std::move(labels), origin);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

// ---------------------------------------------------------------------------

NucleusIndex::NucleusIndex(std::vector<Point> nuclei, double xmin, double ymin, double xmax, double ymax)
    : nuclei_(std::move(nuclei)), x0_(xmin), y0_(ymin) {
  if (nuclei_.empty()) throw std::invalid_argument("nucleus index needs at least one nucleus");
  const double w = xmax - xmin, h = ymax - ymin;
  bucket_ = std::sqrt(w * h / static_cast<double>(nuclei_.size()));
  if (!(bucket_ > 0.0)) bucket_ = std::max(w, h) > 0 ? std::max(w, h) : 1.0;
  nx_ = std::max(1L, static_cast<long>(std::ceil(w / bucket_)));
  ny_ = std::max(1L, static_cast<long>(std::ceil(h / bucket_)));

  const auto nb = static_cast<std::size_t>(nx_ * ny_);
  std::vector<std::uint32_t> bucket_of(nuclei_.size());
  start_.assign(nb + 1, 0);
  for (std::size_t i = 0; i < nuclei_.size(); ++i) {
    const long bx = std::clamp(static_cast<long>((nuclei_[i].x - x0_) / bucket_), 0L, nx_ - 1);
    const long by = std::clamp(static_cast<long>((nuclei_[i].y - y0_) / bucket_), 0L, ny_ - 1);
    bucket_of[i] = static_cast<std::uint32_t>(by * nx_ + bx);
    ++start_[bucket_of[i] + 1];
  }
  std::partial_sum(start_.begin(), start_.end(), start_.begin());
  items_.resize(nuclei_.size());
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < nuclei_.size(); ++i) items_[fill[bucket_of[i]]++] = static_cast<std::uint32_t>(i);
}

std::size_t NucleusIndex::nearest(double x, double y) const {
  const long bx = std::clamp(static_cast<long>(std::floor((x - x0_) / bucket_)), 0L, nx_ - 1);
  const long by = std::clamp(static_cast<long>(std::floor((y - y0_) / bucket_)), 0L, ny_ - 1);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  auto scan = [&](long cx, long cy) {
    if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) return;
    const auto b = static_cast<std::size_t>(cy * nx_ + cx);
    for (std::uint32_t k = start_[b]; k < start_[b + 1]; ++k) {
      const std::uint32_t i = items_[k];
      const double dx = nuclei_[i].x - x, dy = nuclei_[i].y - y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best || (d2 == best && i < best_idx)) {
        best = d2;
        best_idx = i;
      }
    }
  };
  const long max_ring = std::max(nx_, ny_);
  for (long r = 0; r <= max_ring; ++r) {
    if (r == 0) {
      scan(bx, by);
    } else {
      for (long cx = bx - r; cx <= bx + r; ++cx) {
        scan(cx, by - r);
        scan(cx, by + r);
      }
      for (long cy = by - r + 1; cy <= by + r - 1; ++cy) {
        scan(bx - r, cy);
        scan(bx + r, cy);
      }
    }
    // Distance from (x, y) to the outside of the scanned block of buckets.
    const double left = x - (x0_ + static_cast<double>(bx - r) * bucket_);
    const double right = (x0_ + static_cast<double>(bx + r + 1) * bucket_) - x;
    const double down = y - (y0_ + static_cast<double>(by - r) * bucket_);
    const double up = (y0_ + static_cast<double>(by + r + 1) * bucket_) - y;
    const double reach = std::min({left, right, down, up});
    // Strict: an equidistant nucleus further out could have a lower index.
    if (reach > 0.0 && best < reach * reach) break;
  }
  return best_idx;
}

// ---------------------------------------------------------------------------

NucleusIndex draw_voronoi_nuclei(const Domain& domain, double gamma, RngSeed rng, const VoronoiOptions& opts,
                                 bool* fallback) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive and finite");
  const GridGeometry& g = domain.grid();
  const double margin = opts.margin_factor / std::sqrt(gamma);
  const double x0 = g.xmin - margin, x1 = g.xmax() + margin;
  const double y0 = g.ymin - margin, y1 = g.ymax() + margin;
  const double mean = gamma * (x1 - x0) * (y1 - y0);
  if (mean > 1e8) throw std::invalid_argument("gamma too large for the window (more than 1e8 expected nuclei)");

  Engine eng = rng.engine();
  std::poisson_distribution<std::uint64_t> pois(mean);
  const auto n = pois(eng);
  std::vector<Point> nuclei;
  nuclei.reserve(n);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  for (std::uint64_t i = 0; i < n; ++i) nuclei.push_back({ux(eng), uy(eng)});
  if (fallback) *fallback = nuclei.empty();
  if (nuclei.empty()) {
    std::uniform_real_distribution<double> wx(g.xmin, g.xmax()), wy(g.ymin, g.ymax());
    nuclei.push_back({wx(eng), wy(eng)});
  }
  return NucleusIndex(std::move(nuclei), x0, y0, x1, y1);
}

namespace {

template <typename Visit>
void for_each_neighbor4(const GridGeometry& g, std::size_t p, Visit&& visit) {
  const std::size_t r = g.row_of(p), c = g.col_of(p);
  if (r > 0) visit(p - g.ncols);
  if (r + 1 < g.nrows) visit(p + g.ncols);
  if (c > 0) visit(p - 1);
  if (c + 1 < g.ncols) visit(p + 1);
}

}  // namespace

Partition poisson_voronoi_partition(const Domain& domain, double gamma, RngSeed rng, const VoronoiOptions& opts) {
  bool fallback = false;
  const NucleusIndex nuclei = draw_voronoi_nuclei(domain, gamma, rng, opts, &fallback);
  const GridGeometry& g = domain.grid();

  std::vector<std::int32_t> owner(g.size(), -1);
  for (std::size_t p : domain.interior_pixels()) {
    const Point c = g.center(p);
    owner[p] = static_cast<std::int32_t>(nuclei.nearest(c.x, c.y));
  }

  std::vector<std::int32_t> labels(g.size(), Partition::kOutside);
  std::vector<std::size_t> stack;
  std::int32_t next = 0;
  for (std::size_t p : domain.interior_pixels()) {
    if (labels[p] != Partition::kOutside) continue;
    const std::int32_t id = next++;
    const std::int32_t nucleus = owner[p];
    labels[p] = id;
    stack.push_back(p);
    while (!stack.empty()) {
      const std::size_t q = stack.back();
      stack.pop_back();
      for_each_neighbor4(g, q, [&](std::size_t nb) {
        if (owner[nb] == nucleus && labels[nb] == Partition::kOutside) {
          labels[nb] = id;
          stack.push_back(nb);
        }
      });
    }
  }
  PartitionOrigin origin{PartitionOrigin::Kind::voronoi, gamma, rng, fallback};
  return Partition(g, std::move(labels), origin);
}

std::vector<std::size_t> zero_cell_pixels(const Domain& domain, const NucleusIndex& nuclei, std::size_t seed_pixel) {
  if (!domain.interior(seed_pixel)) throw std::invalid_argument("seed pixel lies outside W");
  const GridGeometry& g = domain.grid();
  auto owner_of = [&](std::size_t p) {
    const Point c = g.center(p);
    return nuclei.nearest(c.x, c.y);
  };
  const std::size_t target = owner_of(seed_pixel);

  // 0 = unvisited, 1 = in cell, 2 = rejected
  std::vector<std::uint8_t> state(g.size(), 0);
  std::vector<std::size_t> cell{seed_pixel};
  std::vector<std::size_t> stack{seed_pixel};
  state[seed_pixel] = 1;
  while (!stack.empty()) {
    const std::size_t q = stack.back();
    stack.pop_back();
    for_each_neighbor4(g, q, [&](std::size_t nb) {
      if (state[nb] != 0) return;
      if (domain.interior(nb) && owner_of(nb) == target) {
        state[nb] = 1;
        cell.push_back(nb);
        stack.push_back(nb);
      } else {
        state[nb] = 2;
      }
    });
  }
  std::sort(cell.begin(), cell.end());
  return cell;
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist2(const Point& a, const Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    const auto& p = pts[i - 1];
    while (k >= t && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

double pixel_set_diameter(const GridGeometry& geom, std::span<const std::size_t> pixels) {
  if (pixels.size() < 2) return 0.0;
  // Only the extreme pixels of each row can be hull vertices.
  std::vector<std::pair<std::size_t, std::size_t>> extent(geom.nrows, {std::numeric_limits<std::size_t>::max(), 0});
  for (std::size_t p : pixels) {
    auto& e = extent[geom.row_of(p)];
    e.first = std::min(e.first, geom.col_of(p));
    e.second = std::max(e.second, geom.col_of(p));
  }
  std::vector<Point> candidates;
  for (std::size_t r = 0; r < geom.nrows; ++r) {
    if (extent[r].first > extent[r].second) continue;
    candidates.push_back(geom.center(geom.index(r, extent[r].first)));
    candidates.push_back(geom.center(geom.index(r, extent[r].second)));
  }
  const auto hull = convex_hull(std::move(candidates));
  if (hull.size() == 1) return 0.0;
  if (hull.size() == 2) return std::sqrt(dist2(hull[0], hull[1]));

  // Rotating calipers over antipodal pairs.
  const std::size_t h = hull.size();
  double best = 0.0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < h; ++i) {
    const Point& a = hull[i];
    const Point& b = hull[(i + 1) % h];
    while (std::abs(cross(a, b, hull[(j + 1) % h])) > std::abs(cross(a, b, hull[j]))) j = (j + 1) % h;
    best = std::max({best, dist2(a, hull[j]), dist2(b, hull[j])});
  }
  return std::sqrt(best);
}

ZeroCellStatistics zero_cell_statistics(const Domain& domain, double gamma, Point x, std::size_t reps, RngSeed rng,
                                        const VoronoiOptions& opts) {
  const auto pixel = domain.locate(x.x, x.y);
  if (!pixel) throw std::invalid_argument("zero-cell location lies outside W");
  double s_inv = 0, s_inv2 = 0, s_d = 0, s_d2 = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    const NucleusIndex nuclei = draw_voronoi_nuclei(domain, gamma, rng.child(i), opts);
    const auto cell = zero_cell_pixels(domain, nuclei, *pixel);
    const double inv = 1.0 / (static_cast<double>(cell.size()) * domain.pixel_area());
    const double d = pixel_set_diameter(domain.grid(), cell);
    s_inv += inv;
    s_inv2 += inv * inv;
    s_d += d;
    s_d2 += d * d;
  }
  ZeroCellStatistics st;
  st.reps = reps;
  if (reps == 0) return st;
  const double n = static_cast<double>(reps);
  st.mean_inverse_area = s_inv / n;
  st.mean_diam = s_d / n;
  st.mean_diam_sq = s_d2 / n;
  if (reps > 1) {
    st.se_inverse_area = std::sqrt(std::max(0.0, (s_inv2 - n * st.mean_inverse_area * st.mean_inverse_area) / (n - 1)) / n);
    st.se_diam = std::sqrt(std::max(0.0, (s_d2 - n * st.mean_diam * st.mean_diam) / (n - 1)) / n);
  }
  return st;
}

}  // namespace spforest

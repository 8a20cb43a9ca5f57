#include "spforest/model_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "spforest/io.hpp"

namespace spforest {

namespace fs = std::filesystem;

namespace {

std::string tree_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tree_%05zu.grid", i);
  return buf;
}

fs::path payload_dir(const fs::path& model) { return model.filename().string() + ".d"; }

void write_header(std::ostream& out, const char* kind, RngSeed seed) {
  out << "spforest-model " << kModelFormatVersion << '\n';
  out << "kind " << kind << '\n';
  out << "seed " << seed.seed << ' ' << seed.stream << '\n';
}

template <typename T>
void write_list(std::ostream& out, const char* key, std::span<const T> values) {
  out << key << ' ' << values.size();
  for (const T& v : values) {
    if constexpr (std::is_floating_point_v<T>)
      out << ' ' << format_real(v);
    else
      out << ' ' << v;
  }
  out << '\n';
}

void finish(std::ofstream& out, const fs::path& path) {
  out << "end\n";
  out.flush();
  if (!out) throw DataError("cannot write model file " + path.string());
}

// Token reader with line-aware error messages.
class Reader {
 public:
  explicit Reader(const fs::path& path) : in_(path), path_(path) {
    if (!in_) throw DataError("cannot open model file " + path.string());
  }

  void expect(const std::string& key) {
    const std::string got = word();
    if (got != key) fail("expected '" + key + "', found '" + got + "'");
  }

  std::string word() {
    std::string w;
    if (!(in_ >> w)) fail("unexpected end of file");
    return w;
  }

  double real() { return parse_real(word()); }

  template <typename T>
  T integer() {
    const std::string w = word();
    T v{};
    const auto* end = w.data() + w.size();
    const auto [p, ec] = std::from_chars(w.data(), end, v);
    if (ec != std::errc{} || p != end) fail("bad integer '" + w + "'");
    return v;
  }

  std::vector<double> reals(const std::string& key) {
    expect(key);
    std::vector<double> v(integer<std::size_t>());
    for (auto& x : v) x = real();
    return v;
  }

  template <typename T>
  std::vector<T> integers(const std::string& key) {
    expect(key);
    std::vector<T> v(integer<std::size_t>());
    for (auto& x : v) x = integer<T>();
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("model file " + path_.string() + ": " + what);
  }

  const fs::path& path() const { return path_; }

 private:
  std::ifstream in_;
  fs::path path_;
};

}  // namespace

void save_model(const fs::path& path, const SpatialForest& forest) {
  const fs::path rel = payload_dir(path);
  const fs::path dir = path.parent_path() / rel;
  fs::create_directories(dir);

  const Domain& domain = forest.domain();
  RasterGrid interior(domain.grid(), kNA);
  for (std::size_t p : domain.interior_pixels()) interior[p] = 1.0;
  write_raster(dir / "domain.grid", interior);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path.string());
  write_header(out, "spatial", forest.seed());
  out << "gamma " << format_real(forest.gamma()) << '\n';
  const Window& w = domain.window();
  out << "window " << format_real(w.xmin()) << ' ' << format_real(w.ymin()) << ' ' << format_real(w.xmax()) << ' '
      << format_real(w.ymax());
  if (w.has_mask()) {
    write_raster(dir / "mask.grid", *w.mask());
    out << " mask " << (rel / "mask.grid").generic_string() << '\n';
  } else {
    out << " rect\n";
  }
  out << "domain " << (rel / "domain.grid").generic_string() << '\n';
  out << "trees " << forest.size() << '\n';
  for (std::size_t i = 0; i < forest.size(); ++i) {
    const SpatialTree& t = forest.trees()[i];
    const auto& o = t.partition.origin();
    write_raster(dir / tree_file(i), t.partition.to_raster());
    out << "tree " << i << ' ' << (o.kind == PartitionOrigin::Kind::voronoi ? "voronoi" : "tree") << ' '
        << format_real(o.gamma) << ' ' << o.seed.seed << ' ' << o.seed.stream << ' ' << (o.fallback_nucleus ? 1 : 0)
        << ' ' << format_real(t.a_n) << ' ' << (rel / tree_file(i)).generic_string() << '\n';
    write_list<double>(out, "counts", t.counts);
    write_list<std::uint32_t>(out, "bootstrap", t.multiplicities);
  }
  finish(out, path);
}

void save_model(const fs::path& path, const CovariateForest& forest) {
  for (const auto& n : forest.names())
    if (n.empty() || std::any_of(n.begin(), n.end(), [](unsigned char c) { return std::isspace(c); }))
      throw DataError("covariate name '" + n + "' cannot be stored");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path.string());
  write_header(out, "covariate", forest.seed());
  const auto& o = forest.options();
  out << "options " << o.trees << ' ' << o.mtry << ' ' << o.n_min << ' ' << format_real(o.a_n) << ' ' << o.max_depth
      << ' ' << (o.median == MedianRule::pixel ? "pixel" : "points") << '\n';
  out << "names " << forest.names().size();
  for (const auto& n : forest.names()) out << ' ' << n;
  out << '\n';
  out << "trees " << forest.size() << '\n';
  for (std::size_t i = 0; i < forest.size(); ++i) {
    const CovariateTree& t = forest.trees()[i];
    out << "tree " << i << ' ' << format_real(t.a_n()) << ' ' << t.nodes().size() << '\n';
    for (const auto& n : t.nodes()) {
      out << "node " << n.covariate << ' ' << format_real(n.threshold) << ' ' << n.sub << ' ' << n.super << ' '
          << format_real(n.boot_count) << ' ' << format_real(n.raw_count) << ' ' << format_real(n.area) << ' '
          << n.depth << ' ' << format_real(n.score) << ' ' << format_real(n.gain) << '\n';
    }
    write_list<std::uint32_t>(out, "bootstrap", t.multiplicities());
  }
  finish(out, path);
}

namespace {

SpatialForest load_spatial(Reader& r, RngSeed seed) {
  const fs::path base = r.path().parent_path();
  r.expect("gamma");
  const double gamma = r.real();
  r.expect("window");
  const double x0 = r.real(), y0 = r.real(), x1 = r.real(), y1 = r.real();
  const std::string shape = r.word();
  Window window = Window::rectangle(x0, y0, x1, y1);
  if (shape == "mask")
    window = Window::masked(read_raster(base / r.word()));
  else if (shape != "rect")
    r.fail("unknown window shape '" + shape + "'");
  r.expect("domain");
  const RasterGrid interior = read_raster(base / r.word());
  std::vector<std::uint8_t> flags(interior.size());
  for (std::size_t p = 0; p < interior.size(); ++p) flags[p] = is_na(interior[p]) ? 0 : 1;
  auto domain = std::make_shared<const Domain>(window, interior.geometry(), std::move(flags));

  r.expect("trees");
  const auto m = r.integer<std::size_t>();
  std::vector<SpatialTree> trees;
  trees.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    r.expect("tree");
    if (r.integer<std::size_t>() != i) r.fail("trees out of order");
    PartitionOrigin origin;
    const std::string kind = r.word();
    if (kind == "tree")
      origin.kind = PartitionOrigin::Kind::tree;
    else if (kind != "voronoi")
      r.fail("unknown partition kind '" + kind + "'");
    origin.gamma = r.real();
    origin.seed.seed = r.integer<std::uint64_t>();
    origin.seed.stream = r.integer<std::uint64_t>();
    origin.fallback_nucleus = r.integer<int>() != 0;
    const double a_n = r.real();
    Partition part = Partition::from_raster(read_raster(base / r.word()), origin);
    auto counts = r.reals("counts");
    if (counts.size() != part.cell_count()) r.fail("cell count mismatch in tree " + std::to_string(i));
    auto mult = r.integers<std::uint32_t>("bootstrap");
    trees.push_back(SpatialTree{std::move(part), std::move(counts), a_n, std::move(mult)});
  }
  r.expect("end");
  return SpatialForest(std::move(domain), std::move(trees), gamma, seed);
}

CovariateForest load_covariate(Reader& r, RngSeed seed) {
  r.expect("options");
  CovariateForestOptions o;
  o.trees = r.integer<std::size_t>();
  o.mtry = r.integer<std::size_t>();
  o.n_min = r.integer<std::size_t>();
  o.a_n = r.real();
  o.max_depth = r.integer<std::size_t>();
  const std::string median = r.word();
  if (median == "points")
    o.median = MedianRule::points;
  else if (median != "pixel")
    r.fail("unknown median rule '" + median + "'");
  r.expect("names");
  std::vector<std::string> names(r.integer<std::size_t>());
  for (auto& n : names) n = r.word();
  r.expect("trees");
  const auto m = r.integer<std::size_t>();
  std::vector<CovariateTree> trees;
  trees.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    r.expect("tree");
    if (r.integer<std::size_t>() != i) r.fail("trees out of order");
    const double a_n = r.real();
    std::vector<CovariateNode> nodes(r.integer<std::size_t>());
    for (auto& n : nodes) {
      r.expect("node");
      n.covariate = r.integer<std::int32_t>();
      n.threshold = r.real();
      n.sub = r.integer<std::int32_t>();
      n.super = r.integer<std::int32_t>();
      n.boot_count = r.real();
      n.raw_count = r.real();
      n.area = r.real();
      n.depth = r.integer<std::uint32_t>();
      n.score = r.real();
      n.gain = r.real();
    }
    auto mult = r.integers<std::uint32_t>("bootstrap");
    try {
      trees.emplace_back(std::move(nodes), a_n, std::move(mult));
    } catch (const std::invalid_argument& e) {
      r.fail(e.what());
    }
  }
  r.expect("end");
  try {
    return CovariateForest(std::move(names), o, std::move(trees), seed);
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

}  // namespace

Model load_model(const fs::path& path) {
  Reader r(path);
  r.expect("spforest-model");
  const int version = r.integer<int>();
  if (version != kModelFormatVersion)
    r.fail("unsupported format version " + std::to_string(version) + " (expected " +
           std::to_string(kModelFormatVersion) + ")");
  r.expect("kind");
  const std::string kind = r.word();
  r.expect("seed");
  RngSeed seed;
  seed.seed = r.integer<std::uint64_t>();
  seed.stream = r.integer<std::uint64_t>();
  if (kind == "spatial") return load_spatial(r, seed);
  if (kind == "covariate") return load_covariate(r, seed);
  r.fail("unknown model kind '" + kind + "'");
}

}  // namespace spforest

#include "diffatd/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "diffatd/errors.hpp"
#include "diffatd/format.hpp"

namespace diffatd {

namespace fs = std::filesystem;

Scene::Scene(std::vector<double> grid, std::vector<double> target, std::size_t rows,
             std::size_t cols, std::size_t block, ObservationNoise noise)
    : grid_(std::move(grid)), target_(std::move(target)), layout_(rows, cols, block), noise_(noise) {
  if (grid_.size() != layout_.cell_count()) {
    throw DimensionMismatch("scene grid", layout_.cell_count(), grid_.size());
  }
  if (target_.size() != grid_.size()) throw DimensionMismatch("scene targets", grid_.size(), target_.size());
  for (double v : grid_) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidRange("scene contents must lie in [0, 1]");
  }
  for (double y : target_) {
    if (!(y >= 0.0 && y <= 1.0)) throw InvalidRange("target ratios must lie in [0, 1]");
  }
  if (!(noise_.sigma >= 0.0) || !std::isfinite(noise_.mu)) {
    throw InvalidRange("observation noise needs finite mu and sigma >= 0");
  }
}

double Scene::location_target(std::size_t location) const {
  const auto& cells = layout_.cells(location);
  double s = 0.0;
  for (std::size_t c : cells) s += target_[c];
  return s / static_cast<double>(cells.size());
}

std::size_t Scene::target_location_count() const {
  std::size_t u = 0;
  for (std::size_t q = 0; q < location_count(); ++q) {
    if (location_target(q) > 0.0) ++u;
  }
  return u;
}

double Scene::total_target() const {
  double s = 0.0;
  for (std::size_t q = 0; q < location_count(); ++q) s += location_target(q);
  return s;
}

Scene Scene::with_noise(ObservationNoise noise) const {
  return Scene(grid_, target_, rows(), cols(), layout_.block(), noise);
}

Scene Scene::with_block(std::size_t block) const {
  return Scene(grid_, target_, rows(), cols(), block, noise_);
}

Measurement measure(const Scene& scene, std::size_t location, MeasuredSet& measured,
                    RandomStream& rng, int step) {
  if (location >= scene.location_count()) throw UnknownLocation(location, scene.location_count());
  if (measured.capacity() != scene.location_count()) {
    throw DimensionMismatch("measured set", scene.location_count(), measured.capacity());
  }
  if (measured.contains(location)) throw RepeatMeasurement(location);
  Measurement m;
  m.location = location;
  m.step = step;
  const auto& cells = scene.layout().cells(location);
  m.content.reserve(cells.size());
  for (std::size_t c : cells) {
    double v = scene.grid()[c];
    if (scene.noise().enabled()) v += scene.noise().mu + scene.noise().sigma * rng.normal();
    m.content.push_back(v);
  }
  m.y = scene.location_target(location);
  measured.insert(location);
  return m;
}

Scene gen_gmm_scene(const GaussianMixturePrior& prior, std::size_t rows, std::size_t cols,
                    const TargetRule& rule, RandomStream& rng, std::size_t block,
                    ObservationNoise noise) {
  if (prior.dimension() != rows * cols) {
    throw DimensionMismatch("scene prior", rows * cols, prior.dimension());
  }
  if (!rule.component_labels.empty() && rule.component_labels.size() != prior.size()) {
    throw DimensionMismatch("target component labels", prior.size(), rule.component_labels.size());
  }
  const double u = rng.uniform();
  std::size_t k = 0;
  double acc = 0.0;
  for (; k + 1 < prior.size(); ++k) {
    acc += prior.component(k).weight;
    if (u < acc) break;
  }
  const auto& comp = prior.component(k);
  const double sd = std::sqrt(comp.variance);
  std::vector<double> grid(rows * cols);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = comp.mean[i];
    if (sd > 0.0) v += sd * rng.normal();
    grid[i] = std::clamp(v, 0.0, 1.0);
  }
  const bool labeled = rule.component_labels.empty() || rule.component_labels[k];
  std::vector<double> target(grid.size(), 0.0);
  if (labeled) {
    for (std::size_t i = 0; i < grid.size(); ++i) target[i] = grid[i] > rule.threshold ? 1.0 : 0.0;
  }
  return Scene(std::move(grid), std::move(target), rows, cols, block, noise);
}

GaussianMixturePrior make_blob_prior(const BlobPriorSpec& spec) {
  if (spec.components == 0 || spec.rows == 0 || spec.cols == 0) {
    throw InvalidArgument("blob prior needs a non-empty grid and at least one component");
  }
  RandomStream rng(spec.seed);
  // Shared low-frequency background texture.
  std::vector<double> base(spec.rows * spec.cols);
  const double phase_r = rng.uniform() * 6.28318530717958648;
  const double phase_c = rng.uniform() * 6.28318530717958648;
  for (std::size_t r = 0; r < spec.rows; ++r) {
    for (std::size_t c = 0; c < spec.cols; ++c) {
      const double wave = std::sin(0.5 * static_cast<double>(r) + phase_r) *
                          std::cos(0.4 * static_cast<double>(c) + phase_c);
      base[r * spec.cols + c] = std::clamp(spec.background + 0.05 * wave, 0.0, 1.0);
    }
  }
  std::vector<GaussianComponent> comps;
  const double w = 1.0 / static_cast<double>(spec.components);
  for (std::size_t k = 0; k < spec.components; ++k) {
    std::vector<double> mean = base;
    for (std::size_t b = 0; b < spec.blobs_per_component; ++b) {
      const double cr = rng.uniform() * static_cast<double>(spec.rows);
      const double cc = rng.uniform() * static_cast<double>(spec.cols);
      const double radius = spec.radius_min + rng.uniform() * (spec.radius_max - spec.radius_min);
      for (std::size_t r = 0; r < spec.rows; ++r) {
        for (std::size_t c = 0; c < spec.cols; ++c) {
          const double dr = static_cast<double>(r) + 0.5 - cr;
          const double dc = static_cast<double>(c) + 0.5 - cc;
          const double bump = std::exp(-(dr * dr + dc * dc) / (radius * radius));
          double& m = mean[r * spec.cols + c];
          m = std::max(m, base[r * spec.cols + c] + (spec.peak - base[r * spec.cols + c]) * bump);
        }
      }
    }
    comps.push_back({w, std::move(mean), spec.variance});
  }
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  for (auto& c : comps) c.weight /= total;
  return GaussianMixturePrior(std::move(comps));
}

namespace {

std::vector<double> parse_csv_grid(std::istream& in, std::size_t& rows, std::size_t& cols,
                                   const std::string& name) {
  std::vector<double> values;
  rows = 0;
  cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
        values.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(name + ": bad number '" + cell + "' on row " + std::to_string(rows + 1));
      }
      ++count;
    }
    if (cols == 0) cols = count;
    if (count != cols) {
      throw ParseError(name + ": row " + std::to_string(rows + 1) + " has " + std::to_string(count) +
                       " values, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(name + ": empty grid");
  return values;
}

std::string next_pgm_token(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return tok;
  }
  throw ParseError("truncated PGM header");
}

std::vector<double> parse_pgm(std::istream& in, std::size_t& rows, std::size_t& cols,
                              const std::string& name) {
  const std::string magic = next_pgm_token(in);
  if (magic != "P2" && magic != "P5") throw ParseError(name + ": not a P2/P5 PGM file");
  try {
    cols = std::stoul(next_pgm_token(in));
    rows = std::stoul(next_pgm_token(in));
    const unsigned long maxval = std::stoul(next_pgm_token(in));
    if (rows == 0 || cols == 0 || maxval == 0 || maxval > 65535) throw ParseError(name + ": bad PGM header");
    std::vector<double> values(rows * cols);
    if (magic == "P2") {
      for (double& v : values) {
        const unsigned long px = std::stoul(next_pgm_token(in));
        if (px > maxval) throw ParseError(name + ": pixel exceeds maxval");
        v = static_cast<double>(px) / static_cast<double>(maxval);
      }
    } else {
      in.get();  // single whitespace after maxval
      const bool wide = maxval > 255;
      for (double& v : values) {
        unsigned long px = 0;
        unsigned char bytes[2] = {0, 0};
        if (!in.read(reinterpret_cast<char*>(bytes), wide ? 2 : 1)) throw ParseError(name + ": truncated PGM data");
        px = wide ? (static_cast<unsigned long>(bytes[0]) << 8) | bytes[1] : bytes[0];
        if (px > maxval) throw ParseError(name + ": pixel exceeds maxval");
        v = static_cast<double>(px) / static_cast<double>(maxval);
      }
    }
    return values;
  } catch (const std::logic_error&) {
    throw ParseError(name + ": malformed PGM");
  }
}

void normalize_unit(std::vector<double>& values, const std::string& name) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo >= 0.0 && *hi <= 1.0) return;
  if (*lo < 0.0) throw ParseError(name + ": negative values cannot be normalized to [0, 1]");
  const double top = *hi;
  for (double& v : values) v /= top;
}

fs::path sidecar_path(const fs::path& path) {
  fs::path p = path;
  p.replace_extension();
  p += ".target.csv";
  return p;
}

}  // namespace

GridFormat grid_format_from_path(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm" || ext == ".PGM") return GridFormat::pgm;
  return GridFormat::csv;
}

std::vector<double> load_grid(const fs::path& path, GridFormat format, std::size_t& rows,
                              std::size_t& cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open grid file " + path.string());
  std::vector<double> values = format == GridFormat::csv ? parse_csv_grid(in, rows, cols, path.string())
                                                         : parse_pgm(in, rows, cols, path.string());
  for (double v : values) {
    if (!std::isfinite(v)) throw ParseError(path.string() + ": non-finite value");
  }
  normalize_unit(values, path.string());
  return values;
}

Scene load_scene(const fs::path& path, GridFormat format, const TargetSpec& target,
                 std::size_t block) {
  std::size_t rows = 0, cols = 0;
  auto grid = load_grid(path, format, rows, cols);
  std::vector<double> y(grid.size(), 0.0);
  switch (target.kind) {
    case TargetSpec::Kind::threshold:
      for (std::size_t i = 0; i < grid.size(); ++i) y[i] = grid[i] > target.threshold ? 1.0 : 0.0;
      break;
    case TargetSpec::Kind::value:
      y = grid;
      break;
    case TargetSpec::Kind::sidecar: {
      const fs::path side = sidecar_path(path);
      std::ifstream in(side);
      if (!in) throw InvalidArgument("cannot open target file " + side.string());
      std::size_t tr = 0, tc = 0;
      y = parse_csv_grid(in, tr, tc, side.string());
      if (tr != rows || tc != cols) throw DimensionMismatch("target grid " + side.string(), rows * cols, tr * tc);
      break;
    }
  }
  return Scene(std::move(grid), std::move(y), rows, cols, block);
}

void save_scene_csv(const Scene& scene, const fs::path& path) {
  auto write = [&](const fs::path& p, const std::vector<double>& v) {
    std::ofstream out(p);
    if (!out) throw RuntimeFailure("cannot write " + p.string());
    for (std::size_t r = 0; r < scene.rows(); ++r) {
      for (std::size_t c = 0; c < scene.cols(); ++c) {
        if (c) out << ',';
        out << fmt_real(v[r * scene.cols() + c]);
      }
      out << '\n';
    }
  };
  write(path, scene.grid());
  write(sidecar_path(path), scene.target());
}

GaussianMixturePrior load_empirical_prior(const fs::path& dir, double variance) {
  if (!fs::is_directory(dir)) throw InvalidArgument("prior corpus is not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name.size() >= 11 && name.ends_with(".target.csv")) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".csv" || ext == ".pgm") files.push_back(entry.path());
  }
  if (files.empty()) throw InvalidArgument("no grid files in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<std::vector<double>> examples;
  std::size_t rows0 = 0, cols0 = 0;
  for (const auto& f : files) {
    std::size_t rows = 0, cols = 0;
    examples.push_back(load_grid(f, grid_format_from_path(f), rows, cols));
    if (examples.size() == 1) {
      rows0 = rows;
      cols0 = cols;
    } else if (rows != rows0 || cols != cols0) {
      throw DimensionMismatch("corpus grid " + f.string(), rows0 * cols0, rows * cols);
    }
  }
  return GaussianMixturePrior::empirical(examples, variance);
}

}  // namespace diffatd

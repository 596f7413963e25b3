#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "radiant/errors.hpp"
#include "radiant/mrt.hpp"
#include "radiant/parallel.hpp"
#include "radiant/png_io.hpp"
#include "radiant/point_cloud_io.hpp"
#include "radiant/random.hpp"
#include "radiant/scene.hpp"
#include "radiant/scene_io.hpp"
#include "radiant/viewfactor.hpp"

namespace radiant {

inline constexpr double kDefaultFieldHeight = 1.1;  // m above the floor
inline constexpr double kHorizontalToleranceDeg = 10.0;

/// Cell-centered grid over the floor's axis-aligned bounding rectangle.
/// Cell (i, j) has its center at origin + ((i + 0.5) dx, (j + 0.5) dy).
struct FieldGrid {
  Vec2 origin = Vec2::Zero();
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;
  double height = kDefaultFieldHeight;
  std::string floor_id;
  std::vector<Vec3> points;     // row-major, index j * nx + i
  std::vector<std::uint8_t> masked;
  std::vector<std::string> mask_reasons;  // empty for unmasked cells

  std::size_t size() const { return points.size(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
};

/// Index of the lowest surface whose normal is within 10 degrees of vertical.
inline std::size_t find_floor(const Scene& scene) {
  const double cos_limit = std::cos(deg_to_rad(kHorizontalToleranceDeg));
  std::optional<std::size_t> best;
  double best_z = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const auto& g = scene.geometry(i);
    if (std::abs(g.frame.normal.z()) < cos_limit) continue;
    double z = 0.0;
    for (const auto& c : scene.surface(i).corners) z += c.z();
    z /= static_cast<double>(scene.surface(i).corners.size());
    if (z < best_z) {
      best_z = z;
      best = i;
    }
  }
  if (!best) throw Error(ErrorKind::MissingFloor, "scene has no horizontal surface");
  return *best;
}

inline FieldGrid make_grid(const Scene& scene, int nx, int ny, double height = kDefaultFieldHeight) {
  if (nx < 2 || ny < 2) throw Error(ErrorKind::InvalidArgument, "grid needs nx, ny >= 2");
  if (!(height > 0.0) || !std::isfinite(height)) throw Error(ErrorKind::InvalidArgument, "height must be > 0");
  const std::size_t f = find_floor(scene);
  const Surface& floor = scene.surface(f);
  const SurfaceGeometry& g = scene.geometry(f);

  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin, xmax = -xmin, ymax = -xmin;
  for (const auto& c : floor.corners) {
    xmin = std::min(xmin, c.x());
    xmax = std::max(xmax, c.x());
    ymin = std::min(ymin, c.y());
    ymax = std::max(ymax, c.y());
  }
  FieldGrid grid;
  grid.origin = {xmin, ymin};
  grid.nx = nx;
  grid.ny = ny;
  grid.dx = (xmax - xmin) / nx;
  grid.dy = (ymax - ymin) / ny;
  grid.height = height;
  grid.floor_id = floor.id;
  const Vec3 n = g.frame.normal;
  const Vec3 o = g.frame.origin;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = xmin + (i + 0.5) * grid.dx;
      const double y = ymin + (j + 0.5) * grid.dy;
      // floor plane height under (x, y)
      const double zf = o.z() - (n.x() * (x - o.x()) + n.y() * (y - o.y())) / n.z();
      const Vec3 p(x, y, zf + height);
      std::string reason;
      if (!point_in_polygon(g.frame.to_2d(Vec3(x, y, zf)), g.outline, 1e-9)) {
        reason = "outside the floor polygon";
      } else if (scene.distance_to_geometry(p) < kMinClearance) {
        reason = "within 1 cm of geometry";
      }
      grid.points.push_back(p);
      grid.masked.push_back(reason.empty() ? 0 : 1);
      grid.mask_reasons.push_back(std::move(reason));
    }
  }
  return grid;
}

struct FieldConfig {
  std::uint64_t n_rays = kDefaultRays;
  std::uint64_t seed = kDefaultSeed;
  MrtMode mode = MrtMode::Native;
  unsigned threads = 1;
  CoveragePolicy coverage;
};

struct MRTField {
  Vec2 origin = Vec2::Zero();
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;
  double height = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t n_rays = 0;
  std::vector<double> values;  // kelvins, row-major j * nx + i, NaN where masked
  std::vector<std::uint8_t> masked;
  std::vector<std::string> warnings;
  double seconds = 0.0;          // wall time of compute_field
  std::uint64_t rays_traced = 0;

  double value(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
  bool is_masked(int i, int j) const { return masked[static_cast<std::size_t>(j) * nx + i] != 0; }

  std::pair<double, double> range() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (masked[k]) continue;
      lo = std::min(lo, values[k]);
      hi = std::max(hi, values[k]);
    }
    return {lo, hi};
  }

  std::size_t unmasked() const {
    return static_cast<std::size_t>(std::count(masked.begin(), masked.end(), std::uint8_t{0}));
  }

  double rays_per_second() const { return seconds > 0.0 ? static_cast<double>(rays_traced) / seconds : 0.0; }
};

/// MRT at every unmasked cell. Cell k uses seed derive_seed(seed, k), so the
/// field does not depend on evaluation order or thread count.
inline MRTField compute_field(const Scene& scene, const FieldGrid& grid, const FieldConfig& cfg = {}) {
  if (grid.points.empty()) throw Error(ErrorKind::InvalidArgument, "grid is empty");
  if (cfg.n_rays == 0) throw Error(ErrorKind::InvalidArgument, "n_rays must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  MRTField field;
  field.origin = grid.origin;
  field.nx = grid.nx;
  field.ny = grid.ny;
  field.dx = grid.dx;
  field.dy = grid.dy;
  field.height = grid.height;
  field.seed = cfg.seed;
  field.n_rays = cfg.n_rays;
  field.values.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  field.masked = grid.masked;

  const ViewFactorEngine engine(scene);
  std::vector<std::string> errors(grid.size());
  std::vector<std::uint8_t> traced(grid.size(), 0);
  std::vector<std::vector<std::string>> notes(grid.size());
  parallel_for(grid.size(), resolve_threads(cfg.threads), [&](std::size_t k) {
    if (grid.masked[k]) return;
    MrtConfig mc;
    mc.n_rays = cfg.n_rays;
    mc.seed = derive_seed(cfg.seed, k);
    mc.mode = cfg.mode;
    mc.coverage = cfg.coverage;
    try {
      MRTResult r = mrt_at_point(grid.points[k], engine, mc);
      field.values[k] = r.mrt_k;
      notes[k] = std::move(r.warnings);
      traced[k] = 1;
    } catch (const Error& e) {
      errors[k] = e.what();
    }
  });
  // group per-cell warnings that differ only in their numbers
  std::map<std::string, std::size_t> note_counts;
  for (const auto& cell : notes) {
    for (std::string w : cell) {
      std::replace_if(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; }, '#');
      w.erase(std::unique(w.begin(), w.end(), [](char a, char b) { return a == '#' && b == '#'; }), w.end());
      ++note_counts[w];
    }
  }
  for (const auto& [w, count] : note_counts) field.warnings.push_back(std::to_string(count) + " cells: " + w);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (traced[k]) field.rays_traced += cfg.n_rays * (cfg.mode == MrtMode::Subtract ? 2 : 1);
    if (errors[k].empty()) continue;
    field.masked[k] = 1;
    field.values[k] = std::numeric_limits<double>::quiet_NaN();
    field.warnings.push_back("cell " + std::to_string(k) + " masked: " + errors[k]);
  }
  field.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return field;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::string number_text(double v) {
  if (std::isnan(v)) return "nan";
  std::string s;
  append_number(s, v);
  return s;
}

inline double parse_number(const std::string& tok, const std::string& what) {
  if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
    throw Error(ErrorKind::InvalidArgument, "bad number '" + tok + "' in " + what);
  }
  return v;
}

}  // namespace detail

/// '#' metadata lines (key=value), then ny rows of nx comma-separated kelvins,
/// row j = y index. Masked cells are written as "nan".
inline std::string field_to_csv(const MRTField& field) {
  const auto [lo, hi] = field.range();
  using detail::number_text;
  std::string out = "# radiant mrt field (kelvins, row = y index, column = x index, cell-centered)\n";
  out += "# origin_x=" + number_text(field.origin.x()) + " origin_y=" + number_text(field.origin.y()) + "\n";
  out += "# spacing_x=" + number_text(field.dx) + " spacing_y=" + number_text(field.dy) + "\n";
  out += "# height=" + number_text(field.height) + "\n";
  out += "# nx=" + std::to_string(field.nx) + " ny=" + std::to_string(field.ny) + "\n";
  out += "# seed=" + std::to_string(field.seed) + " rays=" + std::to_string(field.n_rays) + "\n";
  out += "# color_min_k=" + number_text(lo) + " color_max_k=" + number_text(hi) + "\n";
  for (int j = 0; j < field.ny; ++j) {
    for (int i = 0; i < field.nx; ++i) {
      if (i) out += ',';
      out += number_text(field.is_masked(i, j) ? std::numeric_limits<double>::quiet_NaN() : field.value(i, j));
    }
    out += '\n';
  }
  return out;
}

inline MRTField field_from_csv(const std::string& text) {
  MRTField field;
  std::map<std::string, std::string> meta;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream kv(line.substr(1));
      std::string tok;
      while (kv >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) meta[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
      continue;
    }
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const auto comma = std::min(line.find(',', pos), line.size());
      row.push_back(detail::parse_number(line.substr(pos, comma - pos), "field CSV"));
      pos = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw Error(ErrorKind::InvalidArgument, "field CSV lacks '" + key + "'");
    return it->second;
  };
  field.origin = {detail::parse_number(get("origin_x"), "origin_x"), detail::parse_number(get("origin_y"), "origin_y")};
  field.dx = detail::parse_number(get("spacing_x"), "spacing_x");
  field.dy = detail::parse_number(get("spacing_y"), "spacing_y");
  field.height = detail::parse_number(get("height"), "height");
  field.nx = std::stoi(get("nx"));
  field.ny = std::stoi(get("ny"));
  field.seed = std::stoull(get("seed"));
  field.n_rays = meta.count("rays") ? std::stoull(meta["rays"]) : 0;
  if (static_cast<int>(rows.size()) != field.ny) throw Error(ErrorKind::InvalidArgument, "field CSV row count != ny");
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != field.nx) throw Error(ErrorKind::InvalidArgument, "field CSV column count != nx");
    for (double v : r) {
      field.values.push_back(v);
      field.masked.push_back(std::isnan(v) ? 1 : 0);
    }
  }
  return field;
}

inline void write_field_csv(const std::filesystem::path& path, const MRTField& field) {
  write_text_file(path, field_to_csv(field));
}

inline MRTField read_field_csv(const std::filesystem::path& path) { return field_from_csv(detail::slurp(path)); }

// ---------------------------------------------------------------------------
// Contours and heatmap
// ---------------------------------------------------------------------------

inline constexpr double kContourInterval = 0.5;  // K

struct ContourSegment {
  double level = 0.0;
  Vec2 a, b;  // grid coordinates: cell (i, j) center is (i, j)
};

/// Marching squares over cell centers; squares touching a masked cell are skipped.
inline std::vector<ContourSegment> contour_segments(const MRTField& field, double interval = kContourInterval) {
  std::vector<ContourSegment> out;
  if (!(interval > 0.0)) throw Error(ErrorKind::InvalidArgument, "contour interval must be > 0");
  const auto [lo, hi] = field.range();
  if (!(lo < hi)) return out;
  const auto first = static_cast<long long>(std::ceil(lo / interval));
  const auto last = static_cast<long long>(std::floor(hi / interval));
  for (long long step = first; step <= last; ++step) {
    const double level = static_cast<double>(step) * interval;
    for (int j = 0; j + 1 < field.ny; ++j) {
      for (int i = 0; i + 1 < field.nx; ++i) {
        if (field.is_masked(i, j) || field.is_masked(i + 1, j) || field.is_masked(i, j + 1) ||
            field.is_masked(i + 1, j + 1)) {
          continue;
        }
        // corners counter-clockwise from (i, j)
        const std::array<Vec2, 4> pos{Vec2(i, j), Vec2(i + 1, j), Vec2(i + 1, j + 1), Vec2(i, j + 1)};
        const std::array<double, 4> val{field.value(i, j), field.value(i + 1, j), field.value(i + 1, j + 1),
                                        field.value(i, j + 1)};
        std::vector<Vec2> crossings;
        for (int e = 0; e < 4; ++e) {
          const double v0 = val[e], v1 = val[(e + 1) % 4];
          if ((v0 >= level) == (v1 >= level)) continue;
          const double t = (level - v0) / (v1 - v0);
          crossings.push_back(pos[e] + t * (pos[(e + 1) % 4] - pos[e]));
        }
        if (crossings.size() == 2) {
          out.push_back({level, crossings[0], crossings[1]});
        } else if (crossings.size() == 4) {
          // saddle: pair by the center value
          const double center = 0.25 * (val[0] + val[1] + val[2] + val[3]);
          if ((center >= level) == (val[0] >= level)) {
            out.push_back({level, crossings[0], crossings[1]});
            out.push_back({level, crossings[2], crossings[3]});
          } else {
            out.push_back({level, crossings[0], crossings[3]});
            out.push_back({level, crossings[1], crossings[2]});
          }
        }
      }
    }
  }
  return out;
}

namespace detail {

/// Piecewise-linear blue-to-red ramp.
inline std::array<std::uint8_t, 3> ramp(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{
      {49, 54, 149}, {116, 173, 209}, {255, 255, 191}, {244, 109, 67}, {165, 0, 38}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(k);
  std::array<std::uint8_t, 3> c{};
  for (int ch = 0; ch < 3; ++ch) {
    c[ch] = static_cast<std::uint8_t>(std::lround(stops[k][ch] + f * (stops[k + 1][ch] - stops[k][ch])));
  }
  return c;
}

}  // namespace detail

struct RenderedField {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;
  std::size_t contour_count = 0;
};

/// Color-mapped cells (y up), masked cells hatched grey, contours in black.
inline RenderedField render_field(const MRTField& field, int cell_px = 24, double interval = kContourInterval) {
  RenderedField img;
  img.width = field.nx * cell_px;
  img.height = field.ny * cell_px;
  img.rgb.assign(static_cast<std::size_t>(img.width) * img.height * 3, 0);
  auto put = [&](int x, int y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    const std::size_t o = (static_cast<std::size_t>(y) * img.width + x) * 3;
    img.rgb[o] = c[0];
    img.rgb[o + 1] = c[1];
    img.rgb[o + 2] = c[2];
  };
  const auto [lo, hi] = field.range();
  for (int j = 0; j < field.ny; ++j) {
    for (int i = 0; i < field.nx; ++i) {
      const bool masked = field.is_masked(i, j);
      const double t = hi > lo ? (field.value(i, j) - lo) / (hi - lo) : 0.5;
      const auto color = detail::ramp(t);
      for (int y = 0; y < cell_px; ++y) {
        for (int x = 0; x < cell_px; ++x) {
          const int px = i * cell_px + x;
          const int py = (field.ny - 1 - j) * cell_px + y;
          if (masked) {
            put(px, py, ((x + y) / 4) % 2 ? std::array<std::uint8_t, 3>{96, 96, 96} : std::array<std::uint8_t, 3>{160, 160, 160});
          } else {
            put(px, py, color);
          }
        }
      }
    }
  }
  const auto segments = contour_segments(field, interval);
  img.contour_count = segments.size();
  auto to_px = [&](const Vec2& g) {
    return Vec2((g.x() + 0.5) * cell_px, (field.ny - 0.5 - g.y()) * cell_px);
  };
  for (const auto& s : segments) {
    const Vec2 a = to_px(s.a), b = to_px(s.b);
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a).cwiseAbs().maxCoeff())));
    for (int k = 0; k <= steps; ++k) {
      const Vec2 p = a + (b - a) * (static_cast<double>(k) / steps);
      put(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())), {0, 0, 0});
    }
  }
  return img;
}

inline std::size_t write_field_png(const std::filesystem::path& path, const MRTField& field, int cell_px = 24) {
  const RenderedField img = render_field(field, cell_px);
  write_png_rgb(path, img.width, img.height, img.rgb);
  return img.contour_count;
}

}  // namespace radiant

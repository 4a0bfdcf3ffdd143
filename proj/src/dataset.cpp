#include "punchdet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "punchdet/error.hpp"
#include "punchdet/formats.hpp"
#include "punchdet/image_store.hpp"

namespace punchdet {

namespace {

std::int64_t cells_along(std::int64_t length, std::int64_t min_cell, std::int64_t gutter) {
  return (length + gutter) / (min_cell + gutter);
}

std::mt19937_64 stream_for(std::uint64_t seed, const std::string& image_id) {
  std::vector<std::uint32_t> material{static_cast<std::uint32_t>(seed),
                                      static_cast<std::uint32_t>(seed >> 32)};
  for (unsigned char c : image_id) material.push_back(c);
  std::seed_seq seq(material.begin(), material.end());
  return std::mt19937_64(seq);
}

// Largest top-left coordinate along one axis for a frame sampled in a cell.
std::int64_t last_origin(std::int64_t cell_start, std::int64_t cell_side, std::int64_t index,
                         std::int64_t count, std::int64_t gutter, std::int64_t length,
                         std::int64_t tile) {
  const std::int64_t limit = index + 1 < count ? cell_start + cell_side + gutter : length;
  return std::min(cell_start + cell_side - 1, limit - tile);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, const std::string& image_id) {
  std::mt19937_64 rng = stream_for(seed, image_id);
  rng.discard(1);
  return rng();
}

BoundingBox GridSpec::cell_box(const GridCell& c) const noexcept {
  return {static_cast<double>(c.x), static_cast<double>(c.y),
          static_cast<double>(c.x + cell_side), static_cast<double>(c.y + cell_side)};
}

std::string_view to_string(Split s) noexcept {
  return s == Split::train ? "train" : "validation";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "validation" || s == "val") return Split::validation;
  throw Error(ErrorCode::invalid_argument, "unknown split '" + std::string(s) + "'");
}

std::size_t SplitAssignment::count(Split s) const noexcept {
  return static_cast<std::size_t>(std::count(cell_split.begin(), cell_split.end(), s));
}

BoundingBox FrameSample::frame_box() const noexcept {
  const auto x = static_cast<double>(origin.x);
  const auto y = static_cast<double>(origin.y);
  return {x, y, x + static_cast<double>(tile), y + static_cast<double>(tile)};
}

GridSpec build_grid(std::int64_t width, std::int64_t height, std::int64_t min_cell,
                    std::int64_t gutter) {
  if (min_cell < 1 || gutter < 0) {
    throw Error(ErrorCode::invalid_argument, "grid needs min_cell >= 1 and gutter >= 0");
  }
  if (width < min_cell || height < min_cell) {
    std::ostringstream os;
    os << width << "x" << height << " image is smaller than one " << min_cell << " px cell";
    throw Error(ErrorCode::image_too_small, os.str());
  }
  GridSpec grid;
  grid.image_width = width;
  grid.image_height = height;
  grid.gutter = gutter;
  grid.columns = cells_along(width, min_cell, gutter);
  grid.rows = cells_along(height, min_cell, gutter);
  const std::int64_t side_x = (width - (grid.columns - 1) * gutter) / grid.columns;
  const std::int64_t side_y = (height - (grid.rows - 1) * gutter) / grid.rows;
  grid.cell_side = std::min(side_x, side_y);
  for (std::int64_t r = 0; r < grid.rows; ++r) {
    for (std::int64_t c = 0; c < grid.columns; ++c) {
      grid.cells.push_back(
          GridCell{c, r, c * (grid.cell_side + gutter), r * (grid.cell_side + gutter)});
    }
  }
  return grid;
}

SplitAssignment assign_cells(const GridSpec& grid, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio >= 0.0 && train_ratio <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "train ratio must lie in [0, 1]");
  }
  const std::size_t n = grid.cells.size();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "grid has no cells");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto validation =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - train_ratio)));
  SplitAssignment out;
  out.train_ratio = train_ratio;
  out.seed = seed;
  out.cell_split.assign(n, Split::train);
  for (std::size_t k = 0; k < std::min(validation, n); ++k) {
    out.cell_split[order[k]] = Split::validation;
  }
  return out;
}

std::vector<LocalAnnotation> clip_annotations(std::span<const Annotation> annotations,
                                              const BoundingBox& frame, double min_fraction) {
  std::vector<LocalAnnotation> out;
  for (const auto& a : annotations) {
    const auto clipped = intersection(a.box, frame);
    if (!clipped) continue;
    const double original = area(a.box);
    if (original <= 0.0) continue;
    if (area(*clipped) < min_fraction * original) continue;
    out.push_back({translate(*clipped, -frame.x_min, -frame.y_min), a.class_id});
  }
  return out;
}

std::vector<FrameSample> sample_frames(const GridSpec& grid, const SplitAssignment& assignment,
                                       std::span<const Annotation> annotations,
                                       const std::string& image_id, const SamplingConfig& cfg) {
  if (assignment.cell_split.size() != grid.cells.size()) {
    throw Error(ErrorCode::invalid_argument, "split assignment does not match grid");
  }
  if (cfg.tile < 1 || cfg.tile > grid.cell_side + grid.gutter) {
    throw Error(ErrorCode::invalid_argument, "tile must be <= cell side + gutter");
  }

  // Per cell: the origin range and the annotations any frame from it can see.
  struct CellWindow {
    std::int64_t x_lo, x_hi, y_lo, y_hi;
    std::vector<Annotation> reachable;
  };
  std::vector<CellWindow> windows;
  windows.reserve(grid.cells.size());
  for (const auto& cell : grid.cells) {
    CellWindow w{cell.x,
                 last_origin(cell.x, grid.cell_side, cell.column, grid.columns, grid.gutter,
                             grid.image_width, cfg.tile),
                 cell.y,
                 last_origin(cell.y, grid.cell_side, cell.row, grid.rows, grid.gutter,
                             grid.image_height, cfg.tile),
                 {}};
    if (w.x_hi < w.x_lo || w.y_hi < w.y_lo) {
      throw Error(ErrorCode::invalid_argument, "a tile does not fit in a grid cell");
    }
    const BoundingBox reach{static_cast<double>(w.x_lo), static_cast<double>(w.y_lo),
                            static_cast<double>(w.x_hi + cfg.tile),
                            static_cast<double>(w.y_hi + cfg.tile)};
    for (const auto& a : annotations) {
      if (a.image_id == image_id && intersection(a.box, reach)) w.reachable.push_back(a);
    }
    windows.push_back(std::move(w));
  }

  std::mt19937_64 rng = stream_for(cfg.seed, image_id);
  std::vector<FrameSample> out;
  for (Split split : {Split::train, Split::validation}) {
    const std::size_t wanted = split == Split::train ? cfg.train_frames : cfg.validation_frames;
    if (wanted == 0) continue;
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
      if (assignment.cell_split[i] == split) cells.push_back(i);
    }
    if (cells.empty()) {
      throw Error(ErrorCode::insufficient_annotated_area,
                  "no grid cell of '" + image_id + "' is assigned to " +
                      std::string(to_string(split)));
    }
    std::uniform_int_distribution<std::size_t> pick_cell(0, cells.size() - 1);
    for (std::size_t k = 0; k < wanted; ++k) {
      bool found = false;
      for (std::size_t attempt = 0; attempt < cfg.retries_per_frame && !found; ++attempt) {
        const std::size_t ci = cells[pick_cell(rng)];
        const CellWindow& w = windows[ci];
        const std::int64_t x = std::uniform_int_distribution<std::int64_t>(w.x_lo, w.x_hi)(rng);
        const std::int64_t y = std::uniform_int_distribution<std::int64_t>(w.y_lo, w.y_hi)(rng);
        FrameSample s;
        s.image_id = image_id;
        s.origin = {x, y};
        s.tile = cfg.tile;
        s.split = split;
        s.cell_index = static_cast<std::int64_t>(ci);
        s.annotations = clip_annotations(w.reachable, s.frame_box(), cfg.min_visible_fraction);
        if (s.annotations.empty()) continue;
        out.push_back(std::move(s));
        found = true;
      }
      if (!found) {
        throw Error(ErrorCode::insufficient_annotated_area,
                    "no annotated frame found in " + std::string(to_string(split)) +
                        " cells of '" + image_id + "' after " +
                        std::to_string(cfg.retries_per_frame) + " attempts");
      }
    }
  }
  return out;
}

ClassHistogram class_histogram(std::span<const FrameSample> samples) {
  ClassHistogram hist;
  for (const auto& s : samples) {
    for (const auto& a : s.annotations) ++hist[a.class_id];
  }
  return hist;
}

std::size_t nearest_rank_percentile(const ClassHistogram& hist, double percentile) {
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw Error(ErrorCode::invalid_argument, "percentile must lie in (0, 100]");
  }
  std::vector<std::size_t> counts;
  for (const auto& [cls, n] : hist) {
    if (n > 0) counts.push_back(n);
  }
  if (counts.empty()) throw Error(ErrorCode::invalid_argument, "no class is present");
  std::sort(counts.begin(), counts.end());
  auto rank = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(counts.size()) - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, counts.size());
  return counts[rank - 1];
}

RebalanceResult rebalance(std::span<const FrameSample> samples, double percentile) {
  RebalanceResult result;
  result.before = class_histogram(samples);
  result.threshold = nearest_rank_percentile(result.before, percentile);
  const std::size_t threshold = result.threshold;

  std::vector<ClassHistogram> per_frame(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (const auto& a : samples[i].annotations) ++per_frame[i][a.class_id];
  }

  // Candidate frames per class, richest in that class first.
  std::map<ClassId, std::vector<std::size_t>> candidates;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (const auto& [cls, n] : per_frame[i]) candidates[cls].push_back(i);
  }
  for (auto& [cls, frames] : candidates) {
    std::stable_sort(frames.begin(), frames.end(), [&, c = cls](std::size_t a, std::size_t b) {
      return per_frame[a].at(c) > per_frame[b].at(c);
    });
  }
  std::map<ClassId, std::size_t> cursor;

  ClassHistogram counts = result.before;
  std::vector<char> removed(samples.size(), 0);
  std::set<ClassId> exhausted;

  const auto removable = [&](std::size_t frame) {
    if (per_frame[frame].empty()) return false;
    for (const auto& [cls, n] : per_frame[frame]) {
      const std::size_t have = counts[cls];
      if (have <= threshold || have - n < threshold) return false;
    }
    return true;
  };

  while (true) {
    // Most common class still above T that may have a removable frame.
    ClassId target = 0;
    std::size_t best = threshold;
    bool any = false;
    for (const auto& [cls, n] : counts) {
      if (n > best && !exhausted.contains(cls)) {
        best = n;
        target = cls;
        any = true;
      }
    }
    if (!any) break;

    // Counts only fall, so a frame rejected once can never become removable.
    const auto& frames = candidates[target];
    std::size_t& pos = cursor[target];
    bool progressed = false;
    while (pos < frames.size()) {
      const std::size_t frame = frames[pos++];
      if (removed[frame] || !removable(frame)) continue;
      removed[frame] = 1;
      for (const auto& [cls, n] : per_frame[frame]) counts[cls] -= n;
      progressed = true;
      break;
    }
    if (!progressed) exhausted.insert(target);
  }

  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (removed[i]) {
      result.removed_indices.push_back(i);
    } else {
      result.retained.push_back(samples[i]);
    }
  }
  result.after = class_histogram(result.retained);
  for (const auto& [cls, n] : result.before) result.after.try_emplace(cls, 0);
  return result;
}

std::vector<ExportedFrame> export_split(std::span<const FrameSample> samples,
                                        const std::map<std::string, const ImageSource*>& sources,
                                        const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "train", ec);
  fs::create_directories(out_dir / "validation", ec);
  if (ec) throw Error(ErrorCode::io_failure, "cannot create " + out_dir.string());

  std::vector<ExportedFrame> exported;
  std::map<std::string, std::size_t> next_index;
  std::vector<SplitManifestRecord> manifest;
  for (const auto& s : samples) {
    const auto src = sources.find(s.image_id);
    if (src == sources.end() || src->second == nullptr) {
      throw Error(ErrorCode::io_failure, "no image source for '" + s.image_id + "'");
    }
    if (s.annotations.empty()) {
      throw Error(ErrorCode::invalid_argument, "refusing to export a frame without labels");
    }
    std::ostringstream stem;
    stem << to_string(s.split) << '/' << s.image_id << '_';
    stem.width(6);
    stem.fill('0');
    stem << next_index[s.image_id]++;

    ExportedFrame e{stem.str() + ".png", stem.str() + ".txt", &s};
    write_png(out_dir / e.frame_file,
              src->second->read_crop(s.origin.x, s.origin.y, s.tile, s.tile));
    std::ofstream labels(out_dir / e.label_file, std::ios::binary);
    labels << encode_labels(s.annotations, s.tile);
    if (!labels) throw Error(ErrorCode::io_failure, "cannot write " + e.label_file);

    manifest.push_back({e.frame_file, s.image_id, s.origin.x, s.origin.y, s.split});
    exported.push_back(e);
  }
  write_text_file(out_dir / "manifest.jsonl", encode_split_manifest(manifest));
  return exported;
}

}  // namespace punchdet

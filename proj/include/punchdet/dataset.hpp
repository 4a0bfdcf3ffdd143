#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "punchdet/detection.hpp"
#include "punchdet/geometry.hpp"

namespace punchdet {

class ImageSource;

struct GridCell {
  std::int64_t column = 0;
  std::int64_t row = 0;
  std::int64_t x = 0;  // top-left, global pixels
  std::int64_t y = 0;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Square cells of equal side separated by gutter bands, row-major.
struct GridSpec {
  std::int64_t image_width = 0;
  std::int64_t image_height = 0;
  std::int64_t cell_side = 0;
  std::int64_t gutter = 0;
  std::int64_t columns = 0;
  std::int64_t rows = 0;
  std::vector<GridCell> cells;

  BoundingBox cell_box(const GridCell& c) const noexcept;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class Split { train, validation };

std::string_view to_string(Split s) noexcept;
Split split_from_string(std::string_view s);

struct SplitAssignment {
  std::vector<Split> cell_split;  // indexed like GridSpec::cells
  double train_ratio = 0.8;
  std::uint64_t seed = 0;

  std::size_t count(Split s) const noexcept;

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

/// Annotation in frame-local coordinates.
struct LocalAnnotation {
  BoundingBox box;
  ClassId class_id = 0;

  friend bool operator==(const LocalAnnotation&, const LocalAnnotation&) = default;
};

struct FrameSample {
  std::string image_id;
  FrameOrigin origin;
  std::int64_t tile = 0;
  Split split = Split::train;
  std::int64_t cell_index = 0;
  std::vector<LocalAnnotation> annotations;

  BoundingBox frame_box() const noexcept;

  friend bool operator==(const FrameSample&, const FrameSample&) = default;
};

struct SamplingConfig {
  std::int64_t tile = 1088;
  std::size_t train_frames = 0;
  std::size_t validation_frames = 0;
  std::uint64_t seed = 0;
  double min_visible_fraction = 0.5;
  std::size_t retries_per_frame = 1000;
};

/// Independent 64-bit seed for one image, derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& image_id);

/// Maximal cell count per axis such that (length - (n-1)*gutter)/n >= min_cell.
/// Cells take the smaller of the two per-axis sides so they stay square.
/// Throws Error(image_too_small) when either side is below min_cell.
GridSpec build_grid(std::int64_t width, std::int64_t height, std::int64_t min_cell = 2160,
                    std::int64_t gutter = 1088);

/// Shuffles the cells with the seed and sends round(n * (1 - train_ratio)) of them
/// to validation.
SplitAssignment assign_cells(const GridSpec& grid, double train_ratio, std::uint64_t seed);

/// Annotations intersecting frame, clipped and shifted into frame-local space,
/// keeping those whose clipped area is at least min_fraction of the original.
std::vector<LocalAnnotation> clip_annotations(std::span<const Annotation> annotations,
                                              const BoundingBox& frame,
                                              double min_fraction = 0.5);

/// Rejection-samples frames whose top-left corner is uniform over a cell of the
/// requested split (truncated so the frame stays inside the image and never
/// reaches the next cell). Frames without a retained annotation are redrawn,
/// at most cfg.retries_per_frame times per requested frame before
/// Error(insufficient_annotated_area) is raised. The RNG stream is derived from
/// (cfg.seed, image_id), so images can be sampled concurrently.
std::vector<FrameSample> sample_frames(const GridSpec& grid, const SplitAssignment& assignment,
                                       std::span<const Annotation> annotations,
                                       const std::string& image_id, const SamplingConfig& cfg);

using ClassHistogram = std::map<ClassId, std::size_t>;

ClassHistogram class_histogram(std::span<const FrameSample> samples);

/// Nearest-rank percentile of the non-zero class counts (rank = ceil(p/100 * n)).
std::size_t nearest_rank_percentile(const ClassHistogram& hist, double percentile);

struct RebalanceResult {
  std::vector<FrameSample> retained;
  std::vector<std::size_t> removed_indices;  // positions in the input, ascending
  std::size_t threshold = 0;
  ClassHistogram before;
  ClassHistogram after;
};

/// Undersamples classes counted above the percentile threshold T by removing
/// whole frames that hold only such classes. The currently most common class is
/// drained first (its richest frames first). A frame is only removed while every
/// class in it stays >= T afterwards, so classes at or below T are never touched.
RebalanceResult rebalance(std::span<const FrameSample> samples, double percentile = 35.0);

struct ExportedFrame {
  std::string frame_file;  // relative to the export root
  std::string label_file;
  const FrameSample* sample = nullptr;
};

/// Writes <split>/<image_id>_<nnnnnn>.png crops, matching .txt label files and
/// manifest.jsonl under out_dir. sources maps image_id to an open image.
std::vector<ExportedFrame> export_split(std::span<const FrameSample> samples,
                                        const std::map<std::string, const ImageSource*>& sources,
                                        const std::filesystem::path& out_dir);

}  // namespace punchdet

#pragma once

// Wire formats shared by the CLI stages and external detector adapters.
// All record files are JSON Lines; malformed input raises
// Error(schema_violation) naming the 1-based line number.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "punchdet/dataset.hpp"
#include "punchdet/detection.hpp"
#include "punchdet/tiler.hpp"

namespace punchdet {

struct EvalReport;
struct SweepPoint;

std::string sha256_hex(std::string_view bytes);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Frame manifest: one record per frame,
// {image_id, frame_index, x, y, tile, padded, image_width, image_height, pad_x, pad_y}.
// The manifest hash is the SHA-256 of the file bytes.
struct ManifestFile {
  FramePlan plan;
  std::string hash;
};

std::string encode_manifest(const FramePlan& plan);
ManifestFile decode_manifest(std::string_view text);
ManifestFile read_manifest(const std::filesystem::path& path);
/// Returns the hash of what was written.
std::string write_manifest(const std::filesystem::path& path, const FramePlan& plan);

// Per-frame detections in frame-local coordinates. First line is the header
// {"kind":"frame-detections","manifest_hash":...,"frame_count":N}, then
// {frame_index, class_id, x_min, y_min, x_max, y_max, confidence} records.
using PerFrameDetections = std::map<std::int64_t, std::vector<Detection>>;

struct FrameDetectionsFile {
  std::string manifest_hash;
  std::int64_t frame_count = 0;
  PerFrameDetections per_frame;
};

std::string encode_frame_detections(const FrameDetectionsFile& file);
FrameDetectionsFile decode_frame_detections(std::string_view text);

// Global detections: optional header {"kind":"detections","manifest_hash":...,
// "stage":...}, then {image_id, class_id, x_min, y_min, x_max, y_max, confidence}.
struct DetectionsFile {
  std::optional<std::string> manifest_hash;
  std::string stage;
  DetectionsByImage by_image;
};

std::string encode_detections(const DetectionsFile& file);
DetectionsFile decode_detections(std::string_view text);

// Ground truth: {image_id, class_id, x_min, y_min, x_max, y_max}.
std::string encode_annotations(std::span<const Annotation> annotations);
std::vector<Annotation> decode_annotations(std::string_view text);

// Sampled frames with their frame-local annotations, the hand-off between
// split and rebalance.
std::string encode_samples(std::span<const FrameSample> samples);
std::vector<FrameSample> decode_samples(std::string_view text);

// Split manifest: {frame_file, image_id, origin_x, origin_y, split}.
struct SplitManifestRecord {
  std::string frame_file;
  std::string image_id;
  std::int64_t origin_x = 0;
  std::int64_t origin_y = 0;
  Split split = Split::train;
};

std::string encode_split_manifest(std::span<const SplitManifestRecord> records);
std::vector<SplitManifestRecord> decode_split_manifest(std::string_view text);

// Detector training labels: "class_id x_center y_center width height", each
// normalised by the tile side and printed with 6 decimals.
std::string encode_labels(std::span<const LocalAnnotation> annotations, std::int64_t tile);
std::vector<LocalAnnotation> decode_labels(std::string_view text, std::int64_t tile);

std::string encode_report(const EvalReport& report);
std::string encode_sweep(std::span<const SweepPoint> points);

}  // namespace punchdet

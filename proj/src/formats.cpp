#include "punchdet/formats.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <json.hpp>
#include <set>
#include <sstream>

#include "punchdet/error.hpp"
#include "punchdet/metrics.hpp"
#include "punchdet/tune.hpp"

namespace punchdet {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::schema_violation, "line " + std::to_string(line) + ": " + what);
}

// Calls fn(record, line_number) for every non-blank line.
void for_each_record(std::string_view text,
                     const std::function<void(const json&, std::size_t)>& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      schema_error(line_no, std::string("malformed JSON (") + e.what() + ")");
    }
    if (!record.is_object()) schema_error(line_no, "record is not a JSON object");
    fn(record, line_no);
  }
}

const json& field(const json& r, const char* key, std::size_t line) {
  const auto it = r.find(key);
  if (it == r.end()) schema_error(line, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& r, const char* key, std::size_t line) {
  const json& v = field(r, key, line);
  if (!v.is_number()) schema_error(line, std::string("field '") + key + "' is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(line, std::string("field '") + key + "' is not finite");
  return d;
}

std::int64_t integer(const json& r, const char* key, std::size_t line) {
  const json& v = field(r, key, line);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d)) return static_cast<std::int64_t>(d);
  }
  schema_error(line, std::string("field '") + key + "' is not an integer");
}

std::string text(const json& r, const char* key, std::size_t line) {
  const json& v = field(r, key, line);
  if (!v.is_string()) schema_error(line, std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

bool boolean(const json& r, const char* key, std::size_t line) {
  const json& v = field(r, key, line);
  if (!v.is_boolean()) schema_error(line, std::string("field '") + key + "' is not a boolean");
  return v.get<bool>();
}

BoundingBox box(const json& r, std::size_t line) {
  BoundingBox b{number(r, "x_min", line), number(r, "y_min", line), number(r, "x_max", line),
                number(r, "y_max", line)};
  if (!is_valid(b)) schema_error(line, "box has min > max");
  return b;
}

ClassId class_id(const json& r, std::size_t line) {
  return static_cast<ClassId>(integer(r, "class_id", line));
}

double confidence(const json& r, std::size_t line) {
  const double c = number(r, "confidence", line);
  if (c < 0.0 || c > 1.0) schema_error(line, "confidence outside [0, 1]");
  return c;
}

void put_box(ordered_json& r, const BoundingBox& b) {
  r["x_min"] = b.x_min;
  r["y_min"] = b.y_min;
  r["x_max"] = b.x_max;
  r["y_max"] = b.y_max;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::io_failure, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(size * 2);
  for (unsigned int i = 0; i < size; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::io_failure, "failed writing " + path.string());
}

std::string encode_manifest(const FramePlan& plan) {
  std::string out;
  for (const auto& f : plan.frames) {
    ordered_json r;
    r["image_id"] = plan.image_id;
    r["frame_index"] = f.index;
    r["x"] = f.origin.x;
    r["y"] = f.origin.y;
    r["tile"] = plan.tile;
    r["padded"] = f.padded;
    r["image_width"] = plan.image_width;
    r["image_height"] = plan.image_height;
    r["pad_x"] = f.pad_x;
    r["pad_y"] = f.pad_y;
    out += r.dump();
    out += '\n';
  }
  return out;
}

ManifestFile decode_manifest(std::string_view content) {
  ManifestFile file;
  FramePlan& plan = file.plan;
  std::set<std::int64_t> xs, ys;
  bool first = true;
  for_each_record(content, [&](const json& r, std::size_t line) {
    const std::string id = text(r, "image_id", line);
    const std::int64_t tile = integer(r, "tile", line);
    const std::int64_t w = integer(r, "image_width", line);
    const std::int64_t h = integer(r, "image_height", line);
    if (first) {
      plan.image_id = id;
      plan.tile = tile;
      plan.image_width = w;
      plan.image_height = h;
      first = false;
    } else if (id != plan.image_id || tile != plan.tile || w != plan.image_width ||
               h != plan.image_height) {
      schema_error(line, "manifest mixes images or tile sizes");
    }
    Frame f;
    f.index = integer(r, "frame_index", line);
    f.origin = {integer(r, "x", line), integer(r, "y", line)};
    f.padded = boolean(r, "padded", line);
    f.pad_x = r.contains("pad_x") ? integer(r, "pad_x", line) : 0;
    f.pad_y = r.contains("pad_y") ? integer(r, "pad_y", line) : 0;
    if (f.index != static_cast<std::int64_t>(plan.frames.size())) {
      schema_error(line, "frame indices must be consecutive from 0");
    }
    if (f.origin.x < 0 || f.origin.y < 0) schema_error(line, "negative frame origin");
    xs.insert(f.origin.x);
    ys.insert(f.origin.y);
    plan.frames.push_back(f);
  });
  plan.columns = static_cast<std::int64_t>(xs.size());
  plan.rows = static_cast<std::int64_t>(ys.size());
  file.hash = sha256_hex(content);
  return file;
}

ManifestFile read_manifest(const std::filesystem::path& path) {
  return decode_manifest(read_text_file(path));
}

std::string write_manifest(const std::filesystem::path& path, const FramePlan& plan) {
  const std::string content = encode_manifest(plan);
  write_text_file(path, content);
  return sha256_hex(content);
}

std::string encode_frame_detections(const FrameDetectionsFile& file) {
  ordered_json header;
  header["kind"] = "frame-detections";
  header["manifest_hash"] = file.manifest_hash;
  header["frame_count"] = file.frame_count;
  std::string out = header.dump() + "\n";
  for (const auto& [index, dets] : file.per_frame) {
    for (const auto& d : dets) {
      ordered_json r;
      r["frame_index"] = index;
      r["class_id"] = d.class_id;
      put_box(r, d.box);
      r["confidence"] = d.confidence;
      out += r.dump();
      out += '\n';
    }
  }
  return out;
}

FrameDetectionsFile decode_frame_detections(std::string_view content) {
  FrameDetectionsFile file;
  bool have_header = false;
  for_each_record(content, [&](const json& r, std::size_t line) {
    if (!have_header) {
      if (!r.contains("manifest_hash")) {
        schema_error(line, "per-frame detections must start with a manifest_hash header");
      }
      file.manifest_hash = text(r, "manifest_hash", line);
      file.frame_count = integer(r, "frame_count", line);
      have_header = true;
      return;
    }
    const std::int64_t index = integer(r, "frame_index", line);
    if (index < 0) schema_error(line, "negative frame_index");
    file.per_frame[index].push_back({box(r, line), class_id(r, line), confidence(r, line)});
  });
  if (!have_header) schema_error(1, "missing header line");
  return file;
}

std::string encode_detections(const DetectionsFile& file) {
  std::string out;
  if (file.manifest_hash) {
    ordered_json header;
    header["kind"] = "detections";
    header["manifest_hash"] = *file.manifest_hash;
    header["stage"] = file.stage;
    out += header.dump() + "\n";
  }
  for (const auto& [id, dets] : file.by_image) {
    for (const auto& d : dets) {
      ordered_json r;
      r["image_id"] = id;
      r["class_id"] = d.class_id;
      put_box(r, d.box);
      r["confidence"] = d.confidence;
      out += r.dump();
      out += '\n';
    }
  }
  return out;
}

DetectionsFile decode_detections(std::string_view content) {
  DetectionsFile file;
  bool first = true;
  for_each_record(content, [&](const json& r, std::size_t line) {
    const bool header = r.contains("manifest_hash");
    if (header) {
      if (!first) schema_error(line, "header must be the first line");
      file.manifest_hash = text(r, "manifest_hash", line);
      if (r.contains("stage")) file.stage = text(r, "stage", line);
      first = false;
      return;
    }
    first = false;
    file.by_image[text(r, "image_id", line)].push_back(
        {box(r, line), class_id(r, line), confidence(r, line)});
  });
  return file;
}

std::string encode_annotations(std::span<const Annotation> annotations) {
  std::string out;
  for (const auto& a : annotations) {
    ordered_json r;
    r["image_id"] = a.image_id;
    r["class_id"] = a.class_id;
    put_box(r, a.box);
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::vector<Annotation> decode_annotations(std::string_view content) {
  std::vector<Annotation> out;
  for_each_record(content, [&](const json& r, std::size_t line) {
    out.push_back({text(r, "image_id", line), box(r, line), class_id(r, line)});
  });
  return out;
}

std::string encode_samples(std::span<const FrameSample> samples) {
  std::string out;
  for (const auto& s : samples) {
    ordered_json r;
    r["image_id"] = s.image_id;
    r["origin_x"] = s.origin.x;
    r["origin_y"] = s.origin.y;
    r["tile"] = s.tile;
    r["split"] = std::string(to_string(s.split));
    r["cell_index"] = s.cell_index;
    ordered_json anns = ordered_json::array();
    for (const auto& a : s.annotations) {
      ordered_json j;
      j["class_id"] = a.class_id;
      put_box(j, a.box);
      anns.push_back(j);
    }
    r["annotations"] = anns;
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::vector<FrameSample> decode_samples(std::string_view content) {
  std::vector<FrameSample> out;
  for_each_record(content, [&](const json& r, std::size_t line) {
    FrameSample s;
    s.image_id = text(r, "image_id", line);
    s.origin = {integer(r, "origin_x", line), integer(r, "origin_y", line)};
    s.tile = integer(r, "tile", line);
    try {
      s.split = split_from_string(text(r, "split", line));
    } catch (const Error&) {
      schema_error(line, "unknown split");
    }
    s.cell_index = r.contains("cell_index") ? integer(r, "cell_index", line) : 0;
    const json& anns = field(r, "annotations", line);
    if (!anns.is_array()) schema_error(line, "annotations is not an array");
    for (const auto& a : anns) {
      if (!a.is_object()) schema_error(line, "annotation is not an object");
      s.annotations.push_back({box(a, line), class_id(a, line)});
    }
    out.push_back(std::move(s));
  });
  return out;
}

std::string encode_split_manifest(std::span<const SplitManifestRecord> records) {
  std::string out;
  for (const auto& m : records) {
    ordered_json r;
    r["frame_file"] = m.frame_file;
    r["image_id"] = m.image_id;
    r["origin_x"] = m.origin_x;
    r["origin_y"] = m.origin_y;
    r["split"] = std::string(to_string(m.split));
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::vector<SplitManifestRecord> decode_split_manifest(std::string_view content) {
  std::vector<SplitManifestRecord> out;
  for_each_record(content, [&](const json& r, std::size_t line) {
    SplitManifestRecord m;
    m.frame_file = text(r, "frame_file", line);
    m.image_id = text(r, "image_id", line);
    m.origin_x = integer(r, "origin_x", line);
    m.origin_y = integer(r, "origin_y", line);
    try {
      m.split = split_from_string(text(r, "split", line));
    } catch (const Error&) {
      schema_error(line, "unknown split");
    }
    out.push_back(std::move(m));
  });
  return out;
}

std::string encode_labels(std::span<const LocalAnnotation> annotations, std::int64_t tile) {
  const auto side = static_cast<double>(tile);
  std::string out;
  char line[160];
  for (const auto& a : annotations) {
    const auto& b = a.box;
    std::snprintf(line, sizeof line, "%d %.6f %.6f %.6f %.6f\n", a.class_id,
                  (b.x_min + b.x_max) / 2.0 / side, (b.y_min + b.y_max) / 2.0 / side,
                  b.width() / side, b.height() / side);
    out += line;
  }
  return out;
}

std::vector<LocalAnnotation> decode_labels(std::string_view content, std::int64_t tile) {
  const auto side = static_cast<double>(tile);
  std::vector<LocalAnnotation> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    long long cls = 0;
    double cx = 0, cy = 0, w = 0, h = 0;
    if (!(fields >> cls >> cx >> cy >> w >> h)) schema_error(line_no, "malformed label line");
    out.push_back({{(cx - w / 2.0) * side, (cy - h / 2.0) * side, (cx + w / 2.0) * side,
                    (cy + h / 2.0) * side},
                   static_cast<ClassId>(cls)});
  }
  return out;
}

std::string encode_report(const EvalReport& report) {
  const auto side_json = [](const ReportSide& side) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : side.rows) {
      ordered_json r;
      r["category"] = row.label;
      r["n"] = row.n;
      r["tp"] = row.tp;
      r["fp"] = row.fp;
      r["fn"] = row.fn;
      r["precision"] = row.scores.precision;
      r["recall"] = optional_number(row.scores.recall);
      r["f1"] = optional_number(row.scores.f1);
      if (side.map) r["ap"] = optional_number(row.ap);
      rows.push_back(r);
    }
    ordered_json out;
    out["rows"] = rows;
    if (side.map) out["map"] = *side.map;
    return out;
  };
  ordered_json doc;
  doc["iou_threshold"] = report.iou_threshold;
  doc["before_nms"] = side_json(report.before);
  doc["after_nms"] = side_json(report.after);
  ordered_json delta = ordered_json::array();
  for (const auto& d : report.delta) {
    ordered_json r;
    r["category"] = d.label;
    r["precision_pct"] = optional_number(d.precision);
    r["recall_pct"] = optional_number(d.recall);
    r["f1_pct"] = optional_number(d.f1);
    delta.push_back(r);
  }
  doc["delta"] = delta;
  return doc.dump(2) + "\n";
}

std::string encode_sweep(std::span<const SweepPoint> points) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : points) {
    ordered_json r;
    r["c_star"] = p.c_star;
    r["t"] = p.t;
    r["objective"] = p.objective;
    arr.push_back(r);
  }
  return arr.dump(2) + "\n";
}

}  // namespace punchdet

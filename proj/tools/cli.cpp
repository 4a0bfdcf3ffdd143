#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "punchdet/backends.hpp"
#include "punchdet/dataset.hpp"
#include "punchdet/error.hpp"
#include "punchdet/formats.hpp"
#include "punchdet/image_store.hpp"
#include "punchdet/metrics.hpp"
#include "punchdet/nms.hpp"
#include "punchdet/overlay.hpp"
#include "punchdet/pipeline.hpp"
#include "punchdet/tiler.hpp"
#include "punchdet/tune.hpp"

namespace punchdet::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  TilingConfig tiling;
  NmsConfig nms{0.7, 0.75};
  MatchConfig match;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string format = "text";

  // plan / extract / overlay / detect
  std::string image;
  std::string image_id;
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::string manifest;
  std::string out;
  std::string out_before;
  std::string out_dir;

  // split / rebalance
  std::vector<std::string> images;
  std::string annotations;
  std::int64_t gutter = 1088;
  std::int64_t min_cell = 2160;
  double ratio = 0.8;
  std::size_t train_frames = 100;
  std::size_t val_frames = 25;
  double min_visible = 0.5;
  std::size_t retries = 1000;
  std::string samples;
  double percentile = 35.0;
  std::string only_split;
  std::string export_dir;

  // detect
  std::string backend = "oracle";
  std::string input;
  SyntheticScenario scenario;

  // merge / nms / eval / tune / overlay
  std::string detections;
  std::string before;
  std::string after;
  std::string gt;
  bool with_map = false;
  double map_max = 0.95;
  std::string json_out;
  SweepSpec sweep;
};

void require_parent_dir(const std::string& path) {
  const fs::path parent = fs::absolute(fs::path(path)).parent_path();
  if (!fs::is_directory(parent)) {
    throw Error(ErrorCode::io_failure, "output directory does not exist: " + parent.string());
  }
}

void check_hashes_agree(const std::optional<std::string>& a, const std::optional<std::string>& b,
                        const std::string& what) {
  if (a && b && *a != *b) {
    throw Error(ErrorCode::manifest_mismatch, what + " were produced against different manifests");
  }
}

void add_tiling(CLI::App* app, RunConfig& cfg) {
  app->add_option("--tile", cfg.tiling.tile, "Window side in pixels")->capture_default_str();
  app->add_option("--overlap", cfg.tiling.overlap, "Window overlap in pixels")
      ->capture_default_str();
}

void add_nms(CLI::App* app, RunConfig& cfg) {
  app->add_option("--conf", cfg.nms.confidence_threshold, "Confidence threshold c*")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--iom", cfg.nms.iom_threshold, "IoM grouping threshold t")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

void add_iou(CLI::App* app, RunConfig& cfg) {
  app->add_option("--iou", cfg.match.iou_threshold, "IoU matching threshold tau")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
}

void add_jobs(CLI::App* app, RunConfig& cfg) {
  app->add_option("--jobs", cfg.jobs, "Parallelism budget")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

// ---------------------------------------------------------------------------

int cmd_plan(const RunConfig& cfg, std::ostream& out) {
  require_parent_dir(cfg.out);
  FramePlan plan;
  if (!cfg.image.empty()) {
    const auto src = open_image(cfg.image, cfg.image_id);
    plan = plan_frames(src->width(), src->height(), cfg.tiling, src->image_id());
  } else {
    if (cfg.width < 1 || cfg.height < 1 || cfg.image_id.empty()) {
      throw Error(ErrorCode::invalid_argument,
                  "plan needs --image, or --width, --height and --image-id");
    }
    plan = plan_frames(cfg.width, cfg.height, cfg.tiling, cfg.image_id);
  }
  const std::string hash = write_manifest(cfg.out, plan);
  out << "plan: " << plan.size() << " frames (" << plan.columns << " x " << plan.rows
      << ") for '" << plan.image_id << "' " << plan.image_width << "x" << plan.image_height
      << ", manifest " << hash.substr(0, 12) << "\n";
  return 0;
}

int cmd_extract(const RunConfig& cfg, std::ostream& out) {
  const ManifestFile manifest = read_manifest(cfg.manifest);
  const auto src = open_image(cfg.image, manifest.plan.image_id);
  if (src->width() != manifest.plan.image_width || src->height() != manifest.plan.image_height) {
    throw Error(ErrorCode::manifest_mismatch, "image size differs from the manifest");
  }
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorCode::io_failure, "cannot create " + cfg.out_dir);
  for (const auto& f : manifest.plan.frames) {
    char name[64];
    std::snprintf(name, sizeof name, "frame_%06lld.png", static_cast<long long>(f.index));
    write_png(fs::path(cfg.out_dir) / name, read_frame_pixels(*src, manifest.plan, f));
  }
  out << "extract: wrote " << manifest.plan.size() << " frames to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_split(const RunConfig& cfg, std::ostream& out) {
  require_parent_dir(cfg.out);
  const std::vector<Annotation> annotations = decode_annotations(read_text_file(cfg.annotations));

  std::vector<std::unique_ptr<ImageSource>> sources;
  for (const auto& path : cfg.images) sources.push_back(open_image(path));

  std::vector<std::vector<FrameSample>> per_image(sources.size());
  std::vector<std::exception_ptr> errors(sources.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < sources.size(); i = next++) {
      try {
        const ImageSource& src = *sources[i];
        const GridSpec grid = build_grid(src.width(), src.height(), cfg.min_cell, cfg.gutter);
        const SplitAssignment assignment =
            assign_cells(grid, cfg.ratio, derive_seed(cfg.seed, src.image_id()));
        SamplingConfig sampling;
        sampling.tile = cfg.tiling.tile;
        sampling.train_frames = cfg.train_frames;
        sampling.validation_frames = cfg.val_frames;
        sampling.seed = cfg.seed;
        sampling.min_visible_fraction = cfg.min_visible;
        sampling.retries_per_frame = cfg.retries;
        per_image[i] = sample_frames(grid, assignment, annotations, src.image_id(), sampling);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int jobs = std::clamp(cfg.jobs, 1, std::max(1, static_cast<int>(sources.size())));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<FrameSample> samples;
  for (auto& s : per_image) samples.insert(samples.end(), s.begin(), s.end());
  write_text_file(cfg.out, encode_samples(samples));
  if (!cfg.export_dir.empty()) {
    std::map<std::string, const ImageSource*> by_id;
    for (const auto& s : sources) by_id[s->image_id()] = s.get();
    export_split(samples, by_id, cfg.export_dir);
  }
  std::size_t train = 0;
  for (const auto& s : samples) train += s.split == Split::train;
  out << "split: " << samples.size() << " frames from " << sources.size() << " image(s), "
      << train << " train / " << samples.size() - train << " validation\n";
  return 0;
}

int cmd_rebalance(const RunConfig& cfg, std::ostream& out) {
  require_parent_dir(cfg.out);
  std::vector<FrameSample> all = decode_samples(read_text_file(cfg.samples));
  std::vector<FrameSample> selected, untouched;
  for (auto& s : all) {
    if (cfg.only_split.empty() || split_from_string(cfg.only_split) == s.split) {
      selected.push_back(std::move(s));
    } else {
      untouched.push_back(std::move(s));
    }
  }
  if (selected.empty()) throw Error(ErrorCode::invalid_argument, "no samples to rebalance");
  RebalanceResult result = rebalance(selected, cfg.percentile);
  std::vector<FrameSample> retained = std::move(result.retained);
  retained.insert(retained.end(), untouched.begin(), untouched.end());
  write_text_file(cfg.out, encode_samples(retained));

  if (!cfg.export_dir.empty()) {
    std::vector<std::unique_ptr<ImageSource>> sources;
    std::map<std::string, const ImageSource*> by_id;
    for (const auto& path : cfg.images) {
      sources.push_back(open_image(path));
      by_id[sources.back()->image_id()] = sources.back().get();
    }
    export_split(retained, by_id, cfg.export_dir);
  }
  out << "rebalance: threshold " << result.threshold << ", removed "
      << result.removed_indices.size() << " of " << selected.size() << " frames; counts";
  for (const auto& [cls, n] : result.before) {
    out << " " << cls << ":" << n << "->" << result.after.at(cls);
  }
  out << "\n";
  return 0;
}

int cmd_detect(const RunConfig& cfg, std::ostream& out) {
  require_parent_dir(cfg.out);
  const ManifestFile manifest = read_manifest(cfg.manifest);
  std::unique_ptr<ImageSource> src;
  if (!cfg.image.empty()) src = open_image(cfg.image, manifest.plan.image_id);

  std::unique_ptr<DetectorBackend> backend;
  if (cfg.backend == "oracle") {
    if (cfg.input.empty()) throw Error(ErrorCode::invalid_argument, "oracle backend needs --input");
    backend = std::make_unique<OracleBackend>(decode_frame_detections(read_text_file(cfg.input)),
                                              manifest.plan, manifest.hash);
  } else if (cfg.backend == "synthetic") {
    if (cfg.annotations.empty()) {
      throw Error(ErrorCode::invalid_argument, "synthetic backend needs --annotations");
    }
    SyntheticScenario scenario = cfg.scenario;
    scenario.seed = cfg.seed;
    scenario.ground_truth = decode_annotations(read_text_file(cfg.annotations));
    backend = std::make_unique<SyntheticBackend>(std::move(scenario));
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown backend '" + cfg.backend + "'");
  }

  RunOptions options;
  options.jobs = cfg.jobs;
  FrameDetectionsFile file;
  file.manifest_hash = manifest.hash;
  file.frame_count = static_cast<std::int64_t>(manifest.plan.size());
  file.per_frame = run_backend(src.get(), manifest.plan, *backend, options);
  write_text_file(cfg.out, encode_frame_detections(file));

  std::size_t total = 0;
  for (const auto& [index, dets] : file.per_frame) total += dets.size();
  out << "detect: " << backend->name() << " backend produced " << total << " detections over "
      << file.frame_count << " frames\n";
  return 0;
}

int cmd_merge(const RunConfig& cfg, std::ostream& out) {
  require_parent_dir(cfg.out);
  if (!cfg.out_before.empty()) require_parent_dir(cfg.out_before);
  const ManifestFile manifest = read_manifest(cfg.manifest);
  const FrameDetectionsFile recorded = decode_frame_detections(read_text_file(cfg.detections));
  // Validates hash and frame set exactly as replay would.
  const OracleBackend check(recorded, manifest.plan, manifest.hash);

  const MergedResult merged = merge_and_suppress(recorded.per_frame, manifest.plan, cfg.nms);
  DetectionsFile after{manifest.hash, "after-nms", {{merged.image_id, merged.after_nms}}};
  write_text_file(cfg.out, encode_detections(after));
  if (!cfg.out_before.empty()) {
    DetectionsFile before{manifest.hash, "before-nms", {{merged.image_id, merged.before_nms}}};
    write_text_file(cfg.out_before, encode_detections(before));
  }
  out << "merge: " << merged.before_nms.size() << " candidates -> " << merged.after_nms.size()
      << " after NMS (c*=" << cfg.nms.confidence_threshold << ", t=" << cfg.nms.iom_threshold
      << ")\n";
  return 0;
}

int cmd_nms(const RunConfig& cfg, std::ostream& out) {
  require_parent_dir(cfg.out);
  const DetectionsFile in = decode_detections(read_text_file(cfg.detections));
  DetectionsFile result{in.manifest_hash, "after-nms", {}};
  std::size_t before = 0, after = 0;
  for (const auto& [id, dets] : in.by_image) {
    result.by_image[id] = custom_nms(dets, cfg.nms);
    before += dets.size();
    after += result.by_image[id].size();
  }
  write_text_file(cfg.out, encode_detections(result));
  out << "nms: " << before << " -> " << after << " detections\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.json_out.empty()) require_parent_dir(cfg.json_out);
  if (cfg.format != "text" && cfg.format != "json") {
    throw Error(ErrorCode::invalid_argument, "--format must be text or json");
  }
  const std::vector<Annotation> gts = decode_annotations(read_text_file(cfg.gt));
  const DetectionsFile after = decode_detections(read_text_file(cfg.after));
  const DetectionsFile before =
      cfg.before.empty() ? after : decode_detections(read_text_file(cfg.before));
  check_hashes_agree(before.manifest_hash, after.manifest_hash, "before/after detections");

  ReportOptions options;
  options.with_map = cfg.with_map;
  options.map_thresholds = iou_threshold_range(0.5, cfg.map_max);
  const EvalReport report = build_report(before.by_image, after.by_image, gts, cfg.match, options);
  const std::string json = encode_report(report);
  if (!cfg.json_out.empty()) write_text_file(cfg.json_out, json);
  out << (cfg.format == "json" ? json : render_report(report));

  const ReportRow& all = report.after.rows.back();
  std::ostringstream line;
  line.precision(4);
  line << std::fixed << "eval: ALL after NMS n=" << all.n << " P=" << all.scores.precision;
  line << " R=";
  if (all.scores.recall) line << *all.scores.recall; else line << "--";
  line << " F1=";
  if (all.scores.f1) line << *all.scores.f1; else line << "--";
  out << line.str() << "\n";
  return 0;
}

int cmd_tune(const RunConfig& cfg, std::ostream& out) {
  require_parent_dir(cfg.out);
  const std::vector<Annotation> gts = decode_annotations(read_text_file(cfg.gt));
  const DetectionsFile before = decode_detections(read_text_file(cfg.detections));
  if (before.by_image.empty() || gts.empty()) {
    throw Error(ErrorCode::invalid_argument, "tune needs non-empty detections and ground truth");
  }
  SweepSpec spec = cfg.sweep;
  spec.match = cfg.match;
  spec.map_iou_max = cfg.map_max;
  const auto points = sweep(before.by_image, gts, spec, cfg.jobs);
  write_text_file(cfg.out, encode_sweep(points));
  out << "tune: " << points.size() << " grid points, best c*=" << points.front().c_star
      << " t=" << points.front().t << " " << to_string(spec.objective) << "="
      << points.front().objective << "\n";
  return 0;
}

int cmd_overlay(const RunConfig& cfg, std::ostream& out) {
  require_parent_dir(cfg.out);
  const auto src = open_image(cfg.image, cfg.image_id);
  const DetectionsFile dets = decode_detections(read_text_file(cfg.detections));
  std::vector<Detection> chosen;
  if (const auto it = dets.by_image.find(src->image_id()); it != dets.by_image.end()) {
    chosen = it->second;
  } else if (dets.by_image.size() == 1) {
    chosen = dets.by_image.begin()->second;
  } else if (!dets.by_image.empty()) {
    throw Error(ErrorCode::invalid_argument,
                "detections hold no image '" + src->image_id() + "' (use --image-id)");
  }
  PixelBuffer pixels = src->read_crop(0, 0, src->width(), src->height());
  draw_detections(pixels, chosen);
  write_png(cfg.out, pixels);
  out << "overlay: drew " << chosen.size() << " detections on '" << src->image_id() << "'\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Tiled large-image detection toolkit: window planning, IoM NMS, evaluation"};
  app.set_config("--config", "", "TOML/INI file with option defaults (flags take precedence)");
  app.require_subcommand(1);

  std::function<int(const RunConfig&, std::ostream&)> handler;
  const auto bind = [&](CLI::App* sub, int (*fn)(const RunConfig&, std::ostream&)) {
    sub->callback([&handler, fn] { handler = fn; });
  };

  auto* plan = app.add_subcommand("plan", "Plan sliding windows and write the frame manifest");
  plan->add_option("--image", cfg.image, "Image to tile (PNG or TIFF)")->check(CLI::ExistingFile);
  plan->add_option("--image-id", cfg.image_id, "Image id (defaults to the file stem)");
  plan->add_option("--width", cfg.width, "Image width when no --image is given");
  plan->add_option("--height", cfg.height, "Image height when no --image is given");
  plan->add_option("--out", cfg.out, "Manifest output (JSONL)")->required();
  add_tiling(plan, cfg);
  bind(plan, cmd_plan);

  auto* extract = app.add_subcommand("extract", "Write every planned frame as a PNG");
  extract->add_option("--image", cfg.image)->required()->check(CLI::ExistingFile);
  extract->add_option("--manifest", cfg.manifest)->required()->check(CLI::ExistingFile);
  extract->add_option("--out-dir", cfg.out_dir)->required();
  bind(extract, cmd_extract);

  auto* split = app.add_subcommand("split", "Grid split with gutters and annotated frame sampling");
  split->add_option("--image", cfg.images, "Annotated image (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  split->add_option("--annotations", cfg.annotations, "Global annotations (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  split->add_option("--gutter", cfg.gutter)->capture_default_str();
  split->add_option("--min-cell", cfg.min_cell)->capture_default_str();
  split->add_option("--ratio", cfg.ratio, "Train share of cells")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  split->add_option("--seed", cfg.seed)->capture_default_str();
  split->add_option("--train-frames", cfg.train_frames, "Train frames per image")
      ->capture_default_str();
  split->add_option("--val-frames", cfg.val_frames, "Validation frames per image")
      ->capture_default_str();
  split->add_option("--min-visible", cfg.min_visible, "Retained fraction of a clipped box")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  split->add_option("--retries", cfg.retries, "Sampling attempts per frame")
      ->capture_default_str();
  split->add_option("--out", cfg.out, "Sampled frames (JSONL)")->required();
  split->add_option("--export-dir", cfg.export_dir, "Also write crops, labels and manifest");
  split->add_option("--tile", cfg.tiling.tile)->capture_default_str();
  add_jobs(split, cfg);
  bind(split, cmd_split);

  auto* reb = app.add_subcommand("rebalance", "Undersample over-represented classes");
  reb->add_option("--samples", cfg.samples)->required()->check(CLI::ExistingFile);
  reb->add_option("--percentile", cfg.percentile)
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  reb->add_option("--split", cfg.only_split, "Only rebalance this split (train|validation)");
  reb->add_option("--out", cfg.out)->required();
  reb->add_option("--image", cfg.images, "Source images, needed with --export-dir")
      ->check(CLI::ExistingFile);
  reb->add_option("--export-dir", cfg.export_dir);
  bind(reb, cmd_rebalance);

  auto* detect = app.add_subcommand("detect", "Run a detector backend over every planned frame");
  detect->add_option("--backend", cfg.backend)
      ->check(CLI::IsMember({"oracle", "synthetic"}))
      ->capture_default_str();
  detect->add_option("--manifest", cfg.manifest)->required()->check(CLI::ExistingFile);
  detect->add_option("--image", cfg.image, "Source image for pixel-based backends")
      ->check(CLI::ExistingFile);
  detect->add_option("--input", cfg.input, "Recorded per-frame detections (oracle)")
      ->check(CLI::ExistingFile);
  detect->add_option("--annotations", cfg.annotations, "Ground truth (synthetic)")
      ->check(CLI::ExistingFile);
  detect->add_option("--seed", cfg.seed)->capture_default_str();
  detect->add_option("--fn-rate", cfg.scenario.fn_rate)->capture_default_str();
  detect->add_option("--fp-rate", cfg.scenario.fp_rate)->capture_default_str();
  detect->add_option("--jitter", cfg.scenario.jitter)->capture_default_str();
  detect->add_option("--tp-conf-mean", cfg.scenario.tp_confidence_mean)->capture_default_str();
  detect->add_option("--tp-conf-sd", cfg.scenario.tp_confidence_sd)->capture_default_str();
  detect->add_option("--fp-conf-mean", cfg.scenario.fp_confidence_mean)->capture_default_str();
  detect->add_option("--fp-conf-sd", cfg.scenario.fp_confidence_sd)->capture_default_str();
  detect->add_option("--out", cfg.out, "Per-frame detections (JSONL)")->required();
  add_jobs(detect, cfg);
  bind(detect, cmd_detect);

  auto* merge = app.add_subcommand("merge", "Merge per-frame detections and apply custom NMS");
  merge->add_option("--manifest", cfg.manifest)->required()->check(CLI::ExistingFile);
  merge->add_option("--detections", cfg.detections, "Per-frame detections (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  merge->add_option("--out", cfg.out, "After-NMS detections (JSONL)")->required();
  merge->add_option("--out-before", cfg.out_before, "Before-NMS detections (JSONL)");
  add_nms(merge, cfg);
  bind(merge, cmd_merge);

  auto* nms = app.add_subcommand("nms", "Apply custom NMS to global detections");
  nms->add_option("--detections", cfg.detections)->required()->check(CLI::ExistingFile);
  nms->add_option("--out", cfg.out)->required();
  add_nms(nms, cfg);
  bind(nms, cmd_nms);

  auto* eval = app.add_subcommand("eval", "Precision/recall/F1 report before and after NMS");
  eval->add_option("--gt", cfg.gt, "Ground truth (JSONL)")->required()->check(CLI::ExistingFile);
  eval->add_option("--after", cfg.after, "After-NMS detections")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--before", cfg.before, "Before-NMS detections (defaults to --after)")
      ->check(CLI::ExistingFile);
  eval->add_flag("--map", cfg.with_map, "Also compute mAP");
  eval->add_option("--map-max", cfg.map_max, "Upper IoU of the mAP range")
      ->check(CLI::Range(0.5, 1.0))
      ->capture_default_str();
  eval->add_option("--json", cfg.json_out, "Write the JSON report here");
  eval->add_option("--format", cfg.format, "Standard output format: text|json")
      ->capture_default_str();
  add_iou(eval, cfg);
  bind(eval, cmd_eval);

  auto* tune = app.add_subcommand("tune", "Grid search over (c*, t)");
  tune->add_option("--detections", cfg.detections, "Before-NMS detections")
      ->required()
      ->check(CLI::ExistingFile);
  tune->add_option("--gt", cfg.gt)->required()->check(CLI::ExistingFile);
  tune->add_option("--c-min", cfg.sweep.c_star_min)->capture_default_str();
  tune->add_option("--c-max", cfg.sweep.c_star_max)->capture_default_str();
  tune->add_option("--t-min", cfg.sweep.t_min)->capture_default_str();
  tune->add_option("--t-max", cfg.sweep.t_max)->capture_default_str();
  tune->add_option("--step", cfg.sweep.step)->capture_default_str();
  std::string objective = "map";
  tune->add_option("--objective", objective, "map|map50|f1|precision|recall")
      ->check(CLI::IsMember({"map", "map50", "f1", "precision", "recall"}))
      ->capture_default_str();
  tune->add_option("--map-max", cfg.map_max)->check(CLI::Range(0.5, 1.0))->capture_default_str();
  tune->add_option("--out", cfg.out, "Sweep results (JSON)")->required();
  add_iou(tune, cfg);
  add_jobs(tune, cfg);
  bind(tune, cmd_tune);

  auto* overlay = app.add_subcommand("overlay", "Draw detections onto an image");
  overlay->add_option("--image", cfg.image)->required()->check(CLI::ExistingFile);
  overlay->add_option("--image-id", cfg.image_id);
  overlay->add_option("--detections", cfg.detections)->required()->check(CLI::ExistingFile);
  overlay->add_option("--out", cfg.out, "Output PNG")->required();
  bind(overlay, cmd_overlay);

  std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    cfg.sweep.objective = objective_from_string(objective);
    cfg.tiling.validate();
    cfg.nms.validate();
    return handler(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace punchdet::cli

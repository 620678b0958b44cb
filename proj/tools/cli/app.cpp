#include "app.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "bench.hpp"
#include "prnufm/error.hpp"
#include "prnufm/fingerprint.hpp"
#include "prnufm/image_io.hpp"
#include "prnufm/noise.hpp"
#include "prnufm/parallel.hpp"
#include "prnufm/search.hpp"
#include "report.hpp"

namespace prnufm::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<double> delta_rho{800.0};
  double threshold = 60.0;
  std::string json_path;
  std::string csv_path;

  std::vector<double> scale_range{0.9, 1.1};
  std::vector<double> angle_range{-3.0, 3.0};
  std::vector<double> shift_range{-90.0, 90.0};
  int fft_size = 0;
  GaConfig ga;

  SearchRanges ranges() const {
    SearchRanges r;
    r.scale = {scale_range[0], scale_range[1]};
    r.angle = {angle_range[0], angle_range[1]};
    r.shift = {shift_range[0], shift_range[1]};
    r.validate();
    return r;
  }
};

struct FingerprintArgs {
  std::vector<std::string> flats;
  std::string output;
  std::string device_id;
  std::vector<double> prewarp;  // scale angle cx cy
  std::vector<int> crop;        // width height
};

struct ExtractArgs {
  std::string frame;
  std::string output;
  std::string preview;
};

struct AlignArgs {
  std::string fingerprint;
  std::string frame;
  std::vector<double> known_shift;
};

struct MatchArgs {
  std::string fingerprint;
  std::vector<std::string> frames;
};

struct BenchArgs {
  int trials = 10;
  int size = 512;
  std::string mode = "sr";
  std::vector<double> noise{1.5};
  double prnu_strength = 0.02;
  bool impostor = false;
};

// Writes lines to `out` and, when a path is set, to that file as well.
class LineSink {
 public:
  LineSink(std::ostream& out, const std::string& path) : out_(out) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error(ErrorCode::kIo, path + ": cannot open for writing");
    }
  }
  void write(const std::string& line) {
    out_ << line << '\n';
    if (file_.is_open()) file_ << line << '\n';
  }

 private:
  std::ostream& out_;
  std::ofstream file_;
};

GrayImage load_fingerprint(const std::string& path, std::string& device_id) {
  StoredRaster r = load_raster(path);
  if (r.meta.device_id) device_id = *r.meta.device_id;
  return std::move(r.image);
}

GrayImage load_frame(const std::string& path) {
  const fs::path p(path);
  const auto ext = p.extension().string();
  if (ext == ".f32" || ext == ".raw") return load_raster(p).image;
  return read_image(p);
}

AttributionReport base_report(const Options& o, const std::string& frame_id, const std::string& device_id) {
  AttributionReport r;
  r.frame_id = frame_id;
  r.device_id = device_id;
  r.threshold = o.threshold;
  r.delta_rho = o.delta_rho.front();
  r.seed = o.ga.rng_seed;
  return r;
}

AttributionReport align_frame(const Options& o, const std::shared_ptr<const ReferenceTransform>& ref,
                              const GrayImage& frame, const std::string& frame_id,
                              const std::string& device_id, const std::optional<std::pair<double, double>>& known,
                              const GaConfig& ga) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const NoiseResidual w = extract(frame);
  const FitnessContext ctx(w.raster, ref);
  const double transform = std::chrono::duration<double>(Clock::now() - t0).count();
  const AlignmentResult a =
      known ? align_known_shift(ctx, known->first, known->second, ga, &frame) : align(ctx, ga, &frame);

  AttributionReport r = base_report(o, frame_id, device_id);
  r.params = a.params;
  r.pce = a.pce.pce;
  r.matched = r.pce >= o.threshold;
  r.delta_rho_rows = ref->delta_rho();
  r.evaluations = a.evaluations;
  r.timings = {transform, a.search_seconds, std::chrono::duration<double>(Clock::now() - t0).count()};
  return r;
}

std::shared_ptr<const ReferenceTransform> reference_for(const Options& o, const GrayImage& fingerprint) {
  MellinConfig m;
  m.fft_size = o.fft_size;
  m.nominal_delta_rho = o.delta_rho.front();
  return std::make_shared<const ReferenceTransform>(fingerprint, o.ranges(), m);
}

int cmd_fingerprint(const Options& o, const FingerprintArgs& a, std::ostream& out) {
  std::vector<GrayImage> flats;
  flats.reserve(a.flats.size());
  for (const auto& path : a.flats) {
    flats.push_back(read_image(path));
    if (!flats.back().same_shape(flats.front())) {
      throw Error(ErrorCode::kDimensionMismatch,
                  path + ": " + std::to_string(flats.back().width()) + "x" + std::to_string(flats.back().height()) +
                      " differs from " + a.flats.front() + " (" + std::to_string(flats.front().width()) + "x" +
                      std::to_string(flats.front().height()) + ")");
    }
  }
  FingerprintOptions fo;
  fo.threads = o.threads;
  Fingerprint fp = estimate(flats, fo, a.device_id);
  GrayImage k = std::move(fp.raster);
  if (!a.prewarp.empty() || !a.crop.empty()) {
    SimilarityParams p;
    if (!a.prewarp.empty()) p = {a.prewarp[0], a.prewarp[1], a.prewarp[2], a.prewarp[3]};
    const int w = a.crop.empty() ? k.width() : a.crop[0];
    const int h = a.crop.empty() ? k.height() : a.crop[1];
    if (w < 1 || h < 1) throw Error(ErrorCode::kInvalidArgument, "crop size must be positive");
    k = warp(k, p.normalized(), w, h);
  }
  RasterMeta meta{"fingerprint", a.device_id.empty() ? std::nullopt : std::optional(a.device_id),
                  fp.n_images};
  save_raster(a.output, k, meta);
  out << "wrote " << a.output << " (" << k.width() << "x" << k.height() << ", " << fp.n_images
      << " images)\n";
  return kExitMatched;
}

int cmd_extract(const ExtractArgs& a, std::ostream& out) {
  const GrayImage frame = load_frame(a.frame);
  const NoiseResidual w = extract(frame);
  save_raster(a.output, w.raster, RasterMeta{"residual", std::nullopt, std::nullopt});
  if (!a.preview.empty()) write_png_preview(a.preview, w.raster);
  out << "wrote " << a.output << " (" << w.raster.width() << "x" << w.raster.height() << ")\n";
  return kExitMatched;
}

int cmd_align(const Options& o, const AlignArgs& a, std::ostream& out) {
  std::string device;
  const GrayImage k = load_fingerprint(a.fingerprint, device);
  const GrayImage frame = load_frame(a.frame);
  std::optional<std::pair<double, double>> known;
  if (!a.known_shift.empty()) known = std::pair{a.known_shift[0], a.known_shift[1]};
  GaConfig ga = o.ga;
  ga.threads = o.threads;
  const auto ref = reference_for(o, k);
  const AttributionReport r = align_frame(o, ref, frame, a.frame, device, known, ga);
  LineSink sink(out, o.json_path);
  sink.write(to_json_line(r));
  return r.matched ? kExitMatched : kExitUnmatched;
}

int cmd_match(const Options& o, const MatchArgs& a, std::ostream& out, std::ostream& err) {
  std::string device;
  const GrayImage k = load_fingerprint(a.fingerprint, device);
  const auto ref = reference_for(o, k);
  const std::size_t n = a.frames.size();
  std::vector<AttributionReport> reports(n);
  std::vector<std::optional<PceResult>> pces(n);

  // Frames run concurrently when threads > 1; each GA then runs serially.
  GaConfig ga = o.ga;
  ga.threads = n > 1 ? 1 : o.threads;
  parallel_for(n, n > 1 ? o.threads : 1, [&](std::size_t i) {
    try {
      const GrayImage frame = load_frame(a.frames[i]);
      reports[i] = align_frame(o, ref, frame, a.frames[i], device, std::nullopt, ga);
      PceResult p;
      p.pce = reports[i].pce;
      pces[i] = p;
    } catch (const std::exception& e) {
      AttributionReport r = base_report(o, a.frames[i], device);
      r.kind = "error";
      r.error = e.what();
      reports[i] = std::move(r);
    }
  });

  LineSink sink(out, o.json_path);
  std::vector<PceResult> ok;
  std::vector<std::size_t> ok_index;
  for (std::size_t i = 0; i < n; ++i) {
    if (reports[i].error) err << "prnufm: frame skipped: " << *reports[i].error << '\n';
    sink.write(to_json_line(reports[i]));
    if (pces[i]) {
      ok.push_back(*pces[i]);
      ok_index.push_back(i);
    }
  }
  if (ok.empty()) {
    err << "prnufm: no frame could be processed\n";
    return kExitError;
  }
  const FusedDecision fused = fuse_frames(ok);
  AttributionReport f = reports[ok_index[fused.index]];
  f.kind = "fused";
  sink.write(to_json_line(f));
  return f.matched ? kExitMatched : kExitUnmatched;
}

int cmd_bench(const Options& o, const BenchArgs& a, std::ostream& out) {
  BenchConfig cfg;
  cfg.trials = a.trials;
  cfg.image_size = a.size;
  cfg.ranges = o.ranges();
  cfg.delta_rho = o.delta_rho;
  cfg.pce_threshold = o.threshold;
  cfg.noise_levels = a.noise;
  cfg.prnu_strength = a.prnu_strength;
  cfg.rng_seed = o.seed;
  cfg.mode = parse_bench_mode(a.mode);
  cfg.impostor = a.impostor;
  cfg.ga = o.ga;
  cfg.threads = o.threads;
  cfg.validate();

  const BenchResult result = run_bench(cfg);
  if (!o.csv_path.empty()) {
    std::ofstream csv(o.csv_path);
    if (!csv) throw Error(ErrorCode::kIo, o.csv_path + ": cannot open for writing");
    write_csv(csv, cfg, result);
  }
  const std::string summary = summarize(cfg, result).dump(2);
  if (!o.json_path.empty()) {
    std::ofstream js(o.json_path);
    if (!js) throw Error(ErrorCode::kIo, o.json_path + ": cannot open for writing");
    js << summary << '\n';
  }
  out << summary << '\n';
  return kExitMatched;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PRNU source attribution under similarity warps", "prnufm"};
  app.set_config("--config", "", "Key-value (INI/TOML) file with defaults for any long option");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--seed", o.seed, "Seed for the GA and the bench")->capture_default_str();
  app.add_option("--threads", o.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--delta-rho", o.delta_rho,
                 "Rows kept around the crop center, as samples on a nominal 2896-row rho axis (bench accepts a list)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--threshold", o.threshold, "PCE decision threshold")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--json", o.json_path, "Also write JSON output here");
  app.add_option("--csv", o.csv_path, "Per-trial CSV output (bench)");
  app.add_option("--scale-range", o.scale_range, "Scale search interval")->expected(2)->capture_default_str();
  app.add_option("--angle-range", o.angle_range, "Angle search interval, degrees")->expected(2)->capture_default_str();
  app.add_option("--shift-range", o.shift_range, "Per-axis shift search interval, pixels")
      ->expected(2)
      ->capture_default_str();
  app.add_option("--fft-size", o.fft_size, "FFT canvas side (0 = automatic)")->capture_default_str();
  app.add_option("--population", o.ga.population, "GA population")->capture_default_str();
  app.add_option("--iterations", o.ga.max_iterations, "GA generations")->capture_default_str();
  app.add_option("--mutation-rate", o.ga.mutation_rate, "GA per-gene mutation probability")->capture_default_str();
  app.add_option("--crossover-rate", o.ga.crossover_rate, "GA crossover probability")->capture_default_str();
  app.add_option("--elite", o.ga.elite_count, "GA elite count")->capture_default_str();
  app.add_option("--refine-steps", o.ga.refine_steps, "PCE-peak shift corrections after the GA")
      ->capture_default_str();
  app.add_option("--confidence-floor", o.ga.confidence_floor, "Fitness below this flags low confidence")
      ->capture_default_str();

  FingerprintArgs fa;
  auto* fp = app.add_subcommand("fingerprint", "Estimate a PRNU fingerprint from flat-field images");
  fp->add_option("flats", fa.flats, "Flat-field images (PGM/PPM/PNG)")->required();
  fp->add_option("-o,--output", fa.output, "Output raster (raw f32 + .json sidecar)")->required();
  fp->add_option("--device-id", fa.device_id, "Device label stored in the sidecar");
  fp->add_option("--prewarp", fa.prewarp, "Similarity applied after estimation: scale angle cx cy")->expected(4);
  fp->add_option("--crop", fa.crop, "Output size after the pre-warp: width height")->expected(2);

  ExtractArgs ea;
  auto* ex = app.add_subcommand("extract-noise", "Write the noise residual of one frame");
  ex->add_option("frame", ea.frame, "Frame image")->required();
  ex->add_option("-o,--output", ea.output, "Output raster (raw f32 + .json sidecar)")->required();
  ex->add_option("--preview", ea.preview, "Optional 8-bit PNG preview of the residual");

  AlignArgs aa;
  auto* al = app.add_subcommand("align", "Estimate the similarity between one frame and a fingerprint");
  al->add_option("frame", aa.frame, "Frame image")->required();
  al->add_option("-f,--fingerprint", aa.fingerprint, "Fingerprint raster")->required();
  al->add_option("--known-shift", aa.known_shift, "Skip the shift search: cx cy")->expected(2);

  MatchArgs ma;
  auto* mt = app.add_subcommand("match", "Attribute frames to a fingerprint (JSON lines, max-PCE fusion)");
  mt->add_option("frames", ma.frames, "Frame images")->required();
  mt->add_option("-f,--fingerprint", ma.fingerprint, "Fingerprint raster")->required();

  BenchArgs ba;
  auto* bn = app.add_subcommand("bench", "Synthetic warp benchmark");
  bn->add_option("--trials", ba.trials, "Trials")->capture_default_str();
  bn->add_option("--size", ba.size, "Frame side in pixels")->capture_default_str();
  bn->add_option("--mode", ba.mode, "sr (scale/rotation only) or full")->capture_default_str();
  bn->add_option("--noise", ba.noise, "Read-noise levels")->capture_default_str();
  bn->add_option("--prnu-strength", ba.prnu_strength, "PRNU std")->capture_default_str();
  bn->add_flag("--impostor", ba.impostor, "Frames come from an independent device");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitMatched;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitMatched;
  } catch (const CLI::ParseError& e) {
    err << "prnufm: " << e.what() << '\n';
    return kExitError;
  }

  try {
    o.ga.rng_seed = o.seed;
    o.ga.validate();
    if (*fp) return cmd_fingerprint(o, fa, out);
    if (*ex) return cmd_extract(ea, out);
    if (*al) return cmd_align(o, aa, out);
    if (*mt) return cmd_match(o, ma, out, err);
    if (*bn) return cmd_bench(o, ba, out);
  } catch (const std::exception& e) {
    err << "prnufm: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace prnufm::cli

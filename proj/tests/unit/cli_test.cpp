#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "app.hpp"
#include "bench.hpp"
#include "prnufm/error.hpp"
#include "prnufm/image_io.hpp"
#include "prnufm/synthetic.hpp"
#include "report.hpp"

namespace prnufm::cli {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("prnufm_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

TEST(AttributionReport, RoundTrip) {
  AttributionReport r;
  r.frame_id = "clip/frame 0001.png";
  r.device_id = "cam-7";
  r.params = {1.0123456789012345, -2.718281828459045, 37.0, -12.0};
  r.pce = 1234.5678901234;
  r.matched = true;
  r.threshold = 60.0;
  r.delta_rho = 400.0;
  r.delta_rho_rows = 384;
  r.timings = {0.25, 33.125, 33.5};
  r.seed = 18446744073709551615ull;
  r.evaluations = 415;
  EXPECT_EQ(parse_json_line(to_json_line(r)), r);
  r.kind = "error";
  r.error = "io: missing.png: cannot open";
  EXPECT_EQ(parse_json_line(to_json_line(r)), r);
}

TEST(AttributionReport, SchemaKeysInOrder) {
  const auto j = nlohmann::ordered_json::parse(to_json_line(AttributionReport{}));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> want{"kind",      "frame_id",  "device_id",      "scale",    "angle",
                                      "cx",        "cy",        "pce",            "decision", "threshold",
                                      "delta_rho", "delta_rho_rows", "timings",   "seed",     "evaluations"};
  EXPECT_EQ(keys, want);
  EXPECT_THROW(parse_json_line(R"({"kind":"frame"})"), std::exception);
}

BenchConfig small_bench() {
  BenchConfig cfg;
  cfg.trials = 3;
  cfg.image_size = 128;
  cfg.noise_levels = {0.5, 2.0};
  cfg.rng_seed = 9;
  return cfg;
}

std::string csv_of(const BenchConfig& cfg) {
  std::ostringstream out;
  write_csv(out, cfg, run_bench(cfg));
  return out.str();
}

TEST(Bench, CsvIsReproducibleAcrossRunsAndThreads) {
  BenchConfig cfg = small_bench();
  const std::string first = csv_of(cfg);
  EXPECT_EQ(csv_of(cfg), first);
  cfg.threads = 4;
  EXPECT_EQ(csv_of(cfg), first);
  EXPECT_EQ(lines_of(first).size(), 1u + 3u * 2u);
}

TEST(Bench, ScaleRotationModeHasNoShiftColumns) {
  const std::string header = csv_header(BenchMode::kScaleRotation);
  EXPECT_NE(header.find("scale_err"), std::string::npos);
  EXPECT_EQ(header.find("cx"), std::string::npos);
  EXPECT_NE(csv_header(BenchMode::kFull).find("shift_err"), std::string::npos);
}

TEST(Bench, ConfigValidation) {
  BenchConfig cfg;
  cfg.trials = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.pce_threshold = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.delta_rho.clear();
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_EQ(run_cli({"bench", "--trials", "0"}).code, kExitError);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, kExitError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitError);
  EXPECT_EQ(run_cli({"match", "--no-such-flag"}).code, kExitError);
  EXPECT_EQ(run_cli({"--help"}).code, kExitMatched);
}

TEST(Cli, FingerprintFromOneFlat) {
  TempDir dir;
  write_pgm(dir / "flat.pgm", synthetic::render(synthetic::flat_scene(96, 96, 120.0),
                                               synthetic::prnu_pattern(96, 96, 0.02, 1), {}, 2));
  const CliRun r = run_cli({"fingerprint", dir / "flat.pgm", "-o", dir / "k.f32", "--device-id", "cam"});
  ASSERT_EQ(r.code, kExitMatched) << r.err;
  const StoredRaster k = load_raster(dir / "k.f32");
  EXPECT_EQ(k.meta.kind, "fingerprint");
  EXPECT_EQ(k.meta.n_images, 1);
  EXPECT_EQ(k.meta.device_id, "cam");
  EXPECT_EQ(k.image.width(), 96);
}

TEST(Cli, FingerprintPrewarpAndCrop) {
  TempDir dir;
  write_pgm(dir / "flat.pgm", synthetic::render(synthetic::flat_scene(128, 128, 120.0),
                                               synthetic::prnu_pattern(128, 128, 0.02, 1), {}, 2));
  const CliRun r = run_cli({"fingerprint", dir / "flat.pgm", "-o", dir / "k.f32", "--prewarp", "1.1", "0", "0", "0",
                         "--crop", "100", "90"});
  ASSERT_EQ(r.code, kExitMatched) << r.err;
  const StoredRaster k = load_raster(dir / "k.f32");
  EXPECT_EQ(k.image.width(), 100);
  EXPECT_EQ(k.image.height(), 90);
}

TEST(Cli, MixedDimensionsNameTheFile) {
  TempDir dir;
  write_pgm(dir / "a.pgm", GrayImage(96, 96, 100.0));
  write_pgm(dir / "odd.pgm", GrayImage(97, 96, 100.0));
  const CliRun r = run_cli({"fingerprint", dir / "a.pgm", dir / "odd.pgm", "-o", dir / "k.f32"});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("odd.pgm"), std::string::npos) << r.err;
}

TEST(Cli, MissingInputNamesThePath) {
  TempDir dir;
  const CliRun r = run_cli({"extract-noise", dir / "nope.png", "-o", dir / "w.f32"});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("nope.png"), std::string::npos) << r.err;
}

TEST(Cli, ExtractNoiseWritesRasterAndPreview) {
  TempDir dir;
  write_pgm(dir / "f.pgm", synthetic::scene(96, 80, 3));
  const CliRun r = run_cli({"extract-noise", dir / "f.pgm", "-o", dir / "w.f32", "--preview", dir / "w.png"});
  ASSERT_EQ(r.code, kExitMatched) << r.err;
  EXPECT_EQ(load_raster(dir / "w.f32").meta.kind, "residual");
  EXPECT_TRUE(fs::exists(dir / "w.png"));
}

// Fingerprint file and frames: two from the device, one impostor.
struct MatchFixture {
  TempDir dir;
  MatchFixture() {
    const int n = 256;
    const GrayImage k = synthetic::prnu_pattern(n, n, 0.02, 70);
    save_raster(dir / "k.f32", k, RasterMeta{"fingerprint", "cam", 30});
    for (int i = 0; i < 2; ++i) {
      write_pgm(dir / ("own" + std::to_string(i) + ".pgm"),
                synthetic::render(synthetic::scene(n, n, 80 + i), k, {}, 90 + i));
    }
    write_pgm(dir / "foreign.pgm", synthetic::render(synthetic::scene(n, n, 85),
                                                     synthetic::prnu_pattern(n, n, 0.02, 71), {}, 95));
  }
};

TEST(Cli, MatchEmitsFrameLinesThenFusedRecord) {
  MatchFixture fx;
  const CliRun r = run_cli({"--shift-range", "0", "0", "--seed", "5", "--threads", "2", "match", "-f", fx.dir / "k.f32",
                         fx.dir / "foreign.pgm", fx.dir / "own0.pgm", fx.dir / "missing.pgm", fx.dir / "own1.pgm"});
  EXPECT_EQ(r.code, kExitMatched) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 5u);
  std::vector<AttributionReport> reps;
  for (const auto& l : lines) reps.push_back(parse_json_line(l));
  EXPECT_EQ(reps[0].frame_id, fx.dir / "foreign.pgm");
  EXPECT_FALSE(reps[0].matched);
  EXPECT_TRUE(reps[1].matched);
  EXPECT_EQ(reps[2].kind, "error");
  EXPECT_TRUE(reps[2].error.has_value());
  EXPECT_TRUE(reps[3].matched);
  EXPECT_EQ(reps[4].kind, "fused");
  EXPECT_EQ(reps[4].pce, std::max(reps[1].pce, reps[3].pce));
  for (const auto& rep : reps) {
    EXPECT_EQ(rep.seed, 5u);
    EXPECT_EQ(rep.device_id, "cam");
    if (!rep.error) EXPECT_EQ(rep.matched, rep.pce >= rep.threshold);
  }
  EXPECT_NE(r.err.find("missing.pgm"), std::string::npos);
}

TEST(Cli, MatchForeignDeviceExitsOne) {
  MatchFixture fx;
  const CliRun r = run_cli({"--shift-range", "0", "0", "match", "-f", fx.dir / "k.f32", fx.dir / "foreign.pgm"});
  EXPECT_EQ(r.code, kExitUnmatched) << r.err;
}

TEST(Cli, MatchAllFramesFailingExitsTwo) {
  MatchFixture fx;
  const CliRun r = run_cli({"match", "-f", fx.dir / "k.f32", fx.dir / "missing.pgm"});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_EQ(lines_of(r.out).size(), 1u);
}

TEST(Cli, ConfigFileSuppliesDefaults) {
  MatchFixture fx;
  {
    std::ofstream cfg(fx.dir / "prnufm.ini");
    cfg << "threshold = 1e12\nshift-range = 0 0\nseed = 42\n";
  }
  const CliRun r = run_cli({"--config", fx.dir / "prnufm.ini", "align", "-f", fx.dir / "k.f32", fx.dir / "own0.pgm"});
  EXPECT_EQ(r.code, kExitUnmatched) << r.err;
  const AttributionReport rep = parse_json_line(lines_of(r.out).at(0));
  EXPECT_EQ(rep.threshold, 1e12);
  EXPECT_EQ(rep.seed, 42u);
  // Flags override the file.
  const CliRun o = run_cli({"--config", fx.dir / "prnufm.ini", "--threshold", "60", "align", "-f", fx.dir / "k.f32",
                         fx.dir / "own0.pgm"});
  EXPECT_EQ(o.code, kExitMatched) << o.err;
}

TEST(Cli, AlignKnownShiftAndJsonFile) {
  MatchFixture fx;
  const CliRun r = run_cli({"--json", fx.dir / "out.jsonl", "align", "-f", fx.dir / "k.f32", fx.dir / "own1.pgm",
                         "--known-shift", "0", "0"});
  ASSERT_EQ(r.code, kExitMatched) << r.err;
  std::ifstream in(fx.dir / "out.jsonl");
  std::string line;
  std::getline(in, line);
  const AttributionReport rep = parse_json_line(line);
  EXPECT_EQ(rep.evaluations, 1);
  EXPECT_NEAR(rep.params.scale, 1.0, 0.002);
}

TEST(Cli, LargerDeltaRhoTakesLonger) {
  MatchFixture fx;
  auto search_time = [&](const char* d) {
    const CliRun r = run_cli({"--shift-range", "0", "0", "--delta-rho", d, "match", "-f", fx.dir / "k.f32",
                           fx.dir / "own0.pgm", fx.dir / "own1.pgm", fx.dir / "foreign.pgm"});
    double total = 0.0;
    for (const auto& l : lines_of(r.out)) {
      const AttributionReport rep = parse_json_line(l);
      if (rep.kind == "frame") total += rep.timings.search;
      EXPECT_EQ(rep.delta_rho, std::stod(d));
    }
    return total;
  };
  search_time("200");  // warm plan caches
  search_time("800");
  EXPECT_GT(search_time("800"), search_time("200"));
}

}  // namespace
}  // namespace prnufm::cli

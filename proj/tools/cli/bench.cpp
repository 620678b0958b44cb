#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>

#include "prnufm/error.hpp"
#include "prnufm/parallel.hpp"
#include "prnufm/synthetic.hpp"

namespace prnufm::cli {

namespace {

constexpr double kScaleTolerance = 0.002;
constexpr double kAngleTolerance = 0.05;

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string to_string(BenchMode mode) { return mode == BenchMode::kFull ? "full" : "sr"; }

BenchMode parse_bench_mode(const std::string& text) {
  if (text == "sr") return BenchMode::kScaleRotation;
  if (text == "full") return BenchMode::kFull;
  throw Error(ErrorCode::kInvalidConfig, "bench mode must be 'sr' or 'full', got '" + text + "'");
}

void BenchConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::kInvalidConfig, "bench needs trials >= 1");
  if (!(pce_threshold > 0.0)) throw Error(ErrorCode::kInvalidConfig, "PCE threshold must be positive");
  if (image_size < 64) throw Error(ErrorCode::kInvalidConfig, "bench image size must be >= 64");
  if (delta_rho.empty() || noise_levels.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "bench needs at least one delta_rho and one noise level");
  }
  for (double d : delta_rho) {
    if (!(d > 0.0)) throw Error(ErrorCode::kInvalidConfig, "delta_rho values must be positive");
  }
  for (double n : noise_levels) {
    if (!(n >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "noise levels must be >= 0");
  }
  if (!(prnu_strength > 0.0)) throw Error(ErrorCode::kInvalidConfig, "PRNU strength must be positive");
  ranges.validate();
  ga.validate();
}

std::uint64_t trial_seed(std::uint64_t base, int trial, int stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

TrialInputs make_trial(const BenchConfig& cfg, int trial, double noise) {
  const int n = cfg.image_size;
  TrialInputs in;
  in.fingerprint = synthetic::prnu_pattern(n, n, cfg.prnu_strength, trial_seed(cfg.rng_seed, trial, 1));
  const GrayImage carried =
      cfg.impostor ? synthetic::prnu_pattern(n, n, cfg.prnu_strength, trial_seed(cfg.rng_seed, trial, 2))
                   : in.fingerprint;
  const GrayImage scene = synthetic::scene(n, n, trial_seed(cfg.rng_seed, trial, 3));
  synthetic::DeviceModel model;
  model.prnu_strength = cfg.prnu_strength;
  model.read_noise = noise;
  const GrayImage shot = synthetic::render(scene, carried, model, trial_seed(cfg.rng_seed, trial, 4));

  std::mt19937_64 rng(trial_seed(cfg.rng_seed, trial, 5));
  in.truth = synthetic::random_similarity(cfg.ranges, rng);
  if (cfg.mode == BenchMode::kScaleRotation) in.truth.shift_x = in.truth.shift_y = 0.0;
  in.frame = warp(shot, in.truth);
  in.residual = extract(in.frame);
  return in;
}

BenchResult run_bench(const BenchConfig& cfg) {
  cfg.validate();
  const int per_trial = static_cast<int>(cfg.noise_levels.size());
  const std::size_t jobs = static_cast<std::size_t>(cfg.trials) * per_trial;
  std::vector<std::vector<TrialRecord>> slots(jobs);

  parallel_for(jobs, cfg.threads, [&](std::size_t job) {
    const int trial = static_cast<int>(job) / per_trial;
    const double noise = cfg.noise_levels[job % per_trial];
    const TrialInputs in = make_trial(cfg, trial, noise);
    GaConfig ga = cfg.ga;
    ga.rng_seed = trial_seed(cfg.rng_seed, trial, 6);
    ga.threads = 1;

    for (double d : cfg.delta_rho) {
      using Clock = std::chrono::steady_clock;
      const auto t0 = Clock::now();
      MellinConfig mcfg;
      mcfg.nominal_delta_rho = d;
      auto ref = std::make_shared<const ReferenceTransform>(in.fingerprint, cfg.ranges, mcfg);
      const FitnessContext ctx(in.residual.raster, ref);
      TrialRecord rec;
      rec.trial = trial;
      rec.noise = noise;
      rec.delta_rho = d;
      rec.rows = ref->delta_rho();
      rec.truth = in.truth;
      rec.transform_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      rec.known = align_known_shift(ctx, in.truth.shift_x, in.truth.shift_y, ga, &in.frame);
      if (cfg.mode == BenchMode::kFull) rec.full = align(ctx, ga, &in.frame);
      slots[job].push_back(std::move(rec));
    }
  });

  BenchResult out;
  for (auto& s : slots) {
    for (auto& r : s) out.records.push_back(std::move(r));
  }
  return out;
}

std::string csv_header(BenchMode mode) {
  if (mode == BenchMode::kScaleRotation) {
    return "trial,noise,delta_rho,rows,true_scale,true_angle,est_scale,est_angle,scale_err,angle_err,"
           "fitness,pce,matched";
  }
  return "trial,noise,delta_rho,rows,true_scale,true_angle,true_cx,true_cy,"
         "known_scale,known_angle,known_pce,known_matched,"
         "est_scale,est_angle,est_cx,est_cy,scale_err,angle_err,shift_err,fitness,evaluations,pce,matched";
}

void write_csv(std::ostream& out, const BenchConfig& cfg, const BenchResult& result) {
  out << csv_header(cfg.mode) << '\n';
  const double thr = cfg.pce_threshold;
  for (const TrialRecord& r : result.records) {
    out << r.trial << ',' << num(r.noise, 3) << ',' << num(r.delta_rho, 1) << ',' << r.rows << ','
        << num(r.truth.scale) << ',' << num(r.truth.angle) << ',';
    if (cfg.mode == BenchMode::kScaleRotation) {
      const auto& k = r.known;
      out << num(k.params.scale) << ',' << num(k.params.angle) << ','
          << num(std::abs(k.params.scale - r.truth.scale)) << ','
          << num(std::abs(k.params.angle - r.truth.angle)) << ',' << num(k.fitness) << ','
          << num(k.pce.pce, 3) << ',' << (k.pce.pce >= thr ? 1 : 0) << '\n';
      continue;
    }
    const auto& k = r.known;
    const auto& f = *r.full;
    const double shift_err =
        std::max(std::abs(f.params.shift_x - r.truth.shift_x), std::abs(f.params.shift_y - r.truth.shift_y));
    out << num(r.truth.shift_x, 0) << ',' << num(r.truth.shift_y, 0) << ',' << num(k.params.scale) << ','
        << num(k.params.angle) << ',' << num(k.pce.pce, 3) << ',' << (k.pce.pce >= thr ? 1 : 0) << ','
        << num(f.params.scale) << ',' << num(f.params.angle) << ',' << num(f.params.shift_x, 0) << ','
        << num(f.params.shift_y, 0) << ',' << num(std::abs(f.params.scale - r.truth.scale)) << ','
        << num(std::abs(f.params.angle - r.truth.angle)) << ',' << num(shift_err, 0) << ','
        << num(f.fitness) << ',' << f.evaluations << ',' << num(f.pce.pce, 3) << ','
        << (f.pce.pce >= thr ? 1 : 0) << '\n';
  }
}

nlohmann::ordered_json summarize(const BenchConfig& cfg, const BenchResult& result) {
  struct Acc {
    int n = 0;
    int known_matched = 0, known_recovered = 0;
    int full_matched = 0, full_recovered = 0;
    double transform = 0, known_time = 0, full_time = 0;
    long evaluations = 0;
  };
  std::map<std::pair<double, double>, Acc> groups;
  for (const TrialRecord& r : result.records) {
    Acc& a = groups[{r.noise, r.delta_rho}];
    ++a.n;
    a.transform += r.transform_seconds;
    a.known_time += r.known.elapsed;
    a.known_matched += r.known.pce.pce >= cfg.pce_threshold;
    a.known_recovered += std::abs(r.known.params.scale - r.truth.scale) <= kScaleTolerance &&
                         std::abs(r.known.params.angle - r.truth.angle) <= kAngleTolerance;
    if (r.full) {
      const auto& f = *r.full;
      a.full_time += f.elapsed;
      a.evaluations += f.evaluations;
      const bool matched = f.pce.pce >= cfg.pce_threshold;
      a.full_matched += matched;
      a.full_recovered += matched && std::abs(f.params.shift_x - r.truth.shift_x) <= 1.0 &&
                          std::abs(f.params.shift_y - r.truth.shift_y) <= 1.0;
    }
  }
  nlohmann::ordered_json j;
  j["mode"] = to_string(cfg.mode);
  j["trials"] = cfg.trials;
  j["image_size"] = cfg.image_size;
  j["seed"] = cfg.rng_seed;
  j["threshold"] = cfg.pce_threshold;
  j["impostor"] = cfg.impostor;
  auto& rows = j["groups"] = nlohmann::ordered_json::array();
  for (const auto& [key, a] : groups) {
    nlohmann::ordered_json g{{"noise", key.first},
                             {"delta_rho", key.second},
                             {"trials", a.n},
                             {"known_shift_tpr", static_cast<double>(a.known_matched) / a.n},
                             {"known_shift_recovery", static_cast<double>(a.known_recovered) / a.n},
                             {"mean_transform_seconds", a.transform / a.n},
                             {"mean_known_shift_seconds", a.known_time / a.n}};
    if (cfg.mode == BenchMode::kFull) {
      g["full_tpr"] = static_cast<double>(a.full_matched) / a.n;
      g["full_recovery"] = static_cast<double>(a.full_recovered) / a.n;
      g["mean_full_seconds"] = a.full_time / a.n;
      g["mean_evaluations"] = static_cast<double>(a.evaluations) / a.n;
    }
    rows.push_back(std::move(g));
  }
  return j;
}

}  // namespace prnufm::cli

#include <benchmark/benchmark.h>

#include <memory>

#include "prnufm/geometry.hpp"
#include "prnufm/mellin.hpp"
#include "prnufm/noise.hpp"
#include "prnufm/search.hpp"
#include "prnufm/spectral.hpp"
#include "prnufm/synthetic.hpp"

namespace {

using namespace prnufm;

GrayImage frame_of(int n) {
  synthetic::DeviceModel model;
  return synthetic::render(synthetic::scene(n, n, 3), synthetic::prnu_pattern(n, n, 0.02, 1), model, 4);
}

void BM_Fft2Padded(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GrayImage img = frame_of(n);
  for (auto _ : state) benchmark::DoNotOptimize(fft2_padded(img, 2 * n, Anchor::kCentered));
}
BENCHMARK(BM_Fft2Padded)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Denoise(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GrayImage img = frame_of(n);
  for (auto _ : state) benchmark::DoNotOptimize(extract(img));
}
BENCHMARK(BM_Denoise)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_LogPolarBand(benchmark::State& state) {
  const int fft = 1024;
  const LogPolarGrid grid = LogPolarGrid::for_fft_size(fft);
  const Spectrum spec = fft2_padded(frame_of(512), fft, Anchor::kCentered);
  const int rows = grid.rows_for_fraction(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mfm(spec, grid, rows, grid.n_rho / 2));
}
BENCHMARK(BM_LogPolarBand)->Arg(200)->Arg(800)->Arg(1600)->Unit(benchmark::kMillisecond);

void BM_FitnessEvaluation(benchmark::State& state) {
  const int n = 512;
  const GrayImage k = synthetic::prnu_pattern(n, n, 0.02, 1);
  const GrayImage w = extract(frame_of(n)).raster;
  MellinConfig cfg;
  cfg.nominal_delta_rho = static_cast<double>(state.range(0));
  const FitnessContext ctx(w, std::make_shared<const ReferenceTransform>(k, SearchRanges{}, cfg));
  int c = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ctx.evaluate(c % 7, -(c % 5)));
    ++c;
  }
}
BENCHMARK(BM_FitnessEvaluation)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_Pce(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GrayImage k = synthetic::prnu_pattern(n, n, 0.02, 1);
  const GrayImage w = extract(frame_of(n)).raster;
  for (auto _ : state) benchmark::DoNotOptimize(pce(w, k));
}
BENCHMARK(BM_Pce)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <gtest/gtest.h>

#include <cmath>

#include "pairs.hpp"
#include "prnufm/error.hpp"
#include "prnufm/search.hpp"
#include "prnufm/synthetic.hpp"

namespace prnufm {
namespace {

using testing::make_pair;
using testing::reference;

constexpr int kSide = 256;

// Clean pair: the residual is the warped pattern itself.
struct CleanPair {
  GrayImage k;
  GrayImage w;
  SimilarityParams truth;
};

CleanPair clean_pair(const SimilarityParams& truth, std::uint64_t seed, int side = kSide) {
  CleanPair p;
  p.k = synthetic::prnu_pattern(side, side, 0.02, seed);
  p.w = warp(p.k, truth);
  p.truth = truth;
  return p;
}

TEST(GaConfig, Validation) {
  GaConfig ok;
  EXPECT_NO_THROW(ok.validate());
  using Edit = void (*)(GaConfig&);
  const Edit edits[] = {[](GaConfig& c) { c.population = 3; }, [](GaConfig& c) { c.population = 51; },
                        [](GaConfig& c) { c.elite_count = 50; }, [](GaConfig& c) { c.mutation_rate = 1.5; },
                        [](GaConfig& c) { c.crossover_rate = -0.1; }, [](GaConfig& c) { c.tournament_size = 0; },
                        [](GaConfig& c) { c.refine_steps = -1; }};
  for (Edit bad : edits) {
    GaConfig c;
    bad(c);
    EXPECT_THROW(c.validate(), Error);
  }
}

TEST(Fitness, TrueShiftDominatesProbeGrid) {
  const CleanPair p = clean_pair({1.04, -1.5, 23.0, -31.0}, 40);
  const FitnessContext ctx(p.w, reference(p.k));
  const FitnessValue at_truth = fitness(23, -31, ctx);
  for (int dy = -5; dy <= 5; dy += 5) {
    for (int dx = -5; dx <= 5; dx += 5) {
      if (dx == 0 && dy == 0) continue;
      EXPECT_GT(at_truth.value, fitness(23 + dx, -31 + dy, ctx).value) << dx << "," << dy;
    }
  }
  EXPECT_NEAR(at_truth.scale, 1.04, 0.002);
  EXPECT_NEAR(at_truth.angle, -1.5, 0.05);
}

TEST(Fitness, RangeBoundaryAndOutside) {
  const CleanPair p = clean_pair(SimilarityParams::identity(), 41);
  const FitnessContext ctx(p.w, reference(p.k));
  EXPECT_NO_THROW(fitness(-90, 90, ctx));
  EXPECT_THROW(fitness(91, 0, ctx), Error);
}

TEST(Fitness, UnrelatedResidualIsFlat) {
  const CleanPair p = clean_pair(SimilarityParams::identity(), 42, 512);
  const GrayImage other = synthetic::prnu_pattern(512, 512, 0.02, 43);
  const FitnessContext ctx(other, reference(p.k));
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> c(-90, 90);
  double lo = 1e9, hi = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double v = fitness(c(rng), c(rng), ctx).value;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LT(hi / lo, 2.0);
}

// The phase ramp stands in for an explicit translation of the residual.
// The literal path interpolates a steeply ramped spectrum, so the two agree
// to interpolation accuracy rather than bitwise.
TEST(Fitness, PhaseRampMatchesTranslatedResidual) {
  const int n = 512;
  const CleanPair p = clean_pair({0.97, 1.0, 37.0, -12.0}, 44, n);
  const auto ref = reference(p.k);
  ASSERT_EQ(ref->fft_size(), 1024);
  const FitnessContext ctx(p.w, ref);
  const int m = 90, cx = 37, cy = -12;
  GrayImage big(n + 2 * m, n + 2 * m);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) big.at(x + m - cx, y + m - cy) = p.w.at(x, y);
  }
  const FitnessContext moved(big, ref);
  const FitnessValue ramp = ctx.evaluate(cx, cy);
  const FitnessValue literal = moved.evaluate(0, 0);
  EXPECT_NEAR(ramp.value, literal.value, 0.1 * literal.value);
  EXPECT_NEAR(ramp.scale, literal.scale, 0.001);
  EXPECT_NEAR(ramp.angle, literal.angle, 0.03);
  EXPECT_NEAR(ramp.scale, 0.97, 0.002);
  EXPECT_NEAR(ramp.angle, 1.0, 0.05);
  // A different shift is not a translation of the same residual.
  EXPECT_LT(ctx.evaluate(cx + 6, cy).value, 0.5 * ramp.value);
}

GaConfig small_ga(std::uint64_t seed) {
  GaConfig ga;
  ga.population = 12;
  ga.max_iterations = 6;
  ga.rng_seed = seed;
  return ga;
}

TEST(GaSearch, BudgetElitismAndClamping) {
  const CleanPair p = clean_pair({1.08, 2.5, 10.0, 5.0}, 45);
  const FitnessContext ctx(p.w, reference(p.k));
  const GaConfig ga = small_ga(3);
  const AlignmentResult r = ga_search(ctx, ga);
  EXPECT_TRUE(r.used_optimizer);
  EXPECT_GE(r.evaluations, 1);
  EXPECT_LE(r.evaluations, ga.population * (ga.max_iterations + 1));
  EXPECT_GE(r.fitness, r.initial_best_fitness);
  const SearchRanges ranges;
  EXPECT_TRUE(ranges.scale.contains(r.params.scale));
  EXPECT_TRUE(ranges.angle.contains(r.params.angle));
  EXPECT_TRUE(ranges.shift.contains(r.params.shift_x));
  EXPECT_TRUE(ranges.shift.contains(r.params.shift_y));
  EXPECT_EQ(r.params.shift_x, std::round(r.params.shift_x));
  EXPECT_EQ(r.params.shift_y, std::round(r.params.shift_y));
  // The winner's fitness is the fitness of its shift.
  EXPECT_EQ(fitness(static_cast<int>(r.params.shift_x), static_cast<int>(r.params.shift_y), ctx).value, r.fitness);
}

TEST(GaSearch, DeterministicAcrossRunsAndThreads) {
  const CleanPair p = clean_pair({0.95, -1.0, -20.0, 33.0}, 46);
  const FitnessContext ctx(p.w, reference(p.k));
  GaConfig ga = small_ga(77);
  const AlignmentResult a = ga_search(ctx, ga);
  const AlignmentResult b = ga_search(ctx, ga);
  ga.threads = 4;
  const AlignmentResult c = ga_search(ctx, ga);
  for (const AlignmentResult* r : {&b, &c}) {
    EXPECT_EQ(r->params, a.params);
    EXPECT_EQ(r->fitness, a.fitness);
    EXPECT_EQ(r->evaluations, a.evaluations);
  }
}

TEST(GaSearch, CollapsedShiftRangeIsOneEvaluation) {
  const CleanPair p = clean_pair({1.03, 1.0, 0.0, 0.0}, 47);
  SearchRanges ranges;
  ranges.shift = {0.0, 0.0};
  const FitnessContext ctx(p.w, reference(p.k, ranges));
  const AlignmentResult r = ga_search(ctx, GaConfig{});
  const FitnessValue direct = fitness(0, 0, ctx);
  EXPECT_EQ(r.evaluations, 1);
  EXPECT_EQ(r.fitness, direct.value);
  EXPECT_EQ(r.params.scale, direct.scale);
  EXPECT_EQ(r.params.angle, direct.angle);
  EXPECT_EQ(r.params.shift_x, 0.0);
}

TEST(Align, KnownShiftPathMatchesClosedForm) {
  const CleanPair p = clean_pair({1.05, 2.0, 0.0, 0.0}, 48, 512);
  SearchRanges ranges;
  ranges.shift = {0.0, 0.0};
  const auto ref = reference(p.k, ranges);
  const FitnessContext ctx(p.w, ref);
  const AlignmentResult r = align(ctx, GaConfig{});
  EXPECT_FALSE(r.used_optimizer);
  EXPECT_EQ(r.evaluations, 1);
  const ScaleRotation sr = ref->correlator().estimate(ctx.residual_band());
  EXPECT_EQ(r.params.scale, sr.scale);
  EXPECT_EQ(r.params.angle, sr.angle);
  EXPECT_NEAR(r.params.scale, 1.05, 0.002);
  EXPECT_NEAR(r.params.angle, 2.0, 0.05);
}

TEST(Align, IdentityTransformOnFullPath) {
  const CleanPair p = clean_pair(SimilarityParams::identity(), 49);
  SearchRanges ranges;
  ranges.shift = {-4.0, 4.0};
  const FitnessContext ctx(p.w, reference(p.k, ranges));
  const AlignmentResult r = align(ctx, small_ga(1));
  EXPECT_TRUE(r.used_optimizer);
  EXPECT_NEAR(r.params.scale, 1.0, 0.002);
  EXPECT_NEAR(r.params.angle, 0.0, 0.05);
  EXPECT_LE(std::abs(r.params.shift_x), 1.0);
  EXPECT_LE(std::abs(r.params.shift_y), 1.0);
  EXPECT_GT(r.pce.pce, 60.0);
}

TEST(Align, LowConfidenceIsAFlagNotAnError) {
  const CleanPair p = clean_pair(SimilarityParams::identity(), 50);
  SearchRanges ranges;
  ranges.shift = {0.0, 0.0};
  const FitnessContext ctx(p.w, reference(p.k, ranges));
  GaConfig ga;
  ga.confidence_floor = 2.0;
  const AlignmentResult r = align(ctx, ga);
  EXPECT_TRUE(r.low_confidence);
}

TEST(CompensateAndTest, MatchingPairBothBranches) {
  const testing::Pair p = make_pair(kSide, {1.04, 1.5, 12.0, -7.0}, 60);
  const PceResult right = compensate_and_test(p.residual, p.k, p.truth, &p.frame);
  EXPECT_GT(right.pce, 60.0);
  EXPECT_EQ(right.peak_pos, (Shift2{0, 0}));
  // A rotation error that moves the frame corners by 20 px.
  SimilarityParams wrong = p.truth;
  wrong.angle += rad_to_deg(20.0 / (kSide / std::sqrt(2.0)));
  EXPECT_LT(compensate_and_test(p.residual, p.k, wrong, &p.frame).pce, 60.0);
}

// The PCE peak is searched over every lag, so a pure translation error only
// moves the peak; align() reads the leftover shift from it.
TEST(CompensateAndTest, TranslationErrorMovesThePeak) {
  const testing::Pair p = make_pair(kSide, {1.04, 1.5, 12.0, -7.0}, 60);
  SimilarityParams off = p.truth;
  off.shift_x -= 20.0;
  const PceResult r = compensate_and_test(p.residual, p.k, off, &p.frame);
  EXPECT_GT(r.pce, 60.0);
  EXPECT_EQ(r.peak_pos, (Shift2{20, 0}));
}

TEST(Align, PolishRecoversShiftNearTheOptimum) {
  const testing::Pair p = make_pair(512, {1.03, -1.2, 5.0, -4.0}, 63);
  SearchRanges ranges;
  ranges.shift = {-6.0, 6.0};
  const FitnessContext ctx(p.residual, reference(p.k, ranges));
  GaConfig ga = small_ga(4);
  ga.population = 4;
  ga.max_iterations = 0;
  ga.refine_steps = 0;
  const AlignmentResult raw = align(ctx, ga, &p.frame);
  ASSERT_FALSE(raw.params.shift_x == 5.0 && raw.params.shift_y == -4.0);
  EXPECT_LE(raw.evaluations, ga.population);
  ga.refine_steps = 3;
  const AlignmentResult r = align(ctx, ga, &p.frame);
  EXPECT_EQ(r.params.shift_x, 5.0);
  EXPECT_EQ(r.params.shift_y, -4.0);
  EXPECT_GT(r.fitness, raw.fitness);
  EXPECT_GT(r.pce.pce, 60.0);
  EXPECT_NEAR(r.params.scale, 1.03, 0.002);
  EXPECT_NEAR(r.params.angle, -1.2, 0.05);
}

TEST(CompensateAndTest, IdentityOnUnwarpedFrame) {
  const testing::Pair p = make_pair(kSide, SimilarityParams::identity(), 61);
  EXPECT_GT(compensate_and_test(p.residual, p.k, SimilarityParams::identity(), &p.frame).pce, 60.0);
}

TEST(CompensateAndTest, ImpostorStaysBelowThreshold) {
  int above = 0;
  for (int i = 0; i < 10; ++i) {
    const testing::Pair p = make_pair(kSide, {1.02, -1.0, 5.0, 3.0}, 200 + i, true);
    if (compensate_and_test(p.residual, p.k, p.truth, &p.frame).pce >= 60.0) ++above;
  }
  EXPECT_EQ(above, 0);
}

TEST(CompensateAndTest, FrameShapeMismatch) {
  const testing::Pair p = make_pair(128, SimilarityParams::identity(), 62);
  const GrayImage wrong(100, 128, 1.0);
  EXPECT_THROW(compensate_and_test(p.residual, p.k, {}, &wrong), Error);
}

TEST(FuseFrames, MaxPicking) {
  std::vector<PceResult> one(1);
  one[0].pce = 5.0;
  EXPECT_EQ(fuse_frames(one).pce, 5.0);
  EXPECT_EQ(fuse_frames(one).index, 0u);
  std::vector<PceResult> three(3);
  three[0].pce = 12;
  three[1].pce = 340;
  three[2].pce = 7;
  const FusedDecision d = fuse_frames(three);
  EXPECT_EQ(d.pce, 340.0);
  EXPECT_EQ(d.index, 1u);
  EXPECT_THROW(fuse_frames(std::vector<PceResult>{}), Error);
}

TEST(FuseFrames, TenFramesThreeMatching) {
  std::vector<PceResult> results;
  double best_matching = 0.0;
  for (int i = 0; i < 10; ++i) {
    const bool matching = i == 2 || i == 5 || i == 8;
    const testing::Pair p = make_pair(128, SimilarityParams::identity(), 300 + (matching ? 0 : i), !matching);
    results.push_back(compensate_and_test(p.residual, p.k, {}, &p.frame));
    if (matching) best_matching = std::max(best_matching, results.back().pce);
  }
  EXPECT_EQ(fuse_frames(results).pce, best_matching);
}

}  // namespace
}  // namespace prnufm

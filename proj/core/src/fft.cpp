#include "prnufm/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

#include "prnufm/error.hpp"

namespace prnufm::fft {

namespace {

// FFTW_ESTIMATE keeps plan selection independent of timing noise, so the
// same input produces the same bits on every run.
constexpr unsigned kPlanFlags = FFTW_ESTIMATE;

enum class Kind { k2d, kRows, kColumns, kColumnsUnaligned, kR2C, kC2R };

using PlanKey = std::tuple<Kind, bool /*single*/, int, int, int, int /*dir*/>;

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct PlanCache {
  std::map<PlanKey, fftw_plan> dbl;
  std::map<PlanKey, fftwf_plan> sgl;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

int sign_of(Direction d) { return d == Direction::kForward ? FFTW_FORWARD : FFTW_BACKWARD; }

template <class Make>
fftw_plan get_plan_d(const PlanKey& key, Make&& make) {
  std::lock_guard lock(plan_mutex());
  auto& m = cache().dbl;
  if (auto it = m.find(key); it != m.end()) return it->second;
  fftw_plan p = make();
  if (!p) throw Error(ErrorCode::kInvalidArgument, "FFTW could not create a plan");
  m.emplace(key, p);
  return p;
}

template <class Make>
fftwf_plan get_plan_f(const PlanKey& key, Make&& make) {
  std::lock_guard lock(plan_mutex());
  auto& m = cache().sgl;
  if (auto it = m.find(key); it != m.end()) return it->second;
  fftwf_plan p = make();
  if (!p) throw Error(ErrorCode::kInvalidArgument, "FFTW could not create a plan");
  m.emplace(key, p);
  return p;
}

void require_size(std::size_t have, std::size_t need) {
  if (have < need) throw Error(ErrorCode::kInvalidArgument, "FFT buffer smaller than its shape");
}

void require_aligned(const void* p) {
  if (fftw_alignment_of(static_cast<double*>(const_cast<void*>(p))) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "FFT buffer is not SIMD aligned");
  }
}

}  // namespace

void* aligned_alloc_bytes(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (!p) throw std::bad_alloc();
  return p;
}

void aligned_free(void* p) noexcept { fftw_free(p); }

void transform_2d(std::span<Complex> data, int rows, int cols, Direction dir) {
  require_size(data.size(), static_cast<std::size_t>(rows) * cols);
  require_aligned(data.data());
  const PlanKey key{Kind::k2d, false, rows, cols, 0, sign_of(dir)};
  fftw_plan plan = get_plan_d(key, [&] {
    auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * rows * cols));
    fftw_plan p = fftw_plan_dft_2d(rows, cols, scratch, scratch, sign_of(dir), kPlanFlags);
    fftw_free(scratch);
    return p;
  });
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

void transform_2d(std::span<ComplexF> data, int rows, int cols, Direction dir) {
  require_size(data.size(), static_cast<std::size_t>(rows) * cols);
  require_aligned(data.data());
  const PlanKey key{Kind::k2d, true, rows, cols, 0, sign_of(dir)};
  fftwf_plan plan = get_plan_f(key, [&] {
    auto* scratch = static_cast<fftwf_complex*>(fftwf_malloc(sizeof(fftwf_complex) * rows * cols));
    fftwf_plan p = fftwf_plan_dft_2d(rows, cols, scratch, scratch, sign_of(dir), kPlanFlags);
    fftwf_free(scratch);
    return p;
  });
  auto* buf = reinterpret_cast<fftwf_complex*>(data.data());
  fftwf_execute_dft(plan, buf, buf);
}

void transform_rows(std::span<ComplexF> data, int rows, int cols, Direction dir) {
  require_size(data.size(), static_cast<std::size_t>(rows) * cols);
  require_aligned(data.data());
  const PlanKey key{Kind::kRows, true, rows, cols, cols, sign_of(dir)};
  fftwf_plan plan = get_plan_f(key, [&] {
    auto* scratch = static_cast<fftwf_complex*>(fftwf_malloc(sizeof(fftwf_complex) * rows * cols));
    int n = cols;
    fftwf_plan p = fftwf_plan_many_dft(1, &n, rows, scratch, nullptr, 1, cols, scratch, nullptr, 1,
                                       cols, sign_of(dir), kPlanFlags);
    fftwf_free(scratch);
    return p;
  });
  auto* buf = reinterpret_cast<fftwf_complex*>(data.data());
  fftwf_execute_dft(plan, buf, buf);
}

void transform_columns(std::span<ComplexF> data, int rows, int count, int stride, Direction dir) {
  require_size(data.size(), static_cast<std::size_t>(rows - 1) * stride + count);
  // Column batches may start anywhere inside a row; those get plans that
  // make no alignment assumption.
  const bool aligned = fftwf_alignment_of(reinterpret_cast<float*>(data.data())) == 0;
  const PlanKey key{aligned ? Kind::kColumns : Kind::kColumnsUnaligned, true, rows, count, stride,
                    sign_of(dir)};
  fftwf_plan plan = get_plan_f(key, [&] {
    auto* scratch =
        static_cast<fftwf_complex*>(fftwf_malloc(sizeof(fftwf_complex) * rows * stride));
    int n = rows;
    fftwf_plan p = fftwf_plan_many_dft(1, &n, count, scratch, nullptr, stride, 1, scratch, nullptr,
                                       stride, 1, sign_of(dir),
                                       aligned ? kPlanFlags : kPlanFlags | FFTW_UNALIGNED);
    fftwf_free(scratch);
    return p;
  });
  auto* buf = reinterpret_cast<fftwf_complex*>(data.data());
  fftwf_execute_dft(plan, buf, buf);
}

void forward_real_2d(std::span<const double> in, std::span<Complex> half, int rows, int cols) {
  require_size(in.size(), static_cast<std::size_t>(rows) * cols);
  require_size(half.size(), static_cast<std::size_t>(rows) * (cols / 2 + 1));
  require_aligned(in.data());
  require_aligned(half.data());
  const PlanKey key{Kind::kR2C, false, rows, cols, 0, FFTW_FORWARD};
  fftw_plan plan = get_plan_d(key, [&] {
    auto* rin = static_cast<double*>(fftw_malloc(sizeof(double) * rows * cols));
    auto* cout = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * rows * (cols / 2 + 1)));
    fftw_plan p = fftw_plan_dft_r2c_2d(rows, cols, rin, cout, kPlanFlags);
    fftw_free(rin);
    fftw_free(cout);
    return p;
  });
  // r2c plans never modify their input.
  fftw_execute_dft_r2c(plan, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(half.data()));
}

void inverse_real_2d(std::span<const Complex> half, std::span<double> out, int rows, int cols) {
  require_size(half.size(), static_cast<std::size_t>(rows) * (cols / 2 + 1));
  require_size(out.size(), static_cast<std::size_t>(rows) * cols);
  require_aligned(out.data());
  const PlanKey key{Kind::kC2R, false, rows, cols, 0, FFTW_BACKWARD};
  fftw_plan plan = get_plan_d(key, [&] {
    auto* cin = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * rows * (cols / 2 + 1)));
    auto* rout = static_cast<double*>(fftw_malloc(sizeof(double) * rows * cols));
    fftw_plan p = fftw_plan_dft_c2r_2d(rows, cols, cin, rout, kPlanFlags);
    fftw_free(cin);
    fftw_free(rout);
    return p;
  });
  // c2r destroys its input, so run it on a private copy.
  AlignedVector<Complex> scratch(half.begin(), half.begin() + static_cast<std::ptrdiff_t>(rows) * (cols / 2 + 1));
  fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

int next_smooth_size(int n) noexcept {
  if (n <= 1) return 1;
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

bool is_power_of_two(int n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(int n) noexcept {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace prnufm::fft

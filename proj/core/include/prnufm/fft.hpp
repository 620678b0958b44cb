#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

namespace prnufm::fft {

using Complex = std::complex<double>;
using ComplexF = std::complex<float>;

void* aligned_alloc_bytes(std::size_t bytes);
void aligned_free(void* p) noexcept;

// SIMD-aligned storage so cached FFTW plans can be reused on any buffer.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(aligned_alloc_bytes(n * sizeof(T))); }
  void deallocate(T* p, std::size_t) noexcept { aligned_free(p); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

enum class Direction { kForward, kInverse };

// In-place 2D transforms on row-major data. Inverse transforms are
// unnormalized (FFTW convention). Plans are created once per shape under a
// lock and executed concurrently afterwards.
void transform_2d(std::span<Complex> data, int rows, int cols, Direction dir);
void transform_2d(std::span<ComplexF> data, int rows, int cols, Direction dir);

// In-place 1D transforms of every row (contiguous, length `cols`).
void transform_rows(std::span<ComplexF> data, int rows, int cols, Direction dir);

// In-place 1D transforms down `count` columns of a row-major array with
// `stride` elements per row, each of length `rows`.
void transform_columns(std::span<ComplexF> data, int rows, int count, int stride, Direction dir);

// Real-input 2D forward transform producing the rows x (cols/2+1)
// half-spectrum, and its inverse (unnormalized).
void forward_real_2d(std::span<const double> in, std::span<Complex> half, int rows, int cols);
void inverse_real_2d(std::span<const Complex> half, std::span<double> out, int rows, int cols);

// Smallest 2^a 3^b 5^c >= n.
int next_smooth_size(int n) noexcept;
bool is_power_of_two(int n) noexcept;
int next_power_of_two(int n) noexcept;

}  // namespace prnufm::fft

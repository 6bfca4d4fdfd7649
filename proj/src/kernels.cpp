#include "eiwv/kernels.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eiwv::kernels {

namespace {
std::atomic<std::size_t> g_grain{1u << 15};
}

std::size_t parallel_grain() { return g_grain.load(std::memory_order_relaxed); }
void set_parallel_grain(std::size_t grain) { g_grain.store(grain, std::memory_order_relaxed); }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace ref {

void affine(std::span<const double> w, std::span<const double> x,
            std::span<const double> b, std::span<double> y,
            std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* wr = w.data() + i * cols;
    double acc = b[i];
    for (std::size_t j = 0; j < cols; ++j) acc += wr[j] * x[j];
    y[i] = acc;
  }
}

void matvec_transpose(std::span<const double> w, std::span<const double> v,
                      std::span<double> out, std::size_t rows, std::size_t cols) {
  for (std::size_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += w[i * cols + j] * v[i];
    out[j] = acc;
  }
}

void outer_accumulate(std::span<double> dw, std::span<const double> v,
                      std::span<const double> x, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* dwr = dw.data() + i * cols;
    const double vi = v[i];
    for (std::size_t j = 0; j < cols; ++j) dwr[j] += vi * x[j];
  }
}

}  // namespace ref

void affine(std::span<const double> w, std::span<const double> x,
            std::span<const double> b, std::span<double> y,
            std::size_t rows, std::size_t cols) {
#ifdef _OPENMP
  if (rows * cols >= parallel_grain() && omp_get_max_threads() > 1 && !omp_in_parallel()) {
    // each output row has a fixed accumulation order, identical to ref
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(rows); ++i) {
      const double* wr = w.data() + static_cast<std::size_t>(i) * cols;
      double acc = b[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < cols; ++j) acc += wr[j] * x[j];
      y[static_cast<std::size_t>(i)] = acc;
    }
    return;
  }
#endif
  ref::affine(w, x, b, y, rows, cols);
}

void matvec_transpose(std::span<const double> w, std::span<const double> v,
                      std::span<double> out, std::size_t rows, std::size_t cols) {
#ifdef _OPENMP
  if (rows * cols >= parallel_grain() && omp_get_max_threads() > 1 && !omp_in_parallel()) {
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < static_cast<long long>(cols); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rows; ++i)
        acc += w[i * cols + static_cast<std::size_t>(j)] * v[i];
      out[static_cast<std::size_t>(j)] = acc;
    }
    return;
  }
#endif
  ref::matvec_transpose(w, v, out, rows, cols);
}

void outer_accumulate(std::span<double> dw, std::span<const double> v,
                      std::span<const double> x, std::size_t rows, std::size_t cols) {
#ifdef _OPENMP
  if (rows * cols >= parallel_grain() && omp_get_max_threads() > 1 && !omp_in_parallel()) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(rows); ++i) {
      double* dwr = dw.data() + static_cast<std::size_t>(i) * cols;
      const double vi = v[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < cols; ++j) dwr[j] += vi * x[j];
    }
    return;
  }
#endif
  ref::outer_accumulate(dw, v, x, rows, cols);
}

}  // namespace eiwv::kernels

#pragma once

#include <cstddef>
#include <span>

// Dense kernels used by the nets and the EM inner loops. Every kernel has a
// plain serial implementation in kernels::ref and a parallel front-end that
// splits work across independent output slots, so results are bit-identical
// to the serial path regardless of thread count.
namespace eiwv::kernels {

namespace ref {

// y = W x + b, W row-major [rows x cols]
void affine(std::span<const double> w, std::span<const double> x,
            std::span<const double> b, std::span<double> y,
            std::size_t rows, std::size_t cols);

// out = W^T v, W row-major [rows x cols], v has `rows` entries
void matvec_transpose(std::span<const double> w, std::span<const double> v,
                      std::span<double> out, std::size_t rows, std::size_t cols);

// dW += v x^T (outer product accumulate)
void outer_accumulate(std::span<double> dw, std::span<const double> v,
                      std::span<const double> x, std::size_t rows, std::size_t cols);

}  // namespace ref

void affine(std::span<const double> w, std::span<const double> x,
            std::span<const double> b, std::span<double> y,
            std::size_t rows, std::size_t cols);

void matvec_transpose(std::span<const double> w, std::span<const double> v,
                      std::span<double> out, std::size_t rows, std::size_t cols);

void outer_accumulate(std::span<double> dw, std::span<const double> v,
                      std::span<const double> x, std::size_t rows, std::size_t cols);

// Work size (rows*cols) below which the parallel front-ends stay serial.
// Exposed so the benchmark can sweep the crossover.
std::size_t parallel_grain();
void set_parallel_grain(std::size_t grain);

int max_threads();

}  // namespace eiwv::kernels

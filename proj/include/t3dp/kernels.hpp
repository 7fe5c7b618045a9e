#pragma once

// Dense double-precision primitives used by the transformer and the tracker.
//
// Every primitive has a scalar reference implementation. On x86-64 an AVX2+FMA
// variant is compiled into a separate translation unit and selected at first
// use when the CPU supports it. Setting T3DP_SIMD=scalar in the environment
// forces the reference path; set_backend() does the same programmatically.

#include <cstddef>
#include <span>
#include <string_view>

namespace t3dp::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);

/// True when `b` is compiled in and supported by the running CPU.
bool backend_available(Backend b);

Backend active_backend();

/// Switches the dispatch table. Throws std::invalid_argument when `b` is not
/// available. Not thread-safe with respect to concurrent kernel calls.
void set_backend(Backend b);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Row-major helpers built on the primitives above.

/// y = W x, W is rows x cols.
void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y);
/// y += W^T x, W is rows x cols, x has `rows` entries, y has `cols`.
void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols,
                std::span<const double> x, std::span<double> y);
/// G += a b^T, G is a.size() x b.size().
void outer_acc(std::span<const double> a, std::span<const double> b,
               std::span<double> g);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace t3dp::kernels

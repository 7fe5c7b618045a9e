#include <cstdlib>
#include <stdexcept>
#include <string>

#include "t3dp/kernels.hpp"

namespace t3dp::kernels {

namespace {

struct Table {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr Table kScalar{Backend::scalar, &scalar::dot, &scalar::squared_distance,
                        &scalar::axpy};
#if defined(T3DP_HAVE_AVX2)
constexpr Table kAvx2{Backend::avx2, &avx2::dot, &avx2::squared_distance,
                      &avx2::axpy};
#endif

bool cpu_has_avx2() {
#if defined(T3DP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* initial_table() {
  const char* env = std::getenv("T3DP_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return &kScalar;
#if defined(T3DP_HAVE_AVX2)
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

const Table*& table() {
  static const Table* t = initial_table();
  return t;
}

void check_same(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operand length mismatch");
}

}  // namespace

std::string_view backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend b) {
  if (b == Backend::scalar) return true;
  return cpu_has_avx2();
}

Backend active_backend() { return table()->backend; }

void set_backend(Backend b) {
  if (!backend_available(b))
    throw std::invalid_argument("kernel backend not available: " +
                                std::string(backend_name(b)));
#if defined(T3DP_HAVE_AVX2)
  table() = b == Backend::avx2 ? &kAvx2 : &kScalar;
#else
  table() = &kScalar;
#endif
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size());
  return table()->dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size());
  return table()->squared_distance(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size());
  table()->axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y) {
  check_same(w.size(), rows * cols);
  check_same(x.size(), cols);
  check_same(y.size(), rows);
  const auto* t = table();
  for (std::size_t r = 0; r < rows; ++r) y[r] = t->dot(w.data() + r * cols, x.data(), cols);
}

void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols,
                std::span<const double> x, std::span<double> y) {
  check_same(w.size(), rows * cols);
  check_same(x.size(), rows);
  check_same(y.size(), cols);
  const auto* t = table();
  for (std::size_t r = 0; r < rows; ++r) {
    if (x[r] != 0.0) t->axpy(x[r], w.data() + r * cols, y.data(), cols);
  }
}

void outer_acc(std::span<const double> a, std::span<const double> b,
               std::span<double> g) {
  check_same(g.size(), a.size() * b.size());
  const auto* t = table();
  const std::size_t cols = b.size();
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r] != 0.0) t->axpy(a[r], b.data(), g.data() + r * cols, cols);
  }
}

}  // namespace t3dp::kernels

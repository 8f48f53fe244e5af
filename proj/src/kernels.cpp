#include "fracdiff/kernels.hpp"

#include <atomic>
#include <cassert>

namespace fracdiff::kernels {

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t) noexcept;
  void (*axpy)(double, const double*, double*, std::size_t) noexcept;
  void (*combine)(double, const double*, double, const double*, double*, std::size_t) noexcept;
};

constexpr Table kScalar{&scalar::dot, &scalar::axpy, &scalar::combine};
#if defined(FRACDIFF_HAVE_AVX2)
constexpr Table kAvx2{&avx2::dot, &avx2::axpy, &avx2::combine};
#endif
#if defined(FRACDIFF_HAVE_NEON)
constexpr Table kNeon{&neon::dot, &neon::axpy, &neon::combine};
#endif

const Table* table_for(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return &kScalar;
    case Backend::avx2:
#if defined(FRACDIFF_HAVE_AVX2)
      return &kAvx2;
#else
      return nullptr;
#endif
    case Backend::neon:
#if defined(FRACDIFF_HAVE_NEON)
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::atomic<Backend>& current() noexcept {
  static std::atomic<Backend> backend{detect_backend()};
  return backend;
}

const Table& active() noexcept { return *table_for(current().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

bool backend_available(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(FRACDIFF_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(FRACDIFF_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend detect_backend() noexcept {
  if (backend_available(Backend::avx2)) return Backend::avx2;
  if (backend_available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

bool set_backend(Backend b) noexcept {
  if (!backend_available(b)) return false;
  current().store(b, std::memory_order_relaxed);
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void combine(double a, std::span<const double> x1, double b, std::span<const double> x2,
             std::span<double> y) noexcept {
  assert(x1.size() == y.size() && x2.size() == y.size());
  active().combine(a, x1.data(), b, x2.data(), y.data(), y.size());
}

}  // namespace fracdiff::kernels

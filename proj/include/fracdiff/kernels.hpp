#pragma once

// Data-parallel inner loops shared by the solver and the discrete operators.
//
// Each kernel has a scalar reference implementation and, where the build
// supports it, an AVX2/FMA (x86-64) or NEON (aarch64) variant. The active
// variant is chosen once at startup from the CPU features and can be forced
// for testing. The scalar and vector variants are equivalence-tested; they
// differ only in summation order inside reductions.

#include <cstddef>
#include <span>
#include <string_view>

namespace fracdiff::kernels {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend b) noexcept;

// Best backend the running CPU supports.
Backend detect_backend() noexcept;

// Backend used by the dispatching entry points below.
Backend active_backend() noexcept;

// Returns false (and leaves the active backend unchanged) when `b` is not
// available on this CPU or build.
bool set_backend(Backend b) noexcept;

bool backend_available(Backend b) noexcept;

// sum_i a[i] * b[i]; sizes must match.
double dot(std::span<const double> a, std::span<const double> b) noexcept;

// y[i] += alpha * x[i]; sizes must match.
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;

// y[i] = a * x1[i] + b * x2[i]; sizes must match.
void combine(double a, std::span<const double> x1, double b,
             std::span<const double> x2, std::span<double> y) noexcept;

namespace scalar {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void combine(double a, const double* x1, double b, const double* x2, double* y,
             std::size_t n) noexcept;
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void combine(double a, const double* x1, double b, const double* x2, double* y,
             std::size_t n) noexcept;
}  // namespace avx2

namespace neon {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void combine(double a, const double* x1, double b, const double* x2, double* y,
             std::size_t n) noexcept;
}  // namespace neon

}  // namespace fracdiff::kernels

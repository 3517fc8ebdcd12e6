#pragma once

#include <cstddef>

// Data-parallel double-precision kernels used by the solvers and the
// simulator. Every kernel has a scalar reference implementation plus SIMD
// variants (AVX2 on x86-64, NEON on aarch64) selected once at startup from
// CPU capabilities. The scalar namespace stays visible so tests can check
// the active backend against the reference.

namespace survsim::kernels {

// Active-backend entry points.
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
double wdot(const double* w, const double* x, const double* y, std::size_t n);
double centered_sumsq(const double* x, std::size_t n, double center);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double* x, std::size_t n, double a);

// Name of the backend the dispatcher picked: "avx2", "neon" or "scalar".
const char* backend();

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
double wdot(const double* w, const double* x, const double* y, std::size_t n);
double centered_sumsq(const double* x, std::size_t n, double center);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double* x, std::size_t n, double a);
}  // namespace scalar

}  // namespace survsim::kernels

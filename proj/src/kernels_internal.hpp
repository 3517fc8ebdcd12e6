#pragma once

#include <cstddef>

// Shared between kernels.cpp (dispatch + scalar + NEON) and kernels_avx2.cpp
// (built with -mavx2 -mfma on x86-64 only).

namespace survsim::kernels {

#if defined(__x86_64__) || defined(_M_X64)
#define SURVSIM_KERNELS_X86 1
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
double wdot(const double* w, const double* x, const double* y, std::size_t n);
double centered_sumsq(const double* x, std::size_t n, double center);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double* x, std::size_t n, double a);
}  // namespace avx2
#endif

}  // namespace survsim::kernels

#include "survsim/kernels.hpp"

#include "kernels_internal.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace survsim::kernels {

// ----------------------------------------------------------------------------
// Scalar reference kernels
// ----------------------------------------------------------------------------

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double wdot(const double* w, const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i];
  return acc;
}

double centered_sumsq(const double* x, std::size_t n, double center) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - center;
    acc += d * d;
  }
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal(double* x, std::size_t n, double a) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

}  // namespace scalar

// ----------------------------------------------------------------------------
// NEON kernels (baseline on aarch64, 2 doubles per lane-pair)
// ----------------------------------------------------------------------------

#if defined(__aarch64__)
namespace neon {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  }
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) out += x[i] * y[i];
  return out;
}

double sum(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) out += x[i];
  return out;
}

double sumsq(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) out += x[i] * x[i];
  return out;
}

double wdot(const double* w, const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t wx = vmulq_f64(vld1q_f64(w + i), vld1q_f64(x + i));
    acc = vfmaq_f64(acc, wx, vld1q_f64(y + i));
  }
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) out += w[i] * x[i] * y[i];
  return out;
}

double centered_sumsq(const double* x, std::size_t n, double center) {
  float64x2_t acc = vdupq_n_f64(0.0);
  float64x2_t c = vdupq_n_f64(center);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t d = vsubq_f64(vld1q_f64(x + i), c);
    acc = vfmaq_f64(acc, d, d);
  }
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = x[i] - center;
    out += d * d;
  }
  return out;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal(double* x, std::size_t n, double a) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
  for (; i < n; ++i) x[i] *= a;
}

}  // namespace neon
#endif  // __aarch64__

// ----------------------------------------------------------------------------
// Runtime dispatch
// ----------------------------------------------------------------------------

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  double (*wdot)(const double*, const double*, const double*, std::size_t);
  double (*centered_sumsq)(const double*, std::size_t, double);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double*, std::size_t, double);
  const char* name;
};

Table select_table() {
#if defined(SURVSIM_KERNELS_X86)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return {avx2::dot,  avx2::sum,  avx2::sumsq, avx2::wdot,
            avx2::centered_sumsq, avx2::axpy, avx2::scal, "avx2"};
  }
#elif defined(__aarch64__)
  return {neon::dot,  neon::sum,  neon::sumsq, neon::wdot,
          neon::centered_sumsq, neon::axpy, neon::scal, "neon"};
#endif
  return {scalar::dot,  scalar::sum,  scalar::sumsq, scalar::wdot,
          scalar::centered_sumsq, scalar::axpy, scalar::scal, "scalar"};
}

const Table& table() {
  static const Table t = select_table();
  return t;
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) { return table().dot(x, y, n); }
double sum(const double* x, std::size_t n) { return table().sum(x, n); }
double sumsq(const double* x, std::size_t n) { return table().sumsq(x, n); }
double wdot(const double* w, const double* x, const double* y, std::size_t n) {
  return table().wdot(w, x, y, n);
}
double centered_sumsq(const double* x, std::size_t n, double center) {
  return table().centered_sumsq(x, n, center);
}
void axpy(double a, const double* x, double* y, std::size_t n) { table().axpy(a, x, y, n); }
void scal(double* x, std::size_t n, double a) { table().scal(x, n, a); }
const char* backend() { return table().name; }

}  // namespace survsim::kernels

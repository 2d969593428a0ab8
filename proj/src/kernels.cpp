#include "happening/kernels.hpp"

#include <atomic>

#if defined(__x86_64__) || defined(_M_X64)
#define HPNG_X86 1
#include <immintrin.h>
#else
#define HPNG_X86 0
#endif

namespace happening::kern {

namespace {

// ---------------------------------------------------------------------------
// Scalar reference kernels.
// ---------------------------------------------------------------------------

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double l1_norm_scalar(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i] < 0 ? -v[i] : v[i];
  return s;
}

double l2_norm_sq_scalar(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i] * v[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void vadd_scalar(double* y, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void vsub_scalar(double* y, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] -= x[i];
}

void scale_scalar(double* v, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v[i] *= a;
}

void sign_scalar(const double* v, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i] > 0 ? 1.0 : (v[i] < 0 ? -1.0 : 0.0);
}

void matvec_scalar(const double* A, const double* x, double* y, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) y[i] = dot_scalar(A + i * k, x, k);
}

void matvec_t_scalar(const double* A, const double* x, double* y, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) y[i] = 0.0;
  for (std::size_t r = 0; r < k; ++r) axpy_scalar(x[r], A + r * k, y, k);
}

void ger_scalar(double* A, double alpha, const double* x, const double* y, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) axpy_scalar(alpha * x[i], y, A + i * k, k);
}

constexpr Kernels kScalar = {
    dot_scalar,    l1_norm_scalar, l2_norm_sq_scalar, axpy_scalar,     vadd_scalar, vsub_scalar,
    scale_scalar,  sign_scalar,    matvec_scalar,     matvec_t_scalar, ger_scalar,
};

#if HPNG_X86

// ---------------------------------------------------------------------------
// AVX2 kernels. No FMA in the elementwise paths so they round exactly like
// the scalar reference; reductions use four lanes and a horizontal sum.
// ---------------------------------------------------------------------------

__attribute__((target("avx2"))) inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

__attribute__((target("avx2"))) double dot_avx2(const double* a, const double* b,
                                                std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2"))) double l1_norm_avx2(const double* v, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(v + i)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += v[i] < 0 ? -v[i] : v[i];
  return s;
}

__attribute__((target("avx2"))) double l2_norm_sq_avx2(const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(v + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(x, x));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += v[i] * v[i];
  return s;
}

__attribute__((target("avx2"))) void axpy_avx2(double a, const double* x, double* y,
                                               std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2"))) void vadd_avx2(double* y, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] += x[i];
}

__attribute__((target("avx2"))) void vsub_avx2(double* y, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_sub_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] -= x[i];
}

__attribute__((target("avx2"))) void scale_avx2(double* v, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(v + i, _mm256_mul_pd(_mm256_loadu_pd(v + i), va));
  }
  for (; i < n; ++i) v[i] *= a;
}

__attribute__((target("avx2"))) void sign_avx2(const double* v, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d neg_one = _mm256_set1_pd(-1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(v + i);
    __m256d pos = _mm256_and_pd(_mm256_cmp_pd(x, zero, _CMP_GT_OQ), one);
    __m256d neg = _mm256_and_pd(_mm256_cmp_pd(x, zero, _CMP_LT_OQ), neg_one);
    _mm256_storeu_pd(out + i, _mm256_or_pd(pos, neg));
  }
  for (; i < n; ++i) out[i] = v[i] > 0 ? 1.0 : (v[i] < 0 ? -1.0 : 0.0);
}

__attribute__((target("avx2"))) void matvec_avx2(const double* A, const double* x, double* y,
                                                 std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) y[i] = dot_avx2(A + i * k, x, k);
}

__attribute__((target("avx2"))) void matvec_t_avx2(const double* A, const double* x, double* y,
                                                   std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) y[i] = 0.0;
  for (std::size_t r = 0; r < k; ++r) axpy_avx2(x[r], A + r * k, y, k);
}

__attribute__((target("avx2"))) void ger_avx2(double* A, double alpha, const double* x,
                                              const double* y, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) axpy_avx2(alpha * x[i], y, A + i * k, k);
}

constexpr Kernels kAvx2 = {
    dot_avx2,    l1_norm_avx2, l2_norm_sq_avx2, axpy_avx2,     vadd_avx2, vsub_avx2,
    scale_avx2,  sign_avx2,    matvec_avx2,     matvec_t_avx2, ger_avx2,
};

#endif  // HPNG_X86

std::atomic<const Kernels*> g_active{nullptr};
std::atomic<Backend> g_backend{Backend::Auto};

const Kernels* pick_auto() {
#if HPNG_X86
  if (__builtin_cpu_supports("avx2")) return &kAvx2;
#endif
  return &kScalar;
}

}  // namespace

const Kernels& scalar() { return kScalar; }

bool avx2_available() {
#if HPNG_X86
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const Kernels* avx2() {
#if HPNG_X86
  return avx2_available() ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& active() {
  const Kernels* k = g_active.load(std::memory_order_acquire);
  if (!k) {
    k = pick_auto();
    g_active.store(k, std::memory_order_release);
  }
  return *k;
}

void force_backend(Backend b) {
  switch (b) {
    case Backend::Scalar:
      g_active.store(&kScalar, std::memory_order_release);
      break;
    case Backend::Avx2: {
      const Kernels* k = avx2();
      g_active.store(k ? k : &kScalar, std::memory_order_release);
      break;
    }
    case Backend::Auto:
      g_active.store(pick_auto(), std::memory_order_release);
      break;
  }
  g_backend.store(b, std::memory_order_release);
}

Backend active_backend() {
  const Kernels* k = g_active.load(std::memory_order_acquire);
  if (!k) return Backend::Auto;
#if HPNG_X86
  if (k == &kAvx2) return Backend::Avx2;
#endif
  return k == &kScalar ? Backend::Scalar : Backend::Auto;
}

}  // namespace happening::kern

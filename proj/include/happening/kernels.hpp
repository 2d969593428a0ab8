#pragma once
// Dense double-precision kernels behind the embedding trainer and the linear
// classifier. Every operation has a scalar reference implementation and, on
// x86-64, an AVX2 variant; the active table is picked once at startup from
// CPU capabilities and can be forced for equivalence testing.
//
// Elementwise kernels (axpy/add/sub/scale/sign/matvec row products without
// fused accumulation reordering beyond lane order) are bit-identical across
// backends; reductions (dot, norms) may differ in the last ulps because the
// vector lanes accumulate in a different order.

#include <cstddef>

namespace happening::kern {

struct Kernels {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*l1_norm)(const double* v, std::size_t n);
  double (*l2_norm_sq)(const double* v, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);  // y += a*x
  void (*vadd)(double* y, const double* x, std::size_t n);            // y += x
  void (*vsub)(double* y, const double* x, std::size_t n);            // y -= x
  void (*scale)(double* v, double a, std::size_t n);
  void (*sign)(const double* v, double* out, std::size_t n);  // sign(0) = 0
  // Row-major k x k matrices.
  void (*matvec)(const double* A, const double* x, double* y, std::size_t k);    // y = A x
  void (*matvec_t)(const double* A, const double* x, double* y, std::size_t k);  // y = A^T x
  void (*ger)(double* A, double alpha, const double* x, const double* y,
              std::size_t k);  // A += alpha * x y^T
};

enum class Backend { Auto, Scalar, Avx2 };

const Kernels& scalar();
bool avx2_available();
// nullptr when the CPU (or build) lacks AVX2.
const Kernels* avx2();

// Active table used by the rest of the library.
const Kernels& active();
// Test hook; Backend::Avx2 on a machine without it falls back to scalar.
void force_backend(Backend b);
Backend active_backend();

}  // namespace happening::kern

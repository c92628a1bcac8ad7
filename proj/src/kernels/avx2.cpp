// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// and must only be entered after the runtime feature check in dispatch.cpp.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "dp2s/kernels.hpp"

namespace dp2s::kernels {

namespace {

// 2^k for integral k in [-1022, 1023] held in a double vector.
inline __m256d pow2_pd(__m256d k) {
  const __m256d magic = _mm256_set1_pd(0x1.8p52);
  const __m256i bits = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)), _mm256_castpd_si256(magic));
  return _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52));
}

// exp(x) to about 1 ulp. Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2,
// degree-13 Taylor polynomial for e^r, and a two-step 2^n scale so the
// subnormal range rounds once.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d underflow = _mm256_set1_pd(-745.2);
  const __m256d overflow = _mm256_set1_pd(709.782712893384);

  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, underflow), overflow);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, xc);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m256d n1 = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  const __m256d n2 = _mm256_sub_pd(n, n1);
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, pow2_pd(n1)), pow2_pd(n2));

  // Saturate outside the representable range; NaN input stays NaN.
  result = _mm256_blendv_pd(result, _mm256_setzero_pd(), _mm256_cmp_pd(x, underflow, _CMP_LT_OQ));
  result = _mm256_blendv_pd(result, _mm256_set1_pd(std::numeric_limits<double>::infinity()),
                            _mm256_cmp_pd(x, overflow, _CMP_GT_OQ));
  return _mm256_blendv_pd(result, x, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

// Loads the last n % 4 values, padding with `fill`.
inline __m256d load_tail(const double* v, std::size_t count, double fill) {
  alignas(32) double buf[4] = {fill, fill, fill, fill};
  for (std::size_t i = 0; i < count; ++i) buf[i] = v[i];
  return _mm256_load_pd(buf);
}

double reduce_max_avx2(const double* v, std::size_t n) {
  const double ninf = -std::numeric_limits<double>::infinity();
  __m256d m0 = _mm256_set1_pd(ninf);
  __m256d m1 = m0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    m0 = _mm256_max_pd(m0, _mm256_loadu_pd(v + i));
    m1 = _mm256_max_pd(m1, _mm256_loadu_pd(v + i + 4));
  }
  for (; i + 4 <= n; i += 4) m0 = _mm256_max_pd(m0, _mm256_loadu_pd(v + i));
  if (i < n) m1 = _mm256_max_pd(m1, load_tail(v + i, n - i, ninf));
  return hmax(_mm256_max_pd(m0, m1));
}

double sum_exp_shifted_avx2(const double* v, std::size_t n, double shift) {
  const __m256d s = _mm256_set1_pd(shift);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i), s)));
    acc1 = _mm256_add_pd(acc1, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i + 4), s)));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i), s)));
  if (i < n) {
    const __m256d tail = load_tail(v + i, n - i, -std::numeric_limits<double>::infinity());
    acc1 = _mm256_add_pd(acc1, exp_pd(_mm256_sub_pd(tail, s)));
  }
  return hsum(_mm256_add_pd(acc0, acc1));
}

void exp_shifted_avx2(const double* v, double* out, std::size_t n, double shift) {
  const __m256d s = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i), s)));
  if (i < n) {
    alignas(32) double buf[4];
    _mm256_store_pd(buf, exp_pd(_mm256_sub_pd(load_tail(v + i, n - i, 0.0), s)));
    for (std::size_t j = 0; i + j < n; ++j) out[i + j] = buf[j];
  }
}

// Partial sums must stay within int32; callers guarantee it.
std::int64_t max_abs_prefix_sum_avx2(const std::int32_t* v, std::size_t n) {
  __m256i offset = _mm256_setzero_si256();
  __m256i best = _mm256_setzero_si256();
  const __m256i last = _mm256_set1_epi32(7);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + i));
    x = _mm256_add_epi32(x, _mm256_slli_si256(x, 4));
    x = _mm256_add_epi32(x, _mm256_slli_si256(x, 8));
    const __m256i carry = _mm256_shuffle_epi32(x, _MM_SHUFFLE(3, 3, 3, 3));
    x = _mm256_add_epi32(x, _mm256_permute2x128_si256(carry, carry, 0x08));
    x = _mm256_add_epi32(x, offset);
    best = _mm256_max_epi32(best, _mm256_abs_epi32(x));
    offset = _mm256_permutevar8x32_epi32(x, last);
  }
  alignas(32) std::int32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), best);
  std::int64_t result = 0;
  for (std::int32_t b : lanes) result = b > result ? b : result;
  std::int64_t run = _mm256_extract_epi32(offset, 0);
  for (; i < n; ++i) {
    run += v[i];
    const std::int64_t a = run < 0 ? -run : run;
    result = a > result ? a : result;
  }
  return result;
}

}  // namespace

const KernelTable& avx2_table_impl() {
  static const KernelTable table{"avx2", reduce_max_avx2, sum_exp_shifted_avx2, exp_shifted_avx2,
                                 max_abs_prefix_sum_avx2};
  return table;
}

}  // namespace dp2s::kernels

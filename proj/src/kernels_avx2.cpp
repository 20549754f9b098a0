// AVX2 variants of the arithmetic kernels. Built with -mavx2 -mfma; only
// reached through the dispatch table after a runtime CPU check.

#include "plgrim/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace plgrim::kernels::detail {

namespace {

// Rational log approximation on the mantissa reduced to [sqrt(1/2), sqrt(2)),
// classic cephes coefficients. Inputs must be positive normal doubles.
inline __m256d log2_pd(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d half = _mm256_set1_pd(0.5);

  const __m256i bits = _mm256_castpd_si256(x);

  // Biased exponent to double via the 2^52 shift trick.
  __m256i expi = _mm256_srli_epi64(bits, 52);
  expi = _mm256_and_si256(expi, _mm256_set1_epi64x(0x7FF));
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(expi, magic)),
                            _mm256_castsi256_pd(magic));
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

  // Mantissa in [1, 2).
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  // Reduce to [sqrt(1/2), sqrt(2)).
  const __m256d sqrt2 = _mm256_set1_pd(1.41421356237309504880);
  const __m256d gt = _mm256_cmp_pd(m, sqrt2, _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, half), gt);
  e = _mm256_add_pd(e, _mm256_and_pd(gt, one));

  const __m256d f = _mm256_sub_pd(m, one);
  const __m256d z = _mm256_mul_pd(f, f);

  __m256d pn = _mm256_set1_pd(1.01875663804580931796e-4);
  pn = _mm256_fmadd_pd(pn, f, _mm256_set1_pd(4.97494994976747001425e-1));
  pn = _mm256_fmadd_pd(pn, f, _mm256_set1_pd(4.70579119878881725854e0));
  pn = _mm256_fmadd_pd(pn, f, _mm256_set1_pd(1.44989225341610930846e1));
  pn = _mm256_fmadd_pd(pn, f, _mm256_set1_pd(1.79368678507819816313e1));
  pn = _mm256_fmadd_pd(pn, f, _mm256_set1_pd(7.70838733755885391666e0));

  __m256d qn = _mm256_add_pd(f, _mm256_set1_pd(1.12873587189167450590e1));
  qn = _mm256_fmadd_pd(qn, f, _mm256_set1_pd(4.52279145837532221105e1));
  qn = _mm256_fmadd_pd(qn, f, _mm256_set1_pd(8.29875266912776603211e1));
  qn = _mm256_fmadd_pd(qn, f, _mm256_set1_pd(7.11544750618563894466e1));
  qn = _mm256_fmadd_pd(qn, f, _mm256_set1_pd(2.31251620126765340583e1));

  // ln(m) = f + f*z*P(f)/Q(f) - z/2
  __m256d y = _mm256_div_pd(_mm256_mul_pd(_mm256_mul_pd(f, z), pn), qn);
  y = _mm256_fnmadd_pd(half, z, y);
  const __m256d ln_m = _mm256_add_pd(f, y);

  // log2(x) = ln(m) * log2(e) + e; the exponent term is exact.
  const __m256d log2e = _mm256_set1_pd(1.44269504088896340736);
  return _mm256_fmadd_pd(ln_m, log2e, e);
}

}  // namespace

double binary_entropy_sum_avx2(const double* p, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d tiny = _mm256_set1_pd(2.2250738585072014e-308);
  __m256d acc = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d pi = _mm256_loadu_pd(p + i);
    const __m256d qi = _mm256_sub_pd(one, pi);
    const __m256d valid = _mm256_and_pd(_mm256_cmp_pd(pi, zero, _CMP_GT_OQ),
                                        _mm256_cmp_pd(pi, one, _CMP_LT_OQ));
    // Clamp so the log stays finite; invalid lanes are masked out below.
    const __m256d pc = _mm256_max_pd(pi, tiny);
    const __m256d qc = _mm256_max_pd(qi, tiny);
    const __m256d t = _mm256_fmadd_pd(pi, log2_pd(pc), _mm256_mul_pd(qi, log2_pd(qc)));
    acc = _mm256_sub_pd(acc, _mm256_and_pd(valid, t));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    const double v = p[i];
    if (v > 0.0 && v < 1.0) {
      total -= v * std::log2(v) + (1.0 - v) * std::log2(1.0 - v);
    }
  }
  return total;
}

double max_value_avx2(const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_max_pd(acc, _mm256_loadu_pd(v + i));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) {
    if (v[i] > m) m = v[i];
  }
  return m;
}

}  // namespace plgrim::kernels::detail

#endif  // x86_64

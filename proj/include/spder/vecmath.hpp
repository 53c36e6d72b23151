#pragma once

// Elementwise sin/cos/log/atan over spans. With SPDER_HAVE_LIBMVEC and AVX2
// the glibc vector math entry points are called four lanes at a time;
// otherwise the <cmath> scalar functions are used.

#include <cmath>
#include <cstddef>
#include <span>

#if defined(SPDER_HAVE_LIBMVEC) && defined(__AVX2__)
#include <immintrin.h>
#define SPDER_VECMATH_AVX2 1
extern "C" {
__m256d _ZGVdN4v_sin(__m256d);
__m256d _ZGVdN4v_cos(__m256d);
__m256d _ZGVdN4v_log(__m256d);
__m256d _ZGVdN4v_atan(__m256d);
}
#endif

namespace spder::vecmath {

namespace detail {

#ifdef SPDER_VECMATH_AVX2
template <__m256d (*Vec)(__m256d), double (*Scalar)(double)>
inline void apply(std::span<const double> in, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= in.size(); i += 4) _mm256_storeu_pd(out.data() + i, Vec(_mm256_loadu_pd(in.data() + i)));
  for (; i < in.size(); ++i) out[i] = Scalar(in[i]);
}
#else
template <double (*Scalar)(double)>
inline void apply(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = Scalar(in[i]);
}
#endif

inline double scalar_sin(double x) { return std::sin(x); }
inline double scalar_cos(double x) { return std::cos(x); }
inline double scalar_log(double x) { return std::log(x); }
inline double scalar_atan(double x) { return std::atan(x); }

}  // namespace detail

#ifdef SPDER_VECMATH_AVX2
inline void sin(std::span<const double> in, std::span<double> out) { detail::apply<_ZGVdN4v_sin, detail::scalar_sin>(in, out); }
inline void cos(std::span<const double> in, std::span<double> out) { detail::apply<_ZGVdN4v_cos, detail::scalar_cos>(in, out); }
inline void log(std::span<const double> in, std::span<double> out) { detail::apply<_ZGVdN4v_log, detail::scalar_log>(in, out); }
inline void atan(std::span<const double> in, std::span<double> out) { detail::apply<_ZGVdN4v_atan, detail::scalar_atan>(in, out); }
#else
inline void sin(std::span<const double> in, std::span<double> out) { detail::apply<detail::scalar_sin>(in, out); }
inline void cos(std::span<const double> in, std::span<double> out) { detail::apply<detail::scalar_cos>(in, out); }
inline void log(std::span<const double> in, std::span<double> out) { detail::apply<detail::scalar_log>(in, out); }
inline void atan(std::span<const double> in, std::span<double> out) { detail::apply<detail::scalar_atan>(in, out); }
#endif

constexpr bool vectorized() {
#ifdef SPDER_VECMATH_AVX2
  return true;
#else
  return false;
#endif
}

}  // namespace spder::vecmath

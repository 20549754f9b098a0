#pragma once

#include <cstddef>
#include <span>

namespace plgrim::kernels {

// Backends for the arithmetic inner loops. The scalar kernels are the
// reference; vector variants must match them (see tests/test_kernels.cpp).
enum class Backend { Scalar, Avx2 };

const char* backend_name(Backend b);
bool backend_supported(Backend b);

// Backend in use. Resolved once from CPU features; the PLGRIM_KERNELS
// environment variable ("scalar" or "avx2") overrides the automatic choice.
Backend active_backend();

// Overrides the resolved backend. Throws std::invalid_argument if the
// backend is not supported on this machine. Not safe to call while
// planners are running.
void force_backend(Backend b);

// Sum over i of the binary entropy of p[i] in bits:
//   h(p) = -p*log2(p) - (1-p)*log2(1-p),  h(0) = h(1) = 0.
double binary_entropy_sum(std::span<const double> p);

// Maximum element of v; returns 0.0 for an empty span (risk values are
// non-negative).
double max_value(std::span<const double> v);

namespace detail {
double binary_entropy_sum_scalar(const double* p, std::size_t n);
double max_value_scalar(const double* v, std::size_t n);
#if defined(__x86_64__) || defined(_M_X64)
double binary_entropy_sum_avx2(const double* p, std::size_t n);
double max_value_avx2(const double* v, std::size_t n);
#endif
}  // namespace detail

}  // namespace plgrim::kernels

#include "plgrim/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace plgrim::kernels {

namespace detail {

double binary_entropy_sum_scalar(const double* p, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = p[i];
    if (pi > 0.0 && pi < 1.0) {
      acc -= pi * std::log2(pi) + (1.0 - pi) * std::log2(1.0 - pi);
    }
  }
  return acc;
}

double max_value_scalar(const double* v, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] > m) m = v[i];
  }
  return m;
}

}  // namespace detail

namespace {

using EntropyFn = double (*)(const double*, std::size_t);
using MaxFn = double (*)(const double*, std::size_t);

struct Table {
  Backend backend;
  EntropyFn entropy;
  MaxFn maxv;
};

Table table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return {Backend::Scalar, detail::binary_entropy_sum_scalar, detail::max_value_scalar};
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return {Backend::Avx2, detail::binary_entropy_sum_avx2, detail::max_value_avx2};
#else
      break;
#endif
  }
  return {Backend::Scalar, detail::binary_entropy_sum_scalar, detail::max_value_scalar};
}

Backend resolve_backend() {
  if (const char* env = std::getenv("PLGRIM_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_supported(Backend::Avx2)) return Backend::Avx2;
  }
  return backend_supported(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const Table*> g_table{nullptr};

const Table& dispatch() {
  const Table* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    static Table resolved = table_for(resolve_backend());
    g_table.store(&resolved, std::memory_order_release);
    t = &resolved;
  }
  return *t;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "?";
}

bool backend_supported(Backend b) {
  if (b == Backend::Scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() { return dispatch().backend; }

void force_backend(Backend b) {
  if (!backend_supported(b)) {
    throw std::invalid_argument(std::string("kernel backend not supported: ") + backend_name(b));
  }
  static Table forced;
  forced = table_for(b);
  g_table.store(&forced, std::memory_order_release);
}

double binary_entropy_sum(std::span<const double> p) {
  return dispatch().entropy(p.data(), p.size());
}

double max_value(std::span<const double> v) {
  return dispatch().maxv(v.data(), v.size());
}

}  // namespace plgrim::kernels

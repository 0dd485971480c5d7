#include <atomic>
#include <cstdlib>
#include <string>

#include "fracrc/simd/kernels.hpp"

namespace fracrc::simd {
namespace {

bool cpu_has_avx2() {
#if defined(FRACRC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &scalar_kernels();
    case Isa::Avx2:
#if defined(FRACRC_HAVE_AVX2)
      return cpu_has_avx2() ? &avx2_kernels() : nullptr;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* resolve_default() {
  if (const char* env = std::getenv("FRACRC_ISA")) {
    if (std::string(env) == "scalar") return &scalar_kernels();
  }
  if (const KernelTable* t = table_for(Isa::Avx2)) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable& kernels() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    const KernelTable* resolved = resolve_default();
    g_active.compare_exchange_strong(t, resolved, std::memory_order_acq_rel);
    t = g_active.load(std::memory_order_acquire);
  }
  return *t;
}

bool force_isa(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) return false;
  g_active.store(t, std::memory_order_release);
  return true;
}

bool isa_available(Isa isa) { return table_for(isa) != nullptr; }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace fracrc::simd

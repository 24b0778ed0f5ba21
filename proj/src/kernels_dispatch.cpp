#include <atomic>
#include <string>

#include "rsaloc/errors.hpp"
#include "rsaloc/kernels.hpp"

namespace rsaloc::kern {

#if defined(RSALOC_BUILD_AVX2)
const Ops& avx2_ops();  // defined in kernels_avx2.cpp
#endif

namespace {

bool cpu_has_avx2() {
#if defined(RSALOC_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect_backend() {
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& active_slot() {
    static std::atomic<Backend> slot{detect_backend()};
    return slot;
}

}  // namespace

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::Scalar: return true;
        case Backend::Avx2: return cpu_has_avx2();
    }
    return false;
}

void select_backend(Backend b) {
    if (!backend_supported(b))
        throw ConfigError("kernel backend '" + std::string(backend_name(b)) +
                          "' is not supported on this CPU");
    active_slot().store(b);
}

Backend active_backend() { return active_slot().load(); }

const Ops& ops() {
#if defined(RSALOC_BUILD_AVX2)
    if (active_backend() == Backend::Avx2) return avx2_ops();
#endif
    return scalar_ops();
}

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
    }
    return "?";
}

}  // namespace rsaloc::kern

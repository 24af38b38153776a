#include "cdn/kernels.hpp"

namespace cdn::kernels {

#if defined(COREDN_BUILD_AVX2)
const Ops& avx2_ops();
#endif
#if defined(COREDN_BUILD_NEON)
const Ops& neon_ops();
#endif

namespace {

struct Selection {
    const Ops* ops;
    std::string_view name;
};

Selection detect() {
#if defined(COREDN_BUILD_AVX2)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return {&avx2_ops(), "avx2"};
#endif
#if defined(COREDN_BUILD_NEON)
    // NEON is baseline on aarch64.
    return {&neon_ops(), "neon"};
#endif
    return {&scalar(), "scalar"};
}

Selection& current() {
    static Selection sel = detect();
    return sel;
}

}  // namespace

const Ops& active() { return *current().ops; }

std::string_view active_name() { return current().name; }

bool select(std::string_view name) {
    if (name == "scalar") {
        current() = {&scalar(), "scalar"};
        return true;
    }
#if defined(COREDN_BUILD_AVX2)
    if (name == "avx2" && __builtin_cpu_supports("avx2") &&
        __builtin_cpu_supports("fma")) {
        current() = {&avx2_ops(), "avx2"};
        return true;
    }
#endif
#if defined(COREDN_BUILD_NEON)
    if (name == "neon") {
        current() = {&neon_ops(), "neon"};
        return true;
    }
#endif
    return false;
}

}  // namespace cdn::kernels

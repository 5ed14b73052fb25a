#include "pdeforge/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pdeforge::parallel {

namespace {
int g_cap = 0; // 0 = hardware default

int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}
} // namespace

int max_threads() {
    if (g_cap > 0) return g_cap;
    return hardware_threads();
}

void set_max_threads(int n) {
    g_cap = n > 0 ? n : 0;
#ifdef _OPENMP
    omp_set_num_threads(g_cap > 0 ? g_cap : hardware_threads());
#endif
}

void init_from_env() {
    const char* env = std::getenv("PDE_FORGE_THREADS");
    if (env == nullptr) return;
    try {
        set_max_threads(std::stoi(env));
    } catch (...) {
        // ignore unparsable values, keep the default
    }
}

bool serial_mode() { return max_threads() == 1; }

} // namespace pdeforge::parallel

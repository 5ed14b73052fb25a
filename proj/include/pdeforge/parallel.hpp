#pragma once

namespace pdeforge::parallel {

/// Worker cap currently in effect (>= 1).
int max_threads();

/// Cap the OpenMP worker count. n <= 0 restores the hardware default.
void set_max_threads(int n);

/// Apply PDE_FORGE_THREADS from the environment, if set.
void init_from_env();

/// True when the cap is 1 (kernels take their serial path).
bool serial_mode();

} // namespace pdeforge::parallel

#pragma once

#include <string>

namespace pdeforge {

/// Canonical key for a pure derivative token: `d{order}{var}/d{axis}{order}`,
/// collapsing to the bare variable name at order 0.
inline std::string derivative_signature(const std::string& var, const std::string& axis_name,
                                        int order) {
    if (order == 0) return var;
    const std::string o = std::to_string(order);
    return "d" + o + var + "/d" + axis_name + o;
}

} // namespace pdeforge

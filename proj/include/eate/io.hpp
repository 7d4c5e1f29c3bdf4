#pragma once

#include <string>

namespace eate {

/// Round-trip decimal form (%.17g); NaN prints as NA.
std::string format_real(double v);

}  // namespace eate

#pragma once

namespace rdceg {

// ln Gamma(x) for x > 0, relative accuracy near machine precision.
auto log_gamma(double x) -> double;

}  // namespace rdceg

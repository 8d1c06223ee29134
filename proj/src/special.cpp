#include "rdceg/special.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include "rdceg/error.hpp"

namespace rdceg {

auto log_gamma(double x) -> double {
  if (!(x > 0.0)) throw DomainError{"log_gamma needs a positive argument"};
  return boost::math::lgamma(x);
}

}  // namespace rdceg

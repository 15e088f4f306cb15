#pragma once

#include <stdexcept>
#include <string>

namespace cnev {

// A family or structure was asked for an operation outside its declared
// capabilities (e.g. a tail function of a copula without tail dependence).
struct capability_error : std::logic_error {
  using std::logic_error::logic_error;
};

// Quadrature or root finding produced non-finite values.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace cnev

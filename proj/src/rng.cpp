#include "hybridcop/rng.hpp"

#include "hybridcop/normal.hpp"

namespace hybridcop {

double Rng::normal() { return normal::quantile(uniform()); }

}  // namespace hybridcop

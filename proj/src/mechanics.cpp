#include "kls/mechanics.hpp"

#include <cmath>
#include <sstream>

namespace kls {

void Material::validate() const {
  std::ostringstream os;
  if (!(E > 0.0)) os << "Young's modulus must be positive (E = " << E << ")";
  else if (!(nu >= 0.0 && nu <= 0.5)) os << "Poisson ratio must lie in [0, 0.5] (nu = " << nu << ")";
  else if (!(zeta > 0.0)) os << "thickness must be positive (zeta = " << zeta << ")";
  if (!os.str().empty()) throw Error(ErrorKind::Validation, os.str());
}

double Material::c_magnitude() const {
  return std::sqrt(3.0 * nu * nu - 2.0 * nu + 3.0) * E / (1.0 - nu * nu);
}

}  // namespace kls

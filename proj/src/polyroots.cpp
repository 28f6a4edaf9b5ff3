#include "bubbelator/polyroots.hpp"

namespace bubbelator {

template AberthResult<double> polynomial_roots<double>(const std::vector<double>&, int);
template AberthResult<long double> polynomial_roots<long double>(const std::vector<long double>&,
                                                                 int);

}  // namespace bubbelator

#include "nsv/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nsv {

PeriodicGrid::PeriodicGrid(int n, double length, double dealias_fraction)
    : n_(n), length_(length), dealias_fraction_(dealias_fraction) {
    if (n < 4 || n % 2 != 0)
        throw std::invalid_argument("grid.n must be an even integer >= 4, got " + std::to_string(n));
    if (!(length > 0.0))
        throw std::invalid_argument("grid.L must be positive");
    if (!(dealias_fraction > 0.0) || dealias_fraction > 1.0)
        throw std::invalid_argument("grid.dealias must lie in (0, 1]");

    // Largest m with m < fraction * n/2.  The epsilon keeps exact boundary
    // values (e.g. fraction 0.5 on n = 8) on the strict side.
    max_mode_ = int(std::floor(dealias_fraction * n / 2.0 - 1e-9));
    if (max_mode_ < 1)
        throw std::invalid_argument("grid: dealias mask retains no modes (increase n or dealias)");
}

}  // namespace nsv

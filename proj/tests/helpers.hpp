#pragma once

#include <complex>

#include "nsv/field.hpp"

namespace nsv::test {

/// Field with a single Fourier mode pair: coefficient `amp` at signed mode m
/// (and the conjugate at -m) in component `comp`.
inline SpectralField single_mode(const PeriodicGrid& g, int mx, int my, int mz, int comp,
                                 std::complex<double> amp) {
    SpectralField f(g);
    const int n = g.n();
    const std::size_t p = g.index((mx % n + n) % n, (my % n + n) % n, (mz % n + n) % n);
    const std::size_t q = g.index(((-mx) % n + n) % n, ((-my) % n + n) % n, ((-mz) % n + n) % n);
    f.comp[comp][p] = amp;
    f.comp[comp][q] = std::conj(amp);
    return f;
}

inline double rel_diff(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline double rel_field_diff(const SpectralField& a, const SpectralField& b) {
    const double den = std::max({l2_norm_sq(a), l2_norm_sq(b), 1e-300});
    return std::sqrt(l2_norm_sq(subtract(a, b)) / den);
}

}  // namespace nsv::test

#pragma once

#include <utility>

#include "nsv/field.hpp"
#include "nsv/vec3.hpp"

namespace nsv {

/// Pointwise absorption nonlinearity f(z) = |z|^{r-1} z, r >= 1, with its
/// first three derivatives.  Derivative formulas are evaluated in the
/// normalized form (powers of |z| with nonnegative exponents times unit
/// directions), so they cannot overflow; |z| below `damping_zero_cutoff`
/// takes the zero branch where one exists.
inline constexpr double damping_zero_cutoff = 1e-150;

Vec3 damping_f(const Vec3& z, double r);
/// f'(z)w.  r = 1 gives w; the zero branch applies for 1 < r < 3.
Vec3 damping_d1(const Vec3& z, const Vec3& w, double r);
/// f''(p)[q,g], defined for r >= 2, symmetric in (q,g); zero branch for 2 <= r < 5.
Vec3 damping_d2(const Vec3& p, const Vec3& q, const Vec3& g, double r);
/// f'''(p)[q,g,h], defined for r >= 3, fully symmetric; r = 3 has the closed
/// form 2[(h.q)g + (h.g)q + (g.q)h] valid at every p; zero branch for 3 < r < 7.
Vec3 damping_d3(const Vec3& p, const Vec3& q, const Vec3& g, const Vec3& h, double r);

PhysicalField damping_apply(const PhysicalField& u, double r);
PhysicalField damping_d1_apply(const PhysicalField& z, const PhysicalField& w, double r);
PhysicalField damping_d2_apply(const PhysicalField& p, const PhysicalField& q,
                               const PhysicalField& g, double r);

/// Monotonicity gap of the damping operator: returns
///   lhs = int (f(u1) - f(u2)) . (u1 - u2) dx   (collocation quadrature)
///   rhs = 2^{1-r} ||u1 - u2||_{L^{r+1}}^{r+1}
/// for the assertion lhs >= rhs.
std::pair<double, double> monotonicity_gap(const PhysicalField& u1, const PhysicalField& u2,
                                           double r);

}  // namespace nsv

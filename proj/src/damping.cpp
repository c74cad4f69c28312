#include "nsv/damping.hpp"

#include <cmath>
#include <utility>
#include <stdexcept>

namespace nsv {

Vec3 damping_f(const Vec3& z, double r) {
    if (r < 1.0) throw std::invalid_argument("damping exponent must satisfy r >= 1");
    if (r == 1.0) return z;
    const double zn = norm(z);
    if (zn < damping_zero_cutoff) return {};
    return std::pow(zn, r - 1.0) * z;
}

Vec3 damping_d1(const Vec3& z, const Vec3& w, double r) {
    if (r < 1.0) throw std::invalid_argument("damping exponent must satisfy r >= 1");
    if (r == 1.0) return w;
    const double zn = norm(z);
    if (zn < damping_zero_cutoff) return {};
    const Vec3 e = (1.0 / zn) * z;
    const double p1 = std::pow(zn, r - 1.0);
    return (r - 1.0) * p1 * dot(e, w) * e + p1 * w;
}

// The direction arguments enter through commutative pairings only, so the
// grouping below makes the bilinear form bitwise symmetric in (q, g).
Vec3 damping_d2(const Vec3& p, const Vec3& q, const Vec3& g, double r) {
    if (r < 2.0) throw std::invalid_argument("damping second derivative requires r >= 2");
    const double pn = norm(p);
    if (pn < damping_zero_cutoff) return {};
    const Vec3 e = (1.0 / pn) * p;
    const double p2 = std::pow(pn, r - 2.0);
    const double eq = dot(e, q), eg = dot(e, g), gq = dot(g, q);
    const double c0 = (r - 1.0) * p2;
    const double ce = c0 * ((r - 3.0) * (eq * eg) + gq);
    return ce * e + ((c0 * eq) * g + (c0 * eg) * q);
}

namespace {
bool lex_less(const Vec3& a, const Vec3& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
}
}  // namespace

Vec3 damping_d3(const Vec3& p, const Vec3& q_in, const Vec3& g_in, const Vec3& h_in, double r) {
    if (r < 3.0) throw std::invalid_argument("damping third derivative requires r >= 3");
    // Canonical argument order: the trilinear form is symmetric, and sorting
    // makes that symmetry exact in floating point.
    Vec3 q = q_in, g = g_in, h = h_in;
    if (lex_less(g, q)) std::swap(q, g);
    if (lex_less(h, g)) std::swap(g, h);
    if (lex_less(g, q)) std::swap(q, g);

    const double hq = dot(h, q), hg = dot(h, g), gq = dot(g, q);
    if (r == 3.0) return 2.0 * (hq * g + hg * q + gq * h);
    const double pn = norm(p);
    if (pn < damping_zero_cutoff) return {};
    const Vec3 e = (1.0 / pn) * p;
    const double p3 = std::pow(pn, r - 3.0);
    const double eq = dot(e, q), eg = dot(e, g), eh = dot(e, h);
    Vec3 out = (r - 1.0) * (r - 3.0) * (r - 5.0) * p3 * eq * eg * eh * e;
    out += (r - 1.0) * (r - 3.0) * p3 *
           (eg * hq * e + eq * hg * e + eq * eg * h + eh * (eq * g + eg * q + gq * e));
    out += (r - 1.0) * p3 * (hq * g + hg * q + gq * h);
    return out;
}

PhysicalField damping_apply(const PhysicalField& u, double r) {
    PhysicalField out(u.grid);
    const std::size_t npts = u.grid.points();
    for (std::size_t i = 0; i < npts; ++i) out.set(i, damping_f(u.at(i), r));
    return out;
}

PhysicalField damping_d1_apply(const PhysicalField& z, const PhysicalField& w, double r) {
    if (z.grid != w.grid) throw std::invalid_argument("damping_d1_apply: mismatched grids");
    PhysicalField out(z.grid);
    const std::size_t npts = z.grid.points();
    for (std::size_t i = 0; i < npts; ++i) out.set(i, damping_d1(z.at(i), w.at(i), r));
    return out;
}

PhysicalField damping_d2_apply(const PhysicalField& p, const PhysicalField& q,
                               const PhysicalField& g, double r) {
    if (p.grid != q.grid || p.grid != g.grid)
        throw std::invalid_argument("damping_d2_apply: mismatched grids");
    PhysicalField out(p.grid);
    const std::size_t npts = p.grid.points();
    for (std::size_t i = 0; i < npts; ++i) out.set(i, damping_d2(p.at(i), q.at(i), g.at(i), r));
    return out;
}

std::pair<double, double> monotonicity_gap(const PhysicalField& u1, const PhysicalField& u2,
                                           double r) {
    if (u1.grid != u2.grid) throw std::invalid_argument("monotonicity_gap: mismatched grids");
    const std::size_t npts = u1.grid.points();
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < npts; ++i) {
        const Vec3 a = u1.at(i), b = u2.at(i);
        const Vec3 d = a - b;
        lhs += dot(damping_f(a, r) - damping_f(b, r), d);
        rhs += std::pow(norm(d), r + 1.0);
    }
    const double vol = u1.grid.cell_volume();
    return {lhs * vol, std::pow(2.0, 1.0 - r) * rhs * vol};
}

}  // namespace nsv

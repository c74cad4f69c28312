#include "nsv/operators.hpp"

#include <stdexcept>

#include "nsv/fft.hpp"

namespace nsv {

SpectralField stokes_apply(const SpectralField& u) {
    SpectralField out(u.grid);
    const PeriodicGrid& g = u.grid;
    const int n = g.n();
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const double kx = g.wavenumber(ix), ky = g.wavenumber(iy), kz = g.wavenumber(iz);
                const double k2 = kx * kx + ky * ky + kz * kz;
                for (int c = 0; c < 3; ++c) out.comp[c][i] = k2 * u.comp[c][i];
            }
    return out;
}

VelocityGradient::VelocityGradient(const PeriodicGrid& g) : grid(g) {
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) d[j][i].assign(g.points(), 0.0);
}

VelocityGradient physical_gradient(const SpectralField& u) {
    const PeriodicGrid& g = u.grid;
    const int n = g.n();
    VelocityGradient out(g);
    std::vector<std::complex<double>> buf(g.points());
    for (int j = 0; j < 3; ++j) {
        for (int c = 0; c < 3; ++c) {
            for (int iz = 0; iz < n; ++iz)
                for (int iy = 0; iy < n; ++iy)
                    for (int ix = 0; ix < n; ++ix) {
                        const std::size_t i = g.index(ix, iy, iz);
                        const double kj = j == 0 ? g.wavenumber(ix)
                                        : j == 1 ? g.wavenumber(iy)
                                                 : g.wavenumber(iz);
                        buf[i] = std::complex<double>(0.0, kj) * u.comp[c][i];
                    }
            detail::dft_backward(n, buf.data());
            auto& dst = out.d[j][c];
            for (std::size_t i = 0; i < g.points(); ++i) dst[i] = buf[i].real();
        }
    }
    return out;
}

PhysicalField advect_pointwise(const PhysicalField& a, const VelocityGradient& db) {
    if (a.grid != db.grid) throw std::invalid_argument("advect_pointwise: mismatched grids");
    PhysicalField out(a.grid);
    const std::size_t npts = a.grid.points();
    for (int i = 0; i < 3; ++i) {
        auto& dst = out.comp[i];
        for (std::size_t p = 0; p < npts; ++p)
            dst[p] = a.comp[0][p] * db.d[0][i][p] + a.comp[1][p] * db.d[1][i][p] +
                     a.comp[2][p] * db.d[2][i][p];
    }
    return out;
}

PhysicalField grad_transposed_pointwise(const VelocityGradient& du, const PhysicalField& phi) {
    if (du.grid != phi.grid)
        throw std::invalid_argument("grad_transposed_pointwise: mismatched grids");
    PhysicalField out(phi.grid);
    const std::size_t npts = phi.grid.points();
    for (int i = 0; i < 3; ++i) {
        auto& dst = out.comp[i];
        for (std::size_t p = 0; p < npts; ++p)
            dst[p] = du.d[i][0][p] * phi.comp[0][p] + du.d[i][1][p] * phi.comp[1][p] +
                     du.d[i][2][p] * phi.comp[2][p];
    }
    return out;
}

SpectralField divergence_of_product(const PhysicalField& a, const PhysicalField& phi) {
    if (a.grid != phi.grid) throw std::invalid_argument("divergence_of_product: mismatched grids");
    const PeriodicGrid& g = a.grid;
    const int n = g.n();
    const std::size_t npts = g.points();
    SpectralField out(g);
    PhysicalField prod(g);
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i)
            for (std::size_t p = 0; p < npts; ++p) prod.comp[i][p] = a.comp[j][p] * phi.comp[i][p];
        const SpectralField ps = to_spectral(prod);
        for (int i = 0; i < 3; ++i)
            for (int iz = 0; iz < n; ++iz)
                for (int iy = 0; iy < n; ++iy)
                    for (int ix = 0; ix < n; ++ix) {
                        const std::size_t p = g.index(ix, iy, iz);
                        const double kj = j == 0 ? g.wavenumber(ix)
                                        : j == 1 ? g.wavenumber(iy)
                                                 : g.wavenumber(iz);
                        out.comp[i][p] += std::complex<double>(0.0, kj) * ps.comp[i][p];
                    }
    }
    return out;
}

SpectralField advect(const SpectralField& u, const SpectralField& v) {
    if (u.grid != v.grid) throw std::invalid_argument("advect: mismatched grids");
    return to_spectral(advect_pointwise(to_physical(u), physical_gradient(v)));
}

SpectralField convect(const SpectralField& u, const SpectralField& v) {
    return leray_project(advect(u, v));
}

double trilinear(const SpectralField& u, const SpectralField& v, const SpectralField& w) {
    return inner(advect(u, v), w);
}

}  // namespace nsv

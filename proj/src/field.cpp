#include "nsv/field.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nsv/fft.hpp"

namespace nsv {

namespace {

void check_same_grid(const PeriodicGrid& a, const PeriodicGrid& b) {
    if (a != b) throw std::invalid_argument("field operation on mismatched grids");
}

// Averages coefficients with the conjugate at the mirrored mode so the
// Hermitian symmetry u(-k) = conj(u(k)) holds exactly, not just to roundoff.
void symmetrize(const PeriodicGrid& g, std::vector<std::complex<double>>& c) {
    const int n = g.n();
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t p = g.index(ix, iy, iz);
                const std::size_t q = g.index((n - ix) % n, (n - iy) % n, (n - iz) % n);
                if (p > q) continue;
                if (p == q) {
                    c[p] = std::complex<double>(c[p].real(), 0.0);
                } else {
                    const std::complex<double> avg = 0.5 * (c[p] + std::conj(c[q]));
                    c[p] = avg;
                    c[q] = std::conj(avg);
                }
            }
}

}  // namespace

PhysicalField to_physical(const SpectralField& f) {
    PhysicalField out(f.grid);
    const std::size_t npts = f.grid.points();
    std::vector<std::complex<double>> buf(npts);
    for (int c = 0; c < 3; ++c) {
        std::copy(f.comp[c].begin(), f.comp[c].end(), buf.begin());
        detail::dft_backward(f.grid.n(), buf.data());
        for (std::size_t i = 0; i < npts; ++i) out.comp[c][i] = buf[i].real();
    }
    return out;
}

SpectralField to_spectral(const PhysicalField& f) {
    SpectralField out(f.grid);
    const PeriodicGrid& g = f.grid;
    const int n = g.n();
    const std::size_t npts = g.points();
    const double scale = 1.0 / double(npts);
    std::vector<std::complex<double>> buf(npts);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < npts; ++i) buf[i] = f.comp[c][i];
        detail::dft_forward(n, buf.data());
        auto& dst = out.comp[c];
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix) {
                    const std::size_t i = g.index(ix, iy, iz);
                    dst[i] = g.retained(ix, iy, iz) ? scale * buf[i] : 0.0;
                }
        dst[0] = 0.0;  // zero space average
        symmetrize(g, dst);
    }
    return out;
}

SpectralField leray_project(SpectralField f) {
    const PeriodicGrid& g = f.grid;
    const int n = g.n();
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const Vec3 k{g.wavenumber(ix), g.wavenumber(iy), g.wavenumber(iz)};
                const double k2 = dot(k, k);
                if (k2 == 0.0) {
                    for (int c = 0; c < 3; ++c) f.comp[c][i] = 0.0;
                    continue;
                }
                const std::complex<double> kd =
                    (k.x * f.comp[0][i] + k.y * f.comp[1][i] + k.z * f.comp[2][i]) / k2;
                f.comp[0][i] -= k.x * kd;
                f.comp[1][i] -= k.y * kd;
                f.comp[2][i] -= k.z * kd;
            }
    return f;
}

SpectralField curl(const SpectralField& u) {
    SpectralField out(u.grid);
    const PeriodicGrid& g = u.grid;
    const int n = g.n();
    const std::complex<double> I(0.0, 1.0);
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const double kx = g.wavenumber(ix), ky = g.wavenumber(iy), kz = g.wavenumber(iz);
                const auto ux = u.comp[0][i], uy = u.comp[1][i], uz = u.comp[2][i];
                out.comp[0][i] = I * (ky * uz - kz * uy);
                out.comp[1][i] = I * (kz * ux - kx * uz);
                out.comp[2][i] = I * (kx * uy - ky * ux);
            }
    return out;
}

SpectralField laplacian(const SpectralField& u) {
    SpectralField out(u.grid);
    const PeriodicGrid& g = u.grid;
    const int n = g.n();
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const double kx = g.wavenumber(ix), ky = g.wavenumber(iy), kz = g.wavenumber(iz);
                const double k2 = kx * kx + ky * ky + kz * kz;
                for (int c = 0; c < 3; ++c) out.comp[c][i] = -k2 * u.comp[c][i];
            }
    return out;
}

double l2_norm_sq(const SpectralField& u) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c)
        for (const auto& v : u.comp[c]) s += std::norm(v);
    return s * u.grid.volume();
}

double l2_norm_sq(const PhysicalField& u) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c)
        for (double v : u.comp[c]) s += v * v;
    return s * u.grid.cell_volume();
}

double gradient_norm_sq(const SpectralField& u) {
    const PeriodicGrid& g = u.grid;
    const int n = g.n();
    double s = 0.0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const double kx = g.wavenumber(ix), ky = g.wavenumber(iy), kz = g.wavenumber(iz);
                const double k2 = kx * kx + ky * ky + kz * kz;
                s += k2 * (std::norm(u.comp[0][i]) + std::norm(u.comp[1][i]) + std::norm(u.comp[2][i]));
            }
    return s * g.volume();
}

double lp_norm(const PhysicalField& u, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm requires p >= 1");
    const std::size_t npts = u.grid.points();
    double s = 0.0;
    for (std::size_t i = 0; i < npts; ++i) s += std::pow(norm(u.at(i)), p);
    return std::pow(s * u.grid.cell_volume(), 1.0 / p);
}

double lp_norm(const SpectralField& u, double p) { return lp_norm(to_physical(u), p); }

double inner(const SpectralField& a, const SpectralField& b) {
    check_same_grid(a.grid, b.grid);
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& x = a.comp[c];
        const auto& y = b.comp[c];
        for (std::size_t i = 0; i < x.size(); ++i)
            s += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    }
    return s * a.grid.volume();
}

double inner(const PhysicalField& a, const PhysicalField& b) {
    check_same_grid(a.grid, b.grid);
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& x = a.comp[c];
        const auto& y = b.comp[c];
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    }
    return s * a.grid.cell_volume();
}

double v_inner(const SpectralField& a, const SpectralField& b) {
    check_same_grid(a.grid, b.grid);
    const PeriodicGrid& g = a.grid;
    const int n = g.n();
    double s = 0.0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const double kx = g.wavenumber(ix), ky = g.wavenumber(iy), kz = g.wavenumber(iz);
                const double k2 = kx * kx + ky * ky + kz * kz;
                double dotc = 0.0;
                for (int c = 0; c < 3; ++c)
                    dotc += a.comp[c][i].real() * b.comp[c][i].real() +
                            a.comp[c][i].imag() * b.comp[c][i].imag();
                s += k2 * dotc;
            }
    return s * g.volume();
}

void add_scaled(SpectralField& y, double a, const SpectralField& x) {
    check_same_grid(y.grid, x.grid);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < y.comp[c].size(); ++i) y.comp[c][i] += a * x.comp[c][i];
}

void add_scaled(PhysicalField& y, double a, const PhysicalField& x) {
    check_same_grid(y.grid, x.grid);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < y.comp[c].size(); ++i) y.comp[c][i] += a * x.comp[c][i];
}

void scale(SpectralField& y, double a) {
    for (int c = 0; c < 3; ++c)
        for (auto& v : y.comp[c]) v *= a;
}

void scale(PhysicalField& y, double a) {
    for (int c = 0; c < 3; ++c)
        for (auto& v : y.comp[c]) v *= a;
}

SpectralField subtract(const SpectralField& a, const SpectralField& b) {
    SpectralField out = a;
    add_scaled(out, -1.0, b);
    return out;
}

PhysicalField subtract(const PhysicalField& a, const PhysicalField& b) {
    PhysicalField out = a;
    add_scaled(out, -1.0, b);
    return out;
}

double max_abs(const PhysicalField& u) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c)
        for (double v : u.comp[c]) m = std::max(m, std::abs(v));
    return m;
}

double max_abs(const SpectralField& u) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c)
        for (const auto& v : u.comp[c]) m = std::max(m, std::abs(v));
    return m;
}

double relative_divergence(const SpectralField& u) {
    const PeriodicGrid& g = u.grid;
    const int n = g.n();
    double div_max = 0.0, ref = 0.0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const double kx = g.wavenumber(ix), ky = g.wavenumber(iy), kz = g.wavenumber(iz);
                const std::complex<double> d =
                    kx * u.comp[0][i] + ky * u.comp[1][i] + kz * u.comp[2][i];
                const double kn = std::sqrt(kx * kx + ky * ky + kz * kz);
                const double un = std::sqrt(std::norm(u.comp[0][i]) + std::norm(u.comp[1][i]) +
                                            std::norm(u.comp[2][i]));
                div_max = std::max(div_max, std::abs(d));
                ref = std::max(ref, kn * un);
            }
    return ref > 0.0 ? div_max / ref : 0.0;
}

bool all_finite(const PhysicalField& u) {
    for (int c = 0; c < 3; ++c)
        for (double v : u.comp[c])
            if (!std::isfinite(v)) return false;
    return true;
}

bool all_finite(const SpectralField& u) {
    for (int c = 0; c < 3; ++c)
        for (const auto& v : u.comp[c])
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

SpectralField zero_spectral(const PeriodicGrid& g) { return SpectralField(g); }
PhysicalField zero_physical(const PeriodicGrid& g) { return PhysicalField(g); }

SpectralField taylor_green(const PeriodicGrid& g, double amplitude) {
    PhysicalField u(g);
    const int n = g.n();
    const double a = 2.0 * std::numbers::pi / g.length();
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const double x = a * ix * g.spacing();
                const double y = a * iy * g.spacing();
                const double z = a * iz * g.spacing();
                u.comp[0][i] = amplitude * std::sin(x) * std::cos(y) * std::cos(z);
                u.comp[1][i] = -amplitude * std::cos(x) * std::sin(y) * std::cos(z);
                u.comp[2][i] = 0.0;
            }
    return leray_project(to_spectral(u));
}

SpectralField random_divfree(const PeriodicGrid& g, double amplitude, std::uint64_t seed,
                             double mode_decay) {
    SpectralField f(g);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = g.n();
    const double m0 = mode_decay > 0.0 ? mode_decay : std::max(1.5, 0.5 * g.max_mode());
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                if (!g.retained(ix, iy, iz)) continue;
                const std::size_t i = g.index(ix, iy, iz);
                const double mx = g.freq(ix), my = g.freq(iy), mz = g.freq(iz);
                const double m2 = mx * mx + my * my + mz * mz;
                if (m2 == 0.0) continue;
                const double w = std::exp(-m2 / (m0 * m0));
                for (int c = 0; c < 3; ++c)
                    f.comp[c][i] = w * std::complex<double>(normal(rng), normal(rng));
            }
    for (int c = 0; c < 3; ++c) symmetrize(g, f.comp[c]);
    f = leray_project(std::move(f));
    const double nrm = std::sqrt(l2_norm_sq(f));
    if (nrm > 0.0) scale(f, amplitude / nrm);
    return f;
}

PhysicalField random_physical(const PeriodicGrid& g, double amplitude, std::uint64_t seed) {
    SpectralField f(g);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = g.n();
    const double m0 = std::max(1.5, 0.5 * g.max_mode());
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                if (!g.retained(ix, iy, iz)) continue;
                const std::size_t i = g.index(ix, iy, iz);
                const double mx = g.freq(ix), my = g.freq(iy), mz = g.freq(iz);
                const double m2 = mx * mx + my * my + mz * mz;
                const double w = std::exp(-m2 / (m0 * m0));
                for (int c = 0; c < 3; ++c)
                    f.comp[c][i] = w * std::complex<double>(normal(rng), normal(rng));
            }
    for (int c = 0; c < 3; ++c) symmetrize(g, f.comp[c]);
    PhysicalField u = to_physical(f);
    const double m = max_abs(u);
    if (m > 0.0) scale(u, amplitude / m);
    return u;
}

}  // namespace nsv

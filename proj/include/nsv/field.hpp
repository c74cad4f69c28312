#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "nsv/grid.hpp"
#include "nsv/vec3.hpp"

namespace nsv {

/// Velocity field as Fourier coefficients on the full logical n^3 spectrum
/// (x-fastest layout).  Fields produced by this module are Hermitian
/// (real-valued in physical space), zero-mean, and supported on the grid's
/// dealias mask; divergence-freeness is stated per operation.
struct SpectralField {
    PeriodicGrid grid;
    std::array<std::vector<std::complex<double>>, 3> comp;

    explicit SpectralField(const PeriodicGrid& g)
        : grid(g), comp{std::vector<std::complex<double>>(g.points()),
                        std::vector<std::complex<double>>(g.points()),
                        std::vector<std::complex<double>>(g.points())} {}
};

/// Real-valued velocity samples on the collocation points.
struct PhysicalField {
    PeriodicGrid grid;
    std::array<std::vector<double>, 3> comp;

    explicit PhysicalField(const PeriodicGrid& g)
        : grid(g), comp{std::vector<double>(g.points()), std::vector<double>(g.points()),
                        std::vector<double>(g.points())} {}

    Vec3 at(std::size_t i) const { return {comp[0][i], comp[1][i], comp[2][i]}; }
    void set(std::size_t i, const Vec3& v) {
        comp[0][i] = v.x;
        comp[1][i] = v.y;
        comp[2][i] = v.z;
    }
};

// Transforms.  to_spectral applies the dealias mask, enforces exact Hermitian
// symmetry and zeroes the mean mode; to_physical inverts on the retained modes.
PhysicalField to_physical(const SpectralField& f);
SpectralField to_spectral(const PhysicalField& f);

/// Helmholtz-Hodge projection onto divergence-free fields:
/// u(k) -> (I - k k^T/|k|^2) u(k) for k != 0, and the k = 0 mode is zeroed.
SpectralField leray_project(SpectralField f);

SpectralField curl(const SpectralField& u);
SpectralField laplacian(const SpectralField& u);

// Norms and inner products.  Spectral sums carry the L^3 Parseval factor so
// they agree with physical-space quadrature; lp_norm uses collocation-point
// quadrature with the Euclidean 3-vector magnitude per point.
double l2_norm_sq(const SpectralField& u);
double l2_norm_sq(const PhysicalField& u);
double gradient_norm_sq(const SpectralField& u);
double lp_norm(const PhysicalField& u, double p);
double lp_norm(const SpectralField& u, double p);
double inner(const SpectralField& a, const SpectralField& b);
double inner(const PhysicalField& a, const PhysicalField& b);
/// <grad a, grad b> evaluated spectrally.
double v_inner(const SpectralField& a, const SpectralField& b);

// In-place arithmetic.
void add_scaled(SpectralField& y, double a, const SpectralField& x);
void add_scaled(PhysicalField& y, double a, const PhysicalField& x);
void scale(SpectralField& y, double a);
void scale(PhysicalField& y, double a);
SpectralField subtract(const SpectralField& a, const SpectralField& b);
PhysicalField subtract(const PhysicalField& a, const PhysicalField& b);

// Diagnostics.
double max_abs(const PhysicalField& u);
double max_abs(const SpectralField& u);
/// max_k |k . u(k)| normalized by max_k |k||u(k)|; zero field gives 0.
double relative_divergence(const SpectralField& u);
bool all_finite(const PhysicalField& u);
bool all_finite(const SpectralField& u);

// Constructors.
SpectralField zero_spectral(const PeriodicGrid& g);
PhysicalField zero_physical(const PeriodicGrid& g);
/// Taylor-Green vortex, divergence-free, peak component amplitude `amplitude`.
SpectralField taylor_green(const PeriodicGrid& g, double amplitude);
/// Random divergence-free zero-mean field with smoothly decaying spectrum,
/// scaled so its L^2 norm equals `amplitude`.  mode_decay sets the Gaussian
/// spectral width in mode units; 0 picks half the retained band.
SpectralField random_divfree(const PeriodicGrid& g, double amplitude, std::uint64_t seed,
                             double mode_decay = 0.0);
/// Random smooth real field (not projected, may carry mean and gradient
/// parts), scaled so max |component| equals `amplitude`.
PhysicalField random_physical(const PeriodicGrid& g, double amplitude, std::uint64_t seed);

}  // namespace nsv

#pragma once

#include "nsv/field.hpp"

namespace nsv {

/// Stokes operator A = -P Laplacian, diagonal per mode: u(k) -> |k|^2 u(k).
SpectralField stokes_apply(const SpectralField& u);

/// Physical-space samples of all nine velocity derivatives, d[j][i] = d_j u_i,
/// computed spectrally.  Shared between the forward, tangent and adjoint sweeps.
struct VelocityGradient {
    PeriodicGrid grid;
    std::array<std::array<std::vector<double>, 3>, 3> d;

    explicit VelocityGradient(const PeriodicGrid& g);
};

VelocityGradient physical_gradient(const SpectralField& u);

/// (u . grad) v evaluated pseudo-spectrally, dealiased, without projection.
SpectralField advect(const SpectralField& u, const SpectralField& v);
/// Bilinear operator B(u,v) = P (u . grad) v.
SpectralField convect(const SpectralField& u, const SpectralField& v);
/// Trilinear form b(u,v,w) = int (u . grad) v . w dx on dealiased fields.
double trilinear(const SpectralField& u, const SpectralField& v, const SpectralField& w);

// Pointwise physical-space kernels used by the time steppers.  Each returns
// samples of one advective product; callers accumulate, transform, dealias and
// project once per step.
//   advect_pointwise      : (a . grad) b from a's samples and b's gradient
PhysicalField advect_pointwise(const PhysicalField& a, const VelocityGradient& db);
/// (grad u)^T phi, component i = sum_j (d_i u_j) phi_j.
PhysicalField grad_transposed_pointwise(const VelocityGradient& du, const PhysicalField& phi);
/// Conservative divergence sum_j d_j (a_j phi_i), the exact discrete transpose
/// of the dealiased (a . grad) applied to divergence-free a.  Spectral output,
/// dealiased, not projected.
SpectralField divergence_of_product(const PhysicalField& a, const PhysicalField& phi);

}  // namespace nsv

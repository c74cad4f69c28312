#include "nsv/sensitivity.hpp"

#include <cmath>

#include "nsv/damping.hpp"
#include "nsv/operators.hpp"

namespace nsv {

TargetField zero_target(const PeriodicGrid& g, const TimeGrid& tg) {
    TargetField t{tg, {}};
    t.frames.assign(tg.steps + 1, zero_spectral(g));
    return t;
}

TargetField target_from_trajectory(const Trajectory& traj) {
    return TargetField{traj.time_grid, traj.states};
}

TargetField make_target(std::vector<SpectralField> frames, const TimeGrid& tg) {
    if (int(frames.size()) != tg.steps + 1)
        throw std::invalid_argument("make_target: need one frame per time node");
    TargetField t{tg, {}};
    t.frames.reserve(frames.size());
    for (auto& f : frames) t.frames.push_back(leray_project(std::move(f)));
    return t;
}

namespace {

void check_base(const Trajectory& base) {
    if (int(base.states.size()) != base.time_grid.steps + 1)
        throw std::invalid_argument("trajectory does not match its time grid");
}

// Diagonal factors of the scheme, per |k|^2.
inline double voigt_mass(const ModelParams& p, double k2) { return 1.0 + p.mu * k2; }
inline double implicit_mass(const ModelParams& p, double k2, double dt) {
    return 1.0 + p.mu * k2 + dt * (p.nu * k2 + p.alpha);
}

// P T[(w.grad)u + (u.grad)w + beta f'(u) w]; linearization of the explicit
// terms around the base state u.
SpectralField tangent_transport(const SpectralField& w, const PhysicalField& u_phys,
                                const VelocityGradient& du, const ModelParams& p,
                                bool convection) {
    const PhysicalField w_phys = to_physical(w);
    PhysicalField acc = zero_physical(w.grid);
    if (convection) {
        const VelocityGradient dw = physical_gradient(w);
        acc = advect_pointwise(w_phys, du);
        add_scaled(acc, 1.0, advect_pointwise(u_phys, dw));
    }
    if (p.beta != 0.0) add_scaled(acc, p.beta, damping_d1_apply(u_phys, w_phys, p.r));
    return leray_project(to_spectral(acc));
}

// Exact transpose of tangent_transport in the L^2 pairing, restricted to
// divergence-free costates:
//   P[ T((grad u)^T phi + beta f'(u) phi) - sum_j d_j T(u_j phi_i) ].
SpectralField adjoint_transport(const SpectralField& phi, const PhysicalField& u_phys,
                                const VelocityGradient& du, const ModelParams& p,
                                bool convection) {
    const PhysicalField phi_phys = to_physical(phi);
    PhysicalField acc = zero_physical(phi.grid);
    if (convection) acc = grad_transposed_pointwise(du, phi_phys);
    if (p.beta != 0.0) add_scaled(acc, p.beta, damping_d1_apply(u_phys, phi_phys, p.r));
    SpectralField out = to_spectral(acc);
    if (convection) add_scaled(out, -1.0, divergence_of_product(u_phys, phi_phys));
    return leray_project(std::move(out));
}

// Derivative of adjoint_transport with respect to the base state in direction
// w: P[ T((grad w)^T phi + beta f''(u)[w, phi]) - sum_j d_j T(w_j phi_i) ].
SpectralField adjoint_transport_diff(const SpectralField& phi, const PhysicalField& u_phys,
                                     const SpectralField& w, const ModelParams& p,
                                     bool convection) {
    const PhysicalField phi_phys = to_physical(phi);
    const PhysicalField w_phys = to_physical(w);
    PhysicalField acc = zero_physical(phi.grid);
    if (convection) {
        const VelocityGradient dw = physical_gradient(w);
        acc = grad_transposed_pointwise(dw, phi_phys);
    }
    if (p.beta != 0.0) add_scaled(acc, p.beta, damping_d2_apply(u_phys, w_phys, phi_phys, p.r));
    SpectralField out = to_spectral(acc);
    if (convection) add_scaled(out, -1.0, divergence_of_product(w_phys, phi_phys));
    return leray_project(std::move(out));
}

void guard_finite(const SpectralField& f, int step_index, double limit) {
    if (!all_finite(f) || max_abs(f) > limit) throw BlowupError(step_index);
}

// kappa |k|^2 e(k): spectral source from the weak-form pairing
// kappa (grad e, grad v).
SpectralField misfit_source(const SpectralField& state, const SpectralField& target_frame,
                            double kappa, double sign) {
    SpectralField e = subtract(state, target_frame);
    const PeriodicGrid& g = e.grid;
    const int n = g.n();
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const double kx = g.wavenumber(ix), ky = g.wavenumber(iy), kz = g.wavenumber(iz);
                const double w = sign * kappa * (kx * kx + ky * ky + kz * kz);
                for (int c = 0; c < 3; ++c) e.comp[c][i] *= w;
            }
    return e;
}

}  // namespace

Trajectory solve_linearized(const Trajectory& base, const ControlSchedule& V,
                            const ModelParams& p, const SolverOptions& opts) {
    check_base(base);
    if (base.time_grid != V.time_grid)
        throw std::invalid_argument("solve_linearized: time grid mismatch");
    const PeriodicGrid& g = base.states[0].grid;
    const TimeGrid tg = base.time_grid;
    const double dt = tg.dt();
    const bool convection = !opts.disable_convection;

    Trajectory w{tg, {}};
    w.states.reserve(tg.steps + 1);
    w.states.push_back(zero_spectral(g));

    const int nn = g.n();
    for (int n = 0; n < tg.steps; ++n) {
        const SpectralField& un = base.states[n];
        const PhysicalField u_phys = to_physical(un);
        const VelocityGradient du = physical_gradient(un);
        const SpectralField lin = tangent_transport(w.states[n], u_phys, du, p, convection);
        const SpectralField vn = leray_project(to_spectral(V.frames[n]));
        SpectralField next(g);
        for (int iz = 0; iz < nn; ++iz)
            for (int iy = 0; iy < nn; ++iy)
                for (int ix = 0; ix < nn; ++ix) {
                    const std::size_t i = g.index(ix, iy, iz);
                    const double kx = g.wavenumber(ix), ky = g.wavenumber(iy),
                                 kz = g.wavenumber(iz);
                    const double k2 = kx * kx + ky * ky + kz * kz;
                    const double m = implicit_mass(p, k2, dt);
                    const double vm = voigt_mass(p, k2);
                    for (int c = 0; c < 3; ++c)
                        next.comp[c][i] = (vm * w.states[n].comp[c][i] +
                                           dt * (vn.comp[c][i] - lin.comp[c][i])) /
                                          m;
                }
        guard_finite(next, n + 1, opts.blowup_limit);
        w.states.push_back(std::move(next));
    }
    return w;
}

AdjointTrajectory solve_adjoint(const Trajectory& base, const TargetField& target,
                                const ModelParams& p, double kappa, const AdjointOptions& opts) {
    check_base(base);
    if (base.time_grid != target.time_grid)
        throw std::invalid_argument("solve_adjoint: time grid mismatch");
    const PeriodicGrid& g = base.states[0].grid;
    const TimeGrid tg = base.time_grid;
    const double dt = tg.dt();
    const double source_sign = opts.flip_source_sign ? -1.0 : 1.0;

    AdjointTrajectory adj{tg, {}};
    adj.costates.assign(tg.steps + 1, zero_spectral(g));

    // The diagonal terminal condition (1 + mu|k|^2) phi(T) = 0 forces phi(T) = 0.
    const int nn = g.n();
    for (int m = tg.steps - 1; m >= 0; --m) {
        const SpectralField& um = base.states[m];
        const PhysicalField u_phys = to_physical(um);
        const VelocityGradient du = physical_gradient(um);
        const SpectralField transported =
            adjoint_transport(adj.costates[m + 1], u_phys, du, p, true);
        const SpectralField src = misfit_source(um, target.frames[m], kappa, source_sign);
        SpectralField phim(g);
        for (int iz = 0; iz < nn; ++iz)
            for (int iy = 0; iy < nn; ++iy)
                for (int ix = 0; ix < nn; ++ix) {
                    const std::size_t i = g.index(ix, iy, iz);
                    const double kx = g.wavenumber(ix), ky = g.wavenumber(iy),
                                 kz = g.wavenumber(iz);
                    const double k2 = kx * kx + ky * ky + kz * kz;
                    const double m_impl = implicit_mass(p, k2, dt);
                    const double vm = voigt_mass(p, k2);
                    for (int c = 0; c < 3; ++c)
                        phim.comp[c][i] = (vm * adj.costates[m + 1].comp[c][i] +
                                           dt * (src.comp[c][i] - transported.comp[c][i])) /
                                          m_impl;
                }
        guard_finite(phim, m, opts.blowup_limit);
        adj.costates[m] = std::move(phim);
    }
    return adj;
}

AdjointTrajectory solve_adjoint_checkpointed(const SpectralField& u0,
                                             const ControlSchedule& control,
                                             const TargetField& target, const ModelParams& p,
                                             double kappa, int stride,
                                             const SolverOptions& fwd_opts,
                                             const AdjointOptions& opts) {
    if (stride < 1) throw std::invalid_argument("checkpoint stride must be >= 1");
    const TimeGrid tg = control.time_grid;
    const double dt = tg.dt();
    const PeriodicGrid& g = u0.grid;

    // Level one: forward pass keeping every stride-th state.
    std::vector<SpectralField> checkpoints;
    SpectralField u = leray_project(u0);
    checkpoints.push_back(u);
    for (int n = 0; n < tg.steps; ++n) {
        u = step(u, control.frames[n], p, dt, fwd_opts);
        if ((n + 1) % stride == 0 || n + 1 == tg.steps) checkpoints.push_back(u);
    }

    AdjointTrajectory adj{tg, {}};
    adj.costates.assign(tg.steps + 1, zero_spectral(g));

    const double source_sign = opts.flip_source_sign ? -1.0 : 1.0;
    const int nn = g.n();

    // Level two: walk segments backwards, recomputing the interior states of
    // each segment from its checkpoint (bit-identical to the forward pass).
    int seg_end = tg.steps;
    while (seg_end > 0) {
        const int seg_start = ((seg_end - 1) / stride) * stride;
        const int ckpt_index = seg_start / stride;
        std::vector<SpectralField> seg_states;
        seg_states.push_back(checkpoints[ckpt_index]);
        for (int n = seg_start; n < seg_end - 1; ++n)
            seg_states.push_back(step(seg_states.back(), control.frames[n], p, dt, fwd_opts));

        for (int m = seg_end - 1; m >= seg_start; --m) {
            const SpectralField& um = seg_states[m - seg_start];
            const PhysicalField u_phys = to_physical(um);
            const VelocityGradient du = physical_gradient(um);
            const SpectralField transported =
                adjoint_transport(adj.costates[m + 1], u_phys, du, p, true);
            const SpectralField src = misfit_source(um, target.frames[m], kappa, source_sign);
            SpectralField phim(g);
            for (int iz = 0; iz < nn; ++iz)
                for (int iy = 0; iy < nn; ++iy)
                    for (int ix = 0; ix < nn; ++ix) {
                        const std::size_t i = g.index(ix, iy, iz);
                        const double kx = g.wavenumber(ix), ky = g.wavenumber(iy),
                                     kz = g.wavenumber(iz);
                        const double k2 = kx * kx + ky * ky + kz * kz;
                        const double m_impl = implicit_mass(p, k2, dt);
                        const double vm = voigt_mass(p, k2);
                        for (int c = 0; c < 3; ++c)
                            phim.comp[c][i] = (vm * adj.costates[m + 1].comp[c][i] +
                                               dt * (src.comp[c][i] - transported.comp[c][i])) /
                                              m_impl;
                    }
            adj.costates[m] = std::move(phim);
        }
        seg_end = seg_start;
    }
    return adj;
}

DualityResult duality_check(const Trajectory& base, const ControlSchedule& V,
                            const TargetField& target, const ModelParams& p, double kappa,
                            const AdjointOptions& opts) {
    const Trajectory w = solve_linearized(base, V, p);
    const AdjointTrajectory adj = solve_adjoint(base, target, p, kappa, opts);
    const double dt = base.time_grid.dt();

    DualityResult res;
    for (int n = 0; n < base.time_grid.steps; ++n) {
        const SpectralField misfit = subtract(base.states[n], target.frames[n]);
        res.lhs += dt * kappa * v_inner(w.states[n], misfit);
        res.rhs += dt * inner(to_physical(adj.costates[n + 1]), V.frames[n]);
    }
    const double scale = std::max({std::abs(res.lhs), std::abs(res.rhs), 1e-300});
    res.rel_err = std::abs(res.lhs - res.rhs) / scale;
    return res;
}

AdjointTrajectory solve_second_adjoint(const Trajectory& base, const AdjointTrajectory& adjoint,
                                       const Trajectory& w, const ModelParams& p, double kappa) {
    check_base(base);
    if (p.r < 2.0)
        throw std::invalid_argument("second-order adjoint requires damping exponent r >= 2");
    if (base.time_grid != adjoint.time_grid || base.time_grid != w.time_grid)
        throw std::invalid_argument("solve_second_adjoint: time grid mismatch");
    const PeriodicGrid& g = base.states[0].grid;
    const TimeGrid tg = base.time_grid;
    const double dt = tg.dt();

    AdjointTrajectory out{tg, {}};
    out.costates.assign(tg.steps + 1, zero_spectral(g));

    const int nn = g.n();
    for (int m = tg.steps - 1; m >= 0; --m) {
        const SpectralField& um = base.states[m];
        const PhysicalField u_phys = to_physical(um);
        const VelocityGradient du = physical_gradient(um);
        const SpectralField transported =
            adjoint_transport(out.costates[m + 1], u_phys, du, p, true);
        const SpectralField coupled =
            adjoint_transport_diff(adjoint.costates[m + 1], u_phys, w.states[m], p, true);
        // Source kappa A w_m from differentiating the misfit term.
        SpectralField src = w.states[m];
        for (int iz = 0; iz < nn; ++iz)
            for (int iy = 0; iy < nn; ++iy)
                for (int ix = 0; ix < nn; ++ix) {
                    const std::size_t i = g.index(ix, iy, iz);
                    const double kx = g.wavenumber(ix), ky = g.wavenumber(iy),
                                 kz = g.wavenumber(iz);
                    const double wgt = kappa * (kx * kx + ky * ky + kz * kz);
                    for (int c = 0; c < 3; ++c) src.comp[c][i] *= wgt;
                }
        SpectralField phim(g);
        for (int iz = 0; iz < nn; ++iz)
            for (int iy = 0; iy < nn; ++iy)
                for (int ix = 0; ix < nn; ++ix) {
                    const std::size_t i = g.index(ix, iy, iz);
                    const double kx = g.wavenumber(ix), ky = g.wavenumber(iy),
                                 kz = g.wavenumber(iz);
                    const double k2 = kx * kx + ky * ky + kz * kz;
                    const double m_impl = implicit_mass(p, k2, dt);
                    const double vm = voigt_mass(p, k2);
                    for (int c = 0; c < 3; ++c)
                        phim.comp[c][i] =
                            (vm * out.costates[m + 1].comp[c][i] +
                             dt * (src.comp[c][i] - transported.comp[c][i] - coupled.comp[c][i])) /
                            m_impl;
                }
        out.costates[m] = std::move(phim);
    }
    return out;
}

}  // namespace nsv

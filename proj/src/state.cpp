#include "nsv/state.hpp"

#include <cmath>

#include "nsv/damping.hpp"
#include "nsv/operators.hpp"

namespace nsv {

void ModelParams::validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("model.mu must be positive");
    if (!(nu > 0.0)) throw std::invalid_argument("model.nu must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("model.alpha must be positive");
    if (!(beta > 0.0)) throw std::invalid_argument("model.beta must be positive");
    if (!(r >= 1.0)) throw std::invalid_argument("model.r must satisfy r >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("time.T must be positive");
}

ControlSchedule zero_control(const PeriodicGrid& g, const TimeGrid& tg) {
    ControlSchedule c{tg, {}};
    c.frames.assign(tg.steps, zero_physical(g));
    return c;
}

ControlSchedule random_control(const PeriodicGrid& g, const TimeGrid& tg, double amplitude,
                               std::uint64_t seed) {
    ControlSchedule c{tg, {}};
    c.frames.reserve(tg.steps);
    for (int n = 0; n < tg.steps; ++n)
        c.frames.push_back(random_physical(g, amplitude, seed + 977 * std::uint64_t(n + 1)));
    return c;
}

double schedule_inner(const ControlSchedule& a, const ControlSchedule& b) {
    if (a.time_grid != b.time_grid || a.frames.size() != b.frames.size())
        throw std::invalid_argument("schedule_inner: mismatched schedules");
    double s = 0.0;
    for (std::size_t n = 0; n < a.frames.size(); ++n) s += inner(a.frames[n], b.frames[n]);
    return s * a.time_grid.dt();
}

double schedule_norm_sq(const ControlSchedule& a) { return schedule_inner(a, a); }

void schedule_add_scaled(ControlSchedule& y, double a, const ControlSchedule& x) {
    if (y.frames.size() != x.frames.size())
        throw std::invalid_argument("schedule_add_scaled: mismatched schedules");
    for (std::size_t n = 0; n < y.frames.size(); ++n) add_scaled(y.frames[n], a, x.frames[n]);
}

void schedule_scale(ControlSchedule& y, double a) {
    for (auto& f : y.frames) scale(f, a);
}

namespace {

// Explicit part of the update: P T[U - (u.grad)u - beta f(u)], built from one
// fused physical-space accumulation and a single transform.
SpectralField explicit_rhs(const SpectralField& u, const PhysicalField& control,
                           const ModelParams& p, const SolverOptions& opts) {
    PhysicalField acc = control;
    const PhysicalField u_phys = to_physical(u);
    if (!opts.disable_convection) {
        const VelocityGradient du = physical_gradient(u);
        const PhysicalField conv = advect_pointwise(u_phys, du);
        add_scaled(acc, -1.0, conv);
    }
    if (p.beta != 0.0) {
        const PhysicalField damp = damping_apply(u_phys, p.r);
        add_scaled(acc, -p.beta, damp);
    }
    return leray_project(to_spectral(acc));
}

void apply_implicit_solve(SpectralField& rhs, const ModelParams& p, double dt) {
    const PeriodicGrid& g = rhs.grid;
    const int n = g.n();
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const double kx = g.wavenumber(ix), ky = g.wavenumber(iy), kz = g.wavenumber(iz);
                const double k2 = kx * kx + ky * ky + kz * kz;
                const double m = 1.0 + p.mu * k2 + dt * (p.nu * k2 + p.alpha);
                for (int c = 0; c < 3; ++c) rhs.comp[c][i] /= m;
            }
}

void guard(const SpectralField& u, int step_index, double limit) {
    if (!all_finite(u)) throw BlowupError(step_index);
    const PhysicalField up = to_physical(u);
    if (max_abs(up) > limit) throw BlowupError(step_index);
}

}  // namespace

SpectralField step(const SpectralField& u, const PhysicalField& control, const ModelParams& p,
                   double dt, const SolverOptions& opts) {
    const PeriodicGrid& g = u.grid;
    if (control.grid != g) throw std::invalid_argument("step: control grid mismatch");
    const SpectralField expl = explicit_rhs(u, control, p, opts);
    SpectralField next(g);
    const int n = g.n();
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const std::size_t i = g.index(ix, iy, iz);
                const double kx = g.wavenumber(ix), ky = g.wavenumber(iy), kz = g.wavenumber(iz);
                const double k2 = kx * kx + ky * ky + kz * kz;
                const double vm = 1.0 + p.mu * k2;
                for (int c = 0; c < 3; ++c)
                    next.comp[c][i] = vm * u.comp[c][i] + dt * expl.comp[c][i];
            }
    apply_implicit_solve(next, p, dt);
    return next;
}

Trajectory solve_forward(const SpectralField& u0, const ControlSchedule& control,
                         const ModelParams& p, const SolverOptions& opts) {
    p.validate();
    const PeriodicGrid& g = u0.grid;
    const TimeGrid tg = control.time_grid;
    if (int(control.frames.size()) != tg.steps)
        throw std::invalid_argument("solve_forward: control frame count != steps");
    const double dt = tg.dt();

    Trajectory traj{tg, {}};
    traj.states.reserve(tg.steps + 1);
    traj.states.push_back(leray_project(u0));
    guard(traj.states[0], 0, opts.blowup_limit);

    if (opts.scheme == TimeScheme::imex_euler) {
        for (int n = 0; n < tg.steps; ++n) {
            traj.states.push_back(step(traj.states[n], control.frames[n], p, dt, opts));
            guard(traj.states[n + 1], n + 1, opts.blowup_limit);
        }
        return traj;
    }

    // CNAB: Crank-Nicolson on the dissipative part, Adams-Bashforth 2 on the
    // nonlinear terms, first step uses the Euler value for the missing level.
    SpectralField nl_prev(g);
    for (int n = 0; n < tg.steps; ++n) {
        const SpectralField& un = traj.states[n];
        const SpectralField nl = explicit_rhs(un, control.frames[n], p, opts);
        const SpectralField& nl_old = n == 0 ? nl : nl_prev;
        SpectralField next(g);
        const int nn = g.n();
        for (int iz = 0; iz < nn; ++iz)
            for (int iy = 0; iy < nn; ++iy)
                for (int ix = 0; ix < nn; ++ix) {
                    const std::size_t i = g.index(ix, iy, iz);
                    const double kx = g.wavenumber(ix), ky = g.wavenumber(iy),
                                 kz = g.wavenumber(iz);
                    const double k2 = kx * kx + ky * ky + kz * kz;
                    const double diss = p.nu * k2 + p.alpha;
                    const double lhs = 1.0 + p.mu * k2 + 0.5 * dt * diss;
                    const double rhs = 1.0 + p.mu * k2 - 0.5 * dt * diss;
                    for (int c = 0; c < 3; ++c)
                        next.comp[c][i] = (rhs * un.comp[c][i] +
                                           dt * (1.5 * nl.comp[c][i] - 0.5 * nl_old.comp[c][i])) /
                                          lhs;
                }
        nl_prev = nl;
        traj.states.push_back(std::move(next));
        guard(traj.states[n + 1], n + 1, opts.blowup_limit);
    }
    return traj;
}

std::vector<double> scheme_balance_residual(const Trajectory& traj, const ControlSchedule& control,
                                            const ModelParams& p, const SolverOptions& opts) {
    const PeriodicGrid& g = traj.states[0].grid;
    const double dt = traj.time_grid.dt();
    std::vector<double> out;
    out.reserve(traj.time_grid.steps);
    for (int n = 0; n < traj.time_grid.steps; ++n) {
        const SpectralField& un = traj.states[n];
        const SpectralField& u1 = traj.states[n + 1];
        const SpectralField expl = explicit_rhs(un, control.frames[n], p, opts);
        double t_mass = 0.0, t_diss = 0.0, t_expl = 0.0;
        const int nn = g.n();
        for (int iz = 0; iz < nn; ++iz)
            for (int iy = 0; iy < nn; ++iy)
                for (int ix = 0; ix < nn; ++ix) {
                    const std::size_t i = g.index(ix, iy, iz);
                    const double kx = g.wavenumber(ix), ky = g.wavenumber(iy),
                                 kz = g.wavenumber(iz);
                    const double k2 = kx * kx + ky * ky + kz * kz;
                    for (int c = 0; c < 3; ++c) {
                        const auto d = u1.comp[c][i] - un.comp[c][i];
                        const auto v = u1.comp[c][i];
                        t_mass += (1.0 + p.mu * k2) *
                                  (d.real() * v.real() + d.imag() * v.imag());
                        t_diss += dt * (p.nu * k2 + p.alpha) * std::norm(v);
                        t_expl += dt * (expl.comp[c][i].real() * v.real() +
                                        expl.comp[c][i].imag() * v.imag());
                    }
                }
        const double vol = g.volume();
        const double res = (t_mass + t_diss - t_expl) * vol;
        const double scl = (std::abs(t_mass) + std::abs(t_diss) + std::abs(t_expl)) * vol;
        out.push_back(scl > 0.0 ? std::abs(res) / scl : 0.0);
    }
    return out;
}

std::vector<double> energy_balance_residual(const Trajectory& traj, const ControlSchedule& control,
                                            const ModelParams& p) {
    const double dt = traj.time_grid.dt();
    std::vector<double> out;
    out.reserve(traj.time_grid.steps);
    double e_prev = 0.5 * (l2_norm_sq(traj.states[0]) + p.mu * gradient_norm_sq(traj.states[0]));
    for (int n = 0; n < traj.time_grid.steps; ++n) {
        const SpectralField& u1 = traj.states[n + 1];
        const PhysicalField u1p = to_physical(u1);
        const double l2 = l2_norm_sq(u1);
        const double vn = gradient_norm_sq(u1);
        const double e = 0.5 * (l2 + p.mu * vn);
        const double damp = std::pow(lp_norm(u1p, p.r + 1.0), p.r + 1.0);
        const double work = inner(control.frames[n], u1p);
        out.push_back((e - e_prev) / dt + p.nu * vn + p.alpha * l2 + p.beta * damp - work);
        e_prev = e;
    }
    return out;
}

std::vector<EnergyRow> energy_log(const Trajectory& traj, const ControlSchedule& control,
                                  const ModelParams& p) {
    const std::vector<double> res = energy_balance_residual(traj, control, p);
    std::vector<EnergyRow> rows;
    rows.reserve(traj.states.size());
    for (std::size_t n = 0; n < traj.states.size(); ++n) {
        const SpectralField& u = traj.states[n];
        EnergyRow row;
        row.step = int(n);
        row.time = traj.time_grid.time(int(n));
        row.l2 = std::sqrt(l2_norm_sq(u));
        row.vnorm = std::sqrt(gradient_norm_sq(u));
        row.lrp1 = lp_norm(to_physical(u), p.r + 1.0);
        row.energy = 0.5 * (row.l2 * row.l2 + p.mu * row.vnorm * row.vnorm);
        row.residual = n == 0 ? 0.0 : res[n - 1];
        rows.push_back(row);
    }
    return rows;
}

}  // namespace nsv

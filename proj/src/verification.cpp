#include "nsv/verification.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "nsv/damping.hpp"
#include "nsv/operators.hpp"

namespace nsv {

// ---------------------------------------------------------------------------
// Retained-mode reference integrator
// ---------------------------------------------------------------------------

GalerkinSystem make_galerkin_system(const PeriodicGrid& g, int max_modes) {
    GalerkinSystem sys{g, {}};
    const int n = g.n();
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                if (!g.retained(ix, iy, iz)) continue;
                const int mx = g.freq(ix), my = g.freq(iy), mz = g.freq(iz);
                if (mx == 0 && my == 0 && mz == 0) continue;
                sys.modes.push_back({mx, my, mz});
            }
    // Hermitian pairs count once towards the budget.
    if (int(sys.modes.size()) / 2 > max_modes)
        throw std::invalid_argument("galerkin system exceeds the retained-mode budget");
    return sys;
}

namespace {

std::size_t mode_index(const PeriodicGrid& g, int mx, int my, int mz) {
    const int n = g.n();
    return g.index((mx % n + n) % n, (my % n + n) % n, (mz % n + n) % n);
}

// s(m) = sum_{p+q=m} u(p).u(q) over retained p, q; dense cube of half-width
// 2*max_mode.
struct ScalarConvolution {
    int half = 0;
    std::vector<std::complex<double>> cube;

    std::complex<double> at(int mx, int my, int mz) const {
        if (std::abs(mx) > half || std::abs(my) > half || std::abs(mz) > half) return 0.0;
        const int w = 2 * half + 1;
        return cube[std::size_t(mx + half) + std::size_t(w) * (std::size_t(my + half) +
                                                              std::size_t(w) * (mz + half))];
    }
};

ScalarConvolution self_dot_convolution(const GalerkinSystem& sys, const SpectralField& u) {
    ScalarConvolution s;
    s.half = 2 * sys.grid.max_mode();
    const int w = 2 * s.half + 1;
    s.cube.assign(std::size_t(w) * w * w, 0.0);
    for (const auto& pm : sys.modes)
        for (const auto& qm : sys.modes) {
            const int mx = pm[0] + qm[0], my = pm[1] + qm[1], mz = pm[2] + qm[2];
            const std::size_t pi = mode_index(sys.grid, pm[0], pm[1], pm[2]);
            const std::size_t qi = mode_index(sys.grid, qm[0], qm[1], qm[2]);
            std::complex<double> d = 0.0;
            for (int c = 0; c < 3; ++c) d += u.comp[c][pi] * u.comp[c][qi];
            s.cube[std::size_t(mx + s.half) +
                   std::size_t(w) * (std::size_t(my + s.half) + std::size_t(w) * (mz + s.half))] +=
                d;
        }
    return s;
}

// du/dt for the retained-mode system, nonlinear terms by exact convolution.
SpectralField galerkin_rhs(const GalerkinSystem& sys, const SpectralField& u,
                           const SpectralField& control_modes, const ModelParams& p,
                           bool convection) {
    const PeriodicGrid& g = sys.grid;
    const double k0 = g.k0();
    SpectralField rhs(g);

    // Quadratic convection (u.grad)u by direct convolution over mode pairs.
    if (convection) {
        for (const auto& pm : sys.modes) {
            const std::size_t pi = mode_index(g, pm[0], pm[1], pm[2]);
            for (const auto& qm : sys.modes) {
                const int kx = pm[0] + qm[0], ky = pm[1] + qm[1], kz = pm[2] + qm[2];
                if (!g.mode_retained(kx) || !g.mode_retained(ky) || !g.mode_retained(kz)) continue;
                const std::size_t qi = mode_index(g, qm[0], qm[1], qm[2]);
                const std::size_t ki = mode_index(g, kx, ky, kz);
                const std::complex<double> up_dot_q =
                    std::complex<double>(0.0, k0) *
                    (u.comp[0][pi] * double(qm[0]) + u.comp[1][pi] * double(qm[1]) +
                     u.comp[2][pi] * double(qm[2]));
                for (int c = 0; c < 3; ++c) rhs.comp[c][ki] -= up_dot_q * u.comp[c][qi];
            }
        }
    }

    // Damping: polynomial cases only (r = 1 identity, r = 3 cubic (u.u)u).
    if (p.beta != 0.0) {
        if (p.r == 1.0) {
            for (const auto& km : sys.modes) {
                const std::size_t ki = mode_index(g, km[0], km[1], km[2]);
                for (int c = 0; c < 3; ++c) rhs.comp[c][ki] -= p.beta * u.comp[c][ki];
            }
        } else if (p.r == 3.0) {
            const ScalarConvolution s = self_dot_convolution(sys, u);
            for (const auto& km : sys.modes) {
                const std::size_t ki = mode_index(g, km[0], km[1], km[2]);
                for (const auto& qm : sys.modes) {
                    const std::size_t qi = mode_index(g, qm[0], qm[1], qm[2]);
                    const std::complex<double> sv =
                        s.at(km[0] - qm[0], km[1] - qm[1], km[2] - qm[2]);
                    for (int c = 0; c < 3; ++c) rhs.comp[c][ki] -= p.beta * sv * u.comp[c][qi];
                }
            }
        } else {
            throw std::invalid_argument(
                "galerkin oracle supports polynomial damping only (r = 1 or r = 3)");
        }
    }

    // Linear terms, control, projection, Voigt mass.
    for (const auto& km : sys.modes) {
        const std::size_t ki = mode_index(g, km[0], km[1], km[2]);
        const Vec3 k{k0 * km[0], k0 * km[1], k0 * km[2]};
        const double k2 = dot(k, k);
        std::complex<double> v[3];
        for (int c = 0; c < 3; ++c)
            v[c] = rhs.comp[c][ki] + control_modes.comp[c][ki] -
                   (p.nu * k2 + p.alpha) * u.comp[c][ki];
        // Leray projection of the accumulated right-hand side.
        const std::complex<double> kd = (k.x * v[0] + k.y * v[1] + k.z * v[2]) / k2;
        v[0] -= k.x * kd;
        v[1] -= k.y * kd;
        v[2] -= k.z * kd;
        const double mass = 1.0 + p.mu * k2;
        for (int c = 0; c < 3; ++c) rhs.comp[c][ki] = v[c] / mass;
    }
    return rhs;
}

// Dense (non-FFT) projected Fourier coefficients of a physical control frame.
SpectralField dense_control_modes(const GalerkinSystem& sys, const PhysicalField& u) {
    const PeriodicGrid& g = sys.grid;
    const int n = g.n();
    const std::size_t npts = g.points();
    SpectralField out(g);
    std::vector<std::complex<double>> w(n);
    for (int j = 0; j < n; ++j)
        w[j] = std::exp(std::complex<double>(0.0, -2.0 * std::numbers::pi * j / n));
    for (const auto& km : sys.modes) {
        const std::size_t ki = mode_index(g, km[0], km[1], km[2]);
        std::complex<double> acc[3] = {0.0, 0.0, 0.0};
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix) {
                    const std::size_t i = g.index(ix, iy, iz);
                    const long phase =
                        ((long(km[0]) * ix + long(km[1]) * iy + long(km[2]) * iz) % n + n) % n;
                    const std::complex<double> ph = w[phase];
                    for (int c = 0; c < 3; ++c) acc[c] += u.comp[c][i] * ph;
                }
        for (int c = 0; c < 3; ++c) out.comp[c][ki] = acc[c] / double(npts);
        // project
        const double k0 = g.k0();
        const Vec3 k{k0 * km[0], k0 * km[1], k0 * km[2]};
        const double k2 = dot(k, k);
        const std::complex<double> kd =
            (k.x * out.comp[0][ki] + k.y * out.comp[1][ki] + k.z * out.comp[2][ki]) / k2;
        out.comp[0][ki] -= k.x * kd;
        out.comp[1][ki] -= k.y * kd;
        out.comp[2][ki] -= k.z * kd;
    }
    return out;
}

}  // namespace

Trajectory galerkin_reference_solve(const GalerkinSystem& sys, const SpectralField& u0,
                                    const ControlSchedule& control, const ModelParams& p,
                                    double fine_dt, const SolverOptions& opts) {
    if (!(fine_dt > 0.0)) throw std::invalid_argument("galerkin oracle needs fine_dt > 0");
    const TimeGrid tg = control.time_grid;
    const double dt = tg.dt();
    const bool convection = !opts.disable_convection;

    Trajectory traj{tg, {}};
    traj.states.reserve(tg.steps + 1);
    traj.states.push_back(leray_project(u0));

    SpectralField u = traj.states[0];
    const int substeps = std::max(1, int(std::ceil(dt / fine_dt - 1e-12)));
    const double h = dt / substeps;
    for (int nstep = 0; nstep < tg.steps; ++nstep) {
        const SpectralField ctrl = dense_control_modes(sys, control.frames[nstep]);
        for (int s = 0; s < substeps; ++s) {
            const SpectralField k1 = galerkin_rhs(sys, u, ctrl, p, convection);
            SpectralField u2 = u;
            add_scaled(u2, 0.5 * h, k1);
            const SpectralField k2 = galerkin_rhs(sys, u2, ctrl, p, convection);
            SpectralField u3 = u;
            add_scaled(u3, 0.5 * h, k2);
            const SpectralField k3 = galerkin_rhs(sys, u3, ctrl, p, convection);
            SpectralField u4 = u;
            add_scaled(u4, h, k3);
            const SpectralField k4 = galerkin_rhs(sys, u4, ctrl, p, convection);
            add_scaled(u, h / 6.0, k1);
            add_scaled(u, h / 3.0, k2);
            add_scaled(u, h / 3.0, k3);
            add_scaled(u, h / 6.0, k4);
        }
        if (!all_finite(u)) throw BlowupError(nstep + 1);
        traj.states.push_back(u);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient oracle and Lipschitz probe
// ---------------------------------------------------------------------------

std::vector<RemainderRow> fd_gradient_oracle(const ControlSchedule& U, const SpectralField& u0,
                                             const ModelParams& p, const CostConfig& cost,
                                             const ControlSchedule& V,
                                             std::span<const double> eps_list) {
    const GradientResult base = reduced_gradient_full(U, u0, p, cost);
    const double gV = schedule_inner(base.gradient, V);

    std::vector<RemainderRow> rows;
    rows.reserve(eps_list.size());
    for (double eps : eps_list) {
        if (!(eps > 1e-14)) throw std::invalid_argument("fd_gradient_oracle: eps underflow");
        ControlSchedule up = U;
        schedule_add_scaled(up, eps, V);
        ControlSchedule dn = U;
        schedule_add_scaled(dn, -eps, V);
        const double jp = evaluate_cost(solve_forward(u0, up, p), up, cost);
        const double jm = evaluate_cost(solve_forward(u0, dn, p), dn, cost);
        RemainderRow row;
        row.eps = eps;
        row.fd_central = (jp - jm) / (2.0 * eps);
        row.central_remainder = std::abs(row.fd_central - gV);
        row.taylor_remainder = std::abs(jp - base.cost - eps * gV);
        rows.push_back(row);
    }
    return rows;
}

double observed_order(std::span<const RemainderRow> rows, bool taylor) {
    // least-squares slope of log(remainder) vs log(eps)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& r : rows) {
        const double v = taylor ? r.taylor_remainder : r.central_remainder;
        if (v <= 0.0) continue;
        const double x = std::log(r.eps), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::vector<LipschitzRow> lipschitz_probe(const SpectralField& u0, const ModelParams& p,
                                          const TimeGrid& tg, int n_pairs, double magnitude,
                                          std::uint64_t seed) {
    std::vector<LipschitzRow> rows;
    const double dt = tg.dt();
    for (int k = 0; k < n_pairs; ++k) {
        const ControlSchedule u1 =
            random_control(u0.grid, tg, magnitude, seed + 2 * std::uint64_t(k));
        const ControlSchedule u2 =
            random_control(u0.grid, tg, magnitude, seed + 2 * std::uint64_t(k) + 1);
        ControlSchedule diff = u1;
        schedule_add_scaled(diff, -1.0, u2);
        const double cdist = std::sqrt(schedule_norm_sq(diff));
        if (cdist == 0.0) continue;

        const Trajectory t1 = solve_forward(u0, u1, p);
        const Trajectory t2 = solve_forward(u0, u2, p);
        double acc = 0.0;
        for (int n = 0; n < tg.steps; ++n) {
            const SpectralField d_n = subtract(t1.states[n], t2.states[n]);
            const SpectralField d_n1 = subtract(t1.states[n + 1], t2.states[n + 1]);
            SpectralField rate = d_n1;
            add_scaled(rate, -1.0, d_n);
            acc += dt * gradient_norm_sq(d_n) + gradient_norm_sq(rate) / dt;
        }
        const double sdist = std::sqrt(acc);
        rows.push_back({cdist, sdist, sdist / cdist});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Property suite
// ---------------------------------------------------------------------------

std::string format_check_line(const CheckResult& c) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "check=%s measured=%.6e threshold=%.6e pass=%d",
                  c.name.c_str(), c.measured, c.threshold, c.pass ? 1 : 0);
    return buf;
}

namespace {

struct Instance {
    PeriodicGrid grid;
    TimeGrid tg;
    ModelParams params;
    SpectralField u0;
    ControlSchedule control;
    TargetField target;
    CostConfig cost;
};

Instance make_instance(int n, int steps, double horizon, double r, std::uint64_t seed,
                       double kappa = 1.0, double lambda = 0.01) {
    PeriodicGrid grid(n, 2.0 * std::numbers::pi);
    TimeGrid tg{steps, horizon};
    ModelParams p{0.05, 0.02, 0.1, 0.2, r, horizon};
    Instance inst{grid,
                  tg,
                  p,
                  random_divfree(grid, 0.4, seed),
                  random_control(grid, tg, 0.5, seed + 101),
                  zero_target(grid, tg),
                  CostConfig{}};
    for (int m = 0; m <= steps; ++m)
        inst.target.frames[m] = random_divfree(grid, 0.3, seed + 7000 + std::uint64_t(m));
    inst.cost.kappa = kappa;
    inst.cost.lambda = lambda;
    inst.cost.target = inst.target;
    return inst;
}

class Suite {
  public:
    explicit Suite(const SuiteOptions& opts) : opts_(opts) {}

    std::vector<CheckResult> run() {
        operator_identities();
        damping_calculus();
        energy_checks();
        duality_checks();
        taylor_checks();
        galerkin_checks();
        linearity_checks();
        if (!opts_.quick) {
            optimizer_checks();
            hessian_checks();
            recovery_check();
            determinism_check();
            lipschitz_checks();
            bound_stability_check();
        }
        return results_;
    }

  private:
    SuiteOptions opts_;
    std::vector<CheckResult> results_;

    void add(const std::string& name, double measured, double threshold, bool geq = false) {
        CheckResult c{name, measured, threshold, geq ? measured >= threshold
                                                     : measured <= threshold};
        if (opts_.on_result) opts_.on_result(c);
        results_.push_back(c);
    }

    int grid_n() const { return opts_.quick ? 8 : 16; }

    void operator_identities() {
        PeriodicGrid g(grid_n(), 2.0 * std::numbers::pi);
        const std::uint64_t s = opts_.seed;

        const SpectralField u = random_divfree(g, 1.0, s + 1);
        const SpectralField v = random_divfree(g, 0.8, s + 2);
        const SpectralField w = random_divfree(g, 1.2, s + 3);

        // transform round trip and Parseval
        const SpectralField rt = to_spectral(to_physical(u));
        add("transform_roundtrip_rel",
            std::sqrt(l2_norm_sq(subtract(rt, u)) / l2_norm_sq(u)), 1e-13);
        const double spec = l2_norm_sq(u);
        const double phys = l2_norm_sq(to_physical(u));
        add("parseval_rel", std::abs(spec - phys) / spec, 1e-10);

        // Leray projector: idempotent, self-adjoint, annihilates gradients
        const SpectralField raw = to_spectral(random_physical(g, 1.0, s + 4));
        const SpectralField p1 = leray_project(raw);
        const SpectralField p2 = leray_project(p1);
        add("leray_idempotent_rel",
            std::sqrt(l2_norm_sq(subtract(p2, p1)) / std::max(l2_norm_sq(p1), 1e-300)), 1e-12);
        const SpectralField raw2 = to_spectral(random_physical(g, 1.0, s + 5));
        const double sa = std::abs(inner(leray_project(raw), raw2) - inner(raw, leray_project(raw2)));
        add("leray_selfadjoint_rel",
            sa / std::max(std::sqrt(l2_norm_sq(raw) * l2_norm_sq(raw2)), 1e-300), 1e-12);
        add("leray_divfree_rel", relative_divergence(p1), 1e-13);
        // pure gradient field i k ghat -> zero
        SpectralField gradf(g);
        {
            std::mt19937_64 rng(s + 6);
            std::normal_distribution<double> nd(0.0, 1.0);
            const int n = g.n();
            for (int iz = 0; iz < n; ++iz)
                for (int iy = 0; iy < n; ++iy)
                    for (int ix = 0; ix < n; ++ix) {
                        if (!g.retained(ix, iy, iz)) continue;
                        const std::size_t i = g.index(ix, iy, iz);
                        const std::complex<double> gh(nd(rng), nd(rng));
                        gradf.comp[0][i] = std::complex<double>(0, g.wavenumber(ix)) * gh;
                        gradf.comp[1][i] = std::complex<double>(0, g.wavenumber(iy)) * gh;
                        gradf.comp[2][i] = std::complex<double>(0, g.wavenumber(iz)) * gh;
                    }
            const double before = std::sqrt(l2_norm_sq(gradf));
            const double after = std::sqrt(l2_norm_sq(leray_project(gradf)));
            add("leray_kills_gradients_rel", after / std::max(before, 1e-300), 1e-13);
            add("curl_of_gradient_rel",
                std::sqrt(l2_norm_sq(curl(gradf))) /
                    std::max(std::sqrt(gradient_norm_sq(gradf)), 1e-300),
                1e-13);
        }

        // curl identity and Stokes pairing
        add("curl_identity_rel",
            std::abs(l2_norm_sq(curl(u)) / gradient_norm_sq(u) - 1.0), 1e-12);
        add("stokes_pairing_rel",
            std::abs(inner(stokes_apply(u), u) / gradient_norm_sq(u) - 1.0), 1e-12);
        SpectralField neg_lap = leray_project(laplacian(u));
        scale(neg_lap, -1.0);
        add("stokes_vs_leray_laplacian_rel",
            std::sqrt(l2_norm_sq(subtract(stokes_apply(u), neg_lap)) /
                      l2_norm_sq(stokes_apply(u))),
            1e-13);

        // trilinear identities on dealiased divergence-free fields
        const double bvv = trilinear(u, v, v);
        const double nrm = std::sqrt(l2_norm_sq(u)) * std::sqrt(gradient_norm_sq(v)) *
                           max_abs(to_physical(v)) * std::sqrt(g.volume());
        add("trilinear_bvv_rel", std::abs(bvv) / std::max(nrm, 1e-300), 1e-12);
        const double buvw = trilinear(u, v, w);
        const double buwv = trilinear(u, w, v);
        add("trilinear_antisym_rel",
            std::abs(buvw + buwv) / std::max(std::abs(buvw) + std::abs(buwv), 1e-300), 1e-12);
    }

    void damping_calculus() {
        std::mt19937_64 rng(opts_.seed + 77);
        std::uniform_real_distribution<double> mag(0.2, 1.5);
        std::normal_distribution<double> nd(0.0, 1.0);
        auto rand_dir = [&]() {
            Vec3 v{nd(rng), nd(rng), nd(rng)};
            return (1.0 / std::max(norm(v), 1e-12)) * v;
        };
        auto rand_pt = [&]() { return mag(rng) * rand_dir(); };

        const int npts = opts_.quick ? 100 : 1000;
        const double h = 1e-5;
        const std::array<double, 8> rs{1.0, 2.0, 2.5, 3.0, 4.0, 5.0, 7.0, 9.0};

        double d1_worst = 0.0, d2_worst = 0.0, d3_worst = 0.0;
        double zero_branch_worst = 0.0, sym_worst = 0.0, posdef_min = 0.0;
        for (double r : rs) {
            for (int t = 0; t < npts; ++t) {
                const Vec3 z = rand_pt(), w = rand_dir();
                const Vec3 fd1 = (1.0 / (2.0 * h)) * (damping_f(z + h * w, r) -
                                                      damping_f(z - h * w, r));
                const Vec3 a1 = damping_d1(z, w, r);
                d1_worst = std::max(d1_worst, norm(fd1 - a1) / std::max(norm(a1), 1e-12));
                posdef_min = std::min(posdef_min, dot(damping_d1(z, w, r), w));

                if (r >= 2.0) {
                    const Vec3 q = rand_dir(), gdir = rand_dir();
                    const Vec3 fd2 = (1.0 / (2.0 * h)) * (damping_d1(z + h * q, gdir, r) -
                                                          damping_d1(z - h * q, gdir, r));
                    const Vec3 a2 = damping_d2(z, q, gdir, r);
                    d2_worst = std::max(d2_worst, norm(fd2 - a2) / std::max(norm(a2), 1e-12));
                    const Vec3 swapped = damping_d2(z, gdir, q, r);
                    sym_worst = std::max(sym_worst, norm(a2 - swapped));
                }
                if (r >= 3.0) {
                    const Vec3 q = rand_dir(), gdir = rand_dir(), hdir = rand_dir();
                    const Vec3 fd3 = (1.0 / (2.0 * h)) * (damping_d2(z + h * q, gdir, hdir, r) -
                                                          damping_d2(z - h * q, gdir, hdir, r));
                    const Vec3 a3 = damping_d3(z, q, gdir, hdir, r);
                    d3_worst = std::max(d3_worst, norm(fd3 - a3) / std::max(norm(a3), 1e-12));
                    const Vec3 perm = damping_d3(z, hdir, q, gdir, r);
                    sym_worst = std::max(sym_worst, norm(a3 - perm));
                }
            }
            // zero branches return exactly zero
            const Vec3 w = rand_dir(), q = rand_dir(), gdir = rand_dir();
            if (r > 1.0 && r < 3.0)
                zero_branch_worst = std::max(zero_branch_worst, norm(damping_d1({}, w, r)));
            if (r >= 2.0 && r < 5.0)
                zero_branch_worst = std::max(zero_branch_worst, norm(damping_d2({}, q, gdir, r)));
            if (r > 3.0 && r < 7.0)
                zero_branch_worst =
                    std::max(zero_branch_worst, norm(damping_d3({}, q, gdir, w, r)));
        }
        add("damping_d1_fd_rel", d1_worst, 1e-6);
        add("damping_d2_fd_rel", d2_worst, 1e-6);
        add("damping_d3_fd_rel", d3_worst, 1e-5);
        add("damping_zero_branch_abs", zero_branch_worst, 0.0);
        add("damping_symmetry_abs", sym_worst, 0.0);
        add("damping_d1_nonneg_min", posdef_min, -1e-12, true);

        // monotonicity bound with C(r) = 2^{1-r}: scalar samples first, then
        // field pairs
        const std::array<double, 4> mono_r{1.0, 2.0, 3.0, 5.0};
        long scalar_viol = 0, field_viol = 0;
        const int n_scalar = opts_.quick ? 200 : 1000;
        for (double r : mono_r) {
            for (int t = 0; t < n_scalar; ++t) {
                const Vec3 a = rand_pt(), b = rand_pt();
                const double lhs = dot(damping_f(a, r) - damping_f(b, r), a - b);
                const double rhs = std::pow(2.0, 1.0 - r) * std::pow(norm(a - b), r + 1.0);
                if (lhs < rhs - 1e-12 * std::max(std::abs(lhs), rhs)) ++scalar_viol;
            }
        }
        PeriodicGrid g(8, 2.0 * std::numbers::pi);
        const int n_pairs = opts_.quick ? 20 : 1000;
        for (double r : mono_r)
            for (int t = 0; t < n_pairs; ++t) {
                const PhysicalField a =
                    random_physical(g, 1.0, opts_.seed + 900 + 10 * std::uint64_t(t) + int(r));
                const PhysicalField b =
                    random_physical(g, 1.0, opts_.seed + 901 + 10 * std::uint64_t(t) + int(r));
                const auto [lhs, rhs] = monotonicity_gap(a, b, r);
                if (lhs < rhs - 1e-12 * std::max(std::abs(lhs), rhs)) ++field_viol;
            }
        add("monotonicity_scalar_violations", double(scalar_viol), 0.0);
        add("monotonicity_field_violations", double(field_viol), 0.0);
    }

    void energy_checks() {
        PeriodicGrid g(grid_n(), 2.0 * std::numbers::pi);
        ModelParams p{0.05, 0.02, 0.1, 0.5, 3.0, 0.5};

        // scheme-exact balance on a forced run
        {
            TimeGrid tg{opts_.quick ? 20 : 50, 0.5};
            const ControlSchedule ctrl = random_control(g, tg, 0.5, opts_.seed + 11);
            const Trajectory traj = solve_forward(taylor_green(g, 1.0), ctrl, p);
            double worst = 0.0;
            for (double v : scheme_balance_residual(traj, ctrl, p)) worst = std::max(worst, v);
            add("scheme_balance_rel", worst, 1e-10);
        }

        // decaying run: monotone energy, first-order continuous residual
        std::array<int, 3> levels{50, 100, 200};
        if (opts_.quick) levels = {20, 40, 80};
        std::array<double, 3> maxres{};
        int violations = 0;
        for (std::size_t l = 0; l < levels.size(); ++l) {
            TimeGrid tg{levels[l], 0.5};
            const ControlSchedule ctrl = zero_control(g, tg);
            const Trajectory traj = solve_forward(taylor_green(g, 1.0), ctrl, p);
            double prev = 0.5 * (l2_norm_sq(traj.states[0]) +
                                 p.mu * gradient_norm_sq(traj.states[0]));
            for (int n = 1; n <= tg.steps; ++n) {
                const double e = 0.5 * (l2_norm_sq(traj.states[n]) +
                                        p.mu * gradient_norm_sq(traj.states[n]));
                if (!(e < prev)) ++violations;
                prev = e;
            }
            double worst = 0.0;
            for (double v : energy_balance_residual(traj, ctrl, p))
                worst = std::max(worst, std::abs(v));
            maxres[l] = worst;
        }
        add("energy_monotone_violations", double(violations), 0.0);
        const double order1 = std::log2(maxres[0] / maxres[1]);
        const double order2 = std::log2(maxres[1] / maxres[2]);
        add("energy_residual_order", std::min(order1, order2), 0.9, true);
    }

    void duality_checks() {
        const auto t0 = std::chrono::steady_clock::now();
        const std::array<double, 4> rs{1.0, 2.0, 3.0, 5.0};
        const int per_r = opts_.quick ? 1 : 5;
        double worst = 0.0;
        AdjointOptions aopts;
        aopts.flip_source_sign = opts_.corrupt_adjoint;
        for (int k = 0; k < per_r; ++k)
            for (double r : rs) {
                Instance inst = make_instance(grid_n(), opts_.quick ? 10 : 50, 0.5, r,
                                              opts_.seed + 31 * k + std::uint64_t(10 * r));
                const Trajectory base = solve_forward(inst.u0, inst.control, inst.params);
                const ControlSchedule v =
                    random_control(inst.grid, inst.tg, 1.0, opts_.seed + 555 + k);
                const DualityResult res =
                    duality_check(base, v, inst.target, inst.params, 1.0, aopts);
                worst = std::max(worst, res.rel_err);
            }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        add("adjoint_duality_rel", worst, 1e-10);
        add("adjoint_duality_runtime_s", secs, 60.0);
    }

    void taylor_checks() {
        const int n_inst = opts_.quick ? 1 : 5;
        const std::array<double, 5> rs{2.0, 3.0, 5.0, 2.0, 3.0};
        const std::array<double, 4> eps{1e-1, 1e-2, 1e-3, 1e-4};
        double worst_order = 1e9;
        for (int k = 0; k < n_inst; ++k) {
            Instance inst =
                make_instance(grid_n(), opts_.quick ? 10 : 50, 0.5, rs[k], opts_.seed + 400 + k);
            const ControlSchedule v =
                random_control(inst.grid, inst.tg, 1.0, opts_.seed + 600 + k);
            const auto rows = fd_gradient_oracle(inst.control, inst.u0, inst.params, inst.cost, v,
                                                 std::span<const double>(eps));
            worst_order = std::min(worst_order, observed_order(rows, true));
        }
        add("gradient_taylor_order", worst_order, 1.9, true);
    }

    void galerkin_checks() {
        PeriodicGrid g(8, 2.0 * std::numbers::pi, 0.5);  // mask |m| <= 1: alias-free cubics
        const GalerkinSystem sys = make_galerkin_system(g);
        ModelParams p{0.05, 0.02, 0.1, 0.5, 3.0, 0.4};
        const double horizon = 0.4;

        // two active divergence-free modes (plus conjugates)
        SpectralField u0(g);
        const std::size_t ia = g.index(1, 0, 0);
        const std::size_t ib = g.index(0, 1, 0);
        u0.comp[1][ia] = std::complex<double>(0.35, 0.1);
        u0.comp[2][ib] = std::complex<double>(0.25, -0.15);
        for (int c = 0; c < 3; ++c) {
            // Hermitian partners
            u0.comp[c][g.index(g.n() - 1, 0, 0)] = std::conj(u0.comp[c][ia]);
            u0.comp[c][g.index(0, g.n() - 1, 0)] = std::conj(u0.comp[c][ib]);
        }

        std::vector<int> levels = opts_.quick ? std::vector<int>{25, 50, 100}
                                              : std::vector<int>{25, 50, 100, 200};
        const int finest = levels.back();
        const double fine_dt = (horizon / finest) / 100.0;
        // constant-in-time control: a per-slab control would kink the exact
        // solution at every node and cap the multistep scheme at first order
        const PhysicalField ctrl_frame = random_physical(g, 0.3, opts_.seed + 800);
        auto make_ctrl = [&](int nl) {
            ControlSchedule ctrl = zero_control(g, TimeGrid{nl, horizon});
            for (auto& f : ctrl.frames) f = ctrl_frame;
            return ctrl;
        };
        // the reference state at T is dt-independent: integrate once
        const SpectralField ref_final =
            galerkin_reference_solve(sys, u0, make_ctrl(finest), p, fine_dt).states.back();

        auto run_scheme = [&](TimeScheme scheme) {
            std::vector<double> errs;
            for (int nl : levels) {
                SolverOptions sopts;
                sopts.scheme = scheme;
                const Trajectory num = solve_forward(u0, make_ctrl(nl), p, sopts);
                errs.push_back(std::sqrt(l2_norm_sq(subtract(num.states.back(), ref_final))));
            }
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < levels.size(); ++i) {
                const double x = std::log(horizon / levels[i]);
                const double y = std::log(errs[i]);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            const double m = double(levels.size());
            return (m * sxy - sx * sy) / (m * sxx - sx * sx);
        };

        add("galerkin_imex_order", run_scheme(TimeScheme::imex_euler), 0.9, true);
        if (!opts_.quick) add("galerkin_cnab_order", run_scheme(TimeScheme::cnab), 1.8, true);
    }

    void linearity_checks() {
        Instance inst = make_instance(grid_n(), opts_.quick ? 8 : 20, 0.25, 3.0, opts_.seed + 70);
        const Trajectory base = solve_forward(inst.u0, inst.control, inst.params);

        // tangent solve additive and homogeneous in V
        const ControlSchedule v1 = random_control(inst.grid, inst.tg, 1.0, opts_.seed + 71);
        const ControlSchedule v2 = random_control(inst.grid, inst.tg, 0.7, opts_.seed + 72);
        ControlSchedule combo = v1;
        schedule_scale(combo, 2.0);
        schedule_add_scaled(combo, -3.0, v2);
        const Trajectory w1 = solve_linearized(base, v1, inst.params);
        const Trajectory w2 = solve_linearized(base, v2, inst.params);
        const Trajectory wc = solve_linearized(base, combo, inst.params);
        double worst = 0.0;
        for (int n = 0; n <= inst.tg.steps; ++n) {
            SpectralField lin = w1.states[n];
            scale(lin, 2.0);
            add_scaled(lin, -3.0, w2.states[n]);
            const double den = std::max(l2_norm_sq(wc.states[n]), 1e-300);
            worst = std::max(worst,
                             std::sqrt(l2_norm_sq(subtract(lin, wc.states[n])) / den));
        }
        add("tangent_linearity_rel", worst, 1e-12);

        // adjoint linear in the misfit
        TargetField t1 = inst.target;
        TargetField t2 = inst.target;
        for (int m = 0; m <= inst.tg.steps; ++m) {
            const SpectralField e1 = random_divfree(inst.grid, 0.5, opts_.seed + 73 + m);
            const SpectralField e2 = random_divfree(inst.grid, 0.5, opts_.seed + 174 + m);
            t1.frames[m] = subtract(base.states[m], e1);
            t2.frames[m] = subtract(base.states[m], e2);
        }
        TargetField tsum = t1;
        for (int m = 0; m <= inst.tg.steps; ++m) {
            // misfit e1 + e2  <=>  target u - (e1 + e2)
            SpectralField e = subtract(base.states[m], t1.frames[m]);
            add_scaled(e, 1.0, subtract(base.states[m], t2.frames[m]));
            tsum.frames[m] = subtract(base.states[m], e);
        }
        const AdjointTrajectory a1 = solve_adjoint(base, t1, inst.params, 1.0);
        const AdjointTrajectory a2 = solve_adjoint(base, t2, inst.params, 1.0);
        const AdjointTrajectory as = solve_adjoint(base, tsum, inst.params, 1.0);
        worst = 0.0;
        for (int m = 0; m <= inst.tg.steps; ++m) {
            SpectralField lin = a1.costates[m];
            add_scaled(lin, 1.0, a2.costates[m]);
            const double den = std::max(l2_norm_sq(as.costates[m]), 1e-300);
            worst = std::max(worst,
                             std::sqrt(l2_norm_sq(subtract(lin, as.costates[m])) / den));
        }
        add("adjoint_misfit_linearity_rel", worst, 1e-12);

        // costate divergence and checkpointing equivalence
        double div_worst = 0.0;
        for (const auto& phi : a1.costates)
            div_worst = std::max(div_worst, relative_divergence(phi));
        add("costate_divfree_rel", div_worst, 1e-13);

        const AdjointTrajectory direct = solve_adjoint(base, t1, inst.params, 1.0);
        const AdjointTrajectory ckpt = solve_adjoint_checkpointed(
            inst.u0, inst.control, t1, inst.params, 1.0, 7);
        double ck_worst = 0.0;
        for (int m = 0; m <= inst.tg.steps; ++m)
            ck_worst = std::max(
                ck_worst, max_abs(subtract(direct.costates[m], ckpt.costates[m])));
        add("checkpoint_adjoint_abs", ck_worst, 0.0);
    }

    // Optimizer instances.  The tracking instance is lambda-dominated so the
    // projected gradient contracts fast, with the target induced by an
    // out-of-box control so a tight box engages; the small field scale keeps
    // the line-search roundoff floor well under the asserted residuals.
    void optimizer_checks() {
        PeriodicGrid g(16, 2.0 * std::numbers::pi);
        TimeGrid tg{50, 0.5};
        ModelParams p{0.05, 0.02, 0.1, 0.2, 3.0, 0.5};
        const SpectralField u0 = taylor_green(g, 0.15);
        const ControlSchedule u_true = random_control(g, tg, 0.8, opts_.seed + 900);
        const Trajectory target_traj = solve_forward(u0, u_true, p);

        CostConfig cost;
        cost.kappa = 0.05;
        cost.lambda = 0.01;
        cost.target = target_from_trajectory(target_traj);

        OptimizerConfig oc;
        oc.max_iters = 250;
        oc.tol_vi = 1e-11;
        oc.step0 = 1.0;

        {
            const BoxConstraints box = BoxConstraints::uniform(-0.025, 0.025);
            const OptimizeResult res = optimize(u0, box, p, cost, oc);
            std::size_t at_bounds = 0, total = 0;
            for (const auto& f : res.control.frames)
                for (int c = 0; c < 3; ++c)
                    for (double v : f.comp[c]) {
                        ++total;
                        if (std::abs(std::abs(v) - 0.025) < 1e-12) ++at_bounds;
                    }
            add("pg_active_fraction", double(at_bounds) / double(total), 0.01, true);
            add("pg_vi_residual", res.report.vi_residual, 1e-8);
            add("pg_projection_residual", res.report.projection_residual, 1e-8);
        }
        {
            const BoxConstraints box = BoxConstraints::uniform(-1e9, 1e9);
            const OptimizeResult res = optimize(u0, box, p, cost, oc);
            const GradientResult gr = reduced_gradient_full(res.control, u0, p, cost);
            ControlSchedule dev = res.control;
            for (int n = 0; n < tg.steps; ++n)
                add_scaled(dev.frames[n], 1.0 / cost.lambda,
                           to_physical(gr.adjoint.costates[n + 1]));
            const double rel = std::sqrt(schedule_norm_sq(dev) /
                                         std::max(schedule_norm_sq(res.control), 1e-300));
            add("pg_unconstrained_rel", rel, 1e-6);
        }
        {
            // Bang-bang regime: the target is far outside a narrow box, so the
            // costate stays O(1) relative to the box and the iterates pin.
            CostConfig bb_cost;
            bb_cost.kappa = 1.0;
            bb_cost.lambda = 0.0;
            const ControlSchedule bb_true = random_control(g, tg, 2.0, opts_.seed + 900);
            bb_cost.target =
                target_from_trajectory(solve_forward(taylor_green(g, 0.3), bb_true, p));
            OptimizerConfig bb_oc = oc;
            bb_oc.max_iters = 100;
            bb_oc.tol_vi = 0.0;
            const BoxConstraints box = BoxConstraints::uniform(-0.03, 0.03);
            const OptimizeResult res = optimize(taylor_green(g, 0.3), box, p, bb_cost, bb_oc);
            const GradientResult gr =
                reduced_gradient_full(res.control, taylor_green(g, 0.3), p, bb_cost);
            double phimax = 0.0;
            for (const auto& phi : gr.adjoint.costates)
                phimax = std::max(phimax, max_abs(to_physical(phi)));
            const BangBangField labels = bang_bang_classify(gr.adjoint, box, 0.01 * phimax);
            const double frac =
                1.0 - bang_bang_violation_fraction(labels, res.control, box, 1e-6 * box.span());
            add("bang_bang_consistency", frac, 0.99, true);
        }
    }

    void hessian_checks() {
        const std::array<double, 10> rs{2, 2, 2, 2, 3, 3, 3, 5, 5, 5};
        double worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            Instance inst = make_instance(16, 50, 0.5, rs[k], opts_.seed + 1200 + 17 * k);
            const Trajectory state = solve_forward(inst.u0, inst.control, inst.params);
            const AdjointTrajectory adj =
                solve_adjoint(state, inst.target, inst.params, inst.cost.kappa);
            auto hv = [&](const ControlSchedule& dir) {
                const Trajectory w = solve_linearized(state, dir, inst.params);
                const AdjointTrajectory second =
                    solve_second_adjoint(state, adj, w, inst.params, inst.cost.kappa);
                ControlSchedule out{inst.tg, {}};
                out.frames.reserve(inst.tg.steps);
                for (int n = 0; n < inst.tg.steps; ++n) {
                    PhysicalField h = to_physical(second.costates[n + 1]);
                    add_scaled(h, inst.cost.lambda, dir.frames[n]);
                    out.frames.push_back(std::move(h));
                }
                return out;
            };
            const ControlSchedule v1 =
                random_control(inst.grid, inst.tg, 1.0, opts_.seed + 1300 + k);
            const ControlSchedule v2 =
                random_control(inst.grid, inst.tg, 0.8, opts_.seed + 1400 + k);
            const double h12 = schedule_inner(hv(v1), v2);
            const double h21 = schedule_inner(hv(v2), v1);
            worst = std::max(worst,
                             std::abs(h12 - h21) / std::max({std::abs(h12), std::abs(h21), 1e-300}));
        }
        add("hessian_symmetry_rel", worst, 1e-8);

        // sampled cone curvatures at a converged iterate: recorded, assert finite
        PeriodicGrid g(16, 2.0 * std::numbers::pi);
        TimeGrid tg{50, 0.5};
        ModelParams p{0.05, 0.02, 0.1, 0.2, 3.0, 0.5};
        const SpectralField u0 = taylor_green(g, 0.15);
        const ControlSchedule u_true = random_control(g, tg, 0.8, opts_.seed + 1500);
        CostConfig cost;
        cost.kappa = 0.05;
        cost.lambda = 0.01;
        cost.target = target_from_trajectory(solve_forward(u0, u_true, p));
        OptimizerConfig oc;
        oc.max_iters = 120;
        oc.tol_vi = 1e-10;
        const BoxConstraints box = BoxConstraints::uniform(-0.025, 0.025);
        const OptimizeResult res = optimize(u0, box, p, cost, oc);
        const SecondOrderReport soc =
            second_order_check(res.control, u0, p, cost, box, 4, opts_.seed + 1600);
        double minc = soc.samples.empty() ? 0.0 : soc.min_curvature;
        bool finite = true;
        for (const auto& s : soc.samples) finite = finite && std::isfinite(s.curvature);
        add("soc_curvatures_finite", finite ? 0.0 : 1.0, 0.0);
        add("soc_min_curvature", minc, -1e300, true);  // recorded
    }

    void recovery_check() {
        const auto t0 = std::chrono::steady_clock::now();
        PeriodicGrid g(16, 2.0 * std::numbers::pi);
        TimeGrid tg{50, 0.5};
        ModelParams p{0.05, 0.02, 0.1, 0.2, 3.0, 0.5};
        const SpectralField u0 = taylor_green(g, 0.3);
        const BoxConstraints box = BoxConstraints::uniform(-1.0, 1.0);
        const ControlSchedule u_true = random_control(g, tg, 0.8, opts_.seed + 2000);

        CostConfig cost;
        cost.kappa = 1.0;
        cost.lambda = 1e-4;
        cost.target = target_from_trajectory(solve_forward(u0, u_true, p));

        OptimizerConfig oc;
        oc.max_iters = 200;
        oc.tol_vi = 1e-12;
        const OptimizeResult res = optimize(u0, box, p, cost, oc);
        const double j0 = res.log.front().cost;
        const double jend = res.report.cost;
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        add("recovery_cost_reduction", 1.0 - jend / j0, 0.9, true);
        add("recovery_runtime_s", secs, 600.0);
    }

    void determinism_check() {
        auto run = [&]() {
            PeriodicGrid g(8, 2.0 * std::numbers::pi);
            TimeGrid tg{20, 0.25};
            ModelParams p{0.05, 0.02, 0.1, 0.2, 3.0, 0.25};
            const SpectralField u0 = random_divfree(g, 0.4, opts_.seed + 2100);
            CostConfig cost;
            cost.kappa = 0.05;
            cost.lambda = 0.01;
            cost.target =
                target_from_trajectory(solve_forward(u0, random_control(g, tg, 1.0, 5), p));
            OptimizerConfig oc;
            oc.max_iters = 10;
            oc.tol_vi = 0.0;
            const OptimizeResult res =
                optimize(u0, BoxConstraints::uniform(-0.5, 0.5), p, cost, oc);
            std::string s;
            char buf[160];
            for (const auto& row : res.log) {
                std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%d\n", row.iter,
                              row.cost, row.grad_norm, row.vi_residual, row.step_size,
                              row.line_search_evals);
                s += buf;
            }
            return s;
        };
        const std::string a = run();
        const std::string b = run();
        add("determinism_log_mismatch", a == b ? 0.0 : 1.0, 0.0);
    }

    void lipschitz_checks() {
        PeriodicGrid g(8, 2.0 * std::numbers::pi);
        ModelParams p{0.05, 0.02, 0.1, 0.2, 3.0, 0.25};
        const SpectralField u0 = random_divfree(g, 0.3, opts_.seed + 2200);
        const auto coarse = lipschitz_probe(u0, p, TimeGrid{25, 0.25}, 4, 0.5, opts_.seed + 2300);
        const auto fine = lipschitz_probe(u0, p, TimeGrid{50, 0.25}, 4, 0.5, opts_.seed + 2300);
        double max_ratio = 0.0, drift = 0.0;
        for (std::size_t i = 0; i < coarse.size(); ++i) {
            max_ratio = std::max({max_ratio, coarse[i].ratio, fine[i].ratio});
            drift = std::max(drift, std::abs(fine[i].ratio / coarse[i].ratio - 1.0));
        }
        add("lipschitz_max_ratio_finite", std::isfinite(max_ratio) ? 0.0 : 1.0, 0.0);
        add("lipschitz_refinement_drift", drift, 0.10);
    }

    void bound_stability_check() {
        // identical spectral decay at both resolutions so the measured
        // constant probes the same field family
        auto measure = [&](int n) {
            PeriodicGrid g(n, 2.0 * std::numbers::pi);
            double worst = 0.0;
            for (int t = 0; t < 20; ++t) {
                const SpectralField u = random_divfree(g, 1.0, opts_.seed + 2400 + t, 1.5);
                const SpectralField v = random_divfree(g, 1.0, opts_.seed + 2500 + t, 1.5);
                const double b = std::abs(inner(convect(u, u), v));
                const double den = gradient_norm_sq(u) * std::sqrt(gradient_norm_sq(v));
                worst = std::max(worst, b / std::max(den, 1e-300));
            }
            return worst;
        };
        const double c8 = measure(8);
        const double c16 = measure(16);
        const double ratio = c16 / std::max(c8, 1e-300);
        add("convective_bound_stability", std::max(ratio, 1.0 / ratio), 5.0);
    }
};

}  // namespace

std::vector<CheckResult> run_property_suite(const SuiteOptions& opts) {
    return Suite(opts).run();
}

}  // namespace nsv

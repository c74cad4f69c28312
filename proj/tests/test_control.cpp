#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "nsv/control.hpp"

using namespace nsv;
using nsv::test::rel_diff;

namespace {
const double pi2 = 2.0 * std::numbers::pi;

struct Setup {
    PeriodicGrid grid{12, pi2};
    TimeGrid tg{20, 0.4};
    ModelParams params{0.05, 0.02, 0.1, 0.2, 3.0, 0.4};
    SpectralField u0;
    CostConfig cost;

    explicit Setup(std::uint64_t seed = 100, double kappa = 1.0, double lambda = 0.01)
        : u0(random_divfree(grid, 0.4, seed)) {
        cost.kappa = kappa;
        cost.lambda = lambda;
        cost.target = zero_target(grid, tg);
        for (int m = 0; m <= tg.steps; ++m)
            cost.target.frames[m] = random_divfree(grid, 0.3, seed + 200 + m);
    }
};
}

TEST_CASE("cost evaluation") {
    Setup s;

    SUBCASE("tracked state and zero control give zero cost") {
        const ControlSchedule zero = zero_control(s.grid, s.tg);
        const Trajectory traj = solve_forward(s.u0, zero, s.params);
        CostConfig c;
        c.kappa = 1.0;
        c.lambda = 0.5;
        c.target = target_from_trajectory(traj);
        CHECK(evaluate_cost(traj, zero, c) == 0.0);
    }

    SUBCASE("pure control energy of a constant-in-time control") {
        CostConfig c;
        c.kappa = 0.0;
        c.lambda = 2.0;
        c.target = zero_target(s.grid, s.tg);
        ControlSchedule u = zero_control(s.grid, s.tg);
        for (auto& f : u.frames) f = random_physical(s.grid, 0.7, 9);
        const double frame_sq = l2_norm_sq(u.frames[0]);
        const Trajectory traj = solve_forward(s.u0, u, s.params);
        CHECK(rel_diff(evaluate_cost(traj, u, c), 0.5 * 2.0 * s.tg.horizon * frame_sq) <= 1e-12);
    }

    SUBCASE("matches an independent quadrature reimplementation") {
        const ControlSchedule u = random_control(s.grid, s.tg, 0.6, 11);
        const Trajectory traj = solve_forward(s.u0, u, s.params);
        const double j = evaluate_cost(traj, u, s.cost);
        CHECK(j >= 0.0);
        // duplicate sum: curl-norm tracking term by physical quadrature
        double tracking = 0.0, energy = 0.0;
        for (int n = 0; n < s.tg.steps; ++n) {
            const SpectralField mis = subtract(traj.states[n], s.cost.target.frames[n]);
            tracking += s.tg.dt() * l2_norm_sq(to_physical(curl(mis)));
            energy += s.tg.dt() * l2_norm_sq(u.frames[n]);
        }
        const double dup = 0.5 * s.cost.kappa * tracking + 0.5 * s.cost.lambda * energy;
        CHECK(rel_diff(j, dup) <= 1e-10);
    }

    SUBCASE("weights cannot both vanish") {
        CostConfig c;
        c.kappa = 0.0;
        c.lambda = 0.0;
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    }
}

TEST_CASE("reduced gradient") {
    Setup s;

    SUBCASE("zero data gives zero gradient") {
        Setup z(300);
        z.u0 = zero_spectral(z.grid);
        z.cost.target = zero_target(z.grid, z.tg);
        const ControlSchedule g =
            reduced_gradient(zero_control(z.grid, z.tg), z.u0, z.params, z.cost);
        CHECK(schedule_norm_sq(g) == 0.0);
    }

    SUBCASE("tracked state leaves only the lambda term") {
        const ControlSchedule u = random_control(s.grid, s.tg, 0.5, 12);
        const Trajectory traj = solve_forward(s.u0, u, s.params);
        CostConfig c = s.cost;
        c.target = target_from_trajectory(traj);
        const ControlSchedule g = reduced_gradient(u, s.u0, s.params, c);
        ControlSchedule diff = g;
        schedule_add_scaled(diff, -c.lambda, u);
        CHECK(schedule_norm_sq(diff) <= 1e-24 * schedule_norm_sq(u));
    }

    SUBCASE("gradient Taylor remainder is second order") {
        const ControlSchedule u = random_control(s.grid, s.tg, 0.5, 13);
        const ControlSchedule v = random_control(s.grid, s.tg, 1.0, 14);
        const GradientResult gr = reduced_gradient_full(u, s.u0, s.params, s.cost);
        const double gv = schedule_inner(gr.gradient, v);
        std::vector<double> rs;
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            ControlSchedule pert = u;
            schedule_add_scaled(pert, eps, v);
            const double j = evaluate_cost(solve_forward(s.u0, pert, s.params), pert, s.cost);
            rs.push_back(std::abs(j - gr.cost - eps * gv));
        }
        CHECK(std::log10(rs[0] / rs[1]) >= 1.9);
        CHECK(std::log10(rs[1] / rs[2]) >= 1.9);
    }
}

TEST_CASE("box projection") {
    Setup s;
    const BoxConstraints box = BoxConstraints::uniform(-1.0, 1.0);

    SUBCASE("pointwise clip") {
        ControlSchedule u = zero_control(s.grid, s.tg);
        u.frames[0].comp[0][0] = 0.5;
        u.frames[0].comp[1][0] = 2.0;
        u.frames[0].comp[2][0] = -3.0;
        const ControlSchedule p = project_box(u, box);
        CHECK(p.frames[0].comp[0][0] == 0.5);
        CHECK(p.frames[0].comp[1][0] == 1.0);
        CHECK(p.frames[0].comp[2][0] == -1.0);
    }

    SUBCASE("idempotent and nonexpansive") {
        for (int t = 0; t < 10; ++t) {
            const ControlSchedule a = random_control(s.grid, s.tg, 2.0, 100 + t);
            const ControlSchedule b = random_control(s.grid, s.tg, 2.0, 200 + t);
            const ControlSchedule pa = project_box(a, box);
            const ControlSchedule pb = project_box(b, box);
            ControlSchedule d1 = pa;
            schedule_add_scaled(d1, -1.0, pb);
            ControlSchedule d2 = a;
            schedule_add_scaled(d2, -1.0, b);
            CHECK(schedule_norm_sq(d1) <= schedule_norm_sq(d2) * (1.0 + 1e-14));
            ControlSchedule pp = project_box(pa, box);
            schedule_add_scaled(pp, -1.0, pa);
            CHECK(schedule_norm_sq(pp) == 0.0);
        }
    }

    SUBCASE("invalid bounds rejected") {
        CHECK_THROWS_AS(BoxConstraints::uniform(1.0, -1.0), std::invalid_argument);
    }

    SUBCASE("field bounds clip pointwise") {
        ControlSchedule lo = zero_control(s.grid, s.tg);
        ControlSchedule hi = zero_control(s.grid, s.tg);
        for (auto& f : lo.frames)
            for (int c = 0; c < 3; ++c)
                for (auto& v : f.comp[c]) v = -0.25;
        for (auto& f : hi.frames)
            for (int c = 0; c < 3; ++c)
                for (auto& v : f.comp[c]) v = 0.75;
        const BoxConstraints fbox = BoxConstraints::fields(lo, hi);
        ControlSchedule u = random_control(s.grid, s.tg, 2.0, 15);
        const ControlSchedule p = project_box(u, fbox);
        double worst_lo = 0.0, worst_hi = 0.0;
        for (const auto& f : p.frames)
            for (int c = 0; c < 3; ++c)
                for (double v : f.comp[c]) {
                    worst_lo = std::min(worst_lo, v + 0.25);
                    worst_hi = std::max(worst_hi, v - 0.75);
                }
        CHECK(worst_lo == 0.0);
        CHECK(worst_hi == 0.0);
    }
}

TEST_CASE("variational inequality residual") {
    Setup s;
    const BoxConstraints box = BoxConstraints::uniform(0.0, 1.0);
    ControlSchedule u = zero_control(s.grid, s.tg);
    for (auto& f : u.frames)
        for (int c = 0; c < 3; ++c)
            for (auto& v : f.comp[c]) v = 0.5;

    SUBCASE("zero gradient gives zero residual") {
        CHECK(vi_residual(u, zero_control(s.grid, s.tg), box) == 0.0);
    }

    SUBCASE("interior point: residual equals the gradient norm") {
        const ControlSchedule g = random_control(s.grid, s.tg, 0.2, 16);
        CHECK(rel_diff(vi_residual(u, g, box), std::sqrt(schedule_norm_sq(g))) <= 1e-12);
    }

    SUBCASE("pinned at the upper bound with descent-blocked gradient") {
        ControlSchedule top = u;
        for (auto& f : top.frames)
            for (int c = 0; c < 3; ++c)
                for (auto& v : f.comp[c]) v = 1.0;
        ControlSchedule g = zero_control(s.grid, s.tg);
        for (auto& f : g.frames)
            for (int c = 0; c < 3; ++c)
                for (auto& v : f.comp[c]) v = -0.7;  // pushes past the bound
        CHECK(vi_residual(top, g, box) == 0.0);
    }
}

TEST_CASE("optimize trivial instance converges immediately") {
    Setup s(400, 1.0, 0.5);
    s.u0 = zero_spectral(s.grid);
    s.cost.target = zero_target(s.grid, s.tg);
    OptimizerConfig oc;
    oc.max_iters = 5;
    oc.tol_vi = 1e-14;
    const OptimizeResult res =
        optimize(s.u0, BoxConstraints::uniform(-1.0, 1.0), s.params, s.cost, oc);
    CHECK(res.report.status == "CONVERGED");
    CHECK(res.report.iterations <= 1);
    CHECK(res.report.cost == 0.0);
    CHECK(schedule_norm_sq(res.control) == 0.0);
}

TEST_CASE("optimizer cost sequence is non-increasing") {
    Setup s(500, 0.05, 0.01);
    const ControlSchedule u_true = random_control(s.grid, s.tg, 1.0, 501);
    s.cost.target = target_from_trajectory(solve_forward(s.u0, u_true, s.params));
    OptimizerConfig oc;
    oc.max_iters = 12;
    oc.tol_vi = 1e-13;
    const OptimizeResult res =
        optimize(s.u0, BoxConstraints::uniform(-0.4, 0.4), s.params, s.cost, oc);
    for (std::size_t i = 1; i < res.log.size(); ++i)
        CHECK(res.log[i].cost <= res.log[i - 1].cost * (1.0 + 1e-14));
    CHECK(res.report.vi_residual == res.log.back().vi_residual);
}

TEST_CASE("critical cone projection") {
    Setup s;
    const BoxConstraints box = BoxConstraints::uniform(-1.0, 1.0);
    ControlSchedule u = zero_control(s.grid, s.tg);
    ControlSchedule g = zero_control(s.grid, s.tg);
    ControlSchedule v = zero_control(s.grid, s.tg);
    // point 0: interior with zero gradient -> unchanged
    v.frames[0].comp[0][0] = 0.7;
    // point 1: at lower bound with negative direction -> zeroed
    u.frames[0].comp[0][1] = -1.0;
    v.frames[0].comp[0][1] = -0.5;
    // point 2: at upper bound with positive direction -> zeroed
    u.frames[0].comp[0][2] = 1.0;
    v.frames[0].comp[0][2] = 0.5;
    // point 3: nonzero gradient -> zeroed
    g.frames[0].comp[0][3] = 0.1;
    v.frames[0].comp[0][3] = 0.9;

    const ControlSchedule out = critical_cone_project(v, u, g, box, 1e-8, 1e-8);
    CHECK(out.frames[0].comp[0][0] == 0.7);
    CHECK(out.frames[0].comp[0][1] == 0.0);
    CHECK(out.frames[0].comp[0][2] == 0.0);
    CHECK(out.frames[0].comp[0][3] == 0.0);

    // idempotent
    const ControlSchedule twice = critical_cone_project(out, u, g, box, 1e-8, 1e-8);
    ControlSchedule diff = twice;
    schedule_add_scaled(diff, -1.0, out);
    CHECK(schedule_norm_sq(diff) == 0.0);
}

TEST_CASE("bang-bang classification") {
    Setup s;
    const BoxConstraints box = BoxConstraints::uniform(-1.0, 1.0);
    const Trajectory base = solve_forward(s.u0, zero_control(s.grid, s.tg), s.params);

    SUBCASE("zero costate is everywhere undetermined") {
        const AdjointTrajectory adj =
            solve_adjoint(base, target_from_trajectory(base), s.params, 1.0);
        const BangBangField labels = bang_bang_classify(adj, box, 1e-12);
        for (const auto& frame : labels.labels)
            for (auto lab : frame) CHECK(lab == BangBangLabel::undetermined);
    }

    SUBCASE("signs map to bounds") {
        const AdjointTrajectory adj = solve_adjoint(base, s.cost.target, s.params, 1.0);
        const BangBangField labels = bang_bang_classify(adj, box, 0.0);
        const PhysicalField phi = to_physical(adj.costates[1]);
        const std::size_t npts = s.grid.points();
        for (std::size_t i = 0; i < npts; ++i)
            for (int c = 0; c < 3; ++c) {
                const auto lab = labels.labels[0][c * npts + i];
                if (phi.comp[c][i] > 0.0) CHECK(lab == BangBangLabel::min_bound);
                if (phi.comp[c][i] < 0.0) CHECK(lab == BangBangLabel::max_bound);
            }
    }
}

TEST_CASE("hessian-vector product") {
    Setup s;
    const ControlSchedule u = random_control(s.grid, s.tg, 0.4, 17);

    SUBCASE("zero direction") {
        const HessianVector hv =
            hessian_vector(u, zero_control(s.grid, s.tg), s.u0, s.params, s.cost);
        CHECK(schedule_norm_sq(hv.hv) == 0.0);
        CHECK(hv.curvature == 0.0);
    }

    SUBCASE("rejects r < 2") {
        Setup s1;
        s1.params.r = 1.0;
        CHECK_THROWS_AS(
            (void)hessian_vector(u, random_control(s.grid, s.tg, 1.0, 18), s1.u0, s1.params,
                                 s1.cost),
            std::invalid_argument);
    }

    SUBCASE("symmetry of the bilinear form") {
        const ControlSchedule v1 = random_control(s.grid, s.tg, 1.0, 19);
        const ControlSchedule v2 = random_control(s.grid, s.tg, 0.8, 20);
        const HessianVector h1 = hessian_vector(u, v1, s.u0, s.params, s.cost);
        const HessianVector h2 = hessian_vector(u, v2, s.u0, s.params, s.cost);
        const double a = schedule_inner(h1.hv, v2);
        const double b = schedule_inner(h2.hv, v1);
        CHECK(rel_diff(a, b) <= 1e-8);
    }

    SUBCASE("lambda-only cost has curvature lambda ||V||^2") {
        CostConfig c;
        c.kappa = 0.0;
        c.lambda = 0.7;
        c.target = zero_target(s.grid, s.tg);
        const ControlSchedule v = random_control(s.grid, s.tg, 1.0, 21);
        const HessianVector hv = hessian_vector(u, v, s.u0, s.params, c);
        CHECK(rel_diff(hv.curvature, 0.7 * schedule_norm_sq(v)) <= 1e-12);
    }
}

TEST_CASE("second-order check with dominant lambda passes") {
    Setup s(600, 1.0, 1.0);
    const ControlSchedule u = zero_control(s.grid, s.tg);
    const SecondOrderReport rep = second_order_check(
        u, s.u0, s.params, s.cost, BoxConstraints::uniform(-1.0, 1.0), 3, 777);
    CHECK(!rep.degenerate);
    CHECK(rep.pass);
    CHECK(rep.min_curvature > 0.0);
}

TEST_CASE("global optimality diagnostic") {
    Setup s;
    const Trajectory base = solve_forward(s.u0, zero_control(s.grid, s.tg), s.params);

    SUBCASE("zero costate satisfied without constants") {
        const AdjointTrajectory adj =
            solve_adjoint(base, target_from_trajectory(base), s.params, 1.0);
        const GlobalDiagnostic d = global_optimality_diagnostic(adj, s.params, 1.0, {});
        CHECK(d.verdict == GlobalVerdict::satisfied);
    }

    SUBCASE("missing constants yield UNKNOWN") {
        const AdjointTrajectory adj = solve_adjoint(base, s.cost.target, s.params, 1.0);
        const GlobalDiagnostic d = global_optimality_diagnostic(adj, s.params, 1.0, {});
        CHECK(d.verdict == GlobalVerdict::unknown);
        CHECK(d.q_v > 0.0);
    }

    SUBCASE("r = 1 branch uses only the V norm") {
        ModelParams p1 = s.params;
        p1.r = 1.0;
        const Trajectory b1 = solve_forward(s.u0, zero_control(s.grid, s.tg), p1);
        const AdjointTrajectory adj = solve_adjoint(b1, s.cost.target, p1, 1.0);
        EmbeddingConstants ec;
        ec.c = 2.0;
        const GlobalDiagnostic d = global_optimality_diagnostic(adj, p1, 1.0, ec);
        CHECK(d.threshold == doctest::Approx(2.0 * d.q_v));
    }

    SUBCASE("kappa below the threshold is NOT_SATISFIED, above is SATISFIED") {
        const AdjointTrajectory adj = solve_adjoint(base, s.cost.target, s.params, 1.0);
        EmbeddingConstants ec;
        ec.c = 1.0;
        ec.c_r = 1.0;
        ec.c_hat = 1.0;
        const GlobalDiagnostic lo = global_optimality_diagnostic(adj, s.params, 1e-12, ec);
        CHECK(lo.verdict == GlobalVerdict::not_satisfied);
        const GlobalDiagnostic hi = global_optimality_diagnostic(adj, s.params, 1e12, ec);
        CHECK(hi.verdict == GlobalVerdict::satisfied);
    }
}

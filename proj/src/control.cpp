#include "nsv/control.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nsv {

void CostConfig::validate() const {
    if (kappa < 0.0 || lambda < 0.0)
        throw std::invalid_argument("cost weights kappa, lambda must be nonnegative");
    if (kappa == 0.0 && lambda == 0.0)
        throw std::invalid_argument("cost weights kappa and lambda cannot both be zero");
}

BoxConstraints BoxConstraints::uniform(double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("box bounds require u_min <= u_max");
    BoxConstraints b;
    b.lo_ = lo;
    b.hi_ = hi;
    return b;
}

BoxConstraints BoxConstraints::fields(ControlSchedule lo, ControlSchedule hi) {
    if (lo.frames.size() != hi.frames.size())
        throw std::invalid_argument("box bound schedules must have equal length");
    for (std::size_t n = 0; n < lo.frames.size(); ++n)
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < lo.frames[n].comp[c].size(); ++i)
                if (!(lo.frames[n].comp[c][i] <= hi.frames[n].comp[c][i]))
                    throw std::invalid_argument("box bounds require u_min <= u_max pointwise");
    BoxConstraints b;
    b.lo_field_ = std::move(lo);
    b.hi_field_ = std::move(hi);
    return b;
}

double BoxConstraints::span() const {
    if (!lo_field_) return hi_ - lo_;
    double s = 0.0;
    for (std::size_t n = 0; n < lo_field_->frames.size(); ++n)
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < lo_field_->frames[n].comp[c].size(); ++i)
                s = std::max(s, hi_field_->frames[n].comp[c][i] - lo_field_->frames[n].comp[c][i]);
    return s;
}

void OptimizerConfig::validate() const {
    if (!(step0 > 0.0)) throw std::invalid_argument("optimizer.step0 must be positive");
    if (!(armijo_c > 0.0 && armijo_c < 1.0))
        throw std::invalid_argument("optimizer.armijo_c must lie in (0,1)");
    if (!(shrink > 0.0 && shrink < 1.0))
        throw std::invalid_argument("optimizer.shrink must lie in (0,1)");
    if (max_iters < 1) throw std::invalid_argument("optimizer.max_iters must be >= 1");
    if (!(tol_vi >= 0.0)) throw std::invalid_argument("optimizer.tol_vi must be nonnegative");
}

double evaluate_cost(const Trajectory& traj, const ControlSchedule& control,
                     const CostConfig& cost) {
    if (traj.time_grid != control.time_grid)
        throw std::invalid_argument("evaluate_cost: time grid mismatch");
    if (cost.target.time_grid != traj.time_grid)
        throw std::invalid_argument("evaluate_cost: target not aligned with trajectory");
    const double dt = traj.time_grid.dt();
    double tracking = 0.0;
    if (cost.kappa != 0.0)
        for (int n = 0; n < traj.time_grid.steps; ++n)
            tracking += dt * gradient_norm_sq(subtract(traj.states[n], cost.target.frames[n]));
    double energy = 0.0;
    if (cost.lambda != 0.0) energy = schedule_norm_sq(control);
    return 0.5 * cost.kappa * tracking + 0.5 * cost.lambda * energy;
}

GradientResult reduced_gradient_full(const ControlSchedule& U, const SpectralField& u0,
                                     const ModelParams& p, const CostConfig& cost) {
    cost.validate();
    GradientResult res;
    res.state = solve_forward(u0, U, p);
    res.cost = evaluate_cost(res.state, U, cost);
    res.adjoint = solve_adjoint(res.state, cost.target, p, cost.kappa);
    res.gradient = ControlSchedule{U.time_grid, {}};
    res.gradient.frames.reserve(U.frames.size());
    for (int n = 0; n < U.time_grid.steps; ++n) {
        PhysicalField g = to_physical(res.adjoint.costates[n + 1]);
        add_scaled(g, cost.lambda, U.frames[n]);
        res.gradient.frames.push_back(std::move(g));
    }
    return res;
}

ControlSchedule reduced_gradient(const ControlSchedule& U, const SpectralField& u0,
                                 const ModelParams& p, const CostConfig& cost) {
    return reduced_gradient_full(U, u0, p, cost).gradient;
}

ControlSchedule project_box(const ControlSchedule& control, const BoxConstraints& box) {
    ControlSchedule out = control;
    for (int n = 0; n < int(out.frames.size()); ++n)
        for (int c = 0; c < 3; ++c) {
            auto& vals = out.frames[n].comp[c];
            for (std::size_t i = 0; i < vals.size(); ++i)
                vals[i] = std::min(box.hi(n, c, i), std::max(box.lo(n, c, i), vals[i]));
        }
    return out;
}

double vi_residual(const ControlSchedule& U, const ControlSchedule& gradient,
                   const BoxConstraints& box) {
    if (U.time_grid != gradient.time_grid)
        throw std::invalid_argument("vi_residual: time grid mismatch");
    const double dt = U.time_grid.dt();
    double s = 0.0;
    for (int n = 0; n < int(U.frames.size()); ++n) {
        const double vol = U.frames[n].grid.cell_volume();
        double frame = 0.0;
        for (int c = 0; c < 3; ++c) {
            const auto& uv = U.frames[n].comp[c];
            const auto& gv = gradient.frames[n].comp[c];
            for (std::size_t i = 0; i < uv.size(); ++i) {
                const double proj =
                    std::min(box.hi(n, c, i), std::max(box.lo(n, c, i), uv[i] - gv[i]));
                const double d = uv[i] - proj;
                frame += d * d;
            }
        }
        s += dt * vol * frame;
    }
    return std::sqrt(s);
}

double projection_formula_residual(const ControlSchedule& U, const AdjointTrajectory& adjoint,
                                   const BoxConstraints& box, double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("projection formula requires lambda > 0");
    double worst = 0.0;
    for (int n = 0; n < int(U.frames.size()); ++n) {
        const PhysicalField phi = to_physical(adjoint.costates[n + 1]);
        for (int c = 0; c < 3; ++c) {
            const auto& uv = U.frames[n].comp[c];
            const auto& pv = phi.comp[c];
            for (std::size_t i = 0; i < uv.size(); ++i) {
                const double proj =
                    std::min(box.hi(n, c, i), std::max(box.lo(n, c, i), -pv[i] / lambda));
                worst = std::max(worst, std::abs(uv[i] - proj));
            }
        }
    }
    return worst;
}

BangBangField bang_bang_classify(const AdjointTrajectory& adjoint, const BoxConstraints& box,
                                 double threshold) {
    (void)box;
    const PeriodicGrid& g = adjoint.costates[0].grid;
    BangBangField out{adjoint.time_grid, g, {}};
    const std::size_t npts = g.points();
    out.labels.reserve(adjoint.time_grid.steps);
    for (int n = 0; n < adjoint.time_grid.steps; ++n) {
        const PhysicalField phi = to_physical(adjoint.costates[n + 1]);
        std::vector<BangBangLabel> frame(3 * npts, BangBangLabel::undetermined);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < npts; ++i) {
                const double v = phi.comp[c][i];
                if (v > threshold)
                    frame[c * npts + i] = BangBangLabel::min_bound;
                else if (v < -threshold)
                    frame[c * npts + i] = BangBangLabel::max_bound;
            }
        out.labels.push_back(std::move(frame));
    }
    return out;
}

double bang_bang_violation_fraction(const BangBangField& labels, const ControlSchedule& U,
                                    const BoxConstraints& box, double tol) {
    std::size_t determined = 0, violated = 0;
    const std::size_t npts = labels.grid.points();
    for (int n = 0; n < int(labels.labels.size()); ++n)
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < npts; ++i) {
                const BangBangLabel lab = labels.labels[n][c * npts + i];
                if (lab == BangBangLabel::undetermined) continue;
                ++determined;
                const double u = U.frames[n].comp[c][i];
                const double bound =
                    lab == BangBangLabel::min_bound ? box.lo(n, c, i) : box.hi(n, c, i);
                if (std::abs(u - bound) > tol) ++violated;
            }
    return determined == 0 ? 0.0 : double(violated) / double(determined);
}

OptimizeResult optimize(const SpectralField& u0, const BoxConstraints& box, const ModelParams& p,
                        const CostConfig& cost, const OptimizerConfig& opt,
                        const ControlSchedule* start) {
    opt.validate();
    cost.validate();
    const TimeGrid tg = cost.target.time_grid;

    OptimizeResult res;
    res.control = start ? project_box(*start, box)
                        : project_box(zero_control(u0.grid, tg), box);

    GradientResult gr = reduced_gradient_full(res.control, u0, p, cost);
    double step_try = opt.step0;
    double last_step = 0.0;
    int last_evals = 0;
    res.report.status = "NOT_CONVERGED";

    for (int k = 0; k <= opt.max_iters; ++k) {
        const double gnorm = std::sqrt(schedule_norm_sq(gr.gradient));
        const double vi = vi_residual(res.control, gr.gradient, box);
        res.log.push_back({k, gr.cost, gnorm, vi, last_step, last_evals});
        res.report.iterations = k;
        if (vi <= opt.tol_vi) {
            res.report.status = "CONVERGED";
            break;
        }
        if (k == opt.max_iters) break;

        // Armijo backtracking along the projection arc.
        double s = step_try;
        bool accepted = false;
        int evals = 0;
        ControlSchedule candidate{tg, {}};
        double cand_cost = 0.0;
        for (int bt = 0; bt <= opt.max_backtracks; ++bt) {
            candidate = res.control;
            schedule_add_scaled(candidate, -s, gr.gradient);
            candidate = project_box(candidate, box);
            ControlSchedule diff = candidate;
            schedule_add_scaled(diff, -1.0, res.control);
            const double move_sq = schedule_norm_sq(diff);
            if (move_sq == 0.0) break;  // stationary within the box
            const Trajectory traj = solve_forward(u0, candidate, p);
            cand_cost = evaluate_cost(traj, candidate, cost);
            ++evals;
            if (cand_cost <= gr.cost - opt.armijo_c / s * move_sq) {
                accepted = true;
                break;
            }
            s *= opt.shrink;
        }
        if (!accepted) {
            res.report.status = "LINE_SEARCH_FAILED";
            last_evals = evals;
            break;
        }
        res.control = std::move(candidate);
        gr = reduced_gradient_full(res.control, u0, p, cost);
        last_step = s;
        last_evals = evals;
        step_try = std::min(s * opt.step_growth, opt.step_max);
        (void)cand_cost;
    }

    res.report.cost = gr.cost;
    res.report.grad_norm = std::sqrt(schedule_norm_sq(gr.gradient));
    res.report.vi_residual = vi_residual(res.control, gr.gradient, box);
    res.report.projection_residual =
        cost.lambda > 0.0 ? projection_formula_residual(res.control, gr.adjoint, box, cost.lambda)
                          : 0.0;
    return res;
}

HessianVector hessian_vector(const ControlSchedule& U, const ControlSchedule& V,
                             const SpectralField& u0, const ModelParams& p,
                             const CostConfig& cost) {
    if (p.r < 2.0)
        throw std::invalid_argument("hessian_vector requires damping exponent r >= 2");
    const Trajectory state = solve_forward(u0, U, p);
    const AdjointTrajectory adjoint = solve_adjoint(state, cost.target, p, cost.kappa);
    const Trajectory w = solve_linearized(state, V, p);
    const AdjointTrajectory second = solve_second_adjoint(state, adjoint, w, p, cost.kappa);

    HessianVector out;
    out.hv = ControlSchedule{U.time_grid, {}};
    out.hv.frames.reserve(V.frames.size());
    for (int n = 0; n < U.time_grid.steps; ++n) {
        PhysicalField h = to_physical(second.costates[n + 1]);
        add_scaled(h, cost.lambda, V.frames[n]);
        out.hv.frames.push_back(std::move(h));
    }
    out.curvature = schedule_inner(out.hv, V);
    return out;
}

ControlSchedule critical_cone_project(const ControlSchedule& V, const ControlSchedule& U,
                                      const ControlSchedule& gradient_field,
                                      const BoxConstraints& box, double tol_active,
                                      double tol_grad) {
    ControlSchedule out = V;
    for (int n = 0; n < int(out.frames.size()); ++n)
        for (int c = 0; c < 3; ++c) {
            auto& vv = out.frames[n].comp[c];
            const auto& uv = U.frames[n].comp[c];
            const auto& gv = gradient_field.frames[n].comp[c];
            for (std::size_t i = 0; i < vv.size(); ++i) {
                if (std::abs(gv[i]) > tol_grad) {
                    vv[i] = 0.0;
                    continue;
                }
                if (std::abs(uv[i] - box.lo(n, c, i)) <= tol_active) vv[i] = std::max(vv[i], 0.0);
                if (std::abs(uv[i] - box.hi(n, c, i)) <= tol_active) vv[i] = std::min(vv[i], 0.0);
            }
        }
    return out;
}

SecondOrderReport second_order_check(const ControlSchedule& U, const SpectralField& u0,
                                     const ModelParams& p, const CostConfig& cost,
                                     const BoxConstraints& box, int n_samples,
                                     std::uint64_t seed) {
    SecondOrderReport rep;
    const GradientResult gr = reduced_gradient_full(U, u0, p, cost);
    const double tol_active = 1e-6 * std::max(box.span(), 1.0);
    const double tol_grad = 1e-6 * std::max(1.0, std::sqrt(schedule_norm_sq(gr.gradient)));

    for (int s = 0; s < n_samples; ++s) {
        ControlSchedule dir =
            random_control(u0.grid, U.time_grid, 1.0, seed + 7919 * std::uint64_t(s + 1));
        dir = critical_cone_project(dir, U, gr.gradient, box, tol_active, tol_grad);
        const double nsq = schedule_norm_sq(dir);
        if (nsq < 1e-28) {
            ++rep.skipped;
            continue;
        }
        const HessianVector hv = hessian_vector(U, dir, u0, p, cost);
        rep.samples.push_back({s, hv.curvature, nsq});
        rep.min_curvature = std::min(rep.min_curvature, hv.curvature);
    }
    rep.degenerate = rep.samples.empty();
    rep.pass = !rep.degenerate && rep.min_curvature > 0.0;
    return rep;
}

GlobalDiagnostic global_optimality_diagnostic(const AdjointTrajectory& adjoint,
                                              const ModelParams& p, double kappa,
                                              const EmbeddingConstants& constants) {
    GlobalDiagnostic d;
    for (const auto& phi : adjoint.costates) {
        d.q_v = std::max(d.q_v, std::sqrt(gradient_norm_sq(phi)));
        d.q_h = std::max(d.q_h, std::sqrt(l2_norm_sq(phi)));
    }
    if (d.q_v == 0.0 && d.q_h == 0.0) {
        d.threshold = 0.0;
        d.verdict = kappa > 0.0 ? GlobalVerdict::satisfied : GlobalVerdict::unknown;
        return d;
    }
    const bool have_c = constants.c.has_value();
    if (p.r == 1.0) {
        if (!have_c) return d;
        d.threshold = *constants.c * d.q_v;
    } else if (p.r == 2.0) {
        if (!have_c) return d;
        d.threshold = *constants.c * (d.q_v + 4.0 * p.beta * d.q_h);
    } else if (p.r > 2.0) {
        if (!have_c || !constants.c_r || !constants.c_hat) return d;
        d.threshold = *constants.c *
                      (d.q_v + 2.0 * p.beta * *constants.c_r *
                                   std::pow(*constants.c_hat, p.r - 2.0) * d.q_h);
    } else {
        return d;  // 1 < r < 2: no branch stated
    }
    d.verdict = 0.5 * kappa >= d.threshold ? GlobalVerdict::satisfied : GlobalVerdict::not_satisfied;
    return d;
}

}  // namespace nsv

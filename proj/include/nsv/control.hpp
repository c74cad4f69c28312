#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "nsv/sensitivity.hpp"

namespace nsv {

struct CostConfig {
    double kappa = 1.0;   // enstrophy tracking weight
    double lambda = 0.0;  // control energy weight
    TargetField target;

    void validate() const;
};

/// Pointwise box bounds on the raw control, either constant scalars or full
/// per-point schedules with lo <= hi everywhere.
class BoxConstraints {
  public:
    static BoxConstraints uniform(double lo, double hi);
    static BoxConstraints fields(ControlSchedule lo, ControlSchedule hi);

    double lo(int step, int c, std::size_t i) const {
        return lo_field_ ? lo_field_->frames[step].comp[c][i] : lo_;
    }
    double hi(int step, int c, std::size_t i) const {
        return hi_field_ ? hi_field_->frames[step].comp[c][i] : hi_;
    }
    bool is_uniform() const { return !lo_field_; }
    double uniform_lo() const { return lo_; }
    double uniform_hi() const { return hi_; }
    /// Representative bound spread, used for activity tolerances.
    double span() const;

  private:
    double lo_ = 0.0, hi_ = 0.0;
    std::optional<ControlSchedule> lo_field_, hi_field_;
};

struct OptimizerConfig {
    int max_iters = 200;
    double step0 = 1.0;
    double armijo_c = 1e-4;   // sufficient decrease constant, in (0,1)
    double shrink = 0.5;      // backtracking factor, in (0,1)
    double tol_vi = 1e-8;     // stop on the variational-inequality residual
    int max_backtracks = 60;
    double step_growth = 2.0; // tentative growth of the accepted step
    double step_max = 1e12;

    void validate() const;
};

struct IterationRow {
    int iter;
    double cost, grad_norm, vi_residual, step_size;
    int line_search_evals;
};

struct CurvatureSample {
    int direction_id;
    double curvature;
    double norm_sq;
};

enum class GlobalVerdict { satisfied, not_satisfied, unknown };

struct GlobalDiagnostic {
    double q_v = 0.0;       // max_n ||phi_n||_V
    double q_h = 0.0;       // max_n ||phi_n||_H
    double threshold = 0.0; // right-hand side compared against kappa/2
    GlobalVerdict verdict = GlobalVerdict::unknown;
};

struct OptimalityReport {
    double cost = 0.0;
    double grad_norm = 0.0;
    double vi_residual = 0.0;
    double projection_residual = 0.0;
    std::vector<CurvatureSample> soc_samples;
    GlobalDiagnostic global;
    std::string status;  // CONVERGED | NOT_CONVERGED | LINE_SEARCH_FAILED
    int iterations = 0;
};

/// J = (kappa/2) sum_n dt ||grad(u_n - u_d_n)||^2 + (lambda/2) sum_n dt ||U_n||^2
/// with left-endpoint quadrature matching the scheme.
double evaluate_cost(const Trajectory& traj, const ControlSchedule& control,
                     const CostConfig& cost);

struct GradientResult {
    ControlSchedule gradient;  // g_n = lambda U_n + phi_{n+1} in physical space
    AdjointTrajectory adjoint;
    Trajectory state;
    double cost = 0.0;
};

GradientResult reduced_gradient_full(const ControlSchedule& U, const SpectralField& u0,
                                     const ModelParams& p, const CostConfig& cost);
ControlSchedule reduced_gradient(const ControlSchedule& U, const SpectralField& u0,
                                 const ModelParams& p, const CostConfig& cost);

/// Componentwise clip of every value into the box; idempotent, 1-Lipschitz.
ControlSchedule project_box(const ControlSchedule& control, const BoxConstraints& box);

/// || U - P_box(U - g) || in the discrete L^2(0,T;H) norm; zero iff U is
/// stationary for the box-constrained problem.
double vi_residual(const ControlSchedule& U, const ControlSchedule& gradient,
                   const BoxConstraints& box);

/// Pointwise residual of the projection formula U = P_box(-phi/lambda),
/// reported as the max-abs deviation; requires lambda > 0.
double projection_formula_residual(const ControlSchedule& U, const AdjointTrajectory& adjoint,
                                   const BoxConstraints& box, double lambda);

enum class BangBangLabel : std::uint8_t { min_bound = 0, max_bound = 1, undetermined = 2 };

/// Labels per step/point/component from the sign of the costate (lambda = 0
/// case): phi > threshold -> MIN, phi < -threshold -> MAX, else UNDETERMINED.
struct BangBangField {
    TimeGrid time_grid;
    PeriodicGrid grid;
    // labels[n][c * points + i]
    std::vector<std::vector<BangBangLabel>> labels;
};

BangBangField bang_bang_classify(const AdjointTrajectory& adjoint, const BoxConstraints& box,
                                 double threshold);

/// Fraction of labelled (non-UNDETERMINED) entries where the control is not at
/// its indicated bound within tol.
double bang_bang_violation_fraction(const BangBangField& labels, const ControlSchedule& U,
                                    const BoxConstraints& box, double tol);

struct OptimizeResult {
    ControlSchedule control;
    OptimalityReport report;
    std::vector<IterationRow> log;
};

/// Projected gradient with Armijo backtracking on the projection arc:
/// U^{k+1} = P(U^k - s_k g^k), accepted when
/// J(U^{k+1}) <= J(U^k) - armijo_c/s_k ||U^{k+1} - U^k||^2.
OptimizeResult optimize(const SpectralField& u0, const BoxConstraints& box, const ModelParams& p,
                        const CostConfig& cost, const OptimizerConfig& opt,
                        const ControlSchedule* start = nullptr);

struct HessianVector {
    ControlSchedule hv;       // lambda V + phi'[V]
    double curvature = 0.0;   // <HV, V> in L^2(0,T;H)
};

/// Exact Hessian-vector product of the discrete reduced cost via the
/// second-order adjoint; requires r >= 2.
HessianVector hessian_vector(const ControlSchedule& U, const ControlSchedule& V,
                             const SpectralField& u0, const ModelParams& p,
                             const CostConfig& cost);

/// Componentwise projection into the critical cone at (U, g): nonnegative at
/// the lower bound, nonpositive at the upper bound, zero where |g| > tol_grad.
ControlSchedule critical_cone_project(const ControlSchedule& V, const ControlSchedule& U,
                                      const ControlSchedule& gradient_field,
                                      const BoxConstraints& box, double tol_active,
                                      double tol_grad);

struct SecondOrderReport {
    std::vector<CurvatureSample> samples;
    int skipped = 0;
    bool degenerate = false;
    double min_curvature = std::numeric_limits<double>::infinity();
    bool pass = false;
};

SecondOrderReport second_order_check(const ControlSchedule& U, const SpectralField& u0,
                                     const ModelParams& p, const CostConfig& cost,
                                     const BoxConstraints& box, int n_samples,
                                     std::uint64_t seed);

struct EmbeddingConstants {
    std::optional<double> c;      // trilinear-form constant
    std::optional<double> c_r;    // damping constant, r-dependent
    std::optional<double> c_hat;  // L^inf-in-time H^2 state bound
};

/// Evaluates the adjoint-based global optimality test for the given branch of
/// r; UNKNOWN when the needed embedding constants were not supplied.
GlobalDiagnostic global_optimality_diagnostic(const AdjointTrajectory& adjoint,
                                              const ModelParams& p, double kappa,
                                              const EmbeddingConstants& constants);

}  // namespace nsv

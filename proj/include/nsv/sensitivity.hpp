#pragma once

#include "nsv/state.hpp"

namespace nsv {

/// Desired velocity u_d(t), one divergence-free frame per time node.
struct TargetField {
    TimeGrid time_grid;
    std::vector<SpectralField> frames;
};

TargetField zero_target(const PeriodicGrid& g, const TimeGrid& tg);
TargetField target_from_trajectory(const Trajectory& traj);
/// Leray-projects every frame on ingestion.
TargetField make_target(std::vector<SpectralField> frames, const TimeGrid& tg);

/// Costates phi_m at the time nodes, divergence-free and zero-mean; the
/// terminal costate is the zero field.
struct AdjointTrajectory {
    TimeGrid time_grid;
    std::vector<SpectralField> costates;
};

struct AdjointOptions {
    double blowup_limit = 1e8;
    /// Test hook: flips the sign of the misfit source so duality checks fail.
    bool flip_source_sign = false;
};

/// Tangent solve: w is driven by V with w(0) = 0; the discretization is the
/// exact Jacobian of the forward IMEX step (same diagonal implicit operator,
/// explicit terms replaced by (w.grad)u + (u.grad)w and beta f'(u)w).
Trajectory solve_linearized(const Trajectory& base, const ControlSchedule& V,
                            const ModelParams& p, const SolverOptions& opts = {});

/// Backward sweep producing the exact transpose of the discrete tangent step,
/// which is simultaneously a consistent one-step discretization of the
/// continuous adjoint system with source kappa |k|^2 (u - u_d) and terminal
/// costate zero.  costates[m] multiplies the step that produces state m.
AdjointTrajectory solve_adjoint(const Trajectory& base, const TargetField& target,
                                const ModelParams& p, double kappa,
                                const AdjointOptions& opts = {});

/// Two-level checkpointing variant for long horizons: stores every stride-th
/// state during the forward pass and recomputes segments on the way back.
/// Bitwise identical to solve_adjoint on the stored trajectory.
AdjointTrajectory solve_adjoint_checkpointed(const SpectralField& u0,
                                             const ControlSchedule& control,
                                             const TargetField& target, const ModelParams& p,
                                             double kappa, int stride,
                                             const SolverOptions& fwd_opts = {},
                                             const AdjointOptions& opts = {});

struct DualityResult {
    double lhs = 0.0;      // kappa sum dt <grad w_n, grad(u_n - u_d_n)>
    double rhs = 0.0;      // sum dt <phi_{n+1}, V_n>
    double rel_err = 0.0;
};

/// Discrete counterpart of the identity
///   kappa int grad w . grad(u - u_d) dx dt = int phi . V dx dt,
/// with both sides under the scheme's left-endpoint quadrature.
DualityResult duality_check(const Trajectory& base, const ControlSchedule& V,
                            const TargetField& target, const ModelParams& p, double kappa,
                            const AdjointOptions& opts = {});

/// Second-order adjoint: the derivative of the costate map along the tangent
/// trajectory w, used for Hessian-vector products.  Requires r >= 2.
AdjointTrajectory solve_second_adjoint(const Trajectory& base, const AdjointTrajectory& adjoint,
                                       const Trajectory& w, const ModelParams& p, double kappa);

}  // namespace nsv

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nsv/field.hpp"

namespace nsv {

struct TimeGrid {
    int steps = 0;
    double horizon = 0.0;

    double dt() const { return horizon / steps; }
    double time(int n) const { return n * dt(); }
    bool operator==(const TimeGrid& o) const { return steps == o.steps && horizon == o.horizon; }
    bool operator!=(const TimeGrid& o) const { return !(*this == o); }
};

struct ModelParams {
    double mu = 1.0;     // Voigt length scale squared
    double nu = 1.0;     // kinematic viscosity
    double alpha = 1.0;  // Darcy coefficient
    double beta = 1.0;   // damping coefficient
    double r = 3.0;      // damping exponent
    double horizon = 1.0;

    void validate() const;
};

enum class TimeScheme { imex_euler, cnab };

struct SolverOptions {
    double blowup_limit = 1e8;
    bool disable_convection = false;
    TimeScheme scheme = TimeScheme::imex_euler;
};

struct BlowupError : std::runtime_error {
    int step;
    explicit BlowupError(int s)
        : std::runtime_error("solution exceeded blow-up guard at step " + std::to_string(s)),
          step(s) {}
};

/// Distributed control U(x,t), piecewise constant in time on [t_n, t_{n+1}),
/// one raw physical frame per step.
struct ControlSchedule {
    TimeGrid time_grid;
    std::vector<PhysicalField> frames;
};

ControlSchedule zero_control(const PeriodicGrid& g, const TimeGrid& tg);
ControlSchedule random_control(const PeriodicGrid& g, const TimeGrid& tg, double amplitude,
                               std::uint64_t seed);

// L^2(0,T;H) accumulations with the left-endpoint dt weight.
double schedule_inner(const ControlSchedule& a, const ControlSchedule& b);
double schedule_norm_sq(const ControlSchedule& a);
void schedule_add_scaled(ControlSchedule& y, double a, const ControlSchedule& x);
void schedule_scale(ControlSchedule& y, double a);

/// Forward solution: states[n] at time node n, all divergence-free zero-mean.
struct Trajectory {
    TimeGrid time_grid;
    std::vector<SpectralField> states;
};

/// One IMEX Euler update, diagonal per wavenumber:
///   (1 + mu|k|^2 + dt(nu|k|^2 + alpha)) u_{n+1}
///       = (1 + mu|k|^2) u_n + dt P T[U_n - (u_n.grad)u_n - beta f(u_n)],
/// with the convective and damping terms evaluated pseudo-spectrally at u_n
/// and the control Leray-projected.
SpectralField step(const SpectralField& u, const PhysicalField& control, const ModelParams& p,
                   double dt, const SolverOptions& opts = {});

Trajectory solve_forward(const SpectralField& u0, const ControlSchedule& control,
                         const ModelParams& p, const SolverOptions& opts = {});

/// Residual of the scheme's own energy equation (pair the update with u_{n+1});
/// exact to roundoff by construction.  Returns one relative residual per step.
std::vector<double> scheme_balance_residual(const Trajectory& traj, const ControlSchedule& control,
                                            const ModelParams& p, const SolverOptions& opts = {});

/// Residual of the continuous energy identity
///   dE/dt + nu ||u||_V^2 + alpha ||u||^2 + beta ||u||_{r+1}^{r+1} - (U,u) = 0
/// evaluated per step at the right endpoint; first order in dt.
std::vector<double> energy_balance_residual(const Trajectory& traj, const ControlSchedule& control,
                                            const ModelParams& p);

struct EnergyRow {
    int step;
    double time, l2, vnorm, lrp1, energy, residual;
};

std::vector<EnergyRow> energy_log(const Trajectory& traj, const ControlSchedule& control,
                                  const ModelParams& p);

}  // namespace nsv

#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>

#include "nsv/control.hpp"

namespace nsv {

/// Retained-mode system for the independent reference integrator: the mode
/// set is the grid's dealias mask (closed under k -> -k), and the nonlinear
/// terms are evaluated by dense convolution over that set, with no FFT and no
/// aliasing.  The damping term is polynomial only for r in {1, 3}.
struct GalerkinSystem {
    PeriodicGrid grid;
    std::vector<std::array<int, 3>> modes;  // signed retained triples, k = 0 excluded
};

GalerkinSystem make_galerkin_system(const PeriodicGrid& g, int max_modes = 64);

/// Integrates the retained-mode ODE system with classical RK4 at substep
/// <= fine_dt, sampling the solution at the control slab boundaries.
Trajectory galerkin_reference_solve(const GalerkinSystem& sys, const SpectralField& u0,
                                    const ControlSchedule& control, const ModelParams& p,
                                    double fine_dt, const SolverOptions& opts = {});

struct RemainderRow {
    double eps;
    double fd_central;          // (J(U+eV) - J(U-eV)) / 2e
    double central_remainder;   // |fd_central - <g,V>|
    double taylor_remainder;    // |J(U+eV) - J(U) - e <g,V>|
};

std::vector<RemainderRow> fd_gradient_oracle(const ControlSchedule& U, const SpectralField& u0,
                                             const ModelParams& p, const CostConfig& cost,
                                             const ControlSchedule& V,
                                             std::span<const double> eps_list);

/// Least-squares slope of log(value) against log(eps); rows with zero value
/// are dropped.
double observed_order(std::span<const RemainderRow> rows, bool taylor);

struct LipschitzRow {
    double control_dist;  // ||U1 - U2||_{L^2(0,T;H)}
    double state_dist;    // discrete H^1(0,T;V) distance of the states
    double ratio;
};

std::vector<LipschitzRow> lipschitz_probe(const SpectralField& u0, const ModelParams& p,
                                          const TimeGrid& tg, int n_pairs, double magnitude,
                                          std::uint64_t seed);

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

std::string format_check_line(const CheckResult& c);

struct SuiteOptions {
    std::uint64_t seed = 20240801;
    bool corrupt_adjoint = false;  // mutation hook: flips the adjoint source sign
    bool quick = false;            // reduced instance counts for smoke runs
    std::function<void(const CheckResult&)> on_result;  // streaming callback
};

/// Runs every identity and experiment the toolkit asserts: operator algebra,
/// damping calculus, energy balances, adjoint duality, gradient Taylor tests,
/// oracle refinement, optimizer optimality, Hessian symmetry, recovery and
/// determinism.  Each entry is pass/fail against its pinned threshold.
std::vector<CheckResult> run_property_suite(const SuiteOptions& opts = {});

}  // namespace nsv

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nsv/control.hpp"

namespace nsv {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat, typed key-value run configuration with sections; unknown sections or
/// keys are errors.
struct RunConfig {
    // [grid]
    int n = 0;
    double length = 2.0 * std::numbers::pi;
    double dealias = 2.0 / 3.0;
    // [time]
    double horizon = 0.0;
    int steps = 0;
    TimeScheme scheme = TimeScheme::imex_euler;
    // [model]
    ModelParams model;
    // [cost]
    double kappa = 1.0;
    double lambda = 0.0;
    // [target]
    std::string target_kind = "zero";  // zero | synthetic | files
    double target_amplitude = 0.5;
    std::uint64_t target_seed = 1;
    std::string target_prefix;  // files: <prefix><node %06d>.nsvd
    // [box]
    double u_min = -1e30;
    double u_max = 1e30;
    // [optimizer]
    OptimizerConfig optimizer;
    // [init]
    std::string init_kind = "zero";  // zero | taylor-green | random-divfree | file
    double init_amplitude = 1.0;
    std::string init_path;
    // [output]
    std::string output_dir = "out";
    int snapshot_every = 0;
    // [run]
    std::uint64_t seed = 0;

    PeriodicGrid make_grid() const;
    TimeGrid make_time_grid() const;
    SpectralField make_initial_condition() const;
    BoxConstraints make_box() const;
    /// Builds the target field; `synthetic` runs a forward solve under a
    /// seeded random in-box control, `files` reads snapshot series frames.
    TargetField make_target() const;
    CostConfig make_cost() const;
};

/// Parses config text; overrides are "section.key=value" strings applied
/// before validation.
RunConfig parse_config_text(const std::string& text,
                            const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace nsv

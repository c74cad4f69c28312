// Acceptance suite: runs the full property suite at desk scale and reports one
// pass/fail line per criterion.  Exits nonzero if any criterion fails.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "nsv/verification.hpp"

namespace {

struct Criterion {
    int id;
    const char* title;
    std::vector<std::string> checks;
};

const std::vector<Criterion> criteria{
    {1,
     "discrete adjoint exactness (duality rel err <= 1e-10, 20 instances, <= 60 s)",
     {"adjoint_duality_rel", "adjoint_duality_runtime_s"}},
    {2, "gradient Taylor remainder order >= 1.9", {"gradient_taylor_order"}},
    {3,
     "energy: scheme-exact balance, O(dt) identity residual, monotone decay",
     {"scheme_balance_rel", "energy_residual_order", "energy_monotone_violations"}},
    {4,
     "operator identities: trilinear, curl, Leray projector",
     {"trilinear_bvv_rel", "trilinear_antisym_rel", "curl_identity_rel",
      "leray_idempotent_rel", "leray_selfadjoint_rel", "leray_divfree_rel",
      "leray_kills_gradients_rel", "curl_of_gradient_rel", "stokes_pairing_rel"}},
    {5,
     "damping calculus: FD oracles, zero branches, monotonicity bound",
     {"damping_d1_fd_rel", "damping_d2_fd_rel", "damping_d3_fd_rel",
      "damping_zero_branch_abs", "damping_symmetry_abs", "damping_d1_nonneg_min",
      "monotonicity_scalar_violations", "monotonicity_field_violations"}},
    {6, "forward solver vs low-mode reference oracle, order >= 0.9", {"galerkin_imex_order"}},
    {7,
     "optimality: projection formula, VI residual, unconstrained relation, bang-bang",
     {"pg_active_fraction", "pg_vi_residual", "pg_projection_residual",
      "pg_unconstrained_rel", "bang_bang_consistency"}},
    {8,
     "Hessian symmetry to 1e-8 and recorded cone curvatures",
     {"hessian_symmetry_rel", "soc_curvatures_finite", "soc_min_curvature"}},
    {9,
     "inverse-crime recovery: >= 90% cost reduction within 200 iterations, <= 10 min",
     {"recovery_cost_reduction", "recovery_runtime_s"}},
    {10, "determinism: identical seeds give bit-identical logs", {"determinism_log_mismatch"}},
};

}  // namespace

int main() {
    nsv::SuiteOptions opts;
    opts.on_result = [](const nsv::CheckResult& c) {
        std::printf("  %s\n", nsv::format_check_line(c).c_str());
        std::fflush(stdout);
    };

    std::printf("running acceptance suite (desk scale: 16^3, 50-200 steps)\n");
    const std::vector<nsv::CheckResult> results = nsv::run_property_suite(opts);

    std::map<std::string, nsv::CheckResult> by_name;
    for (const auto& c : results) by_name[c.name] = c;

    int failed = 0;
    std::printf("\n");
    for (const auto& crit : criteria) {
        bool pass = true;
        std::string detail;
        for (const auto& name : crit.checks) {
            const auto it = by_name.find(name);
            if (it == by_name.end()) {
                pass = false;
                detail += " missing:" + name;
                continue;
            }
            if (!it->second.pass) {
                pass = false;
                detail += " " + nsv::format_check_line(it->second);
            }
        }
        std::printf("[%s] criterion %2d: %s%s\n", pass ? "PASS" : "FAIL", crit.id, crit.title,
                    detail.c_str());
        if (!pass) ++failed;
    }

    // remaining property checks outside the numbered criteria
    int extra_failed = 0;
    for (const auto& c : results) {
        bool mapped = false;
        for (const auto& crit : criteria)
            for (const auto& name : crit.checks) mapped = mapped || name == c.name;
        if (!mapped && !c.pass) {
            ++extra_failed;
            std::printf("[FAIL] property check: %s\n", nsv::format_check_line(c).c_str());
        }
    }
    if (extra_failed == 0) std::printf("[PASS] additional property checks\n");

    if (failed + extra_failed > 0) {
        std::printf("\nacceptance: %d criterion(s) failed\n", failed + extra_failed);
        return 1;
    }
    std::printf("\nacceptance: all criteria passed\n");
    return 0;
}

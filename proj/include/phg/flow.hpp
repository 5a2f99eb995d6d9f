#pragma once

// Subelliptic harmonic-map heat flow with two backends:
//   * intrinsic : nilmanifold target; the tension in lifted coordinates is
//     the component-wise sub-Laplacian (the target Christoffel correction
//     contracts to zero against the symmetric gradient form), stepped by
//     forward Euler;
//   * extrinsic : Euclidean-embedding form for the round sphere (see
//     phg/extrinsic.hpp).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phg/fields.hpp"
#include "phg/maps.hpp"

namespace phg {

enum class FlowBackend { Intrinsic, Extrinsic };

struct FlowConfig {
    FlowBackend backend = FlowBackend::Intrinsic;

    // intrinsic backend (nilmanifold -> nilmanifold)
    int grid_n = 24;      // grid (n, n, 2n)
    std::string initial = "perturbed-identity";
    double perturbation = 0.03;
    double dt = 0.0;  // 0 => hx^2 / 8
    long steps = 2000;
    int diagnostics_every = 1;
    double tau_stop = 1e-4;
    double mono_slack = 1e-9;  // per-step slack for the monotonicity suite
    std::uint64_t seed = 1;
    bool allow_cfl_override = false;

    // extrinsic backend (sphere ambient tube)
    int ambient_n = 36;
    double ambient_box_half = 0.0;  // 0 = smallest box for the stencil reach
    double ext_dt_factor = 10.0;    // dt = h^2 / factor
    int quad_n = 12;                // quadrature order on S^3
};

struct FlowRow {
    long step = 0;
    double time = 0;
    double E_HH = 0, E_LH = 0, E_HL = 0, E_LL = 0, K = 0;
    double tau_HH_sup = 0, tau_HL_sup = 0;
    double energy_identity_residual = 0;
    double rho_sq = 0;  // extrinsic only
    bool has_rho = false;
    double foliated_defect = 0;
    double tau_HH_l2sq = 0;  // not serialized; time-quadrature input
};

struct FlowTrace {
    std::vector<FlowRow> rows;
    // CSV with exactly: step, time, E_HH, E_LH, E_HL, E_LL, K, tau_HH_sup,
    // tau_HL_sup, energy_identity_residual, rho_sq, foliated_defect
    // (rho_sq empty for the intrinsic backend).
    void write_csv(std::ostream& os) const;
};

struct FlowResult {
    FlowTrace trace;
    bool converged = false;
    long steps_taken = 0;
    std::string classification;  // special-harmonic | harmonic-horizontal-only | not-converged
    EnergyBreakdown final_energies;
    double tau_sup_initial = 0, tau_sup_final = 0;
    std::optional<MapField> final_map;
};

// One forward-Euler step of the intrinsic flow; identity maps are fixed
// points to round-off.  Throws on non-finite values (caller sees the step
// index in the message).
MapField step_intrinsic(const MapField& f, double dt);

FlowResult run_flow(const FlowConfig& cfg);

// |E(t_end) + rectangle-rule time quadrature of the tension L2 norms
// - E(0)| / E(0) from a recorded trace (>= 2 rows).
double energy_identity_residual(const FlowTrace& trace);

// Initial map factory for the intrinsic backend.
MapField make_initial_map(GridPtr grid, const ModelManifold& target,
                          const std::string& spec, double perturbation,
                          std::uint64_t seed);

}  // namespace phg

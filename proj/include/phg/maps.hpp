#pragma once

// Frame-coefficient calculus for maps f : M -> N between the model
// manifolds: differentials and covariant second/third derivatives in the
// unitary frames, horizontal energies, tension fields, defect functionals
// and the commutation-relation residuals.
//
// Complex frame conventions (m = n = 1): index 0 is the theta/xi slot,
// index 1 is eta_1 = (e1 - i e2)/sqrt(2), index 2 is its conjugate.  Jet
// tensors are stored with the differentiation direction LAST:
// d2[A][B][C] = f^A_{BC}, d3[A][B][C][D] = f^A_{BCD}.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phg/core.hpp"
#include "phg/fields.hpp"
#include "phg/geometry.hpp"
#include "phg/jet3.hpp"

namespace phg {

// ---------------------------------------------------------------------------
// MapJet
// ---------------------------------------------------------------------------

struct MapJet {
    Vec3 point;        // source chart point
    Vec3 f;            // target lift coordinates
    double d1r[3][3];  // real frame coefficients, rows target {xi,e1,e2}
    cplx d1[3][3];     // complex coefficients f^A_B
    cplx d2[3][3][3];  // f^A_{BC}
    bool has_d2 = false;
    cplx d3[3][3][3][3];  // f^A_{BCD}
    bool has_d3 = false;
};

// Round-trip helpers between real frame tensors and unitary-frame complex
// tensors (exact linear recombinations).
void complexify_d1(const double in[3][3], cplx out[3][3]);
void realify_d1(const cplx in[3][3], double out[3][3]);

// ---------------------------------------------------------------------------
// Energies
// ---------------------------------------------------------------------------

struct EnergyBreakdown {
    double e_HH = 0, e_LH = 0, e_HL = 0, e_LL = 0;
    double d_sq = 0;      // |del f|^2
    double d_bar_sq = 0;  // |delbar f|^2
    double k = 0;         // |del f|^2 - |delbar f|^2 via the pairing route
};

EnergyBreakdown energy_density(const MapJet& jet);

struct IntegratedEnergies {
    EnergyBreakdown totals;  // integrated partial energies
    double E_prime = 0, E_dprime = 0, K = 0;
};

// ---------------------------------------------------------------------------
// Tension
// ---------------------------------------------------------------------------

struct TensionVector {
    // target frame components {xi~, e1~, e2~}
    Vec3 tau_HH;       // horizontal tension, vertical slot zero
    Vec3 tau_HL;       // vertical trace, horizontal slots zero
    Vec3 tau_H;        // their sum
    Vec3 torsion_term; // tr(f* theta~ (x) f* tau~): zero for Sasakian targets
    Vec3 full_trace;   // tr_{g_theta} beta (adds the xi-xi second derivative)

    double tau_H_norm() const { return norm(tau_H); }
};

TensionVector tension_from_jet(const MapJet& jet);

// ---------------------------------------------------------------------------
// Defects
// ---------------------------------------------------------------------------

struct DefectReport {
    double holo = 0;                  // sup |delbar f|
    double antiholo = 0;              // sup |del f|
    double foliated = 0;              // sup |f^alpha_0|
    double pluriharmonic = 0;         // sup over the (1,1) block of beta
    double horizontally_constant = 0; // sup |df_{H,H~}|
};

// ---------------------------------------------------------------------------
// Commutation residuals (Sasakian specialization: A = W = 0; flat models
// additionally kill the curvature terms)
// ---------------------------------------------------------------------------

struct CommutationReport {
    struct Entry {
        std::string id;
        double residual;
    };
    std::vector<Entry> entries;
    double max_residual() const;
    double residual(const std::string& id) const;
};

// Second-order relations need d2; third-order entries are included when d3
// is present.
CommutationReport commutation_residuals(const MapJet& jet);

// ---------------------------------------------------------------------------
// Paneitz operator and the Bochner identity at analytic jets
// ---------------------------------------------------------------------------

struct PaneitzComponents {
    cplx P1;     // P^alpha_j for alpha = j = 1
    cplx P1bar;  // P^{alpha bar}_j
};

// Requires d3 (finite-difference third derivatives are rejected).
PaneitzComponents paneitz(const MapJet& jet);

// |LHS - RHS| of the horizontal-energy Bochner identity on flat models
// (curvature and torsion terms vanish).  Requires d3.
double bochner_residual(const MapJet& jet);

// ---------------------------------------------------------------------------
// Analytic test maps (local Heisenberg -> Heisenberg, exact jets)
// ---------------------------------------------------------------------------

struct AnalyticMap {
    std::string name;
    bool foliated = false;
    bool holomorphic = false;
    bool equivariant = false;  // descends to the compact quotient
    int A[2][2] = {{1, 0}, {0, 1}};
    std::function<std::array<Jet3, 3>(const Vec3&)> lift;

    Vec3 eval(const Vec3& p) const {
        auto j = lift(p);
        return Vec3{{j[0].v, j[1].v, j[2].v}};
    }
};

AnalyticMap am_identity();
AnalyticMap am_fiber_rotation(double c);
// Integer affine class map: F = (A (x,y) + w, det(A) t + l(x,y) + r) with the
// horizontality-pinned linear fiber correction; requires a11*a21 and a12*a22
// even so the map descends to the quotient.
AnalyticMap am_affine(const int A[2][2], const double w[2], double r);
AnalyticMap am_conjugation();  // (x, -y, -t)
// Identity-class trig perturbation: (x + eps a(y), y + eps b(x),
// t + eps (x b(x)/2 - y a(y)/2 + c(x,y))).  Foliated by construction.
struct TrigPerturbation {
    double amp_a = 0, freq_a = 1;   // a(y) = amp_a sin(2 pi freq_a y)
    double amp_b = 0, freq_b = 1;   // b(x) = amp_b cos(2 pi freq_b x)
    double amp_c = 0;               // c(x,y) = amp_c sin(2 pi x) cos(2 pi y)
};
AnalyticMap am_trig_perturbed(const TrigPerturbation& tp);
TrigPerturbation seeded_perturbation(std::uint64_t seed, double amplitude);
// Local Reeb-tilting family (not equivariant): (x + kappa sin(t), y, t).
AnalyticMap am_reeb_tilt(double kappa);
AnalyticMap am_vertical_wave(double amp);  // (x, y, t + amp sin(2 pi x))

std::vector<AnalyticMap> shipped_test_maps();

// Exact jets of an analytic map at a point (orders 1..3, no differencing).
MapJet analytic_jet(const AnalyticMap& map, const Vec3& point);

// ---------------------------------------------------------------------------
// Discrete jets and map-level functionals
// ---------------------------------------------------------------------------

// d1 (and optionally d2) by frame finite differences of the lifted
// coordinates, mapped through the target frame at f(node).
MapJet jet_at(const MapField& f, int i, int j, int k, bool want_d2 = true);

// Build a MapField by sampling an analytic map's lift on the grid.
MapField map_field_from_analytic(GridPtr grid, const ModelManifold& target,
                                 const AnalyticMap& map);

IntegratedEnergies energies(const MapField& f);
EnergyBreakdown energy_density_at(const MapField& f, int i, int j, int k);

double lemma62_residual(const MapField& f);
TensionVector tension(const MapField& f, int i, int j, int k);
DefectReport defects(const MapField& f);
DefectReport defects(const std::vector<MapJet>& jets);

struct HomotopyReport {
    std::vector<double> K;        // K(f_t) per family member
    std::vector<double> E_prime;  // E'(f_t)
    std::vector<double> E_dprime;
    double K_drift = 0;        // max |K(f_t) - K(f_0)|
    double E_prime_drift = 0;  // for vertical variations
    double E_dprime_drift = 0;
    double max_foliated_defect = 0;
};

// family >= 3 members along a declared variation; with foliated set, every
// member must pass the foliated check within tol.
HomotopyReport homotopy_invariance_check(const std::vector<MapField>& family,
                                         bool foliated, double foliated_tol = 1e-6);

}  // namespace phg

#pragma once

// Closed-form pseudo-Hermitian structures on the model Sasakian 3-manifolds:
//
//   * heisenberg-nilmanifold : chart (x,y,t), theta = dt + (x dy - y dx)/2,
//     quotient by the integer Heisenberg lattice; flat Tanaka-Webster
//     connection, zero horizontal curvature.
//   * space-form-chart M(lambda) : same contact chart over the constant-
//     curvature Kaehler disc/plane/sphere metric; local model with
//     horizontal holomorphic sectional curvature == lambda.
//   * round-sphere-3 : S^3 as unit quaternions in a stereographic chart;
//     the frame is generated by left multiplication by j and k, the Reeb
//     field by left multiplication by i.
//
// All frames are L_theta-orthonormal with d theta(e1, J e1) = 1, the
// normalization that makes d theta = i theta^1 ^ theta^1bar in the unitary
// coframe.  Connection coefficients are exact; no finite differences are
// used outside the axiom checker.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "phg/core.hpp"
#include "phg/jet3.hpp"

namespace phg {

enum class ModelKind { HeisenbergNilmanifold, RoundSphere3, SpaceFormChart };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct ModelParams {
    double lambda = 0.0;  // space-form-chart curvature
    double scale = 1.0;   // round-sphere-3 contact rescaling (theta = scale * sigma)
};

struct ModelManifold {
    ModelKind kind = ModelKind::HeisenbergNilmanifold;
    ModelParams params;
    int m = 1;  // CR dimension; all shipped models have m = 1
    bool compact = false;
    bool has_identifications = false;

    // chart box; for the sphere the chart variable is the stereographic w
    double chart_lo[3]{0, 0, 0};
    double chart_hi[3]{1, 1, 1};

    // Horizontal holomorphic sectional curvature (constant on every shipped
    // model).
    double hol_curvature() const;

    // Reduce a point by the model identifications into the fundamental
    // chart; throws std::invalid_argument when the point is outside the
    // chart and no identification applies.
    Vec3 reduce(const Vec3& p) const;
    bool in_chart(const Vec3& p) const;
};

ModelManifold build_model(ModelKind kind, const ModelParams& params = {});
ModelManifold build_model(const std::string& kind, const ModelParams& params = {});

// ---------------------------------------------------------------------------
// FrameData: everything about the Tanaka-Webster structure at one point.
// Frame index order is {0: xi, 1: e1, 2: e2 = J e1}; coordinates are the
// chart coordinates of the model.
// ---------------------------------------------------------------------------

struct FrameData {
    Vec3 point;     // canonical chart representative
    Mat3 frame;     // column A = chart components of frame vector A
    Mat3 coframe;   // row A = chart coefficients of the dual coframe
    Vec3 xi;        // frame column 0
    Vec3 theta;     // coframe row 0
    double J_h[2][2]{{0, -1}, {1, 0}};  // J on (e1, e2)

    // gamma[B][A][C] = Theta^B( nabla_{e_C} e_A )
    double gamma[3][3][3]{};
    // structure constants: [e_A, e_B] = c[C][A][B] e_C
    double c[3][3][3]{};
    // pseudo-Hermitian torsion components A(e_i, e_j); identically zero for
    // the shipped Sasakian models
    double torsionA[2][2]{};
    // theta ^ dtheta = volume_density * dx ^ dy ^ dt in chart coordinates
    double volume_density = 1.0;
};

FrameData frame_at(const ModelManifold& model, const Vec3& point);

// Chart jets of the frame/coframe entries (used for exact coordinate
// Christoffel symbols inside the axiom checker).
struct FrameJets {
    Jet3 frame[3][3];    // [row][col] of the frame matrix
    Jet3 coframe[3][3];  // [row][col] of the coframe matrix
};
FrameJets frame_jets(const ModelManifold& model, const Vec3& point);

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

struct CurvatureOperator {
    double kappa = 0.0;      // horizontal holomorphic sectional curvature
    double R[3][3][3][3]{};  // frame components, R(X,Y,Z,W) = <R(Z,W)Y, X>
    double Q[3][3]{};        // on the basis {e1^e2, xi^e1, xi^e2}
    cplx Q11{0.0, 0.0};      // Hermitian form on the (1,1) line eta1 ^ eta1bar

    double eval(const Vec3& X, const Vec3& Y, const Vec3& Z, const Vec3& W) const;
    double max_abs_component() const;
};

CurvatureOperator curvature_at(const ModelManifold& model, const Vec3& point);

// Horizontal sectional curvatures; X, Y are horizontal (e1,e2) components.
double sectional(const ModelManifold& model, const Vec3& point, const double X[2],
                 const double Y[2]);
double hol_sectional(const ModelManifold& model, const Vec3& point, const double X[2]);

// ---------------------------------------------------------------------------
// Negativity of the horizontal curvature operator
// ---------------------------------------------------------------------------

enum class NegativityClass { StronglyNegative, StronglySeminegative, Indefinite };
std::string to_string(NegativityClass c);

NegativityClass negativity_class(const ModelManifold& model, const Vec3& point,
                                 double tol = 1e-10);

struct OrderKReport {
    bool counterexample_found = false;
    int trials = 0;
    int admissible = 0;  // pairs meeting the rank-2k side condition
    // witness (row-major m x k each), meaningful when counterexample_found
    std::vector<cplx> witness_A, witness_B;
    // Sampling can only falsify negativity of order k, never certify it.
    std::string note;
};

OrderKReport order_k_negativity_sample(const ModelManifold& model, const Vec3& point,
                                       int k, int trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Levi-Civita minus Tanaka-Webster offset tensor
// ---------------------------------------------------------------------------

struct ConnectionOffset {
    // S[C][A][B] = Theta^C( S(e_A, e_B) ) with S(Z1,Z2) the difference
    // nabla^theta_{Z2} Z1 - nabla_{Z2} Z1.
    double S[3][3][3]{};
    Vec3 apply(const Vec3& Z1, const Vec3& Z2) const;
};

ConnectionOffset connection_offset(const ModelManifold& model, const Vec3& point);

// ---------------------------------------------------------------------------
// Finite-difference verification of the connection axioms
// ---------------------------------------------------------------------------

struct TWReport {
    double res_metric = 0.0;   // nabla g = 0
    double res_J = 0.0;        // nabla J = 0
    double res_torsion = 0.0;  // T(X,Y) = dtheta(X,Y) xi on all slots
    double res_xi = 0.0;       // nabla xi = 0
    bool cancellation_warning = false;
    double max_residual() const;
};

TWReport check_tanaka_webster(const ModelManifold& model, int sample_count, double h,
                              std::uint64_t seed = 1);

// Seeded random point in a window of the chart where all closed forms are
// tame (used by the checkers and the verify suite).
Vec3 random_chart_point(const ModelManifold& model, Rng& rng);

// Sphere chart <-> ambient R^4 conversions (stereographic from the pole
// q = (-1,0,0,0); chart center maps to (1,0,0,0)).
Vec4 sphere_chart_to_ambient(const Vec3& w);
Vec3 sphere_ambient_to_chart(const Vec4& q);

}  // namespace phg

#pragma once

// Structured-grid discretization of the compact Heisenberg nilmanifold and
// the discrete horizontal calculus on it.
//
// The fundamental box [0,1)^3 carries a twisted-periodic identification
// (the integer lattice acting on the right, which is the side preserving
// the shipped frame): crossing the +x face shifts t by +y/2, crossing +y
// shifts t by -x/2.  The constructor requires n_t to be divisible by
// 2*n_x and 2*n_y so the twist is an exact bijection on grid nodes.
//
// All stencils are centered second-order differences composed along the
// coordinate expressions of the frame fields e1 = d_x + (y/2) d_t,
// e2 = d_y - (x/2) d_t, xi = d_t.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "phg/core.hpp"
#include "phg/geometry.hpp"

namespace phg {

class Grid {
public:
    Grid(ModelManifold model, int nx, int ny, int nt);

    // Convenience: (n, n, 2n), the smallest t-refinement compatible with the
    // lattice twist at base resolution n.
    static std::shared_ptr<const Grid> nil(int n) {
        return std::make_shared<const Grid>(
            build_model(ModelKind::HeisenbergNilmanifold), n, n, 2 * n);
    }

    const ModelManifold& model() const { return model_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nt() const { return nt_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double ht() const { return ht_; }
    std::size_t size() const { return std::size_t(nx_) * ny_ * nt_; }

    std::size_t index(int i, int j, int k) const {
        return (std::size_t(i) * ny_ + j) * nt_ + k;
    }
    Vec3 point(int i, int j, int k) const {
        return Vec3{{i * hx_, j * hy_, k * ht_}};
    }
    Vec3 point(std::size_t flat) const {
        int k = int(flat % nt_);
        int j = int((flat / nt_) % ny_);
        int i = int(flat / (std::size_t(ny_) * nt_));
        return point(i, j, k);
    }

    // Canonical node for a raw index triple together with the deck word
    // (a, b, c): raw = gamma_x^a gamma_y^b gamma_t^c * canonical.
    struct Wrapped {
        int i, j, k;
        long a, b, c;
    };
    Wrapped wrap(long i, long j, long k) const;

private:
    ModelManifold model_;
    int nx_, ny_, nt_;
    double hx_, hy_, ht_;
    long shift_x_;  // t-cells per (+x crossing, unit j)
    long shift_y_;  // t-cells per (+y crossing, unit i)
};

using GridPtr = std::shared_ptr<const Grid>;

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr g) : grid_(std::move(g)), v_(grid_->size(), 0.0) {}

    // Sample a chart function.  When validate is set, the function is
    // checked for invariance under the deck transformations at a few seeded
    // points (fields on the nilmanifold must be genuinely periodic under
    // the twist).
    static ScalarField sample(GridPtr g, const std::function<double(const Vec3&)>& fn,
                              bool validate = true, double tol = 1e-9);

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    double& at(std::size_t flat) { return v_[flat]; }
    double at(std::size_t flat) const { return v_[flat]; }
    double& at(int i, int j, int k) { return v_[grid_->index(i, j, k)]; }
    double at(int i, int j, int k) const { return v_[grid_->index(i, j, k)]; }
    // Value at a raw (possibly out-of-range) node, resolved through the
    // twisted wrap.
    double at_raw(long i, long j, long k) const {
        auto w = grid_->wrap(i, j, k);
        return v_[grid_->index(w.i, w.j, w.k)];
    }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

private:
    GridPtr grid_;
    std::vector<double> v_;
};

// Vector field in frame components {xi, e1, e2}.
struct VectorField {
    GridPtr grid;
    ScalarField comp[3];

    explicit VectorField(GridPtr g) : grid(g) {
        for (auto& c : comp) c = ScalarField(g);
    }
};

// 2-form in frame components: w01 = w(xi,e1), w02 = w(xi,e2), w12 = w(e1,e2).
struct TwoFormField {
    GridPtr grid;
    ScalarField w01, w02, w12;

    explicit TwoFormField(GridPtr g) : grid(g), w01(g), w02(g), w12(g) {}
};

// Map into a nilmanifold target.  Stores per-node lifts (unwrapped target
// chart representatives); across identified faces the lift transforms by
// the deck transformation induced by the class matrix A (pi_1 action on the
// base torus; identity for identity-homotopic maps).
class MapField {
public:
    MapField(GridPtr g, ModelManifold target, int A[2][2]);
    MapField(GridPtr g, ModelManifold target);  // identity class

    static MapField sample(GridPtr g, ModelManifold target,
                           const std::function<Vec3(const Vec3&)>& lift_fn,
                           int A[2][2]);

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    const ModelManifold& target() const { return target_; }
    const int* class_matrix() const { return &A_[0][0]; }
    int class_det() const { return A_[0][0] * A_[1][1] - A_[0][1] * A_[1][0]; }

    Vec3 lift(std::size_t flat) const {
        return Vec3{{x_.at(flat), y_.at(flat), t_.at(flat)}};
    }
    void set_lift(std::size_t flat, const Vec3& v) {
        x_.at(flat) = v[0];
        y_.at(flat) = v[1];
        t_.at(flat) = v[2];
    }
    // Lift at a raw node, adjusted by the target deck transformation.
    Vec3 lift_raw(long i, long j, long k) const;

    ScalarField& component(int c) { return c == 0 ? x_ : (c == 1 ? y_ : t_); }
    const ScalarField& component(int c) const { return c == 0 ? x_ : (c == 1 ? y_ : t_); }

private:
    GridPtr grid_;
    ModelManifold target_;
    int A_[2][2];
    ScalarField x_, y_, t_;  // lift components
};

// ---------------------------------------------------------------------------
// Discrete operators (nilmanifold frame; exact frame coefficients, centered
// second-order stencils)
// ---------------------------------------------------------------------------

ScalarField d_x(const ScalarField& u);
ScalarField d_y(const ScalarField& u);
ScalarField d_t(const ScalarField& u);

ScalarField e1_apply(const ScalarField& u);
ScalarField e2_apply(const ScalarField& u);
ScalarField xi_apply(const ScalarField& u);

// 4th-order variants.  Used as the inner application in composed second
// derivatives: the truncation error of a chart stencil is not deck-invariant
// and jumps across the twisted seams, so a second differencing turns an
// O(h^p) inner error into O(h^{p-1}) there; p = 4 keeps the composition
// second order in the sup norm.
ScalarField e1_apply4(const ScalarField& u);
ScalarField e2_apply4(const ScalarField& u);

VectorField horizontal_gradient(const ScalarField& u);

// Tight-stencil sub-Laplacian: d_xx + d_yy + y d_xt - x d_yt
// + ((x^2+y^2)/4) d_tt (the frame is parallel, so there is no first-order
// connection correction on this model).
ScalarField sub_laplacian(const ScalarField& u);

// Composition form e1(e1 u) + e2(e2 u); wider stencil, exactly antisymmetric
// factors.  Used by the heat flow.
ScalarField sub_laplacian_composed(const ScalarField& u);

ScalarField divergence(const VectorField& V);
ScalarField codifferential(const VectorField& rho);  // 1-form, frame comps

// Codifferential of a 2-form against the Levi-Civita connection, evaluated
// with the exact offset tensor S = nabla^theta - nabla.  Returns the
// component (delta w)(dir) for dir in {0: xi, 1: e1, 2: e2}.
ScalarField codifferential_2form(const TwoFormField& w, int dir);

double integrate(const ScalarField& u);

// Pointwise residual |u_{1 1bar} - u_{1bar 1} - i xi(u)|.
ScalarField scalar_commutation_residual(const ScalarField& u);

// Smooth deck-invariant scalar with nonvanishing Reeb derivative, built from
// a Gaussian theta sum: Re/Im of e^{2 pi i t} e^{-pi i x y}
// sum_n e^{-pi (n-y)^2} e^{2 pi i n x}.
double reeb_wave(const Vec3& p, bool imaginary_part = false);
void reeb_wave_jet(const Vec3& p, Jet3& re, Jet3& im);

// ---------------------------------------------------------------------------
// Serialization: flat binary layout (header: magic, dims, spacing, model
// kind, then row-major values) and CSV for small grids.
// ---------------------------------------------------------------------------

void write_binary(const ScalarField& u, const std::string& path);
ScalarField read_binary(const std::string& path);
void write_csv(const ScalarField& u, std::ostream& os);

}  // namespace phg

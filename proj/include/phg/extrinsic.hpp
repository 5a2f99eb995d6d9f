#pragma once

// Extrinsic (Euclidean-embedding) form of the heat flow for the round S^3
// target: forward Euler on
//
//   du^a/dt = Delta_H u^a - Pi^a_bc <grad_H u^b, grad_H u^c>
//                          - Shat^a_bc <grad_H u^b, grad_H u^c>
//
// with Pi(y) = y/|y| the closest-point projection onto S^3 and Shat the
// pulled-back Levi-Civita/Tanaka-Webster offset tensor.  There is no
// re-projection of values onto the target during the flow; the decay of
// int |rho(u)|^2 is the quantity under test.
//
// Source discretization: a 4D ambient Cartesian tube around the unit sphere.
// The frame fields extend linearly (e_A(y) = a*y/sqrt2 for a = j,k), so the
// extended dynamics evolves every radial layer by a conjugate sphere flow;
// stencils are 4th-order central differences and the outer rim of the tube
// is refreshed each step from cubic interpolation at the radial projection.

#include <cstdint>
#include <string>
#include <vector>

#include "phg/core.hpp"
#include "phg/flow.hpp"

namespace phg {

struct ExtrinsicTarget {
    int K = 4;
    double tube_radius = 0.5;  // |1 - |u|| bound for map values

    Vec4 embed(const Vec3& w) const { return sphere_chart_to_ambient(w); }
    Vec4 project(const Vec4& y) const {
        double n = norm(y);
        return (1.0 / n) * y;
    }
    Vec4 rho(const Vec4& y) const { return y - project(y); }
    // Pi^a_bc = second derivatives of the closest-point map at y
    void projection_hessian(const Vec4& y, double P[4][4][4]) const;
    // Shat^a_bc at y (Sasakian offset pulled back through Pi)
    void S_hat(const Vec4& y, double S[4][4][4]) const;

    // Contractions against a symmetric matrix M^{bc} (what the flow needs).
    Vec4 contract_projection_hessian(const Vec4& y, const double M[4][4]) const;
    Vec4 contract_S_hat(const Vec4& y, const double M[4][4]) const;
};

// Tube data and stepping for u : S^3 -> R^4.
class AmbientTube {
public:
    // box_half <= 0 selects the smallest box accommodating the stencil and
    // interpolation reach at resolution n.
    explicit AmbientTube(int n, double box_half = 0.0, double active_width = 0.0);

    int n() const { return n_; }
    double h() const { return h_; }
    std::size_t active_count() const { return active_.size(); }
    std::size_t stored_count() const { return nodes_.size(); }

    Vec4 node_point(std::size_t slot) const;
    Vec4 value(std::size_t slot) const {
        return Vec4{{u_[0][slot], u_[1][slot], u_[2][slot], u_[3][slot]}};
    }

    // Initialize u(y) = F(y/|y|).
    void initialize(const std::function<Vec4(const Vec4&)>& F);

    // One forward-Euler step; returns the sup over near-shell active nodes of
    // |drift| (the ambient representation of tau_H).  Throws when a value
    // escapes the target tube.
    double step(const ExtrinsicTarget& target, double dt, long step_index);

    // Cubic interpolation of the current field at an arbitrary point.
    Vec4 interpolate(const Vec4& p) const;
    // Directional derivative of the interpolant along an ambient direction.
    Vec4 directional_derivative(const Vec4& dir, const Vec4& p) const;
    // e_A u at p (A = 0: xi-extension, 1, 2).
    Vec4 frame_derivative(int A, const Vec4& p) const;
    // Last computed PDE right-hand side, interpolated at p; valid after a
    // step() or refresh_drift().
    Vec4 drift_at(const Vec4& p) const;
    void refresh_drift();

private:
    friend struct TubeStepImpl;
    int n_;
    double box_half_, h_, active_width_;
    std::vector<std::int32_t> slot_of_;   // dense n^4 -> slot or -1
    std::vector<std::uint32_t> nodes_;    // slot -> flat 4D index
    std::vector<std::uint32_t> active_;   // slots updated by the PDE
    std::vector<std::uint32_t> rim_;      // slots refreshed by interpolation
    std::vector<double> u_[4];
    std::vector<double> drift_[4];  // last computed PDE right-hand side

    double axis_coord(int idx) const { return -box_half_ + (idx + 0.5) * h_; }
    template <typename F>
    void for_each_index(F&& f) const;
    double interp1(const std::vector<double>& field, const Vec4& p) const;
};

// Quadrature rule on S^3 (Hopf angles, Gauss in the latitude), weights for
// dv_theta = 2 * Euclidean volume.
struct SphereQuadrature {
    std::vector<Vec4> points;
    std::vector<double> weights;
    explicit SphereQuadrature(int n);
};

// Initial data for the extrinsic flow.
Vec4 extrinsic_identity(const Vec4& x);
// normalize(x + eps v(x)) with v tangential (stays exactly on the sphere)
Vec4 extrinsic_tangential_perturbation(const Vec4& x, double eps, std::uint64_t seed);

FlowResult run_extrinsic_flow(const FlowConfig& cfg);

}  // namespace phg

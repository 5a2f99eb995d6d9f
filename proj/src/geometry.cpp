#include "phg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phg {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::HeisenbergNilmanifold: return "heisenberg-nilmanifold";
        case ModelKind::RoundSphere3: return "round-sphere-3";
        case ModelKind::SpaceFormChart: return "space-form-chart";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "heisenberg-nilmanifold") return ModelKind::HeisenbergNilmanifold;
    if (s == "round-sphere-3") return ModelKind::RoundSphere3;
    if (s == "space-form-chart") return ModelKind::SpaceFormChart;
    throw std::invalid_argument("build_model: unknown model kind '" + s + "'");
}

std::string to_string(NegativityClass c) {
    switch (c) {
        case NegativityClass::StronglyNegative: return "strongly-negative";
        case NegativityClass::StronglySeminegative: return "strongly-seminegative";
        case NegativityClass::Indefinite: return "indefinite";
    }
    return "?";
}

double ModelManifold::hol_curvature() const {
    switch (kind) {
        case ModelKind::HeisenbergNilmanifold: return 0.0;
        case ModelKind::SpaceFormChart: return params.lambda;
        case ModelKind::RoundSphere3: return 2.0 / params.scale;
    }
    return 0.0;
}

bool ModelManifold::in_chart(const Vec3& p) const {
    for (int i = 0; i < 3; ++i)
        if (p[i] < chart_lo[i] || p[i] > chart_hi[i]) return false;
    if (kind == ModelKind::SpaceFormChart) {
        // keep away from the conformal-factor zero when lambda < 0
        double nu = 1.0 + 0.25 * params.lambda * (p[0] * p[0] + p[1] * p[1]);
        if (nu < 0.05) return false;
    }
    return true;
}

Vec3 ModelManifold::reduce(const Vec3& p) const {
    if (kind == ModelKind::HeisenbergNilmanifold) {
        // Deck reduction (lattice acting on the right, which preserves the
        // shipped frame): first x, then y, then t.  Crossing the +x face
        // shifts t by +y/2, crossing +y shifts t by -x/2.
        Vec3 q = p;
        double a = std::floor(q[0]);
        q[0] -= a;
        q[2] += a * q[1] * 0.5;
        double b = std::floor(q[1]);
        q[1] -= b;
        q[2] -= b * q[0] * 0.5;
        q[2] -= std::floor(q[2]);
        return q;
    }
    if (!in_chart(p))
        throw std::invalid_argument("point outside chart domain of " + to_string(kind) +
                                    " and no identification applies");
    return p;
}

ModelManifold build_model(ModelKind kind, const ModelParams& params) {
    ModelManifold mm;
    mm.kind = kind;
    mm.params = params;
    switch (kind) {
        case ModelKind::HeisenbergNilmanifold:
            mm.compact = true;
            mm.has_identifications = true;
            for (int i = 0; i < 3; ++i) {
                mm.chart_lo[i] = 0.0;
                mm.chart_hi[i] = 1.0;
            }
            break;
        case ModelKind::SpaceFormChart:
            mm.compact = false;
            for (int i = 0; i < 2; ++i) {
                mm.chart_lo[i] = -1.1;
                mm.chart_hi[i] = 1.1;
            }
            mm.chart_lo[2] = -2.0;
            mm.chart_hi[2] = 2.0;
            break;
        case ModelKind::RoundSphere3:
            if (!(params.scale > 0.0))
                throw std::invalid_argument("build_model: sphere scale must be positive");
            mm.compact = true;   // the manifold is compact; the chart is local
            for (int i = 0; i < 3; ++i) {
                mm.chart_lo[i] = -1.4;
                mm.chart_hi[i] = 1.4;
            }
            break;
    }
    return mm;
}

ModelManifold build_model(const std::string& kind, const ModelParams& params) {
    return build_model(model_kind_from_string(kind), params);
}

// ---------------------------------------------------------------------------
// Sphere chart helpers
// ---------------------------------------------------------------------------

Vec4 sphere_chart_to_ambient(const Vec3& w) {
    double ww = dot(w, w);
    double inv = 1.0 / (1.0 + ww);
    return Vec4{{(1.0 - ww) * inv, 2.0 * w[0] * inv, 2.0 * w[1] * inv, 2.0 * w[2] * inv}};
}

Vec3 sphere_ambient_to_chart(const Vec4& q) {
    if (q[0] <= -0.9)
        throw std::invalid_argument("sphere chart: point too close to the chart pole");
    double inv = 1.0 / (1.0 + q[0]);
    return Vec3{{q[1] * inv, q[2] * inv, q[3] * inv}};
}

// ---------------------------------------------------------------------------
// Frame jets
// ---------------------------------------------------------------------------

namespace {

// Chart-model (nilmanifold, lambda = 0, and space-form) frame/coframe jets.
FrameJets chart_frame_jets(double lambda, const Vec3& p) {
    FrameJets fj;
    Jet3 x = Jet3::coordinate(0, p[0]);
    Jet3 y = Jet3::coordinate(1, p[1]);
    Jet3 nu = 0.25 * lambda * (x * x + y * y) + 1.0;
    Jet3 mu = recip(nu);
    Jet3 zero;

    // frame columns: xi, e1 = nu d_x + (y/2) d_t, e2 = nu d_y - (x/2) d_t
    fj.frame[0][0] = zero;  fj.frame[0][1] = nu;          fj.frame[0][2] = zero;
    fj.frame[1][0] = zero;  fj.frame[1][1] = zero;        fj.frame[1][2] = nu;
    fj.frame[2][0] = Jet3(1.0); fj.frame[2][1] = 0.5 * y; fj.frame[2][2] = -0.5 * x;

    // coframe rows: theta = dt + (mu/2)(x dy - y dx), Theta^1 = mu dx,
    // Theta^2 = mu dy
    fj.coframe[0][0] = -0.5 * (mu * y);
    fj.coframe[0][1] = 0.5 * (mu * x);
    fj.coframe[0][2] = Jet3(1.0);
    fj.coframe[1][0] = mu;   fj.coframe[1][1] = zero; fj.coframe[1][2] = zero;
    fj.coframe[2][0] = zero; fj.coframe[2][1] = mu;   fj.coframe[2][2] = zero;
    return fj;
}

FrameJets sphere_frame_jets(double scale, const Vec3& w) {
    FrameJets fj;
    std::array<Jet3, 3> wj = {Jet3::coordinate(0, w[0]), Jet3::coordinate(1, w[1]),
                              Jet3::coordinate(2, w[2])};
    Jet3 ww = wj[0] * wj[0] + wj[1] * wj[1] + wj[2] * wj[2];
    Jet3 invD = recip(ww + 1.0);

    // q(w) on S^3 and the imaginary-unit left translates
    Jet3 q[4];
    q[0] = (Jet3(1.0) - ww) * invD;
    for (int i = 0; i < 3; ++i) q[i + 1] = 2.0 * (wj[i] * invD);

    auto mul_i = [&](const Jet3* a, Jet3* r) {
        r[0] = -a[1]; r[1] = a[0]; r[2] = -a[3]; r[3] = a[2];
    };
    auto mul_j = [&](const Jet3* a, Jet3* r) {
        r[0] = -a[2]; r[1] = a[3]; r[2] = a[0]; r[3] = -a[1];
    };
    auto mul_k = [&](const Jet3* a, Jet3* r) {
        r[0] = -a[3]; r[1] = -a[2]; r[2] = a[1]; r[3] = a[0];
    };

    Jet3 iq[4], jq[4], kq[4];
    mul_i(q, iq);
    mul_j(q, jq);
    mul_k(q, kq);

    // Jacobian J[amb][mu] = d q_amb / d w_mu (exact, order-2 jets)
    Jet3 Jac[4][3];
    for (int a = 0; a < 4; ++a)
        for (int mu = 0; mu < 3; ++mu) Jac[a][mu] = partial(q[a], mu);

    // chart components of an ambient tangent vector E: v = J^T E / rho^2,
    // rho^2 = 4 / (1+|w|^2)^2 (stereographic conformal factor squared)
    Jet3 D2 = (ww + 1.0) * (ww + 1.0);
    auto pullback = [&](const Jet3* E, Jet3* v) {
        for (int mu = 0; mu < 3; ++mu) {
            Jet3 s;
            for (int a = 0; a < 4; ++a) s += Jac[a][mu] * E[a];
            v[mu] = 0.25 * (s * D2);
        }
    };

    const double s = scale;
    Jet3 xi_c[3], e1_c[3], e2_c[3];
    pullback(iq, xi_c);
    pullback(jq, e1_c);
    pullback(kq, e2_c);
    for (int mu = 0; mu < 3; ++mu) {
        fj.frame[mu][0] = (1.0 / s) * xi_c[mu];
        fj.frame[mu][1] = (1.0 / std::sqrt(2.0 * s)) * e1_c[mu];
        fj.frame[mu][2] = (1.0 / std::sqrt(2.0 * s)) * e2_c[mu];
    }

    // coframe rows: theta = s <J ., iq>, Theta^A = sqrt(2 s) <J ., a q>
    for (int mu = 0; mu < 3; ++mu) {
        Jet3 ti, tj, tk;
        for (int a = 0; a < 4; ++a) {
            ti += Jac[a][mu] * iq[a];
            tj += Jac[a][mu] * jq[a];
            tk += Jac[a][mu] * kq[a];
        }
        fj.coframe[0][mu] = s * ti;
        fj.coframe[1][mu] = std::sqrt(2.0 * s) * tj;
        fj.coframe[2][mu] = std::sqrt(2.0 * s) * tk;
    }
    return fj;
}

}  // namespace

FrameJets frame_jets(const ModelManifold& model, const Vec3& point) {
    Vec3 p = model.reduce(point);
    switch (model.kind) {
        case ModelKind::HeisenbergNilmanifold: return chart_frame_jets(0.0, p);
        case ModelKind::SpaceFormChart: return chart_frame_jets(model.params.lambda, p);
        case ModelKind::RoundSphere3: return sphere_frame_jets(model.params.scale, p);
    }
    throw std::logic_error("unreachable");
}

namespace {
// Chart evaluation without deck reduction: the chart formulas extend
// smoothly to the whole coordinate space, which the finite-difference
// checker relies on (chart tensor components are not deck-invariant).
FrameData frame_eval(const ModelManifold& model, const Vec3& p) {
    FrameData fd;
    fd.point = p;

    if (model.kind == ModelKind::RoundSphere3) {
        FrameJets fj = sphere_frame_jets(model.params.scale, p);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                fd.frame.m[r][c] = fj.frame[r][c].v;
                fd.coframe.m[r][c] = fj.coframe[r][c].v;
            }
        const double s = model.params.scale;
        // nabla_xi e1 = -(2/s) e2, nabla_xi e2 = (2/s) e1; horizontal
        // covariant derivatives of the frame vanish.
        fd.gamma[2][1][0] = -2.0 / s;
        fd.gamma[1][2][0] = 2.0 / s;
        // brackets: [e1,e2] = -xi, [xi,e1] = -(2/s) e2, [xi,e2] = (2/s) e1
        fd.c[0][1][2] = -1.0;
        fd.c[0][2][1] = 1.0;
        fd.c[2][0][1] = -2.0 / s;
        fd.c[2][1][0] = 2.0 / s;
        fd.c[1][0][2] = 2.0 / s;
        fd.c[1][2][0] = -2.0 / s;
        double ww = dot(p, p);
        double rho = 2.0 / (1.0 + ww);
        fd.volume_density = 2.0 * s * s * rho * rho * rho;
    } else {
        const double lambda =
            model.kind == ModelKind::SpaceFormChart ? model.params.lambda : 0.0;
        const double x = p[0], y = p[1];
        const double nu = 1.0 + 0.25 * lambda * (x * x + y * y);
        const double mu = 1.0 / nu;

        fd.frame = Mat3{};
        fd.frame.m[0][1] = nu;
        fd.frame.m[1][2] = nu;
        fd.frame.m[2][0] = 1.0;
        fd.frame.m[2][1] = 0.5 * y;
        fd.frame.m[2][2] = -0.5 * x;

        fd.coframe = Mat3{};
        fd.coframe.m[0][0] = -0.5 * mu * y;
        fd.coframe.m[0][1] = 0.5 * mu * x;
        fd.coframe.m[0][2] = 1.0;
        fd.coframe.m[1][0] = mu;
        fd.coframe.m[2][1] = mu;

        // connection rotation: nabla_X e1 = phi(X) e2 with
        // phi(e1) = (lambda/2) y, phi(e2) = -(lambda/2) x, phi(xi) = 0
        const double p1 = 0.5 * lambda * y;
        const double p2 = -0.5 * lambda * x;
        fd.gamma[2][1][1] = p1;
        fd.gamma[1][2][1] = -p1;
        fd.gamma[2][1][2] = p2;
        fd.gamma[1][2][2] = -p2;

        // [e1,e2] = -(lambda/2) y e1 + (lambda/2) x e2 - xi
        fd.c[1][1][2] = -p1;
        fd.c[2][1][2] = -p2;  // note: (lambda/2) x = -p2
        fd.c[0][1][2] = -1.0;
        fd.c[1][2][1] = p1;
        fd.c[2][2][1] = p2;
        fd.c[0][2][1] = 1.0;

        fd.volume_density = mu * mu;
    }

    for (int r = 0; r < 3; ++r) fd.xi[r] = fd.frame.m[r][0];
    for (int c = 0; c < 3; ++c) fd.theta[c] = fd.coframe.m[0][c];
    return fd;
}
}  // namespace

FrameData frame_at(const ModelManifold& model, const Vec3& point) {
    return frame_eval(model, model.reduce(point));
}

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

double CurvatureOperator::eval(const Vec3& X, const Vec3& Y, const Vec3& Z,
                               const Vec3& W) const {
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) {
                    double r = R[a][b][c][d];
                    if (r != 0.0) s += r * X[a] * Y[b] * Z[c] * W[d];
                }
    return s;
}

double CurvatureOperator::max_abs_component() const {
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) s = std::max(s, std::abs(R[a][b][c][d]));
    return s;
}

CurvatureOperator curvature_at(const ModelManifold& model, const Vec3& point) {
    (void)model.reduce(point);  // domain check
    CurvatureOperator co;
    co.kappa = model.hol_curvature();
    // Constant-curvature horizontal block (m = 1):
    // R(X,Y,Z,W) = kappa (<X,Z><Y,W> - <X,W><Y,Z>) on H, zero on xi slots.
    for (int a = 1; a <= 2; ++a)
        for (int b = 1; b <= 2; ++b)
            for (int c = 1; c <= 2; ++c)
                for (int d = 1; d <= 2; ++d)
                    co.R[a][b][c][d] =
                        co.kappa * ((a == c ? 1.0 : 0.0) * (b == d ? 1.0 : 0.0) -
                                    (a == d ? 1.0 : 0.0) * (b == c ? 1.0 : 0.0));
    co.Q[0][0] = co.kappa;  // e1^e2 block; xi^e_i blocks vanish
    co.Q11 = cplx(co.kappa, 0.0);
    return co;
}

double sectional(const ModelManifold& model, const Vec3& point, const double X[2],
                 const double Y[2]) {
    CurvatureOperator co = curvature_at(model, point);
    double w = X[0] * Y[1] - X[1] * Y[0];
    double n2 = w * w;
    if (n2 < 1e-24)
        throw std::invalid_argument("sectional: degenerate horizontal 2-plane");
    return co.kappa * n2 / n2;
}

double hol_sectional(const ModelManifold& model, const Vec3& point, const double X[2]) {
    double JX[2] = {-X[1], X[0]};
    return sectional(model, point, X, JX);
}

// ---------------------------------------------------------------------------
// Negativity
// ---------------------------------------------------------------------------

NegativityClass negativity_class(const ModelManifold& model, const Vec3& point,
                                 double tol) {
    CurvatureOperator co = curvature_at(model, point);
    // m = 1: the (1,1) space is the complex line spanned by eta1 ^ eta1bar
    // and the Hermitian form has the single eigenvalue Q11.
    double ev = co.Q11.real();
    if (ev < -tol) return NegativityClass::StronglyNegative;
    if (ev <= tol) return NegativityClass::StronglySeminegative;
    return NegativityClass::Indefinite;
}

OrderKReport order_k_negativity_sample(const ModelManifold& model, const Vec3& point,
                                       int k, int trials, std::uint64_t seed) {
    const int m = model.m;
    if (k < 1 || k > 2 * m)
        throw std::invalid_argument("order_k_negativity_sample: invalid order k");
    if (trials < 1) throw std::invalid_argument("order_k_negativity_sample: trials < 1");

    CurvatureOperator co = curvature_at(model, point);
    const double R1111 = -co.kappa;  // R_{1 1bar 1 1bar}

    OrderKReport rep;
    rep.trials = trials;
    rep.note =
        "sampling can only falsify negativity of order k, never certify it; "
        "pairs must satisfy the rank-2k side condition";
    Rng rng(seed);

    std::vector<cplx> A(k), B(k);
    for (int t = 0; t < trials; ++t) {
        double na = 0, nb = 0;
        for (int i = 0; i < k; ++i) {
            A[i] = rng.cnormal();
            B[i] = rng.cnormal();
            na += std::norm(A[i]);
            nb += std::norm(B[i]);
        }
        if (na < 1e-12 || nb < 1e-12) continue;

        // rank of the 2 x 2k block matrix (A B; conj(B) conj(A)); full rank
        // 2k is possible only when 2k <= 2m.  (m = 1 here.)
        if (2 * k > 2 * m) continue;  // side condition unsatisfiable: skip
        bool rank2 = false;
        std::vector<cplx> row0(2 * k), row1(2 * k);
        for (int i = 0; i < k; ++i) {
            row0[i] = A[i];
            row0[k + i] = B[i];
            row1[i] = std::conj(B[i]);
            row1[k + i] = std::conj(A[i]);
        }
        for (int i = 0; i < 2 * k && !rank2; ++i)
            for (int j = i + 1; j < 2 * k && !rank2; ++j)
                if (std::abs(row0[i] * row1[j] - row0[j] * row1[i]) > 1e-10) rank2 = true;
        if (!rank2) continue;
        ++rep.admissible;

        // curvature contraction with xi_{ij} = A_i conj(B_j) - A_j conj(B_i)
        bool all_zero = true;
        for (int i = 0; i < k && all_zero; ++i)
            for (int j = 0; j < k && all_zero; ++j) {
                cplx xi = A[i] * std::conj(B[j]) - A[j] * std::conj(B[i]);
                if (std::abs(R1111 * std::norm(xi)) > 1e-12) all_zero = false;
            }
        if (all_zero) {
            rep.counterexample_found = true;
            rep.witness_A = A;
            rep.witness_B = B;
            return rep;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Connection offset S = nabla^theta - nabla (Sasakian reduction)
// ---------------------------------------------------------------------------

Vec3 ConnectionOffset::apply(const Vec3& Z1, const Vec3& Z2) const {
    Vec3 r;
    for (int c = 0; c < 3; ++c) {
        double s = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) s += S[c][a][b] * Z1[a] * Z2[b];
        r[c] = s;
    }
    return r;
}

ConnectionOffset connection_offset(const ModelManifold& model, const Vec3& point) {
    (void)model.reduce(point);
    ConnectionOffset off;
    // S(Z1,Z2) = -1/2 dtheta(Z2,Z1) xi + 1/2 (theta(Z2) J Z1 + theta(Z1) J Z2)
    // in frame components: dtheta(e1,e2) = 1, theta(xi) = 1, J e1 = e2,
    // J e2 = -e1, J xi = 0.
    auto dtheta = [](int a, int b) -> double {
        if (a == 1 && b == 2) return 1.0;
        if (a == 2 && b == 1) return -1.0;
        return 0.0;
    };
    auto theta = [](int a) -> double { return a == 0 ? 1.0 : 0.0; };
    // J in frame components: (J v)_1 = -v_2, (J v)_2 = v_1
    auto Jcomp = [](int out, int in) -> double {
        if (out == 1 && in == 2) return -1.0;
        if (out == 2 && in == 1) return 1.0;
        return 0.0;
    };
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            off.S[0][a][b] += -0.5 * dtheta(b, a);
            for (int c = 1; c <= 2; ++c)
                off.S[c][a][b] += 0.5 * (theta(b) * Jcomp(c, a) + theta(a) * Jcomp(c, b));
        }
    return off;
}

// ---------------------------------------------------------------------------
// Axiom checker
// ---------------------------------------------------------------------------

double TWReport::max_residual() const {
    return std::max(std::max(res_metric, res_J), std::max(res_torsion, res_xi));
}

Vec3 random_chart_point(const ModelManifold& model, Rng& rng) {
    switch (model.kind) {
        case ModelKind::HeisenbergNilmanifold:
            return Vec3{{rng.uniform(), rng.uniform(), rng.uniform()}};
        case ModelKind::SpaceFormChart:
            return Vec3{{rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7),
                         rng.uniform(-1.0, 1.0)}};
        case ModelKind::RoundSphere3:
            return Vec3{{rng.uniform(-0.45, 0.45), rng.uniform(-0.45, 0.45),
                         rng.uniform(-0.45, 0.45)}};
    }
    throw std::logic_error("unreachable");
}

namespace {

// metric g_{mu nu} = sum_A W^A_mu W^A_nu from the orthonormal coframe
// (unreduced chart evaluation; see frame_eval)
Mat3 metric_at(const ModelManifold& model, const Vec3& p) {
    FrameData fd = frame_eval(model, p);
    Mat3 g;
    for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) {
            double s = 0;
            for (int A = 0; A < 3; ++A) s += fd.coframe.m[A][mu] * fd.coframe.m[A][nu];
            g.m[mu][nu] = s;
        }
    return g;
}

// J as a coordinate (1,1)-tensor: J^mu_nu = (V Jf W)^mu_nu
Mat3 Jcoord_at(const ModelManifold& model, const Vec3& p) {
    FrameData fd = frame_eval(model, p);
    Mat3 Jf{};
    Jf.m[2][1] = 1.0;   // J e1 = e2
    Jf.m[1][2] = -1.0;  // J e2 = -e1
    return mul(fd.frame, mul(Jf, fd.coframe));
}

}  // namespace

TWReport check_tanaka_webster(const ModelManifold& model, int sample_count, double h,
                              std::uint64_t seed) {
    if (!(h > 0.0)) throw std::invalid_argument("check_tanaka_webster: h must be > 0");
    TWReport rep;
    rep.cancellation_warning = h <= 1e-8;
    Rng rng(seed);

    for (int s = 0; s < sample_count; ++s) {
        Vec3 p = random_chart_point(model, rng);

        // exact coordinate Christoffel symbols at p:
        // Gamma~^kappa_{mu nu} = sum_A V^kappa_A d_nu(W^A_mu)
        //   + sum_{A,B,C} W^A_mu W^B_nu Gamma[C][A][B] V^kappa_C
        FrameData fd = frame_at(model, p);
        FrameJets fj = frame_jets(model, p);
        double Gt[3][3][3];
        for (int kpp = 0; kpp < 3; ++kpp)
            for (int mu = 0; mu < 3; ++mu)
                for (int nu = 0; nu < 3; ++nu) {
                    double v = 0;
                    for (int A = 0; A < 3; ++A)
                        v += fd.frame.m[kpp][A] * fj.coframe[A][mu].g[nu];
                    for (int A = 0; A < 3; ++A)
                        for (int B = 0; B < 3; ++B)
                            for (int C = 0; C < 3; ++C) {
                                double gm = fd.gamma[C][A][B];
                                if (gm != 0.0)
                                    v += fd.coframe.m[A][mu] * fd.coframe.m[B][nu] * gm *
                                         fd.frame.m[kpp][C];
                            }
                    Gt[kpp][mu][nu] = v;
                }

        Mat3 g0 = metric_at(model, p);
        // centered differences of g, J, xi-components and theta along the
        // coordinate axes
        Mat3 gp[3], gm[3], Jp[3], Jm[3];
        Vec3 xip[3], xim[3], thp[3], thm[3];
        for (int lam = 0; lam < 3; ++lam) {
            Vec3 pp = p, pm = p;
            pp[lam] += h;
            pm[lam] -= h;
            gp[lam] = metric_at(model, pp);
            gm[lam] = metric_at(model, pm);
            Jp[lam] = Jcoord_at(model, pp);
            Jm[lam] = Jcoord_at(model, pm);
            FrameData fp = frame_eval(model, pp), fm = frame_eval(model, pm);
            xip[lam] = fp.xi;
            xim[lam] = fm.xi;
            thp[lam] = fp.theta;
            thm[lam] = fm.theta;
        }

        // Residual tensors are contracted against the orthonormal frame so
        // the reported numbers are chart-independent component norms.
        Mat3 J0 = Jcoord_at(model, p);
        double Rg[3][3][3], RJ[3][3][3], Rxi[3][3], RT[3][3][3];
        for (int lam = 0; lam < 3; ++lam) {
            for (int mu = 0; mu < 3; ++mu) {
                for (int nu = 0; nu < 3; ++nu) {
                    double dg = (gp[lam].m[mu][nu] - gm[lam].m[mu][nu]) / (2 * h);
                    double corr = 0;
                    for (int kpp = 0; kpp < 3; ++kpp)
                        corr += Gt[kpp][mu][lam] * g0.m[kpp][nu] +
                                Gt[kpp][nu][lam] * g0.m[mu][kpp];
                    Rg[mu][nu][lam] = dg - corr;

                    double dJ = (Jp[lam].m[mu][nu] - Jm[lam].m[mu][nu]) / (2 * h);
                    double cj = 0;
                    for (int kpp = 0; kpp < 3; ++kpp)
                        cj += Gt[mu][kpp][lam] * J0.m[kpp][nu] -
                              Gt[kpp][nu][lam] * J0.m[mu][kpp];
                    RJ[mu][nu][lam] = dJ + cj;
                }
                double dxi = (xip[lam][mu] - xim[lam][mu]) / (2 * h);
                double corr = 0;
                for (int kpp = 0; kpp < 3; ++kpp) corr += Gt[mu][kpp][lam] * fd.xi[kpp];
                Rxi[mu][lam] = dxi + corr;
            }
        }
        for (int nu = 0; nu < 3; ++nu)
            for (int lam = 0; lam < 3; ++lam) {
                double dth = (thp[nu][lam] - thm[nu][lam]) / (2 * h) -
                             (thp[lam][nu] - thm[lam][nu]) / (2 * h);
                for (int mu = 0; mu < 3; ++mu)
                    RT[mu][nu][lam] = (Gt[mu][lam][nu] - Gt[mu][nu][lam]) - dth * fd.xi[mu];
            }

        const Mat3& V = fd.frame;
        const Mat3& W = fd.coframe;
        for (int A = 0; A < 3; ++A)
            for (int B = 0; B < 3; ++B)
                for (int C = 0; C < 3; ++C) {
                    double rg = 0, rt = 0, rj = 0;
                    for (int mu = 0; mu < 3; ++mu)
                        for (int nu = 0; nu < 3; ++nu)
                            for (int lam = 0; lam < 3; ++lam) {
                                double vvv = V.m[mu][A] * V.m[nu][B] * V.m[lam][C];
                                rg += Rg[mu][nu][lam] * vvv;
                                rt += W.m[A][mu] * RT[mu][nu][lam] * V.m[nu][B] * V.m[lam][C];
                                rj += W.m[A][mu] * RJ[mu][nu][lam] * V.m[nu][B] * V.m[lam][C];
                            }
                    rep.res_metric = std::max(rep.res_metric, std::abs(rg));
                    rep.res_torsion = std::max(rep.res_torsion, std::abs(rt));
                    rep.res_J = std::max(rep.res_J, std::abs(rj));
                }
        for (int A = 0; A < 3; ++A)
            for (int C = 0; C < 3; ++C) {
                double rx = 0;
                for (int mu = 0; mu < 3; ++mu)
                    for (int lam = 0; lam < 3; ++lam)
                        rx += W.m[A][mu] * Rxi[mu][lam] * V.m[lam][C];
                rep.res_xi = std::max(rep.res_xi, std::abs(rx));
            }
    }
    return rep;
}

}  // namespace phg

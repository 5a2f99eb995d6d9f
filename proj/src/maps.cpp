#include "phg/maps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phg {

// ---------------------------------------------------------------------------
// Real <-> unitary-frame complex index transforms.
//
// Target (upper) index: row 0 stays, rows (1,2) combine as
//   out1 = (in1 + i in2)/sqrt2, out2 = (in1 - i in2)/sqrt2.
// Source (lower, direction) index: eta_1 = (e1 - i e2)/sqrt2, so
//   out1 = (in1 - i in2)/sqrt2, out2 = (in1 + i in2)/sqrt2.
// ---------------------------------------------------------------------------

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

inline void target_weights(int A, cplx w[3]) {
    w[0] = w[1] = w[2] = 0.0;
    if (A == 0)
        w[0] = 1.0;
    else if (A == 1) {
        w[1] = kInvSqrt2;
        w[2] = cplx(0, kInvSqrt2);
    } else {
        w[1] = kInvSqrt2;
        w[2] = cplx(0, -kInvSqrt2);
    }
}
inline void source_weights(int B, cplx w[3]) {
    w[0] = w[1] = w[2] = 0.0;
    if (B == 0)
        w[0] = 1.0;
    else if (B == 1) {
        w[1] = kInvSqrt2;
        w[2] = cplx(0, -kInvSqrt2);
    } else {
        w[1] = kInvSqrt2;
        w[2] = cplx(0, kInvSqrt2);
    }
}

void complexify_d2(const double in[3][3][3], cplx out[3][3][3]) {
    cplx tw[3][3], sw[3][3];
    for (int i = 0; i < 3; ++i) {
        target_weights(i, tw[i]);
        source_weights(i, sw[i]);
    }
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B)
            for (int C = 0; C < 3; ++C) {
                cplx s = 0.0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        for (int c = 0; c < 3; ++c) {
                            double r = in[a][b][c];
                            if (r != 0.0) s += tw[A][a] * sw[B][b] * sw[C][c] * r;
                        }
                out[A][B][C] = s;
            }
}

void complexify_d3(const double in[3][3][3][3], cplx out[3][3][3][3]) {
    cplx tw[3][3], sw[3][3];
    for (int i = 0; i < 3; ++i) {
        target_weights(i, tw[i]);
        source_weights(i, sw[i]);
    }
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B)
            for (int C = 0; C < 3; ++C)
                for (int D = 0; D < 3; ++D) {
                    cplx s = 0.0;
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b)
                            for (int c = 0; c < 3; ++c)
                                for (int d = 0; d < 3; ++d) {
                                    double r = in[a][b][c][d];
                                    if (r != 0.0)
                                        s += tw[A][a] * sw[B][b] * sw[C][c] * sw[D][d] * r;
                                }
                    out[A][B][C][D] = s;
                }
}

}  // namespace

void complexify_d1(const double in[3][3], cplx out[3][3]) {
    cplx tw[3][3], sw[3][3];
    for (int i = 0; i < 3; ++i) {
        target_weights(i, tw[i]);
        source_weights(i, sw[i]);
    }
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B) {
            cplx s = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) s += tw[A][a] * sw[B][b] * in[a][b];
            out[A][B] = s;
        }
}

void realify_d1(const cplx in[3][3], double out[3][3]) {
    // inverse of complexify_d1; rows: in0, (in1+in2)/sqrt2, (in1-in2)*i/.. --
    // derive via conjugate combinations (exact for tensors with the reality
    // symmetry of an underlying real tensor).
    cplx tmp[3][3];
    for (int B = 0; B < 3; ++B) {
        tmp[0][B] = in[0][B];
        tmp[1][B] = (in[1][B] + in[2][B]) * kInvSqrt2;
        tmp[2][B] = (in[1][B] - in[2][B]) * cplx(0, -kInvSqrt2);
    }
    for (int a = 0; a < 3; ++a) {
        out[a][0] = tmp[a][0].real();
        out[a][1] = ((tmp[a][1] + tmp[a][2]) * kInvSqrt2).real();
        out[a][2] = ((tmp[a][1] - tmp[a][2]) * cplx(0, kInvSqrt2)).real();
    }
}

// ---------------------------------------------------------------------------
// Pointwise functionals of a jet
// ---------------------------------------------------------------------------

EnergyBreakdown energy_density(const MapJet& jet) {
    EnergyBreakdown e;
    const auto& c = jet.d1;
    e.d_sq = std::norm(c[1][1]);
    e.d_bar_sq = std::norm(c[1][2]);
    e.e_HH = (c[1][1] * c[2][2] + c[2][1] * c[1][2]).real();
    e.e_LH = (c[1][0] * c[2][0]).real();
    e.e_HL = (c[0][1] * c[0][2]).real();
    double f00 = c[0][0].real();
    e.e_LL = 0.5 * f00 * f00;
    // pairing route <omega^M, f* omega^N> (horizontal determinant)
    e.k = jet.d1r[1][1] * jet.d1r[2][2] - jet.d1r[2][1] * jet.d1r[1][2];
    return e;
}

TensionVector tension_from_jet(const MapJet& jet) {
    if (!jet.has_d2) throw std::invalid_argument("tension_from_jet: jet lacks d2");
    TensionVector tv;
    const auto& c2 = jet.d2;
    cplx tau_hh = c2[1][1][2] + c2[1][2][1];          // f^a_{k kbar} + f^a_{kbar k}
    double tau_hl = (c2[0][1][2] + c2[0][2][1]).real();
    tv.tau_HH = Vec3{{0.0, std::sqrt(2.0) * tau_hh.real(), std::sqrt(2.0) * tau_hh.imag()}};
    tv.tau_HL = Vec3{{tau_hl, 0.0, 0.0}};
    tv.tau_H = tv.tau_HH + tv.tau_HL;
    tv.torsion_term = Vec3{};  // Sasakian target: f* tau~ = 0
    cplx full_h = tau_hh + c2[1][0][0];
    double full_0 = tau_hl + c2[0][0][0].real();
    tv.full_trace = Vec3{{full_0, std::sqrt(2.0) * full_h.real(),
                          std::sqrt(2.0) * full_h.imag()}};
    return tv;
}

double CommutationReport::max_residual() const {
    double m = 0;
    for (const auto& e : entries) m = std::max(m, e.residual);
    return m;
}

double CommutationReport::residual(const std::string& id) const {
    for (const auto& e : entries)
        if (e.id == id) return e.residual;
    throw std::invalid_argument("CommutationReport: unknown id " + id);
}

CommutationReport commutation_residuals(const MapJet& jet) {
    if (!jet.has_d2)
        throw std::invalid_argument("commutation_residuals: jet lacks d2");
    const auto& c1 = jet.d1;
    const auto& c2 = jet.d2;
    const cplx I(0, 1);
    CommutationReport rep;
    auto add = [&](const std::string& id, cplx v) {
        rep.entries.push_back({id, std::abs(v)});
    };

    add("eq2.17.sym-0h", c2[1][0][1] - c2[1][1][0]);
    add("eq2.17.sym-0hbar", c2[1][0][2] - c2[1][2][0]);
    add("eq2.17.mixed", c2[1][2][1] - c2[1][1][2] + I * c1[1][0]);
    add("eq4.18.trace", c2[1][1][2] - c2[1][2][1] - I * c1[1][0]);
    add("eq2.14.vertical-0h",
        c2[0][1][0] - c2[0][0][1] - I * (c1[1][0] * c1[2][1] - c1[2][0] * c1[1][1]));
    add("eq2.14.mixed", c2[0][1][2] - c2[0][2][1] - I * c1[0][0] -
                            I * (c1[2][1] * c1[1][2] - c1[1][1] * c1[2][2]));

    if (jet.has_d3) {
        const auto& c3 = jet.d3;
        add("eq2.21.sym", c3[0][0][0][1] - c3[0][0][1][0]);
        add("eq2.21.mixed", c3[0][0][2][1] - c3[0][0][1][2] + I * c2[0][0][0]);
        add("eq2.24.sym", c3[0][1][0][1] - c3[0][1][1][0]);
        // the structural term carries the same i as in the alpha-component
        // relation (frame commutator [eta_lbar, eta_l] = i m xi on scalars)
        add("eq2.24.mixed", c3[0][1][1][2] - c3[0][1][2][1] - I * c2[0][1][0]);
        add("eq2.17.third-sym", c3[1][1][0][1] - c3[1][1][1][0]);
        add("eq2.17.third-mixed", c3[1][1][2][1] - c3[1][1][1][2] + I * c2[1][1][0]);
    }
    return rep;
}

PaneitzComponents paneitz(const MapJet& jet) {
    if (!jet.has_d3)
        throw std::invalid_argument(
            "paneitz: exact third derivatives required (finite-difference d3 rejected)");
    PaneitzComponents pc;
    pc.P1 = jet.d3[1][2][1][1];     // f^alpha_{kbar k j}
    pc.P1bar = jet.d3[2][2][1][1];  // f^{alpha bar}_{kbar k j}
    return pc;
}

double bochner_residual(const MapJet& jet) {
    if (!jet.has_d3) throw std::invalid_argument("bochner_residual: jet lacks d3");
    const auto& c1 = jet.d1;
    const auto& c2 = jet.d2;
    const auto& c3 = jet.d3;

    // LHS: Delta_H e_{H,H~} by the Leibniz expansion of
    // e = f^a_1 f^abar_1bar + f^abar_1 f^a_1bar over directions (1,2),(2,1)
    auto pair_dd = [&](int ta, int tb, int C, int D) {
        // (f g)_{CD} for f = f^{ta}_1, g = f^{tb}_{1bar}
        return c3[ta][1][C][D] * c1[tb][2] + c2[ta][1][C] * c2[tb][2][D] +
               c2[ta][1][D] * c2[tb][2][C] + c1[ta][1] * c3[tb][2][C][D];
    };
    cplx lhs = 0.0;
    for (auto [C, D] : {std::pair{1, 2}, std::pair{2, 1}})
        lhs += pair_dd(1, 2, C, D) + pair_dd(2, 1, C, D);

    // RHS pieces (m = 1, flat source and target, A = W = 0):
    cplx beta2 = 2.0 * (c2[1][1][1] * c2[2][2][2] + c2[1][1][2] * c2[2][2][1] +
                        c2[2][1][1] * c2[1][2][2] + c2[2][1][2] * c2[1][2][1]);
    cplx nabla_tau = c1[2][2] * (c3[1][1][2][1] + c3[1][2][1][1]) +
                     c1[2][1] * (c3[1][1][2][2] + c3[1][2][1][2]) +
                     c1[1][1] * (c3[2][1][2][2] + c3[2][2][1][2]) +
                     c1[1][2] * (c3[2][1][2][1] + c3[2][2][1][1]);
    cplx pp = c1[2][1] * c3[1][1][2][2] + c1[1][2] * c3[2][2][1][1] +
              c1[1][1] * c3[2][1][2][2] + c1[2][2] * c3[1][2][1][1];

    cplx rhs = beta2 + 3.0 * nabla_tau - 4.0 * pp;
    return std::abs(lhs - rhs);
}

// ---------------------------------------------------------------------------
// Analytic test maps
// ---------------------------------------------------------------------------

namespace {
std::array<Jet3, 3> coord_jets(const Vec3& p) {
    return {Jet3::coordinate(0, p[0]), Jet3::coordinate(1, p[1]),
            Jet3::coordinate(2, p[2])};
}
}  // namespace

AnalyticMap am_identity() {
    AnalyticMap m;
    m.name = "identity";
    m.foliated = true;
    m.holomorphic = true;
    m.equivariant = true;
    m.lift = [](const Vec3& p) { return coord_jets(p); };
    return m;
}

AnalyticMap am_fiber_rotation(double c) {
    AnalyticMap m;
    m.name = "fiber-rotation";
    m.foliated = true;
    m.holomorphic = true;
    m.equivariant = true;
    m.lift = [c](const Vec3& p) {
        auto j = coord_jets(p);
        j[2] = j[2] + c;
        return j;
    };
    return m;
}

AnalyticMap am_affine(const int A[2][2], const double w[2], double r) {
    const int a = A[0][0], b = A[0][1], c = A[1][0], d = A[1][1];
    if ((a * c) % 2 != 0 || (b * d) % 2 != 0)
        throw std::invalid_argument(
            "am_affine: a11*a21 and a12*a22 must be even for the horizontal lift to "
            "descend to the quotient");
    AnalyticMap m;
    m.name = "affine";
    m.foliated = true;
    m.holomorphic = (a == d && b == -c);  // horizontal block commutes with J
    m.equivariant = true;
    m.A[0][0] = a;
    m.A[0][1] = b;
    m.A[1][0] = c;
    m.A[1][1] = d;
    const double lam = a * d - b * c;
    const double p0 = w[0], q0 = w[1];
    // group automorphism (A(x,y), det(A) t) followed by left translation by
    // (p0, q0, r); left translations commute with the right deck action
    m.lift = [=](const Vec3& p) -> std::array<Jet3, 3> {
        auto cj = coord_jets(p);
        Jet3 X = double(a) * cj[0] + double(b) * cj[1];
        Jet3 Y = double(c) * cj[0] + double(d) * cj[1];
        Jet3 T = lam * cj[2];
        std::array<Jet3, 3> F;
        F[0] = X + p0;
        F[1] = Y + q0;
        F[2] = T + 0.5 * (p0 * Y - q0 * X) + r;
        return F;
    };
    return m;
}

AnalyticMap am_conjugation() {
    int A[2][2] = {{1, 0}, {0, -1}};
    double w[2] = {0, 0};
    AnalyticMap m = am_affine(A, w, 0.0);
    m.name = "conjugation";
    m.holomorphic = false;
    return m;
}

AnalyticMap am_trig_perturbed(const TrigPerturbation& tp) {
    AnalyticMap m;
    m.name = "trig-perturbed-identity";
    m.foliated = true;
    m.holomorphic = false;
    m.equivariant = true;
    m.lift = [tp](const Vec3& p) -> std::array<Jet3, 3> {
        auto cj = coord_jets(p);
        const Jet3& x = cj[0];
        const Jet3& y = cj[1];
        const Jet3& t = cj[2];
        Jet3 a = tp.amp_a * sin((kTwoPi * tp.freq_a) * y);
        Jet3 b = tp.amp_b * cos((kTwoPi * tp.freq_b) * x);
        Jet3 cc = tp.amp_c * (sin(kTwoPi * x) * cos(kTwoPi * y));
        std::array<Jet3, 3> F;
        F[0] = x + a;
        F[1] = y + b;
        F[2] = t + 0.5 * (y * a) - 0.5 * (x * b) + cc;
        return F;
    };
    return m;
}

TrigPerturbation seeded_perturbation(std::uint64_t seed, double amplitude) {
    Rng rng(seed);
    TrigPerturbation tp;
    tp.amp_a = amplitude * rng.uniform(0.5, 1.0);
    tp.freq_a = 1 + int(rng.next_u64() % 2);
    tp.amp_b = amplitude * rng.uniform(0.5, 1.0);
    tp.freq_b = 1 + int(rng.next_u64() % 2);
    tp.amp_c = amplitude * rng.uniform(0.25, 0.75);
    return tp;
}

AnalyticMap am_reeb_tilt(double kappa) {
    AnalyticMap m;
    m.name = "reeb-tilt";
    m.foliated = false;
    m.holomorphic = false;
    m.equivariant = false;  // local analytic family only
    m.lift = [kappa](const Vec3& p) -> std::array<Jet3, 3> {
        auto cj = coord_jets(p);
        std::array<Jet3, 3> F;
        F[0] = cj[0] + kappa * sin(cj[2]);
        F[1] = cj[1];
        F[2] = cj[2];
        return F;
    };
    return m;
}

AnalyticMap am_vertical_wave(double amp) {
    AnalyticMap m;
    m.name = "vertical-wave";
    m.foliated = true;
    m.holomorphic = true;  // the H->H~ block is the identity
    m.equivariant = true;
    m.lift = [amp](const Vec3& p) -> std::array<Jet3, 3> {
        auto cj = coord_jets(p);
        std::array<Jet3, 3> F;
        F[0] = cj[0];
        F[1] = cj[1];
        F[2] = cj[2] + amp * sin(kTwoPi * cj[0]);
        return F;
    };
    return m;
}

std::vector<AnalyticMap> shipped_test_maps() {
    std::vector<AnalyticMap> v;
    v.push_back(am_identity());
    v.push_back(am_fiber_rotation(0.37));
    int A1[2][2] = {{1, 2}, {0, 1}};
    double w1[2] = {0.3, -0.2};
    v.push_back(am_affine(A1, w1, 0.1));
    int A2[2][2] = {{2, 0}, {0, 1}};
    double w2[2] = {0.0, 0.0};
    auto d21 = am_affine(A2, w2, 0.0);
    d21.name = "affine-diag21";
    v.push_back(d21);
    v.push_back(am_conjugation());
    v.push_back(am_trig_perturbed(seeded_perturbation(7, 0.05)));
    v.push_back(am_reeb_tilt(0.2));
    v.push_back(am_vertical_wave(0.3));
    return v;
}

// ---------------------------------------------------------------------------
// Exact jets via Taylor arithmetic
// ---------------------------------------------------------------------------

MapJet analytic_jet(const AnalyticMap& map, const Vec3& point) {
    MapJet jet;
    jet.point = point;

    auto F = map.lift(point);
    jet.f = Vec3{{F[0].v, F[1].v, F[2].v}};

    // Source frame coefficient jets (flat Heisenberg chart frame).
    auto cj = coord_jets(point);
    std::array<Jet3, 3> eB[3];
    eB[0] = {Jet3(), Jet3(), Jet3(1.0)};            // xi = d_t
    eB[1] = {Jet3(1.0), Jet3(), 0.5 * cj[1]};       // e1 = d_x + (y/2) d_t
    eB[2] = {Jet3(), Jet3(1.0), -0.5 * cj[0]};      // e2 = d_y - (x/2) d_t

    // dF[mu][B] = sum_nu e_B^nu d_nu F^mu  (order-2 jets)
    Jet3 dF[3][3];
    for (int mu = 0; mu < 3; ++mu) {
        Jet3 pF[3] = {partial(F[mu], 0), partial(F[mu], 1), partial(F[mu], 2)};
        for (int B = 0; B < 3; ++B) {
            Jet3 s;
            for (int nu = 0; nu < 3; ++nu) s += eB[B][nu] * pF[nu];
            dF[mu][B] = s;
        }
    }

    // D[A][B] through the left-invariant target coframe at F(p):
    // theta~ = dT + (X dY - Y dX)/2, Theta~1 = dX, Theta~2 = dY.
    Jet3 D[3][3];
    for (int B = 0; B < 3; ++B) {
        D[0][B] = dF[2][B] + 0.5 * (F[0] * dF[1][B]) - 0.5 * (F[1] * dF[0][B]);
        D[1][B] = dF[0][B];
        D[2][B] = dF[1][B];
    }

    double d1r[3][3];
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B) d1r[A][B] = D[A][B].v;

    // Covariant derivatives: the chart frames are parallel on both sides,
    // so f^A_{BC} is the e_C frame derivative of the coefficient function.
    Jet3 d2j[3][3][3];
    double d2r[3][3][3];
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B)
            for (int C = 0; C < 3; ++C) {
                d2j[A][B][C] = dderiv(D[A][B], eB[C]);
                d2r[A][B][C] = d2j[A][B][C].v;
            }
    double d3r[3][3][3][3];
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B)
            for (int C = 0; C < 3; ++C)
                for (int E = 0; E < 3; ++E)
                    d3r[A][B][C][E] = dderiv(d2j[A][B][C], eB[E]).v;

    std::copy(&d1r[0][0], &d1r[0][0] + 9, &jet.d1r[0][0]);
    complexify_d1(d1r, jet.d1);
    complexify_d2(d2r, jet.d2);
    jet.has_d2 = true;
    complexify_d3(d3r, jet.d3);
    jet.has_d3 = true;
    return jet;
}

// ---------------------------------------------------------------------------
// Discrete jets
// ---------------------------------------------------------------------------

namespace {

// Real frame-coefficient matrix of df at a node, from centered differences
// of the lifts mapped through the target coframe at f(node).
void discrete_d1(const MapField& f, int i, int j, int k, double D[3][3], Vec3* f_out) {
    const Grid& g = f.grid();
    const double sx = 0.5 / g.hx(), sy = 0.5 / g.hy(), st = 0.5 / g.ht();
    Vec3 fp = f.lift(g.index(i, j, k));
    Vec3 xp = f.lift_raw(i + 1, j, k), xm = f.lift_raw(i - 1, j, k);
    Vec3 yp = f.lift_raw(i, j + 1, k), ym = f.lift_raw(i, j - 1, k);
    Vec3 tp = f.lift_raw(i, j, k + 1), tm = f.lift_raw(i, j, k - 1);
    const double x = i * g.hx(), y = j * g.hy();

    double col[3][3];  // col[B][mu] = e_B(f^mu)
    for (int mu = 0; mu < 3; ++mu) {
        double dx = sx * (xp[mu] - xm[mu]);
        double dy = sy * (yp[mu] - ym[mu]);
        double dt = st * (tp[mu] - tm[mu]);
        col[0][mu] = dt;
        col[1][mu] = dx + 0.5 * y * dt;
        col[2][mu] = dy - 0.5 * x * dt;
    }
    for (int B = 0; B < 3; ++B) {
        D[0][B] = col[B][2] + 0.5 * (fp[0] * col[B][1] - fp[1] * col[B][0]);
        D[1][B] = col[B][0];
        D[2][B] = col[B][1];
    }
    if (f_out) *f_out = fp;
}

}  // namespace

MapJet jet_at(const MapField& f, int i, int j, int k, bool want_d2) {
    const Grid& g = f.grid();
    MapJet jet;
    jet.point = g.point(i, j, k);

    double D[3][3];
    discrete_d1(f, i, j, k, D, &jet.f);
    std::copy(&D[0][0], &D[0][0] + 9, &jet.d1r[0][0]);
    complexify_d1(jet.d1r, jet.d1);

    if (want_d2) {
        // e_C difference of the d1 coefficient field (the coefficients are
        // scalars on the quotient, so plain twisted-wrap stencils apply).
        auto Dat = [&](long ii, long jj, long kk, double out[3][3]) {
            auto w = g.wrap(ii, jj, kk);
            discrete_d1(f, w.i, w.j, w.k, out, nullptr);
        };
        double Dxp[3][3], Dxm[3][3], Dyp[3][3], Dym[3][3], Dtp[3][3], Dtm[3][3];
        Dat(i + 1, j, k, Dxp);
        Dat(i - 1, j, k, Dxm);
        Dat(i, j + 1, k, Dyp);
        Dat(i, j - 1, k, Dym);
        Dat(i, j, k + 1, Dtp);
        Dat(i, j, k - 1, Dtm);
        const double sx = 0.5 / g.hx(), sy = 0.5 / g.hy(), st = 0.5 / g.ht();
        const double x = i * g.hx(), y = j * g.hy();
        double d2r[3][3][3];
        for (int A = 0; A < 3; ++A)
            for (int B = 0; B < 3; ++B) {
                double dx = sx * (Dxp[A][B] - Dxm[A][B]);
                double dy = sy * (Dyp[A][B] - Dym[A][B]);
                double dt = st * (Dtp[A][B] - Dtm[A][B]);
                d2r[A][B][0] = dt;
                d2r[A][B][1] = dx + 0.5 * y * dt;
                d2r[A][B][2] = dy - 0.5 * x * dt;
            }
        complexify_d2(d2r, jet.d2);
        jet.has_d2 = true;
    }
    return jet;
}

MapField map_field_from_analytic(GridPtr grid, const ModelManifold& target,
                                 const AnalyticMap& map) {
    if (!map.equivariant)
        throw std::invalid_argument("map_field_from_analytic: '" + map.name +
                                    "' does not descend to the compact quotient");
    int A[2][2] = {{map.A[0][0], map.A[0][1]}, {map.A[1][0], map.A[1][1]}};
    return MapField::sample(grid, target,
                            [&map](const Vec3& p) { return map.eval(p); }, A);
}

EnergyBreakdown energy_density_at(const MapField& f, int i, int j, int k) {
    return energy_density(jet_at(f, i, j, k, false));
}

IntegratedEnergies energies(const MapField& f) {
    const Grid& g = f.grid();
    const double cell = g.hx() * g.hy() * g.ht();
    const int ny = g.ny(), nt = g.nt();

    struct Acc {
        double e_HH = 0, e_LH = 0, e_HL = 0, e_LL = 0, dsq = 0, dbsq = 0, k = 0;
    };
    const std::size_t n = g.size();
    std::vector<Acc> partial(thread_count());
    const std::size_t chunk = (n + partial.size() - 1) / partial.size();
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        Acc a;
        for (std::size_t s = lo; s < hi; ++s) {
            int k3 = int(s % nt);
            int j3 = int((s / nt) % ny);
            int i3 = int(s / (std::size_t(ny) * nt));
            EnergyBreakdown e = energy_density_at(f, i3, j3, k3);
            a.e_HH += e.e_HH;
            a.e_LH += e.e_LH;
            a.e_HL += e.e_HL;
            a.e_LL += e.e_LL;
            a.dsq += e.d_sq;
            a.dbsq += e.d_bar_sq;
            a.k += e.k;
        }
        std::size_t t = chunk == 0 ? 0 : lo / chunk;
        auto& p = partial[std::min(t, partial.size() - 1)];
        p.e_HH += a.e_HH;
        p.e_LH += a.e_LH;
        p.e_HL += a.e_HL;
        p.e_LL += a.e_LL;
        p.dsq += a.dsq;
        p.dbsq += a.dbsq;
        p.k += a.k;
    });
    Acc tot;
    for (const auto& p : partial) {
        tot.e_HH += p.e_HH;
        tot.e_LH += p.e_LH;
        tot.e_HL += p.e_HL;
        tot.e_LL += p.e_LL;
        tot.dsq += p.dsq;
        tot.dbsq += p.dbsq;
        tot.k += p.k;
    }
    IntegratedEnergies ie;
    ie.totals.e_HH = tot.e_HH * cell;
    ie.totals.e_LH = tot.e_LH * cell;
    ie.totals.e_HL = tot.e_HL * cell;
    ie.totals.e_LL = tot.e_LL * cell;
    ie.totals.d_sq = tot.dsq * cell;
    ie.totals.d_bar_sq = tot.dbsq * cell;
    ie.totals.k = tot.k * cell;
    ie.E_prime = ie.totals.d_sq;
    ie.E_dprime = ie.totals.d_bar_sq;
    ie.K = ie.totals.k;
    return ie;
}

double lemma62_residual(const MapField& f) {
    const Grid& g = f.grid();
    const int ny = g.ny(), nt = g.nt();
    return parallel_max(g.size(), [&](std::size_t s) {
        int k3 = int(s % nt);
        int j3 = int((s / nt) % ny);
        int i3 = int(s / (std::size_t(ny) * nt));
        EnergyBreakdown e = energy_density_at(f, i3, j3, k3);
        return std::abs((e.d_sq - e.d_bar_sq) - e.k);
    });
}

TensionVector tension(const MapField& f, int i, int j, int k) {
    return tension_from_jet(jet_at(f, i, j, k, true));
}

DefectReport defects(const std::vector<MapJet>& jets) {
    DefectReport r;
    for (const auto& jet : jets) {
        r.holo = std::max(r.holo, std::abs(jet.d1[1][2]));
        r.antiholo = std::max(r.antiholo, std::abs(jet.d1[1][1]));
        r.foliated = std::max(r.foliated, std::abs(jet.d1[1][0]));
        double ehh = energy_density(jet).e_HH;
        r.horizontally_constant = std::max(r.horizontally_constant,
                                           std::sqrt(std::max(0.0, 2.0 * ehh)));
        if (jet.has_d2)
            r.pluriharmonic = std::max(
                r.pluriharmonic,
                std::max(std::abs(jet.d2[1][1][2]), std::abs(jet.d2[1][2][1])));
    }
    return r;
}

DefectReport defects(const MapField& f) {
    const Grid& g = f.grid();
    std::vector<MapJet> jets;
    jets.reserve(g.size());
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j)
            for (int k = 0; k < g.nt(); ++k) jets.push_back(jet_at(f, i, j, k, true));
    return defects(jets);
}

HomotopyReport homotopy_invariance_check(const std::vector<MapField>& family,
                                         bool foliated, double foliated_tol) {
    if (family.size() < 3)
        throw std::invalid_argument("homotopy_invariance_check: need >= 3 family members");
    HomotopyReport rep;
    for (const auto& f : family) {
        if (foliated) {
            DefectReport d = defects(f);
            rep.max_foliated_defect = std::max(rep.max_foliated_defect, d.foliated);
            if (d.foliated > foliated_tol)
                throw std::invalid_argument(
                    "homotopy_invariance_check: family member fails the foliated check");
        }
        IntegratedEnergies e = energies(f);
        rep.K.push_back(e.K);
        rep.E_prime.push_back(e.E_prime);
        rep.E_dprime.push_back(e.E_dprime);
    }
    for (std::size_t i = 0; i < rep.K.size(); ++i) {
        rep.K_drift = std::max(rep.K_drift, std::abs(rep.K[i] - rep.K[0]));
        rep.E_prime_drift =
            std::max(rep.E_prime_drift, std::abs(rep.E_prime[i] - rep.E_prime[0]));
        rep.E_dprime_drift =
            std::max(rep.E_dprime_drift, std::abs(rep.E_dprime[i] - rep.E_dprime[0]));
    }
    return rep;
}

}  // namespace phg

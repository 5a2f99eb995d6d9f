#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "phg/extrinsic.hpp"
#include "phg/flow.hpp"

using namespace phg;

TEST_CASE("identity map is a fixed point of the intrinsic flow") {
    FlowConfig fc;
    fc.grid_n = 8;
    fc.steps = 50;
    fc.initial = "identity";
    FlowResult res = run_flow(fc);
    CHECK(res.converged);
    CHECK(res.trace.rows.size() == 1);
    CHECK(res.tau_sup_initial <= 1e-14);
    CHECK(res.classification == "special-harmonic");
    // one explicit step moves nothing
    auto g = Grid::nil(8);
    MapField id = make_initial_map(g, build_model(ModelKind::HeisenbergNilmanifold),
                                   "identity", 0, 1);
    MapField next = step_intrinsic(id, 1e-4);
    double worst = 0;
    for (std::size_t s = 0; s < g->size(); ++s)
        worst = std::max(worst, norm(next.lift(s) - id.lift(s)));
    CHECK(worst <= 1e-14);
}

TEST_CASE("perturbed identity decays monotonically and stays foliated") {
    FlowConfig fc;
    fc.grid_n = 8;
    fc.steps = 400;
    fc.initial = "perturbed-identity";
    fc.perturbation = 0.04;
    fc.seed = 3;
    FlowResult res = run_flow(fc);
    const auto& rows = res.trace.rows;
    REQUIRE(rows.size() >= 2);
    CHECK(rows[1].E_HH < rows[0].E_HH);  // one step already decreases
    double slack = 1e-9 * rows[0].E_HH;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].E_HH <= rows[i - 1].E_HH + slack);
        CHECK(rows[i].E_LH <= rows[i - 1].E_LH + 1e-9);
        CHECK(rows[i].E_LL <= rows[i - 1].E_LL + 1e-9);
    }
    for (const auto& r : rows) CHECK(r.foliated_defect < 10.0 / (8.0 * 8.0));
    CHECK(energy_identity_residual(res.trace) < 1e-2);
}

TEST_CASE("energy identity residual requires rows") {
    FlowTrace empty;
    CHECK_THROWS_AS(energy_identity_residual(empty), std::invalid_argument);
}

TEST_CASE("symmetric perturbation pairs give identical residuals") {
    auto run_eps = [&](double eps) {
        auto g = Grid::nil(8);
        auto nil = build_model(ModelKind::HeisenbergNilmanifold);
        TrigPerturbation tp;
        tp.amp_a = eps;
        tp.amp_b = -0.5 * eps;
        tp.amp_c = 0.25 * eps;
        MapField f = map_field_from_analytic(g, nil, am_trig_perturbed(tp));
        double E0 = energies(f).totals.e_HH;
        double acc = 0;
        double dt = g->hx() * g->hx() / 8.0;
        for (int s = 0; s < 100; ++s) f = step_intrinsic(f, dt);
        double E1 = energies(f).totals.e_HH;
        (void)acc;
        return std::pair{E0, E1};
    };
    auto [a0, a1] = run_eps(0.03);
    auto [b0, b1] = run_eps(-0.03);
    CHECK(a0 == doctest::Approx(b0).epsilon(1e-12));
    CHECK(a1 == doctest::Approx(b1).epsilon(1e-12));
}

TEST_CASE("CFL guard") {
    FlowConfig fc;
    fc.grid_n = 8;
    fc.steps = 100;
    fc.initial = "perturbed-identity";
    fc.dt = 1.0;  // far above h^2/4
    CHECK_THROWS_AS(run_flow(fc), std::invalid_argument);
}

TEST_CASE("above-CFL override diverges and aborts cleanly") {
    FlowConfig fc;
    fc.grid_n = 8;
    fc.steps = 100;
    fc.initial = "perturbed-identity";
    fc.perturbation = 0.05;
    fc.dt = 6.0 * (1.0 / 64.0) / 4.0;  // 6x the bound
    fc.allow_cfl_override = true;
    CHECK_THROWS_AS(run_flow(fc), std::runtime_error);
}

TEST_CASE("trace CSV has the exact column layout") {
    FlowConfig fc;
    fc.grid_n = 8;
    fc.steps = 3;
    fc.initial = "perturbed-identity";
    fc.tau_stop = 1e-300;
    FlowResult res = run_flow(fc);
    std::ostringstream os;
    res.trace.write_csv(os);
    std::string first_line = os.str().substr(0, os.str().find('\n'));
    CHECK(first_line ==
          "step,time,E_HH,E_LH,E_HL,E_LL,K,tau_HH_sup,tau_HL_sup,"
          "energy_identity_residual,rho_sq,foliated_defect");
    // intrinsic backend leaves rho_sq empty
    std::string second = os.str();
    second = second.substr(second.find('\n') + 1);
    second = second.substr(0, second.find('\n'));
    CHECK(second.find(",,") != std::string::npos);
}

TEST_CASE("extrinsic target closed forms") {
    ExtrinsicTarget t;
    Rng rng(5);
    for (int k = 0; k < 10; ++k) {
        Vec3 w{{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)}};
        Vec4 q = t.embed(w);
        // Pi restricted to N is the identity; rho vanishes on N
        Vec4 pq = t.project(q);
        CHECK(norm(pq - q) < 1e-14);
        CHECK(norm(t.rho(q)) < 1e-14);
    }
    // projection Hessian against finite differences at an off-sphere point
    Vec4 y{{0.9, 0.3, -0.2, 0.1}};
    double P[4][4][4];
    t.projection_hessian(y, P);
    double h = 1e-5;
    for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) {
            Vec4 ypp = y, ypm = y, ymp = y, ymm = y;
            ypp[b] += h; ypp[c] += h;
            ypm[b] += h; ypm[c] -= h;
            ymp[b] -= h; ymp[c] += h;
            ymm[b] -= h; ymm[c] -= h;
            for (int a = 0; a < 4; ++a) {
                double fd = (t.project(ypp)[a] - t.project(ypm)[a] - t.project(ymp)[a] +
                             t.project(ymm)[a]) / (4 * h * h);
                CHECK(P[a][b][c] == doctest::Approx(fd).epsilon(5e-4));
            }
        }
    // contraction shortcut matches the full tensor
    double M[4][4];
    Rng r2(9);
    for (int b = 0; b < 4; ++b)
        for (int c = b; c < 4; ++c) M[b][c] = M[c][b] = r2.normal();
    Vec4 fast = t.contract_projection_hessian(y, M);
    Vec4 slow;
    for (int a = 0; a < 4; ++a) {
        double s = 0;
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) s += P[a][b][c] * M[b][c];
        slow[a] = s;
    }
    for (int a = 0; a < 4; ++a) CHECK(fast[a] == doctest::Approx(slow[a]).epsilon(1e-12));

    double S[4][4][4];
    t.S_hat(y, S);
    Vec4 sfast = t.contract_S_hat(y, M);
    Vec4 sslow;
    for (int a = 0; a < 4; ++a) {
        double s = 0;
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) s += S[a][b][c] * M[b][c];
        sslow[a] = s;
    }
    for (int a = 0; a < 4; ++a)
        CHECK(sfast[a] == doctest::Approx(sslow[a]).epsilon(1e-12));
}

TEST_CASE("constant maps are exact fixed points of the extrinsic flow") {
    AmbientTube tube(24);
    Vec4 p0{{0.6, 0.8, 0.0, 0.0}};
    tube.initialize([&](const Vec4&) { return p0; });
    ExtrinsicTarget target;
    double sup = tube.step(target, 0.0, 0);
    CHECK(sup < 1e-13);
}

TEST_CASE("embedded identity drift is discretization noise") {
    AmbientTube tube(28);
    tube.initialize(extrinsic_identity);
    ExtrinsicTarget target;
    double sup = tube.step(target, 0.0, 0);
    CHECK(sup < 1.0 * tube.h() * tube.h());
}

TEST_CASE("tube escape aborts with context") {
    AmbientTube tube(24);
    tube.initialize([](const Vec4& x) { return 3.0 * x; });  // outside the tube
    ExtrinsicTarget target;
    try {
        tube.step(target, 1e-4, 7);
        CHECK(false);
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("step 7") != std::string::npos);
        CHECK(msg.find("node") != std::string::npos);
    }
}

TEST_CASE("normal perturbations relax: rho decreases strictly") {
    FlowConfig fc;
    fc.backend = FlowBackend::Extrinsic;
    fc.ambient_n = 24;
    fc.steps = 40;
    fc.initial = "perturbed-identity";
    fc.perturbation = 0.05;
    FlowResult res = run_flow(fc);
    REQUIRE(res.trace.rows.size() == 41u);
    CHECK(res.trace.rows.front().has_rho);
    // the rho integral stays near its interpolation floor
    for (const auto& r : res.trace.rows) CHECK(r.rho_sq < 1e-4);
}

TEST_CASE("sphere quadrature integrates constants to the contact volume") {
    SphereQuadrature quad(12);
    double vol = 0;
    for (double w : quad.weights) vol += w;
    CHECK(vol == doctest::Approx(4.0 * kPi * kPi).epsilon(1e-10));
    // and a degree-2 harmonic integrates to zero
    double s = 0;
    for (std::size_t i = 0; i < quad.points.size(); ++i)
        s += quad.weights[i] * (quad.points[i][0] * quad.points[i][1]);
    CHECK(std::abs(s) < 1e-12);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phg/maps.hpp"

using namespace phg;

namespace {
ModelManifold nil() { return build_model(ModelKind::HeisenbergNilmanifold); }
}  // namespace

TEST_CASE("complexification round trip") {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        double in[3][3], back[3][3];
        cplx c[3][3];
        for (auto& row : in)
            for (auto& v : row) v = rng.normal();
        complexify_d1(in, c);
        realify_d1(c, back);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                CHECK(back[a][b] == doctest::Approx(in[a][b]).epsilon(1e-13));
        // reality symmetry of complexified real tensors: f^{albar}_B is the
        // conjugate of f^{al}_{Bbar}
        CHECK(std::abs(c[2][1] - std::conj(c[1][2])) < 1e-13);
        CHECK(std::abs(c[2][0] - std::conj(c[1][0])) < 1e-13);
        CHECK(std::abs(c[0][2] - std::conj(c[0][1])) < 1e-13);
    }
}

TEST_CASE("identity and constant jets") {
    auto m = nil();
    Rng rng(2);
    for (int t = 0; t < 5; ++t) {
        Vec3 p = random_chart_point(m, rng);
        MapJet j = analytic_jet(am_identity(), p);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                CHECK(j.d1r[a][b] == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-14));
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c) CHECK(std::abs(j.d2[a][b][c]) < 1e-13);

        int A0[2][2] = {{0, 0}, {0, 0}};
        double w[2] = {0.4, 0.7};
        MapJet jc = analytic_jet(am_affine(A0, w, 0.2), p);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) CHECK(std::abs(jc.d1r[a][b]) < 1e-14);
    }
}

TEST_CASE("fiber rotation equals the identity jet") {
    auto m = nil();
    MapJet ji = analytic_jet(am_identity(), Vec3{{0.3, 0.5, 0.1}});
    MapJet jf = analytic_jet(am_fiber_rotation(0.4), Vec3{{0.3, 0.5, 0.1}});
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            CHECK(jf.d1r[a][b] == doctest::Approx(ji.d1r[a][b]).epsilon(1e-14));
}

TEST_CASE("deck translate of the identity has the identity jet") {
    auto m = nil();
    auto g = Grid::nil(12);
    MapField id = map_field_from_analytic(g, m, am_identity());
    // central deck translate: lift p -> p * (0,0,1); descends to the same
    // quotient map as the identity
    int A[2][2] = {{1, 0}, {0, 1}};
    MapField tr = MapField::sample(g, m, [](const Vec3& p) {
        return Vec3{{p[0], p[1], p[2] + 1.0}};
    }, A);
    for (int i = 0; i < g->nx(); i += 3)
        for (int j = 0; j < g->ny(); j += 3) {
            MapJet a = jet_at(id, i, j, 0, true);
            MapJet b = jet_at(tr, i, j, 0, true);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    CHECK(b.d1r[r][c] == doctest::Approx(a.d1r[r][c]).epsilon(1e-12));
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    for (int d = 0; d < 3; ++d) CHECK(std::abs(b.d2[r][c][d]) < 1e-10);
        }
    // a non-central left translation descends too; its discrete jets must
    // match the exact analytic jets (constant, but not the identity matrix)
    int Aid[2][2] = {{1, 0}, {0, 1}};
    double w[2] = {1.0, 1.0};
    AnalyticMap lt = am_affine(Aid, w, 1.0);
    MapField trl = map_field_from_analytic(g, m, lt);
    for (int i = 0; i < g->nx(); i += 4)
        for (int j = 0; j < g->ny(); j += 4) {
            MapJet a = analytic_jet(lt, g->point(i, j, 5));
            MapJet b = jet_at(trl, i, j, 5, false);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    CHECK(b.d1r[r][c] == doctest::Approx(a.d1r[r][c]).epsilon(1e-11));
        }
}

TEST_CASE("energy algebra identities are pointwise exact") {
    auto m = nil();
    Rng rng(31);
    for (const auto& map : shipped_test_maps())
        for (int t = 0; t < 8; ++t) {
            MapJet j = analytic_jet(map, random_chart_point(m, rng));
            EnergyBreakdown e = energy_density(j);
            CHECK(std::abs(e.e_HH - (e.d_sq + e.d_bar_sq)) < 1e-12);
            CHECK(std::abs(e.k - (e.d_sq - e.d_bar_sq)) < 1e-12);
            CHECK(e.e_HH >= -1e-15);
            CHECK(e.e_LH >= -1e-15);
            CHECK(e.e_HL >= -1e-15);
            CHECK(e.e_LL >= -1e-15);
        }
}

TEST_CASE("hand-computed energies of the shipped maps") {
    auto m = nil();
    Vec3 p{{0.3, 0.8, 0.2}};
    EnergyBreakdown id = energy_density(analytic_jet(am_identity(), p));
    CHECK(id.e_HH == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(id.k == doctest::Approx(1.0).epsilon(1e-14));

    EnergyBreakdown cj = energy_density(analytic_jet(am_conjugation(), p));
    CHECK(cj.d_sq == doctest::Approx(0.0));
    CHECK(cj.d_bar_sq == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cj.k == doctest::Approx(-1.0).epsilon(1e-14));

    int A[2][2] = {{2, 0}, {0, 1}};
    double w[2] = {0, 0};
    EnergyBreakdown dg = energy_density(analytic_jet(am_affine(A, w, 0.0), p));
    CHECK(dg.e_HH == doctest::Approx(2.5).epsilon(1e-13));  // ||A||^2 / 2
    CHECK(dg.k == doctest::Approx(2.0).epsilon(1e-13));     // det A
    CHECK(dg.e_LL == doctest::Approx(2.0).epsilon(1e-13));  // det(A)^2 / 2
    CHECK(dg.e_LH == doctest::Approx(0.0));
}

TEST_CASE("affine parity validation") {
    int A[2][2] = {{1, 1}, {1, 1}};  // a*c = 1 odd
    double w[2] = {0, 0};
    CHECK_THROWS_AS(am_affine(A, w, 0.0), std::invalid_argument);
}

TEST_CASE("integrated energies of the identity map") {
    auto g = Grid::nil(16);
    MapField f = map_field_from_analytic(g, nil(), am_identity());
    IntegratedEnergies e = energies(f);
    CHECK(e.totals.e_HH == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.K == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.totals.e_LH == doctest::Approx(0.0));
    CHECK(e.E_prime - e.E_dprime == doctest::Approx(e.K).epsilon(1e-12));
}

TEST_CASE("lemma 6.2 pairing routes agree") {
    auto g = Grid::nil(16);
    MapField id = map_field_from_analytic(g, nil(), am_identity());
    CHECK(lemma62_residual(id) < 1e-10);
    int A[2][2] = {{1, 2}, {0, 1}};
    double w[2] = {0.23, -0.11};
    MapField f = map_field_from_analytic(g, nil(), am_affine(A, w, 0.07));
    CHECK(lemma62_residual(f) < 1e-3);
    MapField c = map_field_from_analytic(
        g, nil(), am_trig_perturbed(seeded_perturbation(77, 0.04)));
    CHECK(lemma62_residual(c) < 1e-3);
}

TEST_CASE("tension of harmonic maps vanishes; perturbations scale linearly") {
    auto m = nil();
    Rng rng(41);
    for (const auto& map : {am_identity(), am_fiber_rotation(0.37)})
        for (int t = 0; t < 6; ++t) {
            TensionVector tv =
                tension_from_jet(analytic_jet(map, random_chart_point(m, rng)));
            CHECK(tv.tau_H_norm() < 1e-12);
            CHECK(norm(tv.full_trace) < 1e-12);
            CHECK(norm(tv.torsion_term) == 0.0);
        }

    auto g = Grid::nil(16);
    auto tau_at = [&](double eps) {
        TrigPerturbation tp = seeded_perturbation(55, eps);
        MapField f = map_field_from_analytic(g, m, am_trig_perturbed(tp));
        double worst = 0;
        for (int i = 0; i < g->nx(); i += 2)
            for (int j = 0; j < g->ny(); j += 2)
                worst = std::max(worst, tension(f, i, j, 3).tau_H_norm());
        return worst;
    };
    double ratio = tau_at(0.02) / tau_at(0.01);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("jet errors name the direction convention: d2 index order") {
    // f^A_{BC}: first derivative index B, then the direction C appended last
    auto m = nil();
    MapJet j = analytic_jet(am_trig_perturbed(seeded_perturbation(3, 0.05)),
                            Vec3{{0.21, 0.52, 0.4}});
    // commutation: f^a_{0 1} = f^a_{1 0} distinguishes the two orders
    CHECK(std::abs(j.d2[1][0][1] - j.d2[1][1][0]) < 1e-12);
}

TEST_CASE("defect classifiers") {
    auto g = Grid::nil(12);
    DefectReport idd = defects(map_field_from_analytic(g, nil(), am_identity()));
    CHECK(idd.holo < 1e-12);
    CHECK(idd.foliated < 1e-12);
    CHECK(idd.pluriharmonic < 1e-12);
    CHECK(idd.antiholo == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(idd.horizontally_constant == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    DefectReport cj = defects(map_field_from_analytic(g, nil(), am_conjugation()));
    CHECK(cj.antiholo < 1e-12);
    CHECK(cj.holo > 0.5);

    DefectReport vw = defects(map_field_from_analytic(g, nil(), am_vertical_wave(0.3)));
    CHECK(vw.foliated < 1e-12);  // vertical shifts keep leaves
    // the wave leaks H(M) into the vertical direction of the target, which
    // shows in e_HL, not in the holomorphy defect
    MapField f = map_field_from_analytic(g, nil(), am_vertical_wave(0.3));
    CHECK(energies(f).totals.e_HL > 0.1);
    CHECK(vw.holo < 1e-10);

    // non-foliated family at analytic jets
    MapJet jr = analytic_jet(am_reeb_tilt(0.2), Vec3{{0.2, 0.3, 0.6}});
    CHECK(std::abs(jr.d1[1][0]) > 0.05);
}

TEST_CASE("commutation relations hold to round-off at exact jets") {
    auto m = nil();
    Rng rng(61);
    for (const auto& map : shipped_test_maps())
        for (int t = 0; t < 4; ++t) {
            MapJet j = analytic_jet(map, random_chart_point(m, rng));
            CommutationReport rep = commutation_residuals(j);
            CHECK(rep.entries.size() >= 12);
            CHECK(rep.max_residual() < 1e-12);
        }
}

TEST_CASE("discrete jets satisfy the mixed commutation to stencil accuracy") {
    auto g = Grid::nil(16);
    MapField f = map_field_from_analytic(
        g, nil(), am_trig_perturbed(seeded_perturbation(13, 0.05)));
    double worst = 0;
    for (int i = 0; i < g->nx(); i += 2)
        for (int j = 0; j < g->ny(); j += 2) {
            CommutationReport rep = commutation_residuals(jet_at(f, i, j, 1, true));
            worst = std::max(worst, rep.max_residual());
        }
    CHECK(worst < 10.0 * g->hx());  // O(h) guaranteed near seams
}

TEST_CASE("paneitz demands exact jets and vanishes on harmonic corpus") {
    auto g = Grid::nil(8);
    MapField f = map_field_from_analytic(g, nil(), am_identity());
    MapJet jd = jet_at(f, 1, 1, 1, true);
    CHECK_THROWS_AS(paneitz(jd), std::invalid_argument);

    MapJet ja = analytic_jet(am_fiber_rotation(0.3), Vec3{{0.4, 0.6, 0.2}});
    PaneitzComponents pc = paneitz(ja);
    CHECK(std::abs(pc.P1) < 1e-12);
    CHECK(std::abs(pc.P1bar) < 1e-12);
}

TEST_CASE("bochner residual at exact jets on the flat model") {
    auto m = nil();
    Rng rng(71);
    for (const auto& map : {am_trig_perturbed(seeded_perturbation(3, 0.05)),
                            am_reeb_tilt(0.2), am_vertical_wave(0.3)})
        for (int t = 0; t < 10; ++t)
            CHECK(bochner_residual(analytic_jet(map, random_chart_point(m, rng))) < 1e-9);
}

TEST_CASE("homotopy invariance") {
    auto g = Grid::nil(12);
    std::vector<MapField> vertical;
    for (double s : {0.0, 0.2, 0.5})
        vertical.push_back(map_field_from_analytic(g, nil(), am_fiber_rotation(s)));
    HomotopyReport rep = homotopy_invariance_check(vertical, true);
    CHECK(rep.K_drift < 1e-12);
    CHECK(rep.E_prime_drift < 1e-12);
    CHECK(rep.E_dprime_drift < 1e-12);

    CHECK_THROWS_AS(homotopy_invariance_check({vertical[0], vertical[1]}, false),
                    std::invalid_argument);

    // a non-foliated member fails the foliated gate
    std::vector<MapField> bad = vertical;
    int A[2][2] = {{1, 0}, {0, 1}};
    bad.push_back(MapField::sample(g, nil(), [](const Vec3& p) {
        return Vec3{{p[0], p[1], p[2] + 0.1 * reeb_wave(p)}};
    }, A));
    CHECK_THROWS_AS(homotopy_invariance_check(bad, true), std::invalid_argument);
}

TEST_CASE("minimality of the identity among foliated perturbations") {
    auto g = Grid::nil(12);
    double E_id = energies(map_field_from_analytic(g, nil(), am_identity())).totals.e_HH;
    for (int s = 0; s < 6; ++s) {
        MapField f = map_field_from_analytic(
            g, nil(), am_trig_perturbed(seeded_perturbation(1000 + s, 0.05)));
        CHECK(E_id <= energies(f).totals.e_HH + 1e-9);
    }
}

#include "phg/flow.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "phg/extrinsic.hpp"

namespace phg {

namespace {

// Frame derivatives of the lift components: g[dir][mu] = e_dir(f^mu) with
// dir in {0: xi, 1: e1, 2: e2}.  Lift neighbors are deck-adjusted.
struct LiftDerivs {
    ScalarField g[3][3];

    explicit LiftDerivs(const MapField& f) {
        const Grid& gr = f.grid();
        for (auto& row : g)
            for (auto& s : row) s = ScalarField(f.grid_ptr());
        const double sx = 0.5 / gr.hx(), sy = 0.5 / gr.hy(), st = 0.5 / gr.ht();
        const int ny = gr.ny(), nt = gr.nt();
        parallel_for(gr.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t s = lo; s < hi; ++s) {
                int k = int(s % nt);
                int j = int((s / nt) % ny);
                int i = int(s / (std::size_t(ny) * nt));
                Vec3 xp = f.lift_raw(i + 1, j, k), xm = f.lift_raw(i - 1, j, k);
                Vec3 yp = f.lift_raw(i, j + 1, k), ym = f.lift_raw(i, j - 1, k);
                Vec3 tp = f.lift_raw(i, j, k + 1), tm = f.lift_raw(i, j, k - 1);
                const double x = i * gr.hx(), y = j * gr.hy();
                for (int mu = 0; mu < 3; ++mu) {
                    double dx = sx * (xp[mu] - xm[mu]);
                    double dy = sy * (yp[mu] - ym[mu]);
                    double dt = st * (tp[mu] - tm[mu]);
                    g[0][mu].at(s) = dt;
                    g[1][mu].at(s) = dx + 0.5 * y * dt;
                    g[2][mu].at(s) = dy - 0.5 * x * dt;
                }
            }
        });
    }
};

struct StepData {
    LiftDerivs d;
    ScalarField L[3];  // tension components (sub-Laplacian of each lift)

    explicit StepData(const MapField& f) : d(f) {
        for (int mu = 0; mu < 3; ++mu) {
            ScalarField a = e1_apply(d.g[1][mu]);
            ScalarField b = e2_apply(d.g[2][mu]);
            for (std::size_t s = 0; s < a.data().size(); ++s) a.at(s) += b.at(s);
            L[mu] = std::move(a);
        }
    }
};

FlowRow diagnostics_row(const MapField& f, const StepData& sd, long step, double time,
                        double E0, double acc) {
    const Grid& g = f.grid();
    const double cell = g.hx() * g.hy() * g.ht();
    FlowRow row;
    row.step = step;
    row.time = time;

    const std::size_t n = g.size();
    double e_hh = 0, e_lh = 0, e_hl = 0, e_ll = 0, kk = 0, tau2 = 0;
    double sup_tau_hh = 0, sup_tau_hl = 0, sup_fol = 0;
    for (std::size_t s = 0; s < n; ++s) {
        Vec3 fv = f.lift(s);
        const double X = fv[0], Y = fv[1];
        double g1x = sd.d.g[1][0].at(s), g1y = sd.d.g[1][1].at(s), g1t = sd.d.g[1][2].at(s);
        double g2x = sd.d.g[2][0].at(s), g2y = sd.d.g[2][1].at(s), g2t = sd.d.g[2][2].at(s);
        double gtx = sd.d.g[0][0].at(s), gty = sd.d.g[0][1].at(s), gtt = sd.d.g[0][2].at(s);

        e_hh += 0.5 * (g1x * g1x + g1y * g1y + g2x * g2x + g2y * g2y);
        e_lh += 0.5 * (gtx * gtx + gty * gty);
        double f00 = gtt + 0.5 * (X * gty - Y * gtx);
        e_ll += 0.5 * f00 * f00;
        double D01 = g1t + 0.5 * (X * g1y - Y * g1x);
        double D02 = g2t + 0.5 * (X * g2y - Y * g2x);
        e_hl += 0.5 * (D01 * D01 + D02 * D02);
        kk += g1x * g2y - g1y * g2x;
        sup_fol = std::max(sup_fol, std::sqrt(0.5 * (gtx * gtx + gty * gty)));

        double Lx = sd.L[0].at(s), Ly = sd.L[1].at(s), Lt = sd.L[2].at(s);
        double hh2 = Lx * Lx + Ly * Ly;
        double hl = Lt + 0.5 * (X * Ly - Y * Lx);
        tau2 += hh2;
        sup_tau_hh = std::max(sup_tau_hh, std::sqrt(hh2));
        sup_tau_hl = std::max(sup_tau_hl, std::abs(hl));
    }
    row.E_HH = e_hh * cell;
    row.E_LH = e_lh * cell;
    row.E_HL = e_hl * cell;
    row.E_LL = e_ll * cell;
    row.K = kk * cell;
    row.tau_HH_sup = sup_tau_hh;
    row.tau_HL_sup = sup_tau_hl;
    row.tau_HH_l2sq = tau2 * cell;
    row.foliated_defect = sup_fol;
    row.energy_identity_residual = E0 > 0 ? std::abs(row.E_HH + acc - E0) / E0 : 0.0;
    return row;
}

}  // namespace

MapField step_intrinsic(const MapField& f, double dt) {
    if (f.target().kind != ModelKind::HeisenbergNilmanifold)
        throw std::invalid_argument("step_intrinsic: target must be a nilmanifold");
    StepData sd(f);
    MapField next = f;
    const std::size_t n = f.grid().size();
    for (std::size_t s = 0; s < n; ++s) {
        Vec3 v = f.lift(s);
        v[0] += dt * sd.L[0].at(s);
        v[1] += dt * sd.L[1].at(s);
        v[2] += dt * sd.L[2].at(s);
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]))
            throw std::runtime_error("step_intrinsic: non-finite lift value (blow-up)");
        next.set_lift(s, v);
    }
    return next;
}

MapField make_initial_map(GridPtr grid, const ModelManifold& target,
                          const std::string& spec, double perturbation,
                          std::uint64_t seed) {
    if (spec == "identity") return map_field_from_analytic(grid, target, am_identity());
    if (spec == "perturbed-identity")
        return map_field_from_analytic(grid, target,
                                       am_trig_perturbed(seeded_perturbation(seed, perturbation)));
    if (spec == "fiber-rotation")
        return map_field_from_analytic(grid, target, am_fiber_rotation(0.37));
    if (spec == "affine") {
        int A[2][2] = {{1, 2}, {0, 1}};
        double w[2] = {0.3, -0.2};
        return map_field_from_analytic(grid, target, am_affine(A, w, 0.1));
    }
    throw std::invalid_argument("make_initial_map: unknown initial map spec '" + spec + "'");
}

FlowResult run_flow(const FlowConfig& cfg) {
    if (cfg.backend == FlowBackend::Extrinsic) return run_extrinsic_flow(cfg);

    auto grid = Grid::nil(cfg.grid_n);
    ModelManifold target = build_model(ModelKind::HeisenbergNilmanifold);
    MapField f = make_initial_map(grid, target, cfg.initial, cfg.perturbation, cfg.seed);

    const double cfl = grid->hx() * grid->hx() / 4.0;
    double dt = cfg.dt > 0 ? cfg.dt : grid->hx() * grid->hx() / 8.0;
    if (dt > cfl && !cfg.allow_cfl_override)
        throw std::invalid_argument("run_flow: dt exceeds the CFL bound h^2/4 "
                                    "(set allow_cfl_override to force)");
    if (dt > cfl) std::fprintf(stderr, "warning: dt=%g exceeds the CFL bound %g\n", dt, cfl);

    FlowResult res;
    double E0 = -1.0, acc = 0.0;
    long step = 0;
    bool aborted = false;
    std::string abort_msg;
    double tau_sup = 0;

    for (;; ++step) {
        StepData sd(f);
        FlowRow row = diagnostics_row(f, sd, step, step * dt, E0 < 0 ? 1.0 : E0, acc);
        if (E0 < 0) {
            E0 = row.E_HH;
            row.energy_identity_residual = 0.0;
        }
        tau_sup = 0;
        for (std::size_t s = 0; s < grid->size(); ++s) {
            double Lx = sd.L[0].at(s), Ly = sd.L[1].at(s), Lt = sd.L[2].at(s);
            Vec3 fv = f.lift(s);
            double hl = Lt + 0.5 * (fv[0] * Ly - fv[1] * Lx);
            tau_sup = std::max(tau_sup, std::sqrt(Lx * Lx + Ly * Ly + hl * hl));
        }
        if (step == 0) res.tau_sup_initial = tau_sup;

        bool record = (step % cfg.diagnostics_every == 0) || step == cfg.steps ||
                      tau_sup < cfg.tau_stop;
        if (record) res.trace.rows.push_back(row);

        if (tau_sup < cfg.tau_stop) {
            res.converged = true;
            break;
        }
        if (step >= cfg.steps) break;

        if (!std::isfinite(tau_sup)) {
            aborted = true;
            abort_msg = "flow diverged (non-finite tension) at step " + std::to_string(step);
            break;
        }
        acc += dt * row.tau_HH_l2sq;
        try {
            f = step_intrinsic(f, dt);
        } catch (const std::exception& e) {
            aborted = true;
            abort_msg = std::string(e.what()) + " at step " + std::to_string(step);
            break;
        }
    }
    if (aborted) throw std::runtime_error("run_flow: " + abort_msg);

    res.steps_taken = step;
    res.tau_sup_final = tau_sup;
    const FlowRow& last = res.trace.rows.back();
    res.final_energies.e_HH = last.E_HH;
    res.final_energies.e_LH = last.E_LH;
    res.final_energies.e_HL = last.E_HL;
    res.final_energies.e_LL = last.E_LL;
    res.final_energies.k = last.K;
    IntegratedEnergies ie = energies(f);
    res.final_energies.d_sq = ie.totals.d_sq;
    res.final_energies.d_bar_sq = ie.totals.d_bar_sq;
    if (res.converged) {
        res.classification = (last.tau_HH_sup < cfg.tau_stop && last.tau_HL_sup < cfg.tau_stop)
                                 ? "special-harmonic"
                                 : "harmonic-horizontal-only";
    } else {
        res.classification = "not-converged";
    }
    res.final_map = std::move(f);
    return res;
}

double energy_identity_residual(const FlowTrace& trace) {
    if (trace.rows.empty())
        throw std::invalid_argument("energy_identity_residual: empty trace");
    if (trace.rows.size() == 1) return 0.0;
    const double E0 = trace.rows.front().E_HH;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < trace.rows.size(); ++i) {
        double dt = trace.rows[i + 1].time - trace.rows[i].time;
        acc += dt * trace.rows[i].tau_HH_l2sq;
    }
    return std::abs(trace.rows.back().E_HH + acc - E0) / (E0 > 0 ? E0 : 1.0);
}

void FlowTrace::write_csv(std::ostream& os) const {
    os << "step,time,E_HH,E_LH,E_HL,E_LL,K,tau_HH_sup,tau_HL_sup,"
          "energy_identity_residual,rho_sq,foliated_defect\n";
    char buf[400];
    for (const auto& r : rows) {
        char rho[40] = "";
        if (r.has_rho) std::snprintf(rho, sizeof(rho), "%.17g", r.rho_sq);
        std::snprintf(buf, sizeof(buf),
                      "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%.17g\n",
                      r.step, r.time, r.E_HH, r.E_LH, r.E_HL, r.E_LL, r.K, r.tau_HH_sup,
                      r.tau_HL_sup, r.energy_identity_residual, rho, r.foliated_defect);
        os << buf;
    }
}

}  // namespace phg

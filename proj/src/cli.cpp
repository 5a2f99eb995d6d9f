#include "phg/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "phg/extrinsic.hpp"
#include "phg/fields.hpp"
#include "phg/flow.hpp"
#include "phg/geometry.hpp"
#include "phg/maps.hpp"
#include "phg/verify.hpp"

namespace phg {

namespace {
std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}
}  // namespace

IniFile IniFile::parse_string(const std::string& text, const std::string& origin) {
    IniFile ini;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                            ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            ini.sections[section];
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (auto h = val.find('#'); h != std::string::npos) val = trim(val.substr(0, h));
        ini.sections[section][key] = val;
        ini.key_lines[section + "." + key] = lineno;
    }
    return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config file not found: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_string(ss.str(), path);
}

bool IniFile::has(const std::string& sec, const std::string& key) const {
    auto s = sections.find(sec);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& sec, const std::string& key,
                         const std::string& fallback) const {
    auto s = sections.find(sec);
    if (s == sections.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_double(const std::string& sec, const std::string& key,
                           double fallback) const {
    if (!has(sec, key)) return fallback;
    return std::stod(get(sec, key, ""));
}

long IniFile::get_long(const std::string& sec, const std::string& key,
                       long fallback) const {
    if (!has(sec, key)) return fallback;
    return std::stol(get(sec, key, ""));
}

void IniFile::check_known(
    const std::map<std::string, std::vector<std::string>>& schema) const {
    for (const auto& [sec, kv] : sections) {
        auto it = schema.find(sec);
        if (it == schema.end())
            throw std::invalid_argument("config: unknown section [" + sec + "]");
        for (const auto& [key, val] : kv) {
            (void)val;
            bool known = false;
            for (const auto& k : it->second)
                if (k == key) known = true;
            if (!known) {
                int line = 0;
                if (auto l = key_lines.find(sec + "." + key); l != key_lines.end())
                    line = l->second;
                throw std::invalid_argument("config line " + std::to_string(line) +
                                            ": unknown key '" + key + "' in section [" +
                                            sec + "]");
            }
        }
    }
}

void atomic_write(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        os << contents;
    }
    fs::rename(tmp, p);
}

namespace {

const std::map<std::string, std::vector<std::string>> kConfigSchema = {
    {"flow",
     {"backend", "grid_n", "initial", "perturbation", "dt", "steps",
      "diagnostics_every", "tau_stop", "mono_slack", "seed", "allow_cfl_override",
      "ambient_n", "ambient_box_half", "ext_dt_factor", "quad_n"}},
    {"verify",
     {"selection", "seed", "points", "grid_n", "grid_n_big", "flow_n", "flow_steps",
      "ext_n", "ext_steps", "order_k_trials"}},
    {"output", {"dir"}},
};

FlowConfig flow_config_from_ini(const IniFile& ini) {
    FlowConfig fc;
    std::string backend = ini.get("flow", "backend", "intrinsic");
    if (backend == "intrinsic")
        fc.backend = FlowBackend::Intrinsic;
    else if (backend == "extrinsic")
        fc.backend = FlowBackend::Extrinsic;
    else
        throw std::invalid_argument("config: unknown flow backend '" + backend + "'");
    fc.grid_n = int(ini.get_long("flow", "grid_n", fc.grid_n));
    fc.initial = ini.get("flow", "initial", fc.initial);
    fc.perturbation = ini.get_double("flow", "perturbation", fc.perturbation);
    fc.dt = ini.get_double("flow", "dt", fc.dt);
    fc.steps = ini.get_long("flow", "steps", fc.steps);
    fc.diagnostics_every = int(ini.get_long("flow", "diagnostics_every", 1));
    fc.tau_stop = ini.get_double("flow", "tau_stop", fc.tau_stop);
    fc.mono_slack = ini.get_double("flow", "mono_slack", fc.mono_slack);
    fc.seed = std::uint64_t(ini.get_long("flow", "seed", 1));
    fc.allow_cfl_override = ini.get_long("flow", "allow_cfl_override", 0) != 0;
    fc.ambient_n = int(ini.get_long("flow", "ambient_n", fc.ambient_n));
    fc.ambient_box_half = ini.get_double("flow", "ambient_box_half", fc.ambient_box_half);
    fc.ext_dt_factor = ini.get_double("flow", "ext_dt_factor", fc.ext_dt_factor);
    fc.quad_n = int(ini.get_long("flow", "quad_n", fc.quad_n));
    return fc;
}

VerifyConfig verify_config_from_ini(const IniFile& ini) {
    VerifyConfig vc;
    vc.seed = std::uint64_t(ini.get_long("verify", "seed", 1));
    vc.points = int(ini.get_long("verify", "points", vc.points));
    vc.grid_n = int(ini.get_long("verify", "grid_n", vc.grid_n));
    vc.grid_n_big = int(ini.get_long("verify", "grid_n_big", vc.grid_n_big));
    vc.flow_n = int(ini.get_long("verify", "flow_n", vc.flow_n));
    vc.flow_steps = ini.get_long("verify", "flow_steps", vc.flow_steps);
    vc.ext_n = int(ini.get_long("verify", "ext_n", vc.ext_n));
    vc.ext_steps = int(ini.get_long("verify", "ext_steps", vc.ext_steps));
    vc.order_k_trials = int(ini.get_long("verify", "order_k_trials", vc.order_k_trials));
    return vc;
}

std::string flow_summary_json(const FlowResult& res) {
    nlohmann::json j;
    j["converged"] = res.converged;
    j["steps"] = res.steps_taken;
    j["classification"] = res.classification;
    nlohmann::json fin;
    fin["e_HH"] = res.final_energies.e_HH;
    fin["e_LH"] = res.final_energies.e_LH;
    fin["e_HL"] = res.final_energies.e_HL;
    fin["e_LL"] = res.final_energies.e_LL;
    fin["d_sq"] = res.final_energies.d_sq;
    fin["d_bar_sq"] = res.final_energies.d_bar_sq;
    fin["k"] = res.final_energies.k;
    j["final"] = fin;
    return j.dump(2) + "\n";
}

int cmd_verify(const std::string& config_path, const std::string& checks_arg,
               bool run_all, std::string out_path, std::string out_dir,
               long seed_override) {
    IniFile ini;
    if (!config_path.empty()) {
        ini = IniFile::parse_file(config_path);
        ini.check_known(kConfigSchema);
    }
    VerifyConfig vc = verify_config_from_ini(ini);
    if (seed_override >= 0) vc.seed = std::uint64_t(seed_override);

    std::vector<std::string> selection;
    if (run_all || (checks_arg.empty() && ini.get("verify", "selection", "all") == "all")) {
        selection = {"all"};
    } else {
        std::string src = !checks_arg.empty() ? checks_arg : ini.get("verify", "selection", "");
        std::stringstream ss(src);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) selection.push_back(item);
        }
    }

    auto results = run_suite(selection, vc);
    std::cout << results_to_table(results);
    if (!out_path.empty()) {
        if (!out_dir.empty())
            out_path = (std::filesystem::path(out_dir) / out_path).string();
        atomic_write(out_path, results_to_json(results, vc));
    }
    return all_passed(results) ? 0 : 1;
}

int cmd_flow(const std::string& config_path, std::string out_dir) {
    IniFile ini = IniFile::parse_file(config_path);
    ini.check_known(kConfigSchema);
    FlowConfig fc = flow_config_from_ini(ini);
    if (out_dir.empty()) out_dir = ini.get("output", "dir", "out");

    FlowResult res = run_flow(fc);
    std::ostringstream csv;
    res.trace.write_csv(csv);
    namespace fs = std::filesystem;
    atomic_write((fs::path(out_dir) / "trace.csv").string(), csv.str());
    atomic_write((fs::path(out_dir) / "summary.json").string(), flow_summary_json(res));
    std::cout << "flow: " << res.classification << " after " << res.steps_taken
              << " steps; trace written to " << out_dir << "/trace.csv\n";
    return 0;
}

int cmd_curvature(const std::string& model_name, double lambda, double scale,
                  int points, long seed, std::string out_path, std::string out_dir) {
    ModelParams params;
    params.lambda = lambda;
    params.scale = scale;
    ModelManifold m = build_model(model_name, params);
    Rng rng{std::uint64_t(seed)};
    nlohmann::json j;
    j["model"] = model_name;
    j["points"] = nlohmann::json::array();
    for (int i = 0; i < points; ++i) {
        Vec3 p = random_chart_point(m, rng);
        CurvatureOperator co = curvature_at(m, p);
        nlohmann::json e;
        e["point"] = {p[0], p[1], p[2]};
        e["K_hol"] = co.kappa;
        e["Q11"] = {co.Q11.real(), co.Q11.imag()};
        e["negativity_class"] = to_string(negativity_class(m, p));
        j["points"].push_back(e);
    }
    std::string text = j.dump(2) + "\n";
    if (!out_path.empty()) {
        if (!out_dir.empty())
            out_path = (std::filesystem::path(out_dir) / out_path).string();
        atomic_write(out_path, text);
    } else {
        std::cout << text;
    }
    return 0;
}

int cmd_energy(const std::string& initial, int n, double perturbation, long seed,
               std::string out_path, std::string out_dir) {
    auto grid = Grid::nil(n);
    ModelManifold target = build_model(ModelKind::HeisenbergNilmanifold);
    MapField f = make_initial_map(grid, target, initial, perturbation,
                                  std::uint64_t(seed));
    IntegratedEnergies e = energies(f);
    nlohmann::json j;
    j["E_HH"] = e.totals.e_HH;
    j["E_LH"] = e.totals.e_LH;
    j["E_HL"] = e.totals.e_HL;
    j["E_LL"] = e.totals.e_LL;
    j["E_prime"] = e.E_prime;
    j["E_dprime"] = e.E_dprime;
    j["K"] = e.K;
    std::string text = j.dump(2) + "\n";
    if (!out_path.empty()) {
        if (!out_dir.empty())
            out_path = (std::filesystem::path(out_dir) / out_path).string();
        atomic_write(out_path, text);
    } else {
        std::cout << text;
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"pseudo-Hermitian geometry calculus on model Sasakian 3-manifolds"};
    app.require_subcommand(1);

    // environment overrides (documented in the README)
    std::string env_out_dir;
    if (const char* e = std::getenv("PHG_OUT_DIR")) env_out_dir = e;
    if (const char* e = std::getenv("PHG_THREADS")) set_thread_count(std::atoi(e));

    int threads = 0;
    app.add_option("--threads", threads, "worker thread count (default: hardware)");

    auto* verify = app.add_subcommand("verify", "run the identity suite");
    std::string v_config, v_checks, v_out;
    bool v_all = false;
    long v_seed = -1;
    verify->add_option("--config", v_config, "INI config file");
    verify->add_flag("--all", v_all, "run every registered check");
    verify->add_option("--checks", v_checks, "comma-separated check ids");
    verify->add_option("--out", v_out, "JSON report path");
    verify->add_option("--seed", v_seed, "seed override");

    auto* flow = app.add_subcommand("flow", "run a heat-flow experiment");
    std::string f_config, f_out_dir;
    flow->add_option("--config", f_config, "INI config file")->required();
    flow->add_option("--out-dir", f_out_dir, "output directory");

    auto* curv = app.add_subcommand("curvature", "curvature report at random points");
    std::string c_model = "round-sphere-3", c_out;
    double c_lambda = -1.0, c_scale = 1.0;
    int c_points = 10;
    long c_seed = 1;
    curv->add_option("--model", c_model, "model kind");
    curv->add_option("--lambda", c_lambda, "space-form curvature");
    curv->add_option("--scale", c_scale, "sphere contact scale");
    curv->add_option("--points", c_points, "sample count");
    curv->add_option("--seed", c_seed, "rng seed");
    curv->add_option("--out", c_out, "JSON output path");

    auto* energy = app.add_subcommand("energy", "integrated energy breakdown of a map");
    std::string e_initial = "identity", e_out;
    int e_n = 16;
    double e_pert = 0.03;
    long e_seed = 1;
    energy->add_option("--initial", e_initial, "map spec");
    energy->add_option("--n", e_n, "grid base resolution");
    energy->add_option("--perturbation", e_pert, "perturbation amplitude");
    energy->add_option("--seed", e_seed, "rng seed");
    energy->add_option("--out", e_out, "JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (threads > 0) set_thread_count(threads);

    try {
        if (verify->parsed())
            return cmd_verify(v_config, v_checks, v_all, v_out, env_out_dir, v_seed);
        if (flow->parsed())
            return cmd_flow(f_config, !f_out_dir.empty() ? f_out_dir : env_out_dir);
        if (curv->parsed())
            return cmd_curvature(c_model, c_lambda, c_scale, c_points, c_seed, c_out,
                                 env_out_dir);
        if (energy->parsed())
            return cmd_energy(e_initial, e_n, e_pert, e_seed, e_out, env_out_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace phg

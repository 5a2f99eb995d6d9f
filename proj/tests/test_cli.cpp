#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "phg/cli.hpp"
#include "phg/verify.hpp"

using namespace phg;
namespace fs = std::filesystem;

namespace {
int run_cli(std::initializer_list<const char*> args) {
    std::vector<const char*> argv = {"phg"};
    argv.insert(argv.end(), args.begin(), args.end());
    return cli_main(int(argv.size()), argv.data());
}

fs::path tmpdir() {
    auto d = fs::temp_directory_path() / "phg_cli_test";
    fs::create_directories(d);
    return d;
}
}  // namespace

TEST_CASE("ini parser: values, comments, strictness") {
    auto ini = IniFile::parse_string(
        "[flow]\n"
        "grid_n = 12   # comment\n"
        "initial = identity\n"
        "\n"
        "[output]\n"
        "dir = somewhere\n",
        "test.cfg");
    CHECK(ini.get("flow", "initial", "") == "identity");
    CHECK(ini.get_long("flow", "grid_n", 0) == 12);
    CHECK(ini.get("output", "dir", "") == "somewhere");

    CHECK_THROWS_AS(IniFile::parse_string("[flow]\nbroken line\n", "bad.cfg"),
                    std::invalid_argument);

    auto unknown = IniFile::parse_string("[flow]\nnot_a_key = 1\n", "bad2.cfg");
    try {
        unknown.check_known({{"flow", {"grid_n"}}});
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("not_a_key") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
}

TEST_CASE("missing config exits with code 2 naming the path") {
    CHECK(run_cli({"flow", "--config", "definitely_missing.cfg"}) == 2);
}

TEST_CASE("flow subcommand writes trace and summary") {
    auto dir = tmpdir();
    auto cfg = dir / "flow.cfg";
    {
        std::ofstream os(cfg);
        os << "[flow]\nbackend = intrinsic\ngrid_n = 8\ninitial = perturbed-identity\n"
              "perturbation = 0.03\nsteps = 20\ntau_stop = 1e-300\nseed = 2\n"
              "[output]\ndir = " << (dir / "out").string() << "\n";
    }
    CHECK(run_cli({"flow", "--config", cfg.string().c_str()}) == 0);
    CHECK(fs::exists(dir / "out" / "trace.csv"));
    CHECK(fs::exists(dir / "out" / "summary.json"));

    std::ifstream is(dir / "out" / "summary.json");
    nlohmann::json j;
    is >> j;
    CHECK(j.contains("converged"));
    CHECK(j.contains("classification"));
    CHECK(j["final"].contains("e_HH"));

    std::ifstream tr(dir / "out" / "trace.csv");
    std::string header;
    std::getline(tr, header);
    CHECK(header ==
          "step,time,E_HH,E_LH,E_HL,E_LL,K,tau_HH_sup,tau_HL_sup,"
          "energy_identity_residual,rho_sq,foliated_defect");
    fs::remove_all(dir);
}

TEST_CASE("verify subcommand: selection, unknown ids, report") {
    auto dir = tmpdir();
    auto out = dir / "report.json";
    CHECK(run_cli({"verify", "--checks", "eq2.3.frame-roundtrip,lemma1.2.connection-offset",
                   "--out", out.string().c_str()}) == 0);
    std::ifstream is(out);
    nlohmann::json j;
    is >> j;
    CHECK(j["checks"].size() == 2);
    CHECK(j["all_passed"] == true);
    CHECK(run_cli({"verify", "--checks", "no.such.check"}) == 2);
    fs::remove_all(dir);
}

TEST_CASE("empty selection is a successful empty run") {
    VerifyConfig vc;
    auto results = run_suite({}, vc);
    CHECK(results.empty());
    CHECK(all_passed(results));
}

TEST_CASE("registry ids are unique and documented") {
    auto ids = registered_check_ids();
    CHECK(ids.size() >= 40);
    std::set<std::string> uniq(ids.begin(), ids.end());
    CHECK(uniq.size() == ids.size());

    // coverage lock: every id appears in docs/checks.md and vice versa
    fs::path doc = fs::path(PHG_SOURCE_DIR) / "docs" / "checks.md";
    REQUIRE(fs::exists(doc));
    std::ifstream is(doc);
    std::stringstream ss;
    ss << is.rdbuf();
    std::string text = ss.str();
    for (const auto& id : ids)
        CHECK_MESSAGE(text.find("`" + id + "`") != std::string::npos, "missing doc: ", id);
    // count documented ids (backtick-quoted tokens containing a dot)
    std::size_t documented = 0, pos = 0;
    while ((pos = text.find("check:`", pos)) != std::string::npos) {
        ++documented;
        ++pos;
    }
    CHECK(documented == ids.size());
}

TEST_CASE("curvature subcommand emits a classification report") {
    auto dir = tmpdir();
    auto out = dir / "curv.json";
    CHECK(run_cli({"curvature", "--model", "space-form-chart", "--lambda", "-1",
                   "--points", "5", "--out", out.string().c_str()}) == 0);
    std::ifstream is(out);
    nlohmann::json j;
    is >> j;
    CHECK(j["points"].size() == 5);
    CHECK(j["points"][0]["negativity_class"] == "strongly-negative");
    CHECK(j["points"][0]["K_hol"] == -1.0);
    fs::remove_all(dir);
}

TEST_CASE("energy subcommand prints the integrated breakdown") {
    auto dir = tmpdir();
    auto out = dir / "energy.json";
    CHECK(run_cli({"energy", "--initial", "identity", "--n", "8", "--out",
                   out.string().c_str()}) == 0);
    std::ifstream is(out);
    nlohmann::json j;
    is >> j;
    CHECK(j["E_HH"] == doctest::Approx(1.0));
    CHECK(j["K"] == doctest::Approx(1.0));
    CHECK(j.contains("E_prime"));
    CHECK(j.contains("E_dprime"));
    fs::remove_all(dir);
}

TEST_CASE("atomic write replaces files completely") {
    auto dir = tmpdir();
    auto p = dir / "file.txt";
    atomic_write(p.string(), "first version");
    atomic_write(p.string(), "v2");
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    CHECK(ss.str() == "v2");
    fs::remove_all(dir);
}

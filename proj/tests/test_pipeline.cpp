#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qhj/pipeline.hpp"

using namespace qhj;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qhj_pipeline_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

JobConfig scarf_job(const fs::path& dir) {
    JobConfig c;
    c.potential = "scarf1";
    c.params = {{"A", 3.0}, {"B", 1.0}, {"alpha", 1.0}};
    c.levels = 3;
    c.output_dir = dir.string();
    return c;
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::not_a_pole;
}

int run_cli(const std::string& args) {
    const char* cli = std::getenv("QHJ_CLI");
    REQUIRE(cli != nullptr);
    const int status = std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    const JobConfig c = parse_config_text(R"({"potential": "rosen_morse", "params": {"A": 4, "alpha": 1},
        "levels": 4, "oracle": {"count": 3001}, "outputs": ["spectrum", "qmf"], "output_dir": "out"})");
    CHECK(c.potential == "rosen_morse");
    CHECK(c.params.at("A") == 4.0);
    CHECK(c.levels == 4);
    CHECK(c.oracle.count == 3001);
    CHECK(!c.oracle.x_min.has_value());
    CHECK(c.outputs == std::vector<OutputKind>{OutputKind::spectrum, OutputKind::qmf});

    const JobConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("config errors name the line or the field") {
    try {
        parse_config_text("{\n  \"potential\": \"harmonic\",\n  \"levels\": ,\n}");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config_error);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    try {
        parse_config_text(R"({"potential": "harmonic", "levels": 0})");
        FAIL("expected a field error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("'levels'") != std::string::npos);
    }
    try {
        parse_config_text(R"({"potential": "harmonic", "lvls": 2})");
        FAIL("expected a field error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("'lvls'") != std::string::npos);
    }
    CHECK(code_of([] { parse_config_text(R"({"potential": "harmonic", "outputs": ["plots"]})"); }) ==
          ErrorCode::config_error);
}

TEST_CASE("scarf job") {
    const auto dir = scratch("scarf");
    const SpectrumReport rep = run(scarf_job(dir), Mode::verify);
    REQUIRE(rep.rows.size() == 3);
    const double expected[] = {0.0, 7.0, 16.0};
    for (int n = 0; n < 3; ++n) {
        CHECK(rep.rows[n].n == n);
        CHECK(std::abs(rep.rows[n].e_qhj - expected[n]) < 1e-9);
        CHECK(rep.rows[n].nodes == n);
        REQUIRE(rep.rows[n].abs_err.has_value());
        CHECK(*rep.rows[n].abs_err == doctest::Approx(std::abs(rep.rows[n].e_qhj - *rep.rows[n].e_oracle)));
        CHECK(rep.rows[n].susy_phase == "exact");
    }
    CHECK(rep.exit_code == 0);
    for (const auto& c : rep.checks) CHECK_MESSAGE(c.passed, c.name);

    write_outputs(rep);
    CHECK(fs::exists(dir / "spectrum.csv"));
    CHECK(fs::exists(dir / "wavefunction_n2.csv"));
    CHECK(fs::exists(dir / "report.json"));
    const std::string csv = slurp(dir / "spectrum.csv");
    CHECK(csv.rfind("n,E_qhj,E_closed_form,E_oracle,abs_err,overlap,nodes,susy_phase,residues_used\n", 0) == 0);
}

TEST_CASE("oscillator job") {
    JobConfig c;
    c.potential = "harmonic";
    c.output_dir = scratch("harmonic").string();
    const SpectrumReport rep = run(c, Mode::solve);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].e_qhj == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.rows[0].nodes == 0);
    CHECK(!rep.rows[0].e_oracle.has_value());
    CHECK(rep.rows[0].residues_used == "none");
    CHECK(rep.exit_code == 0);
}

TEST_CASE("invalid jobs") {
    JobConfig c = scarf_job(scratch("invalid"));
    c.params = {{"A", 1.0}, {"B", 1.0}, {"alpha", 1.0}};
    try {
        run(c, Mode::solve);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config_error);
        CHECK(std::string(e.what()).find("PhaseBoundary") != std::string::npos);
    }
    JobConfig r;
    r.potential = "rosen_morse";
    r.params = {{"A", 4.0}, {"alpha", 1.0}};
    r.levels = 5;
    CHECK(code_of([&] { run(r, Mode::solve); }) == ErrorCode::config_error);
}

TEST_CASE("qmf mode for one level") {
    const auto dir = scratch("qmf");
    JobConfig c = scarf_job(dir);
    const SpectrumReport rep = run(c, Mode::qmf, 2);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].n == 2);
    CHECK(rep.exit_code == 0);
    write_outputs(rep);
    CHECK(fs::exists(dir / "qmf_n2.csv"));
    CHECK(!fs::exists(dir / "spectrum.csv"));
    CHECK(slurp(dir / "qmf_n2.csv").rfind("re_x,im_x,re_p,im_p\n", 0) == 0);
}

TEST_CASE("outputs are byte identical across runs") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    JobConfig ca = scarf_job(a), cb = scarf_job(b);
    ca.outputs = cb.outputs = {OutputKind::spectrum, OutputKind::wavefunctions, OutputKind::qmf};
    write_outputs(run(ca, Mode::verify));
    write_outputs(run(cb, Mode::verify));
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename();
        if (name == "report.json") continue;  // embeds output_dir
        CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name.string());
    }
}

TEST_CASE("report round trip") {
    const auto dir = scratch("roundtrip");
    const SpectrumReport first = run(scarf_job(dir), Mode::verify);
    write_outputs(first);
    const auto stored = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(stored["version"] == kToolVersion);
    const SpectrumReport second = run(config_from_json(stored["config"]), Mode::verify);
    CHECK(report_to_json(second) == report_to_json(first));
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333333");
}

TEST_CASE("command line") {
    const auto dir = scratch("cli");
    {
        std::ofstream cfg(dir / "job.json");
        cfg << R"({"potential": "rosen_morse", "params": {"A": 4, "alpha": 1}, "levels": 2})";
    }
    CHECK(run_cli("list") == 0);
    CHECK(run_cli("solve " + (dir / "job.json").string() + " --output-dir " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "spectrum.csv"));
    CHECK(run_cli("verify " + (dir / "job.json").string() + " --levels 4 --output-dir " + (dir / "v").string()) == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "v" / "report.json"));
    CHECK(report["config"]["levels"] == 4);
    CHECK(run_cli("verify " + (dir / "job.json").string() + " --levels 5 --output-dir " + (dir / "x").string()) == 2);
    CHECK(run_cli("solve --potential scarf1 --param A=1 --param B=1 --param alpha=1 --output-dir " +
                  (dir / "y").string()) == 2);
    CHECK(run_cli("qmf " + (dir / "job.json").string() + " --level 1 --output-dir " + (dir / "q").string()) == 0);
    CHECK(fs::exists(dir / "q" / "qmf_n1.csv"));
    CHECK(run_cli("bogus") == 2);
}

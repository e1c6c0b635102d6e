// qhj: bound states by the singularity structure of the quantum momentum function.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qhj/catalog.hpp"
#include "qhj/errors.hpp"
#include "qhj/pipeline.hpp"

namespace {

struct Overrides {
    std::string potential;
    std::vector<std::string> params;
    std::optional<int> levels;
    std::string output_dir;
    std::vector<std::string> outputs;
    std::optional<double> x_min, x_max;
    std::optional<int> count;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--potential", o.potential, "harmonic | rosen_morse | scarf1");
    cmd->add_option("--param", o.params, "KEY=VALUE, repeatable");
    cmd->add_option("--levels", o.levels, "solve n = 0..levels-1");
    cmd->add_option("--output-dir", o.output_dir);
    cmd->add_option("--outputs", o.outputs, "spectrum, wavefunctions, qmf")->delimiter(',');
    cmd->add_option("--oracle-x-min", o.x_min);
    cmd->add_option("--oracle-x-max", o.x_max);
    cmd->add_option("--oracle-count", o.count);
}

qhj::JobConfig resolve(const std::string& path, const Overrides& o) {
    nlohmann::json j = nlohmann::json::object();
    if (!path.empty()) j = qhj::config_to_json(qhj::load_config(path));
    if (!o.potential.empty()) j["potential"] = o.potential;
    for (const auto& kv : o.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw qhj::Error(qhj::ErrorCode::config_error, "--param expects KEY=VALUE, got '" + kv + "'");
        double value = 0.0;
        try {
            std::size_t used = 0;
            value = std::stod(kv.substr(eq + 1), &used);
            if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
        } catch (const std::exception&) {
            throw qhj::Error(qhj::ErrorCode::config_error, "--param " + kv.substr(0, eq) + ": not a number");
        }
        j["params"][kv.substr(0, eq)] = value;
    }
    if (o.levels) j["levels"] = *o.levels;
    if (!o.output_dir.empty()) j["output_dir"] = o.output_dir;
    if (!o.outputs.empty()) j["outputs"] = o.outputs;
    if (o.x_min) j["oracle"]["x_min"] = *o.x_min;
    if (o.x_max) j["oracle"]["x_max"] = *o.x_max;
    if (o.count) j["oracle"]["count"] = *o.count;
    return qhj::config_from_json(j);
}

void summarize(const qhj::SpectrumReport& rep) {
    for (const auto& r : rep.rows) {
        std::cout << "n=" << r.n << "  E=" << qhj::format_number(r.e_qhj);
        if (r.e_oracle) std::cout << "  oracle=" << qhj::format_number(*r.e_oracle);
        if (!r.error.empty()) std::cout << "  ERROR " << r.error;
        std::cout << '\n';
    }
    for (const auto& c : rep.checks)
        if (!c.passed)
            std::cerr << "FAIL n=" << c.level << ' ' << c.name << " value=" << qhj::format_number(c.value)
                      << " tol=" << qhj::format_number(c.tolerance) << (c.detail.empty() ? "" : " " + c.detail)
                      << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qhj - exactly solvable bound states via quantum Hamilton-Jacobi"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(qhj::kToolVersion));

    std::string config_path;
    Overrides over;
    std::optional<int> qmf_level;

    auto* solve = app.add_subcommand("solve", "energies and wave functions");
    auto* verify = app.add_subcommand("verify", "solve, then check against the Numerov oracle and the QMF");
    auto* qmf = app.add_subcommand("qmf", "QMF samples, moving poles and contour integral for one level");
    auto* list = app.add_subcommand("list", "catalog of potentials");
    for (auto* cmd : {solve, verify, qmf}) {
        cmd->add_option("config", config_path, "JSON job file")->check(CLI::ExistingFile);
        add_overrides(cmd, over);
    }
    qmf->add_option("--level", qmf_level, "level n")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        std::cout << qhj::list_potentials();
        return 0;
    }
    const qhj::Mode mode = solve->parsed() ? qhj::Mode::solve : verify->parsed() ? qhj::Mode::verify : qhj::Mode::qmf;

    try {
        const qhj::JobConfig config = resolve(config_path, over);
        const qhj::SpectrumReport rep = qhj::run(config, mode, mode == qhj::Mode::qmf ? qmf_level : std::nullopt);
        qhj::write_outputs(rep);
        summarize(rep);
        return rep.exit_code;
    } catch (const qhj::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.code()) {
            case qhj::ErrorCode::config_error:
            case qhj::ErrorCode::invalid_params:
            case qhj::ErrorCode::phase_boundary:
            case qhj::ErrorCode::no_such_level:
                return 2;
            case qhj::ErrorCode::inconsistent_reduction:
                return 4;
            default:
                return 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
}

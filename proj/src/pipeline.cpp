#include "qhj/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qhj/oracle.hpp"
#include "qhj/qmfprobe.hpp"
#include "qhj/solver.hpp"

namespace qhj {

using nlohmann::json;

std::string_view to_string(OutputKind kind) {
    switch (kind) {
        case OutputKind::spectrum: return "spectrum";
        case OutputKind::wavefunctions: return "wavefunctions";
        case OutputKind::qmf: return "qmf";
    }
    return "unknown";
}

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::solve: return "solve";
        case Mode::verify: return "verify";
        case Mode::qmf: return "qmf";
    }
    return "unknown";
}

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::config_error, "field '" + field + "': " + why);
}

OutputKind output_from_name(const std::string& name) {
    for (auto k : {OutputKind::spectrum, OutputKind::wavefunctions, OutputKind::qmf})
        if (to_string(k) == name) return k;
    bad_field("outputs", "unknown output '" + name + "' (spectrum, wavefunctions, qmf)");
}

double number_field(const json& j, const std::string& field) {
    if (!j.is_number()) bad_field(field, "must be a number");
    return j.get<double>();
}

}  // namespace

JobConfig config_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::config_error, "configuration must be a JSON object");
    static const std::vector<std::string> known{"potential", "params", "levels", "oracle", "outputs", "output_dir"};
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) bad_field(key, "unknown field");

    JobConfig c;
    if (!j.contains("potential") || !j["potential"].is_string()) bad_field("potential", "required string");
    c.potential = j["potential"].get<std::string>();
    if (j.contains("params")) {
        if (!j["params"].is_object()) bad_field("params", "must be an object of numbers");
        for (const auto& [key, value] : j["params"].items()) c.params[key] = number_field(value, "params." + key);
    }
    if (j.contains("levels")) {
        const auto& l = j["levels"];
        if (!l.is_number_integer() || l.get<long long>() < 1) bad_field("levels", "must be an integer >= 1");
        c.levels = static_cast<int>(l.get<long long>());
    }
    if (j.contains("oracle")) {
        const auto& o = j["oracle"];
        if (!o.is_object()) bad_field("oracle", "must be an object");
        for (const auto& [key, value] : o.items()) {
            if (key == "x_min") c.oracle.x_min = number_field(value, "oracle.x_min");
            else if (key == "x_max") c.oracle.x_max = number_field(value, "oracle.x_max");
            else if (key == "count") {
                if (!value.is_number_integer() || value.get<long long>() < 3) bad_field("oracle.count", "integer >= 3");
                c.oracle.count = static_cast<int>(value.get<long long>());
            } else {
                bad_field("oracle." + key, "unknown field");
            }
        }
    }
    if (j.contains("outputs")) {
        if (!j["outputs"].is_array()) bad_field("outputs", "must be an array of names");
        c.outputs.clear();
        for (const auto& o : j["outputs"]) {
            if (!o.is_string()) bad_field("outputs", "entries must be strings");
            c.outputs.push_back(output_from_name(o.get<std::string>()));
        }
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) bad_field("output_dir", "must be a string");
        c.output_dir = j["output_dir"].get<std::string>();
    }
    return c;
}

json config_to_json(const JobConfig& c) {
    json j;
    j["potential"] = c.potential;
    j["params"] = json::object();
    for (const auto& [k, v] : c.params) j["params"][k] = v;
    j["levels"] = c.levels;
    json o = json::object();
    if (c.oracle.x_min) o["x_min"] = *c.oracle.x_min;
    if (c.oracle.x_max) o["x_max"] = *c.oracle.x_max;
    if (c.oracle.count) o["count"] = *c.oracle.count;
    j["oracle"] = o;
    j["outputs"] = json::array();
    for (auto k : c.outputs) j["outputs"].push_back(std::string(to_string(k)));
    j["output_dir"] = c.output_dir;
    return j;
}

JobConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
        const long line = 1 + std::count(upto.begin(), upto.end(), '\n');
        std::ostringstream msg;
        msg << "line " << line << ": " << e.what();
        throw Error(ErrorCode::config_error, msg.str());
    }
    return config_from_json(j);
}

JobConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config_error, "cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return parse_config_text(s.str());
}

std::string format_number(double v) {
    int digits = 15;
    if (const char* env = std::getenv("QHJ_PRECISION")) {
        const int d = std::atoi(env);
        if (d >= 1 && d <= 17) digits = d;
    }
    if (std::isnan(v)) return "nan";
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

namespace {

constexpr double kClosedFormTol = 1e-9;
constexpr double kOracleTol = 1e-5;
constexpr double kOverlapTol = 1e-6;
constexpr double kQmfTol = 1e-6;

std::string residue_text(const ResidueSet& r) {
    if (r.chosen.empty()) return "none";
    std::ostringstream s;
    for (std::size_t i = 0; i < r.chosen.size(); ++i) {
        if (i) s << "; ";
        s << "y=" << format_number(r.chosen[i].first) << ": " << format_number(r.chosen[i].second);
    }
    s << " (" << to_string(r.selection_rule) << ")";
    return s.str();
}

int sign_changes(const std::vector<double>& v, double peak) {
    int changes = 0, last = 0;
    for (double x : v) {
        if (std::abs(x) <= 1e-10 * peak) continue;
        const int s = x > 0 ? 1 : -1;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

bool internal_failure(ErrorCode c) {
    switch (c) {
        case ErrorCode::inconsistent_reduction:
        case ErrorCode::no_physical_selection:
        case ErrorCode::not_normalizable:
        case ErrorCode::complex_residues:
        case ErrorCode::no_polynomial_solution:
        case ErrorCode::root_not_found:
            return true;
        default:
            return false;
    }
}

void add_check(SpectrumReport& rep, int n, std::string name, double value, double tol, bool passed,
               std::string detail = {}) {
    rep.checks.push_back({n, std::move(name), passed, value, tol, std::move(detail)});
}

std::vector<std::pair<Complex, Complex>> contour_samples(const ClosedFormWavefunction& wf,
                                                         const probe::ContourSpec& c, int per_side) {
    const Complex corners[] = {{c.re_min, -c.im_half_height},
                               {c.re_max, -c.im_half_height},
                               {c.re_max, c.im_half_height},
                               {c.re_min, c.im_half_height}};
    std::vector<std::pair<Complex, Complex>> out;
    for (int side = 0; side < 4; ++side) {
        const Complex a = corners[side], b = corners[(side + 1) % 4];
        for (int k = 0; k < per_side; ++k) {
            const Complex z = a + (b - a) * (static_cast<double>(k) / per_side);
            out.emplace_back(z, probe::qmf_eval(wf, z).p);
        }
    }
    return out;
}

}  // namespace

SpectrumReport run(const JobConfig& config, Mode mode, std::optional<int> qmf_level) {
    SpectrumReport rep;
    rep.config = config;
    rep.mode = mode;

    PotentialSpec spec;
    try {
        spec = instantiate(config.potential, config.params);
    } catch (const Error& e) {
        throw Error(ErrorCode::config_error, e.what());
    }
    if (config.levels < 1) bad_field("levels", "must be an integer >= 1");
    const auto count = bound_state_count(spec);
    if (count && config.levels > *count) {
        std::ostringstream msg;
        msg << config.potential << " supports " << *count << " bound states, " << config.levels << " requested";
        bad_field("levels", msg.str());
    }
    std::vector<int> levels;
    if (mode == Mode::qmf && qmf_level) {
        if (*qmf_level < 0 || *qmf_level >= config.levels) bad_field("level", "outside 0..levels-1");
        levels.push_back(*qmf_level);
    } else {
        for (int n = 0; n < config.levels; ++n) levels.push_back(n);
    }

    const SusyPhase phase = [&] {
        try {
            return classify_susy(spec);
        } catch (const Error&) {
            return SusyPhase::not_applicable;
        }
    }();

    // Oracle grid and eigenvalues, shared by all levels.
    std::optional<oracle::TridiagonalOperator> op;
    std::vector<double> oracle_energies;
    if (mode == Mode::verify) {
        double top = spec.min_potential + 1.0;
        for (int n : levels) top = std::max(top, closed_form_energy(spec, n));
        oracle::Grid g = oracle::default_grid(spec, top, config.oracle.count.value_or(0));
        if (config.oracle.x_min) g.x_min = *config.oracle.x_min;
        if (config.oracle.x_max) g.x_max = *config.oracle.x_max;
        try {
            op = oracle::discretize(spec, g);
        } catch (const Error& e) {
            throw Error(ErrorCode::config_error, e.what());
        }
        oracle_energies = oracle::lowest_eigenvalues(*op, levels.back() + 1);
    }

    bool any_internal = false;
    for (int n : levels) {
        SpectrumRow row;
        row.n = n;
        row.susy_phase = std::string(to_string(phase));
        LevelSamples samples;
        samples.n = n;
        try {
            const SpectralLine line = solve_level(spec, n);
            row.e_qhj = line.energy_qhj;
            row.e_closed_form = line.energy_closed_form;
            const double cf_err = std::abs(line.energy_qhj - line.energy_closed_form);
            const double cf_tol = kClosedFormTol * std::max(1.0, std::abs(line.energy_closed_form));
            add_check(rep, n, "energy_vs_closed_form", cf_err, cf_tol, cf_err <= cf_tol);

            const ResidueSet residues = physical_residues(spec, line.energy_qhj);
            row.residues_used = residue_text(residues);
            const ClosedFormWavefunction wf = assemble_wavefunction(spec, line, residues);

            // Samples on the oracle grid (or a default one).
            const oracle::Grid g = op ? op->grid : oracle::default_grid(spec, line.energy_qhj, 2001);
            for (int i = 0; i < g.count; ++i) {
                samples.x.push_back(g.x(i));
                samples.psi_qhj.push_back(wavefunction_eval(wf, g.x(i)));
            }
            row.nodes = sign_changes(samples.psi_qhj, wf.peak);
            add_check(rep, n, "node_count", row.nodes, 0.0, row.nodes == n);

            if (op) {
                const double e_or = oracle_energies[n];
                row.e_oracle = e_or;
                row.abs_err = std::abs(line.energy_qhj - e_or);
                const double tol = kOracleTol * std::max(1.0, std::abs(e_or));
                add_check(rep, n, "oracle_energy", *row.abs_err, tol, *row.abs_err <= tol);
                const oracle::OracleEigenpair pair = oracle::eigenvector(*op, e_or, n);
                row.overlap = oracle::overlap(wf, pair);
                add_check(rep, n, "oracle_overlap", 1.0 - *row.overlap, kOverlapTol, 1.0 - *row.overlap <= kOverlapTol);
                samples.psi_oracle.assign(pair.vector.data(), pair.vector.data() + pair.vector.size());
            }

            if (mode != Mode::solve) {
                const probe::MovingPoleReport poles = probe::locate_moving_poles(wf);
                double worst = 0.0;
                for (const auto& r : poles.residues) worst = std::max(worst, std::abs(r - Complex(0.0, -1.0)));
                add_check(rep, n, "moving_pole_residues", worst, kQmfTol, worst <= kQmfTol);
                const probe::ContourSpec contour = probe::default_contour(spec, wf);
                const Complex q = probe::quantization_integral(wf, contour);
                const double qerr = std::abs(q - static_cast<double>(n));
                add_check(rep, n, "quantization_integral", qerr, kQmfTol, qerr <= kQmfTol);
                const bool want_qmf = mode == Mode::qmf || std::find(config.outputs.begin(), config.outputs.end(),
                                                                      OutputKind::qmf) != config.outputs.end();
                if (want_qmf) samples.qmf = contour_samples(wf, contour, 400);
            }
        } catch (const Error& e) {
            row.error = e.what();
            add_check(rep, n, "level_completed", 0.0, 0.0, false, e.what());
            any_internal = any_internal || internal_failure(e.code());
        }
        rep.rows.push_back(std::move(row));
        rep.samples.push_back(std::move(samples));
    }

    const bool all_pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.passed; });
    rep.exit_code = any_internal ? 4 : (all_pass ? 0 : 3);
    return rep;
}

json report_to_json(const SpectrumReport& rep) {
    json j;
    j["tool"] = "qhj";
    j["version"] = kToolVersion;
    j["mode"] = std::string(to_string(rep.mode));
    j["config"] = config_to_json(rep.config);
    j["rows"] = json::array();
    for (const auto& r : rep.rows) {
        json row;
        row["n"] = r.n;
        row["E_qhj"] = format_number(r.e_qhj);
        row["E_closed_form"] = format_number(r.e_closed_form);
        row["E_oracle"] = r.e_oracle ? format_number(*r.e_oracle) : "";
        row["abs_err"] = r.abs_err ? format_number(*r.abs_err) : "";
        row["overlap"] = r.overlap ? format_number(*r.overlap) : "";
        row["nodes"] = r.nodes;
        row["susy_phase"] = r.susy_phase;
        row["residues_used"] = r.residues_used;
        if (!r.error.empty()) row["error"] = r.error;
        j["rows"].push_back(row);
    }
    j["checks"] = json::array();
    for (const auto& c : rep.checks) {
        j["checks"].push_back({{"level", c.level},
                               {"name", c.name},
                               {"passed", c.passed},
                               {"value", format_number(c.value)},
                               {"tolerance", format_number(c.tolerance)},
                               {"detail", c.detail}});
    }
    j["passed"] = rep.exit_code == 0;
    j["exit_code"] = rep.exit_code;
    return j;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::config_error, "cannot write '" + p.string() + "'");
    return out;
}

}  // namespace

void write_outputs(const SpectrumReport& rep) {
    namespace fs = std::filesystem;
    const fs::path dir(rep.config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    const auto wants = [&](OutputKind k) {
        return std::find(rep.config.outputs.begin(), rep.config.outputs.end(), k) != rep.config.outputs.end();
    };

    if (rep.mode != Mode::qmf && wants(OutputKind::spectrum)) {
        auto out = open_out(dir / "spectrum.csv");
        out << "n,E_qhj,E_closed_form,E_oracle,abs_err,overlap,nodes,susy_phase,residues_used\n";
        for (const auto& r : rep.rows) {
            out << r.n << ',' << format_number(r.e_qhj) << ',' << format_number(r.e_closed_form) << ','
                << (r.e_oracle ? format_number(*r.e_oracle) : "") << ','
                << (r.abs_err ? format_number(*r.abs_err) : "") << ','
                << (r.overlap ? format_number(*r.overlap) : "") << ',' << r.nodes << ',' << csv_field(r.susy_phase)
                << ',' << csv_field(r.residues_used) << '\n';
        }
    }
    if (rep.mode != Mode::qmf && wants(OutputKind::wavefunctions)) {
        for (const auto& s : rep.samples) {
            if (s.x.empty()) continue;
            auto out = open_out(dir / ("wavefunction_n" + std::to_string(s.n) + ".csv"));
            out << "x,psi_qhj,psi_oracle\n";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                out << format_number(s.x[i]) << ',' << format_number(s.psi_qhj[i]) << ','
                    << (s.psi_oracle.empty() ? "" : format_number(s.psi_oracle[i])) << '\n';
            }
        }
    }
    for (const auto& s : rep.samples) {
        if (s.qmf.empty()) continue;
        auto out = open_out(dir / ("qmf_n" + std::to_string(s.n) + ".csv"));
        out << "re_x,im_x,re_p,im_p\n";
        for (const auto& [x, p] : s.qmf)
            out << format_number(x.real()) << ',' << format_number(x.imag()) << ',' << format_number(p.real()) << ','
                << format_number(p.imag()) << '\n';
    }
    auto out = open_out(dir / "report.json");
    out << report_to_json(rep).dump(2) << '\n';
}

}  // namespace qhj

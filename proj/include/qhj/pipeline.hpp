#pragma once

// Job configuration, the solve/verify/qmf pipelines and their output files.

#include <optional>
#include <utility>
#include <string>
#include <vector>

#include <json.hpp>

#include "qhj/catalog.hpp"

namespace qhj {

inline constexpr const char* kToolVersion = "0.1.0";

enum class OutputKind { spectrum, wavefunctions, qmf };
enum class Mode { solve, verify, qmf };

std::string_view to_string(OutputKind kind);
std::string_view to_string(Mode mode);

struct OracleOverride {
    std::optional<double> x_min;
    std::optional<double> x_max;
    std::optional<int> count;
};

struct JobConfig {
    std::string potential;
    ParamMap params;
    int levels = 1;
    OracleOverride oracle;
    std::vector<OutputKind> outputs{OutputKind::spectrum, OutputKind::wavefunctions};
    std::string output_dir = ".";
};

/// Throws ConfigError naming the offending field.
JobConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const JobConfig& config);
/// Parse errors carry the line number.
JobConfig load_config(const std::string& path);
JobConfig parse_config_text(const std::string& text);

struct CheckResult {
    int level = 0;
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct SpectrumRow {
    int n = 0;
    double e_qhj = 0.0;
    double e_closed_form = 0.0;
    std::optional<double> e_oracle;
    std::optional<double> abs_err;
    std::optional<double> overlap;
    int nodes = 0;
    std::string susy_phase;
    std::string residues_used;
    std::string error;  ///< set when the level failed outright
};

/// Data behind wavefunction_n<k>.csv and qmf_n<k>.csv.
struct LevelSamples {
    int n = 0;
    std::vector<double> x;
    std::vector<double> psi_qhj;
    std::vector<double> psi_oracle;  ///< empty when the oracle did not run
    std::vector<std::pair<Complex, Complex>> qmf;  ///< (x, p) along the contour
};

struct SpectrumReport {
    JobConfig config;
    Mode mode = Mode::verify;
    std::vector<SpectrumRow> rows;
    std::vector<LevelSamples> samples;
    std::vector<CheckResult> checks;
    int exit_code = 0;
};

/// Runs every level, collecting failures.  qmf_level restricts Mode::qmf to
/// one level.  Catalog/parameter errors surface as ConfigError.
SpectrumReport run(const JobConfig& config, Mode mode, std::optional<int> qmf_level = std::nullopt);

/// Writes spectrum.csv, wavefunction_n<k>.csv, qmf_n<k>.csv and report.json
/// into config.output_dir.
void write_outputs(const SpectrumReport& report);

nlohmann::json report_to_json(const SpectrumReport& report);

/// %.<digits>g, digits from QHJ_PRECISION (default 15).
std::string format_number(double v);

}  // namespace qhj

#include "qhj/errors.hpp"

namespace qhj {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::not_a_pole: return "NotAPole";
        case ErrorCode::no_polynomial_solution: return "NoPolynomialSolution";
        case ErrorCode::invalid_params: return "InvalidParams";
        case ErrorCode::phase_boundary: return "PhaseBoundary";
        case ErrorCode::no_such_level: return "NoSuchLevel";
        case ErrorCode::complex_residues: return "ComplexResidues";
        case ErrorCode::no_physical_selection: return "NoPhysicalSelection";
        case ErrorCode::inconsistent_reduction: return "InconsistentReduction";
        case ErrorCode::root_not_found: return "RootNotFound";
        case ErrorCode::not_normalizable: return "NotNormalizable";
        case ErrorCode::branch_cut: return "BranchCut";
        case ErrorCode::domain_violation: return "DomainViolation";
        case ErrorCode::convergence_failure: return "ConvergenceFailure";
        case ErrorCode::at_pole: return "AtPole";
        case ErrorCode::count_mismatch: return "CountMismatch";
        case ErrorCode::contour_through_pole: return "ContourThroughPole";
        case ErrorCode::no_turning_points: return "NoTurningPoints";
        case ErrorCode::config_error: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace qhj

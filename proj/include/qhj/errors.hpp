#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qhj {

enum class ErrorCode {
    not_a_pole,
    no_polynomial_solution,
    invalid_params,
    phase_boundary,
    no_such_level,
    complex_residues,
    no_physical_selection,
    inconsistent_reduction,
    root_not_found,
    not_normalizable,
    branch_cut,
    domain_violation,
    convergence_failure,
    at_pole,
    count_mismatch,
    contour_through_pole,
    no_turning_points,
    config_error,
};

std::string_view to_string(ErrorCode code);

/// The single exception type of the library; `code()` identifies the failure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace qhj

#pragma once

// The four commands behind the `thermoflux` executable and their output
// writers. Exit codes: 0 success, 1 input error, 2 non-convergence,
// 3 audit or rate failure.

#include "thermoflux/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace thermoflux::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kNonConvergence = 2, kAuditFailure = 3 };

struct Invocation {
    std::string command;  ///< solve | constants | verify | mms
    std::filesystem::path config;
    std::filesystem::path out = ".";
    std::vector<std::string> overrides;
};

/// Loads the config, dispatches, and maps errors to exit codes with a message on `err`.
int run(const Invocation& inv, std::ostream& log, std::ostream& err);

int cmd_solve(const Setup& setup, const std::filesystem::path& out, std::ostream& log);
int cmd_constants(const Setup& setup, const std::filesystem::path& out, std::ostream& log);
int cmd_verify(const Setup& setup, const std::filesystem::path& out, std::ostream& log);
int cmd_mms(const Setup& setup, const std::filesystem::path& out, std::ostream& log);

/// Inputs of the constants report for a setup: bounds from the coefficients,
/// geometry from the mesh, data norms by boundary quadrature.
constants::ConstantsInputs constants_inputs(const Setup& setup);

Json solve_report_json(const SolveReport& report, bool include_timing);

/// Legacy ASCII VTK unstructured grid with POINT_DATA scalars theta and phi.
void write_vtk(const TriMesh& mesh, const Field& theta, const Field& phi, std::ostream& out);

} // namespace thermoflux::cli

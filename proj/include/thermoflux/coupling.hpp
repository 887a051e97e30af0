#pragma once

// The staggered map theta -> phi(theta) -> Theta and its relaxed Picard
// iteration for the coupled thermoelectric problem.

#include "thermoflux/coefficients.hpp"
#include "thermoflux/fem.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace thermoflux {

using SpaceFn = std::function<double(const Point&)>;

struct ProblemData {
    SpaceFn g;        ///< normal current density on Gamma_N
    SpaceFn theta_e;  ///< external temperature on Gamma
    double ell = 2.0;
    double p = 0.0;   ///< 0 selects the midpoint of (2, p_max)
    double delta = 1.0;
    double nu3 = 0.0;
    double r_sharp = 0.0;  ///< 0 selects the mesh heuristic
    double alpha = 0.0;    ///< 0 selects 4p/(p-2)

    /// Additional nodal loads, used by manufactured-solution studies.
    Field electric_extra_load;
    Field thermal_extra_load;
};

/// ProblemData with g = 0 and theta_e = 0.
ProblemData zero_data(double ell = 2.0);

/// Checks ell >= 2, int_{Gamma_N} g = 0 (relative 1e-10 of int |g|) and
/// theta_e >= 0 at the boundary quadrature points. Throws InvariantError.
void validate_data(const P1Space& space, const ProblemData& data);

/// p used by the solver and the norms: data.p, or 2 + 0.5 / (upsilon - 1).
double resolved_p(const CoefficientModel& coeffs, const ProblemData& data);

struct InnerOptions {
    double newton_tol = 1e-10;
    int newton_max = 50;
    int growth_limit = 5;
    AssemblyOptions assembly;
    SolveOptions linear;
};

/// Zero-mean electric potential for a given temperature.
Field solve_electric(const P1Space& space, const CoefficientModel& coeffs, const Field& theta,
                     const ProblemData& data, const InnerOptions& opts = {});

struct ThermalResult {
    Field Theta;
    int newton_iterations = 0;
    std::vector<double> residuals;  ///< ||F|| per Newton step, starting with the initial guess
};

/// Temperature update with the radiation law resolved by damped Newton.
/// `guess` defaults to theta.
ThermalResult solve_thermal(const P1Space& space, const CoefficientModel& coeffs, const Field& theta,
                            const Field& phi, const ProblemData& data, const InnerOptions& opts = {},
                            const Field* guess = nullptr);

struct OperatorResult {
    Field Theta;
    Field phi;
    int newton_iterations = 0;
    double newton_residual = 0.0;
};

OperatorResult operator_T(const P1Space& space, const CoefficientModel& coeffs, const Field& theta,
                          const ProblemData& data, const InnerOptions& opts = {});

struct PicardOptions {
    double tol = 1e-8;
    int max_outer = 50;
    double relax = 1.0;
    std::optional<Field> init;  ///< default: length-weighted mean of theta_e over Gamma
    InnerOptions inner;
    bool compute_ball = true;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;  ///< applications of the map
    double p = 0.0;
    double ell = 0.0;
    double relax = 1.0;
    double tol = 0.0;
    std::vector<double> update_norms;
    std::vector<double> iterate_norms;  ///< ||theta_m||_{1,p,ell} after each update
    std::vector<double> contraction_ratios;
    bool contraction_observed = true;
    std::vector<int> newton_counts;
    std::vector<double> newton_residuals;
    std::optional<double> Q1;
    std::optional<double> ball_radius;
    std::optional<bool> within_ball;
    FieldNorms theta_norms;
    FieldNorms phi_norms;
    double wall_time = 0.0;
    std::string message;
};

struct PicardResult {
    Field theta;
    Field phi;
    SolveReport report;
};

/// Relaxed Picard iteration. Non-convergence is reported through
/// report.converged; the fields of the last iterate are still returned.
PicardResult picard_solve(const P1Space& space, const CoefficientModel& coeffs, const ProblemData& data,
                          const PicardOptions& opts = {});

/// Data norms entering the smallness function, by boundary quadrature.
constants::DataNorms data_norms(const P1Space& space, const ProblemData& data, double p);

} // namespace thermoflux

#pragma once

// Prescribing small coexact eigenvalues and the volume at desk scale: a base
// chain with a large gap, one pinched sphere per target attached by eps-handles,
// and a damped fixed-point iteration on the parameter -> (volume, eigenvalues) map.
//
// Each degree p is handled by its own network of invariant p-forms f dv_{S^p}:
// a degree-0 problem on 1D chains whose conformal exponents use n - 2p, so that
// vertex weights carry h^(n-2p) and edge weights h^(n-2p-2), as in the radial
// reduction.

#include <string>
#include <vector>

#include "conformal_spectra/eigensolve.hpp"

namespace cspec {

struct PrescriptionTarget {
    int n = 5;
    int N = 1;
    std::vector<std::vector<double>> nu;  // nu[p-1][i-1], p = 1..k
    double V0 = 1.0;
    double delta = 0.1;

    int k() const { return (n - 3) / 2; }
    /// Strictly increasing positive targets per degree, one row per p = 1..k,
    /// 0 < delta < min gap / 2, delta < V0. Throws InvalidArgument.
    void validate() const;
    double max_nu() const;
};

/// {"n": 5, "N": 2, "nu": [[1.0, 2.0]], "V0": 1.0, "delta": 0.1}. Throws ParseError.
PrescriptionTarget target_from_json(const std::string& text);

struct NetworkModel {
    double eta = 0.05;            // first pinch floor tried; halved until a sphere fits its volume share
    double R = 1.0;               // pinch ball radius
    int sphere_resolution = 200;  // radial nodes per sphere
    int base_resolution = 40;
    double base_gap_factor = 4.0;  // base first eigenvalue ~ factor * max nu at unit scale
    double base_volume = 1.0;      // reference n-volume of the base
    double handle_length = 0.1;
    int handle_resolution = 8;
    SolverOptions solver;
    int threads = 1;
};

struct ParameterPoint {
    double V = 0.0;
    std::vector<std::vector<double>> xi;   // requested eigenvalues
    std::vector<std::vector<double>> eta;  // pinch floors
    std::vector<std::vector<double>> c;    // sphere homothety factors
    double base_c = 1.0;                   // base (and handle) homothety factor
};

struct PhiResult {
    double volume = 0.0;
    std::vector<std::vector<double>> mu;  // N smallest coexact values per targeted degree
    std::vector<double> mu_next;          // (N+1)-th value per targeted degree
    double mu_k1 = 0.0;                   // first coexact value in degree k+1
    bool ambiguous = false;               // two of the N values closer than the grouping threshold
};

/// Evaluates the glued model at handle radius eps. Deterministic.
PhiResult phi_map(const PrescriptionTarget& target, const ParameterPoint& point, double eps,
                  const NetworkModel& model = {});

/// Fills c (from xi by the isolated-sphere rule c^2 = mu_{p,1}(sphere) / xi) and
/// base_c (from V: the pieces and the handles add up to V at base_c). Throws
/// InvalidArgument if the spheres alone already exceed V.
void realize(const PrescriptionTarget& target, ParameterPoint& point, double eps, const NetworkModel& model = {});

struct PrescribeStage {
    double eps = 0.0;
    int evaluations = 0;
    double error = 0.0;     // max relative error against the targets
    double phi_step = 0.0;  // max relative |Phi(x) - x| at the end of the stage
};

struct PrescribeResult {
    bool converged = false;
    ParameterPoint point;
    PhiResult achieved;
    double error = 0.0;
    int evaluations = 0;
    std::vector<PrescribeStage> stages;
    std::string message;
};

struct PrescribeOptions {
    double tol = 1e-2;
    std::vector<double> eps_schedule{0.1, 0.05, 0.02, 0.01};
    int max_evaluations = 200;
    double damping = 0.5;
};

/// Damped fixed point xi <- xi + damping (nu - achieved), V <- V + damping (V0 - volume),
/// run to tolerance at every eps of the schedule in turn.
PrescribeResult prescribe(const PrescriptionTarget& target, const PrescribeOptions& opts = {},
                          const NetworkModel& model = {});

struct OracleResult {
    double c = 0.0;
    double base_c = 0.0;
    PhiResult achieved;
    int evaluations = 0;
};

/// Single target (k = 1, N = 1): bisection on the sphere factor c, with the base
/// factor solved in closed form for the volume at every step.
OracleResult bisection_oracle(const PrescriptionTarget& target, double eps, const NetworkModel& model = {},
                              double rel_tol = 1e-10);

std::string prescribe_json(const PrescriptionTarget& target, const PrescribeResult& result);

}  // namespace cspec

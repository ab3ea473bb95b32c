#pragma once

// Lower bounds from covers and quasi-isometries: the tau^(3n-1) comparison
// interval, the two-fold cover bound with constants a, b, and the explicit
// two-domain gluing bound. Plus the desk-scale corpus used to check them.

#include <cstdint>
#include <string>
#include <vector>

#include "conformal_spectra/eigensolve.hpp"

namespace cspec {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x, double rel_slack = 0.0) const {
        return x >= lo * (1.0 - rel_slack) && x <= hi * (1.0 + rel_slack);
    }
};

/// [lambda tau^-(3n-1), lambda tau^(3n-1)]. Throws InvalidArgument for tau < 1 or lambda < 0.
Interval dodziuk_interval(double lambda, double tau, int n);

struct CoverOverlap {
    int i = 0;
    int j = 0;
    double mu = 0.0;       // first coexact eigenvalue in degree q-1 of the intersection
    int harmonic_dim = 0;  // dim H^q of the intersection
};

struct CoverData {
    int degree = 1;                     // q
    std::vector<double> mu;             // first coexact eigenvalue in degree q per domain
    std::vector<CoverOverlap> overlaps; // pairwise intersections, each unordered pair at most once
    double c_rho = 0.0;                 // sup |grad rho_i|^2 of the partition of unity

    /// Positive eigenvalues, c_rho >= 0, valid distinct pairs. Throws InvalidArgument.
    void validate() const;
};

struct McGowanResult {
    int k_q = 1;
    double denominator = 0.0;
    double bound = 0.0;  // a / denominator
};

/// k_q = 1 + sum over intersections of dim H^q;
/// D = sum_i [ 1/mu_i + sum_{j ~ i} (b c_rho / mu_ij + 1)(1/mu_i + 1/mu_j) ].
McGowanResult mcgowan_bound(const CoverData& data, double a = 1.0, double b = 1.0);

struct GlueData {
    double mu1 = 0.0;       // degree p, Omega_1
    double mu2 = 0.0;       // degree p, Omega_2
    double mu12 = 0.0;      // degree p-1, Omega_12
    double c_rho = 0.0;
    double volratio = 1.0;  // Vol(Omega_2) / Vol(Omega_12)

    void validate() const;
};

/// 3 [1/mu1 + 1/mu2 + 4 (c_rho/mu12 + 1)(2/mu1 + 2/mu2) + volratio^2 (2/mu1 + 2/mu2)].
double gluing_denominator(const GlueData& data);
double gluing_bound(const GlueData& data);

/// Piecewise-linear partition of unity across an overlap of width w: 1/w^2.
double partition_gradient_bound(double overlap_width);

/// JSON configs (schema in docs/formats.md). Throw ParseError.
CoverData cover_data_from_json(const std::string& text);
GlueData glue_data_from_json(const std::string& text);

/// A product F x [0, L] split along the interval into two overlapping pieces.
struct CoverInstance {
    std::string label;
    int degree = 1;
    CellComplex whole, left, right, overlap;
    ConformalProfile h_whole, h_left, h_right, h_overlap;
    double width = 0.0;  // overlap width in the interval coordinate
};

/// Fixed corpus of dense-solvable split products, flat and randomly deformed.
std::vector<CoverInstance> cover_corpus(std::uint64_t seed = 1);

struct CoverCheck {
    std::string label;
    int degree = 0;
    double mu_true = 0.0;  // mu_{p,1}(Omega)
    GlueData glue;
    double glue_bound = 0.0;
    McGowanResult mcgowan;  // a = b = 1
    double mu_kq_true = 0.0;
    bool sound = false;  // glue_bound <= mu_true
};

CoverCheck evaluate_cover(const CoverInstance& inst, const SolverOptions& opts = {});

struct DodziukOptions {
    double tau = 2.0;
    int n = 5;  // ambient dimension used for the weights and the exponent
    int trials = 100;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct DodziukTrial {
    int index = 0;
    std::string complex;
    double min_ratio = 1.0;  // min over every nonzero eigenvalue of deformed / reference
    double max_ratio = 1.0;
    int compared = 0;
    int violations = 0;
};

struct DodziukReport {
    Interval ratio_interval;  // dodziuk_interval(1, tau, n)
    std::vector<DodziukTrial> trials;
    int violations = 0;
};

/// Random pairs (h, h~) with tau^-1 <= h~^2/h^2 <= tau on a pool of small complexes.
DodziukReport dodziuk_check(const DodziukOptions& opts);

}  // namespace cspec

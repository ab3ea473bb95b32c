#pragma once

// The conformal pinch on S^p x B^(n-p): profiles f and h on [0, R], the
// explicit Rayleigh bound, and eta sweeps.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "conformal_spectra/eigensolve.hpp"

namespace cspec {

enum class TransverseModel {
    ball,      // v(r) = c r^(n-p-1): flat ball of radius R
    cylinder,  // v(r) = c: the surrogate cylinder used by complex cross-checks
};

struct PinchParams {
    int n = 5;
    int p = 1;
    double R = 1.0;
    double eta = 0.1;
    int resolution = 2000;  // radial grid points
    double volume = 1.0;    // target V; Vol(Omega, eta = 1) is V/2
    TransverseModel model = TransverseModel::ball;

    /// k with n = 2k+3 or 2k+4.
    int k() const { return (n - 3) / 2; }
    /// Throws InvalidArgument unless n >= 5, 1 <= p <= k, 0 < eta <= 1, R > 0.
    void validate() const;
    /// Constant c in v(r) = c r^(n-p-1) (or c) normalizing the unpinched volume to V/2.
    double transverse_constant() const;
    double density(double r) const;
};

double smoothstep(double x);

struct PinchProfiles {
    std::function<double(double)> f;
    std::function<double(double)> h;
    std::function<double(double)> df;  // f'
    std::vector<double> grid;
    std::vector<double> f_samples;
    std::vector<double> h_samples;
};

PinchProfiles default_profiles(const PinchParams& params);

/// eta^(n-2p-2) * int_{I3} f'^2 dv / int_{I1} dv, by Gauss-Legendre quadrature.
double rayleigh_bound(const PinchParams& params);

/// Volume of the pinched sphere: int h^n v over [0, R] plus eta^n times the V/2 complement.
double pinch_volume(const PinchParams& params);

/// First eigenvalues of the coarse complex surrogate (n = 5, p = 1): S^1 x [0, R) x S^3
/// with the cylinder transverse model, next to the radial values of the same model.
struct CoarseCheck {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double mu_q1 = 0.0;  // degree k+1 = 2
    double radial_mu1 = 0.0;
    double bound = 0.0;
};

struct PinchRow {
    double eta = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    std::vector<std::pair<int, double>> mu_other;  // (q, mu_{q,1}) from the cylinder operator, q != p, q <= k+1
    double bound = 0.0;
    double volume = 0.0;
    double mu1_normalized = 0.0;  // mu * (Vol / V)^(2/n)
    double mu2_normalized = 0.0;
    double mu_k1_normalized = 0.0;  // mu_{k+1,1} Vol^(2/n), reported only
    std::optional<CoarseCheck> coarse;  // n = 5, p = 1 only
    std::string error;                 // nonempty if the row failed
};

struct PinchSweepOptions {
    bool coarse_check = false;
    int coarse_angular = 4;  // cycle resolution of the circle factor
    int coarse_radial = 12;  // halfopen resolution
    int threads = 1;
};

std::vector<PinchRow> pinch_sweep(const PinchParams& params, const std::vector<double>& etas,
                                  const PinchSweepOptions& opts = {});

/// Least-squares slope of log(mu1) against log(eta) over the last `decades`
/// decades of the sweep (the smallest eta values).
double loglog_slope(const std::vector<PinchRow>& rows, double decades = 3.0);

/// CSV: n,p,eta,mu1,mu2,eq5_bound,volume, normalized values, mu_q_1 columns, coarse columns, error
void write_pinch_csv(std::ostream& out, const PinchParams& params, const std::vector<PinchRow>& rows);

CoarseCheck coarse_pinch_check(const PinchParams& params, int angular, int radial);

}  // namespace cspec

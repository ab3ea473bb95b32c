#pragma once

// 1D reductions: -(w1 f')' = lambda w0 f on a grid, for invariant forms
// f dv_{S^p} on cylinders and on the pinched ball.

#include <functional>
#include <vector>

#include "conformal_spectra/eigensolve.hpp"
#include "conformal_spectra/pinch.hpp"

namespace cspec {

enum class RadialBoundary {
    neumann,          // natural conditions at both ends
    dirichlet_right,  // f = 0 at the right end, natural at the left
};

/// Three-point discretization: stiffness K_j = w1(mid_j)/dx_j on grid edges,
/// lumped mass M_i = sum over adjacent edges of w0(mid) dx/2 on grid nodes.
struct RadialProblem {
    int n = 0;
    int p = 0;
    std::vector<double> grid;
    std::vector<double> K;  // size grid.size() - 1
    std::vector<double> M;  // size grid.size(); the last entry is unused under dirichlet_right
    RadialBoundary boundary = RadialBoundary::neumann;

    std::size_t unknowns() const { return boundary == RadialBoundary::neumann ? grid.size() : grid.size() - 1; }
    /// (A f)_i = -(1/M_i) [K_i (f_{i+1} - f_i) - K_{i-1} (f_i - f_{i-1})] at every unknown node.
    std::vector<double> apply(const std::vector<double>& f) const;
    /// Symmetric tridiagonal stiffness matrix (dense, for oracles and tests).
    Eigen::MatrixXd stiffness_matrix() const;
};

RadialProblem make_radial_problem(int n, int p, std::vector<double> grid, const std::function<double(double)>& w1,
                                  const std::function<double(double)>& w0, RadialBoundary boundary);

/// Invariant p-forms on S^p x S^(n-p-1) x [0,1] under the conformal factor h(t):
/// w1 = h^(n-2p-2), w0 = h^(n-2p), uniform grid of m points, Neumann ends.
RadialProblem cylinder_operator(int n, int p, const std::function<double(double)>& h, int m);

/// Radial pinch problem on [0, R]: w1 = h^(n-2p-2) v, w0 = h^(n-2p) v with the
/// transverse density of `params.model`; f vanishes at R.
RadialProblem pinch_operator(const PinchParams& params);

/// Smallest `count` nonzero eigenvalues (Neumann: the constant mode is reported
/// as harmonic_dim = 1). Bisection on the Golub-Kahan form of the bidiagonal
/// factor, which keeps high relative accuracy on strongly graded weights.
/// Residuals are relative bracket widths.
SpectrumSlice radial_spectrum(const RadialProblem& prob, int count, double rel_tol = 1e-14);

}  // namespace cspec

#pragma once

// Generalized symmetric eigenproblems and the coexact / full spectra of the
// discrete Hodge Laplacian.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "conformal_spectra/complex.hpp"
#include "conformal_spectra/conformal_hodge.hpp"

namespace cspec {

struct SolverOptions {
    double tol = 1e-9;                   // relative eigen-residual
    std::size_t dense_threshold = 1500;  // dense below this many unknowns
    int max_iterations = 500;
    std::uint64_t seed = 0x5eed;
    double grouping = 1e-6;  // relative gap below which eigenvalues count as one cluster
};

struct EigenPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // columns, M-normalized
    std::vector<double> residuals;
};

/// m smallest eigenpairs of S x = lambda diag(mass) x.
EigenPairs solve_gevp(const Eigen::SparseMatrix<double>& S, const Eigen::VectorXd& mass, int m,
                      const SolverOptions& opts = {});
/// Dense variant with a general SPD mass matrix.
EigenPairs solve_gevp(const Eigen::MatrixXd& S, const Eigen::MatrixXd& M, int m, const SolverOptions& opts = {});

struct SpectrumSlice {
    int degree = 0;
    std::vector<double> values;  // nondecreasing, all > 0
    int harmonic_dim = 0;
    std::vector<double> residuals;
};

/// m smallest nonzero eigenvalues of delta d on coexact p-forms.
SpectrumSlice coexact_spectrum(const CellComplex& K, const ConformalProfile& h, int p, int m,
                               const SolverOptions& opts = {});

/// Every nonzero coexact eigenvalue in degree p (dense; for small complexes).
SpectrumSlice coexact_spectrum_all(const CellComplex& K, const ConformalProfile& h, int p,
                                   const SolverOptions& opts = {});

/// Nonzero eigenvalues of the full Laplacian d delta + delta d on p-forms (dense).
/// `kernel_dim` receives the number of zero eigenvalues.
std::vector<double> full_laplacian_spectrum(const CellComplex& K, const ConformalProfile& h, int p, int& kernel_dim);

struct DegreeReport {
    int degree = 0;
    int betti = 0;
    int harmonic_dim = 0;
    std::vector<double> lambda;   // nonzero full spectrum, first m
    SpectrumSlice coexact;        // mu_{p,i}
    SpectrumSlice exact;          // mu_{p-1,i}, the exact part of the p-spectrum
    double union_error = 0.0;     // max relative mismatch lambda vs merge(mu_p, mu_{p-1})
};

struct SpectrumReport {
    std::string complex_label;
    std::vector<DegreeReport> degrees;
};

SpectrumReport full_spectrum_report(const CellComplex& K, const ConformalProfile& h, const std::vector<int>& degrees,
                                    int m, const SolverOptions& opts = {});

/// CSV rows `degree,index,kind,value,residual` (kind in coexact|exact|harmonic).
void write_spectrum_csv(std::ostream& out, const SpectrumReport& report);

/// Groups sorted values whose relative gap is below `threshold`; returns cluster sizes.
std::vector<int> multiplicity_clusters(const std::vector<double>& sorted, double threshold);

}  // namespace cspec

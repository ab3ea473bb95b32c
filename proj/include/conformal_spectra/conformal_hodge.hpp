#pragma once

// Conformal metric data on a cell complex: profiles h, the weighted
// stiffness/mass pairs of the Rayleigh quotient, volume, Hodge decomposition.

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "conformal_spectra/complex.hpp"

namespace cspec {

/// Positive conformal factor h sampled on the nodes of a complex (g -> h^2 g).
class ConformalProfile {
public:
    ConformalProfile() = default;
    /// Throws InvalidArgument if any sample is not a positive finite number.
    explicit ConformalProfile(std::vector<double> samples, std::string tag = {});

    static ConformalProfile constant(const CellComplex& K, double c);
    static ConformalProfile from_function(const CellComplex& K, const std::function<double(std::span<const double>)>& h,
                                          std::string tag = {});

    const std::vector<double>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    double operator[](std::size_t i) const { return samples_[i]; }
    /// Smallest sample (the profile floor eta).
    double floor() const { return floor_; }
    const std::string& tag() const { return tag_; }

    ConformalProfile scaled(double c) const;

private:
    std::vector<double> samples_;
    double floor_ = 0.0;
    std::string tag_;
};

/// Arithmetic mean of h over the nodes of a k-cell.
double cell_average(const CellComplex& K, const ConformalProfile& h, int k, std::size_t cell);

/// Diagonal of the conformal inner product on k-cochains: star_k * avg(h)^(n-2k).
Eigen::VectorXd conformal_mass(const CellComplex& K, const ConformalProfile& h, int k);

/// Rayleigh-quotient pair for degree p: S = D^T W D, M diagonal.
struct DiscreteLaplacian {
    int degree = 0;
    int ambient_dim = 0;
    Eigen::SparseMatrix<double> D;  // coboundary from p- to (p+1)-cochains
    Eigen::VectorXd W;              // (p+1)-cell weights, h^(n-2p-2)
    Eigen::VectorXd M;              // p-cell weights, h^(n-2p)

    Eigen::SparseMatrix<double> stiffness() const;
    Eigen::SparseMatrix<double> mass() const;
    double rayleigh(const Eigen::VectorXd& x) const;
};

DiscreteLaplacian assemble_laplacian(const CellComplex& K, const ConformalProfile& h, int p);

/// Integral of h^n over the top cells.
double conformal_volume(const CellComplex& K, const ConformalProfile& h);

struct HodgeParts {
    Eigen::VectorXd exact;
    Eigen::VectorXd coexact;
    Eigen::VectorXd harmonic;
    double residual = 0.0;  // worst relative residual of the two projections
};

/// omega = d alpha + delta beta + gamma, mutually orthogonal in the conformal
/// inner product on p-cochains.
HodgeParts hodge_decompose(const CellComplex& K, const ConformalProfile& h, int p, const Eigen::VectorXd& omega,
                           double tol = 1e-12);

/// Inner product <a, b> with the conformal mass on p-cochains.
double mass_inner(const Eigen::VectorXd& M, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// `rows cols nnz` header then `i j value` lines, zero-based.
void write_triplets(std::ostream& out, const Eigen::SparseMatrix<double>& A);

}  // namespace cspec

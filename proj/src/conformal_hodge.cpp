#include "conformal_spectra/conformal_hodge.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/IterativeLinearSolvers>

#include "conformal_spectra/error.hpp"

namespace cspec {

ConformalProfile::ConformalProfile(std::vector<double> samples, std::string tag)
    : samples_(std::move(samples)), tag_(std::move(tag)) {
    if (samples_.empty()) throw InvalidArgument("profile has no samples");
    floor_ = samples_[0];
    for (double s : samples_) {
        if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("profile samples must be positive and finite");
        floor_ = std::min(floor_, s);
    }
}

ConformalProfile ConformalProfile::constant(const CellComplex& K, double c) {
    return ConformalProfile(std::vector<double>(K.node_count(), c), "constant");
}

ConformalProfile ConformalProfile::from_function(const CellComplex& K,
                                                 const std::function<double(std::span<const double>)>& h,
                                                 std::string tag) {
    std::vector<double> s(K.node_count());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = h(K.node_coords(i));
    return ConformalProfile(std::move(s), std::move(tag));
}

ConformalProfile ConformalProfile::scaled(double c) const {
    std::vector<double> s = samples_;
    for (auto& x : s) x *= c;
    return ConformalProfile(std::move(s), tag_);
}

namespace {

void check_profile(const CellComplex& K, const ConformalProfile& h) {
    if (h.size() != K.node_count())
        throw InvalidArgument("profile has " + std::to_string(h.size()) + " samples but the complex has " +
                              std::to_string(K.node_count()) + " nodes");
}

}  // namespace

double cell_average(const CellComplex& K, const ConformalProfile& h, int k, std::size_t cell) {
    auto nodes = K.cell_nodes(k, cell);
    double s = 0.0;
    for (auto v : nodes) s += h[v];
    return s / static_cast<double>(nodes.size());
}

Eigen::VectorXd conformal_mass(const CellComplex& K, const ConformalProfile& h, int k) {
    check_profile(K, h);
    const int e = K.ambient_dimension() - 2 * k;
    auto star = K.stars(k);
    Eigen::VectorXd m(static_cast<Eigen::Index>(star.size()));
    for (std::size_t c = 0; c < star.size(); ++c) m[c] = star[c] * std::pow(cell_average(K, h, k, c), e);
    return m;
}

Eigen::SparseMatrix<double> DiscreteLaplacian::stiffness() const {
    Eigen::SparseMatrix<double> S = D.transpose() * W.asDiagonal() * D;
    return S;
}

Eigen::SparseMatrix<double> DiscreteLaplacian::mass() const {
    Eigen::SparseMatrix<double> A(M.size(), M.size());
    A.reserve(Eigen::VectorXi::Constant(M.size(), 1));
    for (Eigen::Index i = 0; i < M.size(); ++i) A.insert(i, i) = M[i];
    A.makeCompressed();
    return A;
}

double DiscreteLaplacian::rayleigh(const Eigen::VectorXd& x) const {
    Eigen::VectorXd dx = D * x;
    return dx.dot(W.asDiagonal() * dx) / x.dot(M.asDiagonal() * x);
}

DiscreteLaplacian assemble_laplacian(const CellComplex& K, const ConformalProfile& h, int p) {
    if (p < 0 || p >= K.dimension())
        throw InvalidArgument("degree " + std::to_string(p) + " outside 0.." + std::to_string(K.dimension() - 1));
    DiscreteLaplacian L;
    L.degree = p;
    L.ambient_dim = K.ambient_dimension();
    L.D = coboundary_matrix(K, p);
    L.W = conformal_mass(K, h, p + 1);
    L.M = conformal_mass(K, h, p);
    return L;
}

double conformal_volume(const CellComplex& K, const ConformalProfile& h) {
    check_profile(K, h);
    const int n = K.dimension();
    const int e = K.ambient_dimension();
    auto vol = K.volumes(n);
    double total = 0.0;
    for (std::size_t c = 0; c < vol.size(); ++c) total += vol[c] * std::pow(cell_average(K, h, n, c), e);
    return total;
}

double mass_inner(const Eigen::VectorXd& M, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a.array() * M.array() * b.array()).sum();
}

namespace {

// Solves the consistent (possibly singular) SPD system A x = b.
// `scale` is the norm the right-hand side would have without cancellation; a
// rhs that is pure rounding noise relative to it is treated as zero.
Eigen::VectorXd solve_normal(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, double scale, double tol,
                             double& rel) {
    if (b.norm() <= 1e-14 * scale) {
        rel = 0.0;
        return Eigen::VectorXd::Zero(A.cols());
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * A.rows()));
    cg.compute(A);
    Eigen::VectorXd x = cg.solve(b);
    rel = (A * x - b).norm() / b.norm();
    return x;
}

}  // namespace

HodgeParts hodge_decompose(const CellComplex& K, const ConformalProfile& h, int p, const Eigen::VectorXd& omega,
                           double tol) {
    if (p < 0 || p > K.dimension())
        throw InvalidArgument("degree " + std::to_string(p) + " outside 0.." + std::to_string(K.dimension()));
    if (omega.size() != static_cast<Eigen::Index>(K.cell_count(p)))
        throw InvalidArgument("form has the wrong number of coefficients for degree " + std::to_string(p));
    const Eigen::VectorXd M = conformal_mass(K, h, p);
    HodgeParts out;
    out.exact = Eigen::VectorXd::Zero(omega.size());
    out.coexact = Eigen::VectorXd::Zero(omega.size());
    double worst = 0.0;
    if (p > 0) {
        Eigen::SparseMatrix<double> D = coboundary_matrix(K, p - 1);
        Eigen::SparseMatrix<double> A = D.transpose() * M.asDiagonal() * D;
        double rel;
        Eigen::VectorXd Mw = M.asDiagonal() * omega;
        const double scale = (D.cwiseAbs().transpose() * Mw.cwiseAbs()).norm();
        Eigen::VectorXd alpha = solve_normal(A, D.transpose() * Mw, scale, tol, rel);
        out.exact = D * alpha;
        worst = std::max(worst, rel);
    }
    if (p < K.dimension()) {
        Eigen::SparseMatrix<double> D = coboundary_matrix(K, p);
        Eigen::VectorXd Minv = M.cwiseInverse();
        Eigen::SparseMatrix<double> A = D * Minv.asDiagonal() * D.transpose();
        double rel;
        const double scale = (D.cwiseAbs() * omega.cwiseAbs()).norm();
        Eigen::VectorXd z = solve_normal(A, D * omega, scale, tol, rel);
        out.coexact = Minv.asDiagonal() * (D.transpose() * z);
        worst = std::max(worst, rel);
    }
    out.harmonic = omega - out.exact - out.coexact;
    out.residual = worst;
    if (!(worst <= std::max(1e3 * tol, 1e-8)))
        throw SolverError("Hodge projection did not converge", worst);
    return out;
}

void write_triplets(std::ostream& out, const Eigen::SparseMatrix<double>& A) {
    out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
    char buf[64];
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            std::snprintf(buf, sizeof buf, "%.17g", it.value());
            out << it.row() << ' ' << it.col() << ' ' << buf << '\n';
        }
}

}  // namespace cspec

#include "conformal_spectra/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "conformal_spectra/error.hpp"

namespace cspec {
namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Gershgorin bound on the spectral radius of a symmetric matrix.
double gershgorin(const SpMat& A) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) rows[it.row()] += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

double hybrid_denominator(double lambda, double anorm) { return std::max(std::abs(lambda), 1e-6 * anorm); }

struct Ritz {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    std::vector<double> residuals;
};

// Shift-invert block subspace iteration for the smallest eigenpairs of
// S x = lambda M x (M diagonal). `project` keeps the block inside an invariant
// subspace when the caller wants to skip a known kernel.
Ritz subspace_iteration(const SpMat& S, const Eigen::VectorXd& M, int m,
                        const std::function<void(Eigen::MatrixXd&)>& project,
                        const std::function<double(double, double)>& denominator, const SolverOptions& opts) {
    const Eigen::Index N = S.rows();
    const int b = static_cast<int>(std::min<Eigen::Index>(N, std::max(2 * m, m + 8)));
    double diag_ratio = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) diag_ratio = std::max(diag_ratio, S.coeff(i, i) / M[i]);
    const double sigma = std::max(diag_ratio, 1e-300) * 1e-8;

    SpMat shifted = S;
    for (Eigen::Index i = 0; i < N; ++i) shifted.coeffRef(i, i) += sigma * M[i];
    Eigen::SimplicialLDLT<SpMat> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) throw SolverError("shift-invert factorization failed", INFINITY);

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd X(N, b);
    for (Eigen::Index j = 0; j < b; ++j)
        for (Eigen::Index i = 0; i < N; ++i) X(i, j) = gauss(rng);
    if (project) project(X);

    const Eigen::VectorXd sqrtM = M.cwiseSqrt();
    const double anorm = gershgorin(S) / M.minCoeff();
    double best = INFINITY;
    Ritz out;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        Eigen::MatrixXd Y = ldlt.solve(M.asDiagonal() * X);
        if (project) project(Y);
        // M-orthonormalize then Rayleigh-Ritz
        Eigen::MatrixXd gram = Y.transpose() * M.asDiagonal() * Y;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ge(gram);
        Eigen::VectorXd gv = ge.eigenvalues();
        const double gmax = gv.maxCoeff();
        std::vector<int> keep;
        for (int j = 0; j < gv.size(); ++j)
            if (gv[j] > 1e-13 * gmax) keep.push_back(j);
        if (static_cast<int>(keep.size()) < m) throw SolverError("subspace collapsed during iteration", best);
        Eigen::MatrixXd B(N, keep.size());
        for (std::size_t j = 0; j < keep.size(); ++j)
            B.col(j) = Y * ge.eigenvectors().col(keep[j]) / std::sqrt(gv[keep[j]]);
        Eigen::MatrixXd T = B.transpose() * (S * B);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> te(0.5 * (T + T.transpose()));
        X = B * te.eigenvectors();
        const Eigen::VectorXd theta = te.eigenvalues();

        double worst = 0.0;
        std::vector<double> res(m);
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd r = S * X.col(i) - theta[i] * (M.asDiagonal() * X.col(i));
            double nr = (r.array() / sqrtM.array()).matrix().norm();
            double nx = (X.col(i).array() * sqrtM.array()).matrix().norm();
            res[i] = nr / (nx * denominator(theta[i], anorm));
            worst = std::max(worst, res[i]);
        }
        best = std::min(best, worst);
        if (worst <= opts.tol) {
            out.values = theta.head(m);
            out.vectors = X.leftCols(m);
            out.residuals = res;
            return out;
        }
    }
    throw SolverError("subspace iteration did not converge in " + std::to_string(opts.max_iterations) + " iterations",
                      best);
}

struct Factored {
    SpMat G;  // diag(sqrt W) D diag(1/sqrt M)
    SpMat D;
    Eigen::VectorXd W, M;
    int rank = 0;
};

Factored factor(const CellComplex& K, const ConformalProfile& h, int p) {
    DiscreteLaplacian L = assemble_laplacian(K, h, p);
    Factored f;
    f.D = L.D;
    f.W = L.W;
    f.M = L.M;
    f.G = L.W.cwiseSqrt().asDiagonal() * L.D * L.M.cwiseSqrt().cwiseInverse().asDiagonal();
    f.rank = K.boundary_rank(p + 1);
    return f;
}

// Nonzero squared singular values of G, smallest `count`, refined by the
// factored Rayleigh quotient.
SpectrumSlice dense_coexact(const Factored& f, int count) {
    const bool left = f.G.cols() <= f.G.rows();
    SpMat A = left ? SpMat(f.G.transpose() * f.G) : SpMat(f.G * f.G.transpose());
    Eigen::MatrixXd Ad(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad);
    if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed", INFINITY);
    const Eigen::Index side = Ad.rows();
    const Eigen::Index first = side - f.rank;
    SpectrumSlice s;
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd y = es.eigenvectors().col(first + i);
        Eigen::VectorXd gy = left ? Eigen::VectorXd(f.G * y) : Eigen::VectorXd(f.G.transpose() * y);
        const double lam = gy.squaredNorm() / y.squaredNorm();
        Eigen::VectorXd back = left ? Eigen::VectorXd(f.G.transpose() * gy) : Eigen::VectorXd(f.G * gy);
        const double res = (back - lam * y).norm() / (lam * y.norm());
        pairs.emplace_back(lam, res);
    }
    std::sort(pairs.begin(), pairs.end());
    for (auto& [v, r] : pairs) {
        s.values.push_back(v);
        s.residuals.push_back(r);
    }
    return s;
}

SpectrumSlice iterative_coexact(const Factored& f, int count, const SolverOptions& opts) {
    SpMat S = f.D.transpose() * f.W.asDiagonal() * f.D;
    const Eigen::VectorXd Minv = f.M.cwiseInverse();
    SpMat N = f.D * Minv.asDiagonal() * f.D.transpose();
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-14);
    cg.setMaxIterations(std::max<Eigen::Index>(2000, 10 * N.rows()));
    cg.compute(N);
    auto project = [&](Eigen::MatrixXd& X) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            Eigen::VectorXd z = cg.solve(f.D * X.col(j));
            X.col(j) = Minv.asDiagonal() * (f.D.transpose() * z);
        }
    };
    auto rel = [](double lam, double) { return std::max(std::abs(lam), std::numeric_limits<double>::min()); };
    Ritz r = subspace_iteration(S, f.M, count, project, rel, opts);
    SpectrumSlice s;
    s.values.assign(r.values.data(), r.values.data() + r.values.size());
    s.residuals = r.residuals;
    return s;
}

}  // namespace

EigenPairs solve_gevp(const Eigen::SparseMatrix<double>& S, const Eigen::VectorXd& mass, int m,
                      const SolverOptions& opts) {
    const Eigen::Index N = S.rows();
    if (S.cols() != N || mass.size() != N) throw InvalidArgument("solve_gevp: dimension mismatch");
    if (m < 1 || m > N) throw InvalidArgument("solve_gevp: requested count outside 1..dimension");
    if ((mass.array() <= 0.0).any()) throw InvalidArgument("solve_gevp: mass must be positive definite");
    EigenPairs out;
    if (static_cast<std::size_t>(N) <= opts.dense_threshold) {
        const Eigen::VectorXd isq = mass.cwiseSqrt().cwiseInverse();
        Eigen::MatrixXd A = isq.asDiagonal() * Eigen::MatrixXd(S) * isq.asDiagonal();
        A = 0.5 * (A + A.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed", INFINITY);
        const double anorm = std::max(std::abs(es.eigenvalues()[0]), std::abs(es.eigenvalues()[N - 1]));
        out.values = es.eigenvalues().head(m);
        out.vectors = isq.asDiagonal() * es.eigenvectors().leftCols(m);
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd y = es.eigenvectors().col(i);
            out.residuals.push_back((A * y - out.values[i] * y).norm() / hybrid_denominator(out.values[i], anorm));
        }
        return out;
    }
    auto hyb = [](double lam, double anorm) { return hybrid_denominator(lam, anorm); };
    Ritz r = subspace_iteration(S, mass, m, nullptr, hyb, opts);
    out.values = r.values;
    out.vectors = r.vectors;
    out.residuals = r.residuals;
    return out;
}

EigenPairs solve_gevp(const Eigen::MatrixXd& S, const Eigen::MatrixXd& M, int m, const SolverOptions&) {
    const Eigen::Index N = S.rows();
    if (S.cols() != N || M.rows() != N || M.cols() != N) throw InvalidArgument("solve_gevp: dimension mismatch");
    if (m < 1 || m > N) throw InvalidArgument("solve_gevp: requested count outside 1..dimension");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, M);
    if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed (mass not SPD?)", INFINITY);
    EigenPairs out;
    out.values = es.eigenvalues().head(m);
    out.vectors = es.eigenvectors().leftCols(m);
    const double anorm = std::max(std::abs(es.eigenvalues()[0]), std::abs(es.eigenvalues()[N - 1]));
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd x = out.vectors.col(i);
        Eigen::VectorXd Mx = M * x;
        out.residuals.push_back((S * x - out.values[i] * Mx).norm() /
                                (Mx.norm() * hybrid_denominator(out.values[i], anorm)));
    }
    return out;
}

SpectrumSlice coexact_spectrum(const CellComplex& K, const ConformalProfile& h, int p, int m,
                               const SolverOptions& opts) {
    if (m < 1) throw InvalidArgument("eigenvalue count must be positive");
    Factored f = factor(K, h, p);
    if (m > f.rank)
        throw InvalidArgument("requested " + std::to_string(m) + " coexact eigenvalues in degree " + std::to_string(p) +
                              " but only " + std::to_string(f.rank) + " are nonzero");
    const auto smaller = static_cast<std::size_t>(std::min(f.G.rows(), f.G.cols()));
    SpectrumSlice s = smaller <= opts.dense_threshold ? dense_coexact(f, m) : iterative_coexact(f, m, opts);
    s.degree = p;
    s.harmonic_dim = static_cast<int>(K.cell_count(p)) - f.rank - K.boundary_rank(p);
    return s;
}

SpectrumSlice coexact_spectrum_all(const CellComplex& K, const ConformalProfile& h, int p, const SolverOptions&) {
    Factored f = factor(K, h, p);
    SpectrumSlice s = f.rank > 0 ? dense_coexact(f, f.rank) : SpectrumSlice{};
    s.degree = p;
    s.harmonic_dim = static_cast<int>(K.cell_count(p)) - f.rank - K.boundary_rank(p);
    return s;
}

std::vector<double> full_laplacian_spectrum(const CellComplex& K, const ConformalProfile& h, int p, int& kernel_dim) {
    if (p < 0 || p > K.dimension()) throw InvalidArgument("degree out of range");
    const Eigen::VectorXd Mp = conformal_mass(K, h, p);
    const Eigen::VectorXd isq = Mp.cwiseSqrt().cwiseInverse();
    const auto N = static_cast<Eigen::Index>(K.cell_count(p));
    SpMat A(N, N);
    std::vector<SpMat> parts;
    if (p < K.dimension()) {
        SpMat G = conformal_mass(K, h, p + 1).cwiseSqrt().asDiagonal() * coboundary_matrix(K, p) * isq.asDiagonal();
        A += SpMat(G.transpose() * G);
    }
    if (p > 0) {
        SpMat G = Mp.cwiseSqrt().asDiagonal() * coboundary_matrix(K, p - 1) *
                  conformal_mass(K, h, p - 1).cwiseSqrt().cwiseInverse().asDiagonal();
        A += SpMat(G * G.transpose());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(A)};
    if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed", INFINITY);
    const double top = N ? es.eigenvalues()[N - 1] : 0.0;
    std::vector<double> nonzero;
    kernel_dim = 0;
    for (Eigen::Index i = 0; i < N; ++i) {
        const double v = es.eigenvalues()[i];
        if (v <= 1e-10 * top) {
            ++kernel_dim;
            continue;
        }
        Eigen::VectorXd y = es.eigenvectors().col(i);
        nonzero.push_back(y.dot(A * y));  // Rayleigh refinement, |y| = 1
    }
    std::sort(nonzero.begin(), nonzero.end());
    return nonzero;
}

SpectrumReport full_spectrum_report(const CellComplex& K, const ConformalProfile& h, const std::vector<int>& degrees,
                                    int m, const SolverOptions& opts) {
    if (m < 1) throw InvalidArgument("eigenvalue count must be positive");
    SpectrumReport rep;
    rep.complex_label = K.label();
    const auto betti = betti_numbers(K);
    for (int p : degrees) {
        if (p < 0 || p > K.dimension()) throw InvalidArgument("degree " + std::to_string(p) + " out of range");
        DegreeReport d;
        d.degree = p;
        d.betti = betti[p];
        if (p < K.dimension() && K.boundary_rank(p + 1) > 0)
            d.coexact = coexact_spectrum(K, h, p, std::min(m, K.boundary_rank(p + 1)), opts);
        d.coexact.degree = p;
        if (p > 0 && K.boundary_rank(p) > 0) d.exact = coexact_spectrum(K, h, p - 1, std::min(m, K.boundary_rank(p)), opts);
        d.exact.degree = p - 1;
        d.harmonic_dim = static_cast<int>(K.cell_count(p)) - K.boundary_rank(p + 1) - K.boundary_rank(p);
        if (K.cell_count(p) <= opts.dense_threshold) {
            int kernel = 0;
            auto lam = full_laplacian_spectrum(K, h, p, kernel);
            d.harmonic_dim = kernel;
            std::vector<double> merged = d.coexact.values;
            merged.insert(merged.end(), d.exact.values.begin(), d.exact.values.end());
            std::sort(merged.begin(), merged.end());
            const std::size_t count = std::min({static_cast<std::size_t>(m), lam.size(), merged.size()});
            d.lambda.assign(lam.begin(), lam.begin() + static_cast<std::ptrdiff_t>(count));
            for (std::size_t i = 0; i < count; ++i)
                d.union_error = std::max(d.union_error, std::abs(lam[i] - merged[i]) / lam[i]);
        }
        rep.degrees.push_back(std::move(d));
    }
    return rep;
}

void write_spectrum_csv(std::ostream& out, const SpectrumReport& report) {
    out << "degree,index,kind,value,residual\n";
    char buf[128];
    for (const auto& d : report.degrees) {
        for (int i = 0; i < d.harmonic_dim; ++i) out << d.degree << ',' << i + 1 << ",harmonic,0,0\n";
        for (std::size_t i = 0; i < d.coexact.values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%d,%zu,coexact,%.15g,%.3e\n", d.degree, i + 1, d.coexact.values[i],
                          d.coexact.residuals[i]);
            out << buf;
        }
        for (std::size_t i = 0; i < d.exact.values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%d,%zu,exact,%.15g,%.3e\n", d.degree, i + 1, d.exact.values[i],
                          d.exact.residuals[i]);
            out << buf;
        }
    }
}

std::vector<int> multiplicity_clusters(const std::vector<double>& v, double threshold) {
    std::vector<int> sizes;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0 && std::abs(v[i] - v[i - 1]) <= threshold * std::max(std::abs(v[i]), std::abs(v[i - 1])))
            ++sizes.back();
        else
            sizes.push_back(1);
    }
    return sizes;
}

}  // namespace cspec

#include "conformal_spectra/radial.hpp"

#include <cmath>
#include <limits>

#include "conformal_spectra/error.hpp"

namespace cspec {

std::vector<double> RadialProblem::apply(const std::vector<double>& f) const {
    const std::size_t N = unknowns();
    if (f.size() != grid.size()) throw InvalidArgument("apply: sample vector must cover the whole grid");
    std::vector<double> out(N);
    for (std::size_t i = 0; i < N; ++i) {
        double flux = 0.0;
        if (i + 1 < grid.size()) flux += K[i] * (f[i + 1] - f[i]);
        if (i > 0) flux -= K[i - 1] * (f[i] - f[i - 1]);
        out[i] = -flux / M[i];
    }
    return out;
}

Eigen::MatrixXd RadialProblem::stiffness_matrix() const {
    const auto N = static_cast<Eigen::Index>(unknowns());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t j = 0; j < K.size(); ++j) {
        const auto a = static_cast<Eigen::Index>(j), b = a + 1;
        S(a, a) += K[j];
        if (b < N) {
            S(b, b) += K[j];
            S(a, b) -= K[j];
            S(b, a) -= K[j];
        }
    }
    return S;
}

RadialProblem make_radial_problem(int n, int p, std::vector<double> grid, const std::function<double(double)>& w1,
                                  const std::function<double(double)>& w0, RadialBoundary boundary) {
    if (grid.size() < 16) throw InvalidArgument("radial grid needs at least 16 points");
    RadialProblem prob;
    prob.n = n;
    prob.p = p;
    prob.boundary = boundary;
    prob.K.resize(grid.size() - 1);
    prob.M.assign(grid.size(), 0.0);
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        const double dx = grid[j + 1] - grid[j];
        if (!(dx > 0.0)) throw InvalidArgument("radial grid must be strictly increasing");
        const double mid = 0.5 * (grid[j] + grid[j + 1]);
        const double a = w1(mid), b = w0(mid);
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
            throw InvalidArgument("radial weights must be positive and finite");
        prob.K[j] = a / dx;
        prob.M[j] += 0.5 * b * dx;
        prob.M[j + 1] += 0.5 * b * dx;
    }
    prob.grid = std::move(grid);
    return prob;
}

namespace {

std::vector<double> uniform_grid(double a, double b, int m) {
    std::vector<double> g(m);
    for (int i = 0; i < m; ++i) g[i] = a + (b - a) * i / (m - 1);
    g.back() = b;
    return g;
}

}  // namespace

RadialProblem cylinder_operator(int n, int p, const std::function<double(double)>& h, int m) {
    if (p < 1 || p > n - 2)
        throw InvalidArgument("cylinder operator needs 1 <= p <= n-2, got p=" + std::to_string(p) +
                              " n=" + std::to_string(n));
    const int a = n - 2 * p - 2;
    return make_radial_problem(
        n, p, uniform_grid(0.0, 1.0, m), [&](double t) { return std::pow(h(t), a); },
        [&](double t) { return std::pow(h(t), a + 2); }, RadialBoundary::neumann);
}

RadialProblem pinch_operator(const PinchParams& params) {
    params.validate();
    auto prof = default_profiles(params);
    const int a = params.n - 2 * params.p - 2;
    return make_radial_problem(
        params.n, params.p, uniform_grid(0.0, params.R, params.resolution),
        [&](double r) { return std::pow(prof.h(r), a) * params.density(r); },
        [&](double r) { return std::pow(prof.h(r), a + 2) * params.density(r); }, RadialBoundary::dirichlet_right);
}

namespace {

// Golub-Kahan form of an upper bidiagonal matrix with diagonal q and
// superdiagonal e: zero diagonal, off-diagonal (q0, e0, q1, e1, ..., q_{N-1}).
struct GolubKahan {
    std::vector<double> off2;  // squared off-diagonal
    std::size_t N = 0;
    double pivmin = 0.0;

    // number of singular values strictly below x (x > 0)
    std::size_t count_below(double x) const {
        std::size_t neg = 0;
        double d = -x;
        if (d < 0) ++neg;
        for (double b2 : off2) {
            if (std::abs(d) < pivmin) d = -pivmin;
            d = -x - b2 / d;
            if (d < 0) ++neg;
        }
        return neg - N;
    }
};

}  // namespace

SpectrumSlice radial_spectrum(const RadialProblem& prob, int count, double rel_tol) {
    const std::size_t m = prob.grid.size();
    if (m < 16) throw InvalidArgument("radial grid needs at least 16 points");
    if (count < 1) throw InvalidArgument("eigenvalue count must be positive");
    const bool neumann = prob.boundary == RadialBoundary::neumann;
    const std::size_t N = prob.unknowns();
    const std::size_t zero_modes = neumann ? 1 : 0;
    if (static_cast<std::size_t>(count) > N - zero_modes)
        throw InvalidArgument("requested more radial eigenvalues than unknowns");

    // Energy sum_j K_j (f_{j+1} - f_j)^2 = |B g|^2 with g = M^(1/2) f.
    std::vector<double> q(N, 0.0), e(N > 0 ? N - 1 : 0, 0.0);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        if (j >= N) break;
        q[j] = -std::sqrt(prob.K[j] / prob.M[j]);
        if (j + 1 < N) e[j] = std::sqrt(prob.K[j] / prob.M[j + 1]);
    }
    GolubKahan gk;  // 2N x 2N, so 2N - 1 off-diagonal entries
    gk.N = N;
    double bmax = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        if (j > 0) gk.off2.push_back(e[j - 1] * e[j - 1]);
        gk.off2.push_back(q[j] * q[j]);
        bmax = std::max({bmax, std::abs(q[j]), j > 0 ? std::abs(e[j - 1]) : 0.0});
    }
    gk.pivmin = std::numeric_limits<double>::min() * std::max(1.0, bmax * bmax);
    const double upper = 2.0 * bmax * (1.0 + 1e-12);

    SpectrumSlice s;
    s.degree = prob.p;
    s.harmonic_dim = static_cast<int>(zero_modes);
    for (int i = 0; i < count; ++i) {
        const std::size_t target = zero_modes + static_cast<std::size_t>(i);  // want the (target+1)-th smallest
        double hi = upper;
        double lo = upper;
        int guard = 0;
        while (gk.count_below(lo) > target) {
            lo *= 0.5;
            if (++guard > 4000) throw SolverError("radial bisection could not bracket an eigenvalue", INFINITY);
        }
        hi = std::min(upper, 2.0 * lo);
        if (gk.count_below(hi) <= target) hi = upper;
        for (int it = 0; it < 200 && hi - lo > rel_tol * lo; ++it) {
            const double mid = std::sqrt(lo * hi);
            if (gk.count_below(mid) > target)
                hi = mid;
            else
                lo = mid;
        }
        const double sigma = 0.5 * (lo + hi);
        s.values.push_back(sigma * sigma);
        s.residuals.push_back(2.0 * (hi - lo) / lo);
    }
    return s;
}

}  // namespace cspec

#include <cmath>
#include <random>
#include <sstream>

#include "conformal_spectra/conformal_hodge.hpp"
#include "conformal_spectra/error.hpp"
#include "doctest.h"

using namespace cspec;

namespace {

ConformalProfile random_profile(const CellComplex& K, std::mt19937_64& rng, double lo = 0.5, double hi = 2.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> s(K.node_count());
    for (auto& x : s) x = u(rng);
    return ConformalProfile(s, "random");
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXd v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

}  // namespace

TEST_CASE("unit profile gives the reference weights") {
    auto K = build_complex(ComplexSpec::parse("cycle:5xpath:4"));
    auto L = assemble_laplacian(K, ConformalProfile::constant(K, 1.0), 1);
    for (Eigen::Index i = 0; i < L.M.size(); ++i) CHECK(L.M[i] == doctest::Approx(K.stars(1)[i]));
    for (Eigen::Index i = 0; i < L.W.size(); ++i) CHECK(L.W[i] == doctest::Approx(K.stars(2)[i]));
    CHECK(L.degree == 1);
    CHECK(L.ambient_dim == 2);
}

TEST_CASE("constant profile scales stiffness and mass by the conformal exponents") {
    auto K = build_complex(ComplexSpec::parse("cycle:4xcycle:4xcycle:3"));
    std::mt19937_64 rng(3);
    auto h = random_profile(K, rng);
    const double c = 1.7;
    for (int p = 0; p < 3; ++p) {
        auto a = assemble_laplacian(K, h, p);
        auto b = assemble_laplacian(K, h.scaled(c), p);
        CHECK((b.W - std::pow(c, 3 - 2 * p - 2) * a.W).norm() <= 1e-13 * a.W.norm());
        CHECK((b.M - std::pow(c, 3 - 2 * p) * a.M).norm() <= 1e-13 * a.M.norm());
    }
}

TEST_CASE("degree and profile validation") {
    auto K = cycle_complex(6);
    CHECK_THROWS_AS(assemble_laplacian(K, ConformalProfile::constant(K, 1.0), 1), InvalidArgument);
    CHECK_THROWS_AS(assemble_laplacian(K, ConformalProfile::constant(K, 1.0), -1), InvalidArgument);
    CHECK_THROWS_AS(ConformalProfile(std::vector<double>{1.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(ConformalProfile(std::vector<double>{1.0, -2.0}), InvalidArgument);
    CHECK_THROWS_AS(assemble_laplacian(K, ConformalProfile(std::vector<double>(3, 1.0)), 0), InvalidArgument);
}

TEST_CASE("stiffness is PSD and mass PD on random forms") {
    std::mt19937_64 rng(11);
    auto K = build_complex(ComplexSpec::parse("cycle:4xsimplex:3"));
    for (int trial = 0; trial < 20; ++trial) {
        auto h = random_profile(K, rng, 0.1, 3.0);
        for (int p = 0; p < K.dimension(); ++p) {
            auto L = assemble_laplacian(K, h, p);
            Eigen::VectorXd x = random_vector(L.M.size(), rng);
            CHECK(x.dot(L.stiffness() * x) >= 0.0);
            CHECK(x.dot(L.mass() * x) > 0.0);
        }
    }
}

TEST_CASE("conformal volume") {
    auto K = build_complex(ComplexSpec::parse("cycle:6:2xpath:5:3"));
    CHECK(conformal_volume(K, ConformalProfile::constant(K, 1.0)) == doctest::Approx(6.0));
    CHECK(conformal_volume(K, ConformalProfile::constant(K, 0.5)) == doctest::Approx(6.0 * 0.25));
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto h1 = random_profile(K, rng);
        auto s = h1.samples();
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& x : s) x += u(rng);
        ConformalProfile h2(s);
        CHECK(conformal_volume(K, h1) <= conformal_volume(K, h2));
    }
}

TEST_CASE("Hodge decomposition of an exact form") {
    std::mt19937_64 rng(2);
    auto K = build_complex(ComplexSpec::parse("cycle:5xcycle:4"));
    auto h = random_profile(K, rng);
    Eigen::VectorXd alpha = random_vector(static_cast<Eigen::Index>(K.cell_count(0)), rng);
    Eigen::VectorXd omega = coboundary_matrix(K, 0) * alpha;
    auto parts = hodge_decompose(K, h, 1, omega);
    auto M = conformal_mass(K, h, 1);
    const double n2 = mass_inner(M, omega, omega);
    CHECK(std::sqrt(mass_inner(M, parts.coexact, parts.coexact) / n2) < 1e-10);
    CHECK(std::sqrt(mass_inner(M, parts.harmonic, parts.harmonic) / n2) < 1e-10);
}

TEST_CASE("uniform 1-cochain on a cycle is harmonic") {
    auto K = cycle_complex(8);
    Eigen::VectorXd omega = Eigen::VectorXd::Ones(8);
    auto parts = hodge_decompose(K, ConformalProfile::constant(K, 1.0), 1, omega);
    CHECK((parts.harmonic - omega).norm() < 1e-12);
    CHECK(parts.exact.norm() < 1e-12);
}

TEST_CASE("random forms on a torus split orthogonally and recombine") {
    std::mt19937_64 rng(9);
    auto K = build_complex(ComplexSpec::parse("cycle:6xcycle:5"));
    auto h = random_profile(K, rng);
    for (int p = 0; p <= 2; ++p) {
        Eigen::VectorXd omega = random_vector(static_cast<Eigen::Index>(K.cell_count(p)), rng);
        auto parts = hodge_decompose(K, h, p, omega);
        auto M = conformal_mass(K, h, p);
        const double n2 = mass_inner(M, omega, omega);
        Eigen::VectorXd sum = parts.exact + parts.coexact + parts.harmonic;
        CHECK((sum - omega).norm() <= 1e-10 * omega.norm());
        CHECK(std::abs(mass_inner(M, parts.exact, parts.coexact)) < 1e-10 * n2);
        CHECK(std::abs(mass_inner(M, parts.exact, parts.harmonic)) < 1e-10 * n2);
        CHECK(std::abs(mass_inner(M, parts.coexact, parts.harmonic)) < 1e-10 * n2);
        // the harmonic part is closed and coclosed
        if (p < 2) CHECK((coboundary_matrix(K, p) * parts.harmonic).norm() < 1e-9 * omega.norm());
        if (p > 0) {
            Eigen::VectorXd co = coboundary_matrix(K, p - 1).transpose() * (M.asDiagonal() * parts.harmonic);
            CHECK(co.norm() < 1e-9 * std::sqrt(n2) * M.maxCoeff());
        }
    }
}

TEST_CASE("triplet export") {
    auto K = path_complex(3);
    auto L = assemble_laplacian(K, ConformalProfile::constant(K, 1.0), 0);
    std::ostringstream os;
    write_triplets(os, L.stiffness());
    std::istringstream in(os.str());
    int r, c, nnz;
    in >> r >> c >> nnz;
    CHECK(r == 3);
    CHECK(c == 3);
    CHECK(nnz == 7);
}

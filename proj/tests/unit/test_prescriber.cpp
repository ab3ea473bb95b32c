#include <cmath>

#include "conformal_spectra/cover.hpp"
#include "conformal_spectra/error.hpp"
#include "conformal_spectra/prescriber.hpp"
#include "doctest.h"

using namespace cspec;

namespace {

PrescriptionTarget two_targets() {
    PrescriptionTarget t;
    t.n = 5;
    t.N = 2;
    t.nu = {{1.0, 2.0}};
    t.V0 = 1.0;
    t.delta = 0.1;
    return t;
}

PrescriptionTarget one_target() {
    PrescriptionTarget t;
    t.n = 5;
    t.N = 1;
    t.nu = {{1.0}};
    t.V0 = 1.0;
    t.delta = 0.1;
    return t;
}

}  // namespace

TEST_CASE("target validation") {
    auto t = two_targets();
    CHECK_NOTHROW(t.validate());
    t.nu = {{1.0, 1.0}};
    CHECK_THROWS_AS(t.validate(), InvalidArgument);
    t.nu = {{2.0, 1.0}};
    CHECK_THROWS_AS(t.validate(), InvalidArgument);
    t = two_targets();
    t.delta = 0.6;  // half the gap is 0.5
    CHECK_THROWS_AS(t.validate(), InvalidArgument);
    t = two_targets();
    t.V0 = 0.05;
    CHECK_THROWS_AS(t.validate(), InvalidArgument);
    t = two_targets();
    t.nu = {{1.0, 2.0}, {3.0, 4.0}};  // n = 5 has a single degree
    CHECK_THROWS_AS(t.validate(), InvalidArgument);
    t = two_targets();
    t.nu = {{-1.0, 2.0}};
    CHECK_THROWS_AS(t.validate(), InvalidArgument);

    auto j = target_from_json(R"({"n": 7, "N": 1, "nu": [[1.5], [2.5]], "V0": 2, "delta": 0.2})");
    CHECK(j.k() == 2);
    CHECK(j.max_nu() == 2.5);
    CHECK_NOTHROW(j.validate());
    CHECK_THROWS_AS(target_from_json("{"), ParseError);
    CHECK_THROWS_AS(target_from_json(R"({"n": 5})"), ParseError);
}

TEST_CASE("phi map is homothety equivariant") {
    auto t = two_targets();
    ParameterPoint x;
    x.V = 1.0;
    x.xi = t.nu;
    realize(t, x, 0.05);
    auto r = phi_map(t, x, 0.05);
    CHECK(r.volume == doctest::Approx(1.0).epsilon(1e-13));
    for (double s : {2.0, 0.5, 1.37}) {
        ParameterPoint y = x;
        for (auto& row : y.c)
            for (auto& c : row) c *= s;
        y.base_c *= s;
        auto q = phi_map(t, y, 0.05);
        CHECK(std::abs(q.volume / r.volume - std::pow(s, 5)) <= 1e-12 * std::pow(s, 5));
        for (int i = 0; i < 2; ++i) CHECK(std::abs(q.mu[0][i] / r.mu[0][i] * s * s - 1.0) <= 1e-12);
        CHECK(std::abs(q.mu_k1 / r.mu_k1 * s * s - 1.0) <= 1e-12);
        CHECK(std::abs(q.mu_next[0] / r.mu_next[0] * s * s - 1.0) <= 1e-12);
    }
}

TEST_CASE("phi map tends to the identity as the handles thin") {
    auto t = one_target();
    double prev = INFINITY;
    for (double eps : {0.1, 0.05, 0.02, 0.01}) {
        ParameterPoint x;
        x.V = 1.0;
        x.xi = t.nu;
        realize(t, x, eps);
        auto r = phi_map(t, x, eps);
        const double dev = std::abs(r.mu[0][0] - x.xi[0][0]);
        CHECK(dev < prev);
        prev = dev;
        if (eps == 0.1) CHECK(dodziuk_interval(x.xi[0][0], std::exp(eps), t.n).contains(r.mu[0][0]));
        CHECK(r.mu_k1 > t.max_nu());
        CHECK_FALSE(r.ambiguous);
    }
    ParameterPoint bad;
    bad.V = 1.0;
    bad.xi = t.nu;
    realize(t, bad, 0.1);
    bad.c[0][0] = -1.0;
    CHECK_THROWS_AS(phi_map(t, bad, 0.1), InvalidArgument);
    bad.V = 1e-6;
    CHECK_THROWS_AS(realize(t, bad, 0.1), InvalidArgument);
}

TEST_CASE("two targets in degree 1") {
    auto t = two_targets();
    auto r = prescribe(t);
    CHECK(r.converged);
    CHECK(r.evaluations <= 200);
    CHECK(r.error <= 1e-2);
    CHECK(std::abs(r.achieved.volume - 1.0) <= 1e-2);
    CHECK(r.achieved.mu_k1 > 2.0);
    CHECK(r.achieved.mu_next[0] > 2.0);
    CHECK_FALSE(r.achieved.ambiguous);
    REQUIRE(r.stages.size() == 4u);
    for (std::size_t i = 1; i < r.stages.size(); ++i) CHECK(r.stages[i].phi_step < r.stages[i - 1].phi_step);
    CHECK(prescribe_json(t, r).find("\"converged\": true") != std::string::npos);
}

TEST_CASE("single target agrees with the bisection oracle") {
    auto t = one_target();
    PrescribeOptions o;
    o.tol = 1e-9;
    auto r = prescribe(t, o);
    REQUIRE(r.converged);
    CHECK(r.evaluations <= 200);
    auto b = bisection_oracle(t, o.eps_schedule.back());
    CHECK(std::abs(b.achieved.mu[0][0] - 1.0) <= 1e-8);
    CHECK(std::abs(r.point.c[0][0] - b.c) <= 1e-3 * b.c);
    CHECK(std::abs(r.point.base_c - b.base_c) <= 1e-3 * b.base_c);
    CHECK(std::abs(r.achieved.mu[0][0] - b.achieved.mu[0][0]) <= 1e-3);
    CHECK(std::abs(r.achieved.volume - b.achieved.volume) <= 1e-3);
    CHECK_THROWS_AS(bisection_oracle(two_targets(), 0.1), InvalidArgument);
}

TEST_CASE("a tight budget returns the best point with a failure flag") {
    auto t = two_targets();
    PrescribeOptions o;
    o.tol = 1e-14;
    o.max_evaluations = 6;
    auto r = prescribe(t, o);
    CHECK_FALSE(r.converged);
    CHECK(r.evaluations == 6);
    CHECK(r.message.find("budget") != std::string::npos);
    o.eps_schedule = {0.01, 0.1};
    CHECK_THROWS_AS(prescribe(t, o), InvalidArgument);
}

TEST_CASE("two degrees in dimension 7") {
    PrescriptionTarget t;
    t.n = 7;
    t.N = 1;
    t.nu = {{1.0}, {1.5}};
    t.V0 = 1.0;
    t.delta = 0.1;
    PrescribeOptions o;
    o.eps_schedule = {0.1, 0.05};
    auto r = prescribe(t, o);
    CHECK(r.converged);
    CHECK(r.error <= 1e-2);
    CHECK(r.achieved.mu_k1 > 1.5);
    MESSAGE("n=7 mu=" << r.achieved.mu[0][0] << "," << r.achieved.mu[1][0] << " next=" << r.achieved.mu_next[0] << ","
                      << r.achieved.mu_next[1] << " k1=" << r.achieved.mu_k1 << " evals=" << r.evaluations);
}

#include <cmath>
#include <sstream>

#include "conformal_spectra/error.hpp"
#include "conformal_spectra/pinch.hpp"
#include "conformal_spectra/radial.hpp"
#include "doctest.h"

using namespace cspec;

TEST_CASE("profiles follow the four-interval layout") {
    PinchParams prm;
    prm.eta = 0.1;
    auto prof = default_profiles(prm);
    CHECK(prof.h(0.6) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(prof.f(0.3) == 1.0);
    CHECK(prof.f(0.0) == 1.0);
    CHECK(prof.f(0.9) == 0.0);
    CHECK(prof.h(0.1) == 1.0);
    CHECK(prof.h(0.95) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(prof.grid.size() == 2000u);
    CHECK(prof.h_samples.back() == doctest::Approx(0.1));

    // monotone joins, scanned on 1e4 points
    double hp = prof.h(0.0), fp = prof.f(0.0);
    for (int i = 1; i <= 10000; ++i) {
        const double r = i / 10000.0;
        CHECK_MESSAGE(prof.h(r) <= hp, r);
        CHECK_MESSAGE(prof.f(r) <= fp, r);
        CHECK(prof.h(r) >= prm.eta * (1 - 1e-14));
        CHECK(prof.f(r) >= 0.0);
        hp = prof.h(r);
        fp = prof.f(r);
    }
    // f' against a centered difference
    for (double r : {0.55, 0.6, 0.7}) CHECK(prof.df(r) == doctest::Approx((prof.f(r + 1e-6) - prof.f(r - 1e-6)) / 2e-6).epsilon(1e-6));

    prm.eta = 1.0;
    auto flat = default_profiles(prm);
    for (double h : flat.h_samples) CHECK(h == 1.0);
}

TEST_CASE("parameter validation") {
    PinchParams prm;
    prm.n = 4;
    CHECK_THROWS_AS(prm.validate(), InvalidArgument);
    prm.n = 6;
    prm.p = 2;  // k = 1
    CHECK_THROWS_AS(prm.validate(), InvalidArgument);
    prm.p = 1;
    prm.eta = 0.0;
    CHECK_THROWS_AS(prm.validate(), InvalidArgument);
    prm.eta = 1.5;
    CHECK_THROWS_AS(prm.validate(), InvalidArgument);
    prm.eta = 0.5;
    CHECK_NOTHROW(prm.validate());
    CHECK(PinchParams{7, 2}.k() == 2);
    CHECK(PinchParams{8, 2}.k() == 2);
}

TEST_CASE("bound carries the exponent n-2p-2 exactly") {
    PinchParams prm;
    prm.n = 5;
    prm.p = 1;
    prm.eta = 1.0;
    const double b5 = rayleigh_bound(prm);
    CHECK(b5 > 0.0);
    prm.eta = 0.03;
    const double x = rayleigh_bound(prm);
    prm.eta = 0.003;
    CHECK(x / rayleigh_bound(prm) == doctest::Approx(10.0).epsilon(1e-13));

    prm.n = 6;
    prm.eta = 1.0;
    const double b6 = rayleigh_bound(prm);
    prm.eta = 0.01;
    CHECK(rayleigh_bound(prm) == doctest::Approx(1e-4 * b6).epsilon(1e-13));

    // closed form for the ball model: int_{I3} f'^2 v / int_{I1} v with f' = -6x(1-x)/q
    prm.n = 5;
    prm.eta = 1.0;
    const double q = 0.25;
    // n-p-1 = 3: v = c r^3
    double num = 0.0;
    const int steps = 200000;
    for (int i = 0; i < steps; ++i) {
        const double r = 2 * q + (i + 0.5) * q / steps, t = (r - 2 * q) / q;
        num += 36.0 * t * t * (1 - t) * (1 - t) / (q * q) * r * r * r * q / steps;
    }
    const double den = std::pow(q, 4) / 4.0;
    CHECK(rayleigh_bound(prm) == doctest::Approx(num / den).epsilon(1e-9));
}

TEST_CASE("unpinched volume is half the target") {
    for (auto model : {TransverseModel::ball, TransverseModel::cylinder}) {
        PinchParams prm;
        prm.model = model;
        prm.volume = 3.0;
        prm.eta = 1.0;
        CHECK(pinch_volume(prm) == doctest::Approx(3.0).epsilon(1e-13));  // V/2 inside + V/2 outside
        prm.eta = 0.1;
        CHECK(pinch_volume(prm) < 3.0);
    }
}

TEST_CASE("sweep rows: decreasing, below the bound, gap elsewhere") {
    PinchParams prm;
    prm.n = 5;
    prm.p = 1;
    prm.resolution = 1000;
    std::vector<double> etas{1.0, 1e-1, 1e-2, 1e-3, 1e-4};
    auto rows = pinch_sweep(prm, etas, {.threads = 2});
    REQUIRE(rows.size() == etas.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].error.empty());
        CHECK(rows[i].mu1 <= rows[i].bound);
        CHECK(rows[i].mu2 >= 0.5 * rows[0].mu2);
        REQUIRE(rows[i].mu_other.size() == 1u);
        CHECK(rows[i].mu_other[0].first == 2);
        CHECK(rows[i].mu_other[0].second >= 0.5 * rows[0].mu_other[0].second);
        CHECK(rows[i].mu1_normalized == doctest::Approx(rows[i].mu1 * std::pow(rows[i].volume, 0.4)));
        if (i > 0) CHECK(rows[i].mu1 < rows[i - 1].mu1);
    }
    CHECK(rows.back().mu2 / rows.back().mu1 > 1e3);
    CHECK(loglog_slope(rows) == doctest::Approx(1.0).epsilon(0.15));

    // eta = 1 row is the unpinched problem
    PinchParams flat = prm;
    flat.eta = 1.0;
    CHECK(rows[0].mu1 == radial_spectrum(pinch_operator(flat), 1).values[0]);

    // thread count does not change the numbers
    auto serial = pinch_sweep(prm, etas);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(serial[i].mu1 == rows[i].mu1);

    std::ostringstream os;
    write_pinch_csv(os, prm, rows);
    std::string header;
    std::getline(std::istringstream(os.str()) >> std::ws, header);
    CHECK(header.rfind("n,p,eta,mu1,mu2,eq5_bound,volume", 0) == 0);

    CHECK_THROWS_AS(pinch_sweep(prm, {1e-2, 1e-1}), InvalidArgument);
    CHECK_THROWS_AS(pinch_sweep(prm, {}), InvalidArgument);
}

TEST_CASE("homothety of the target volume leaves normalized values fixed") {
    PinchParams a;
    a.eta = 0.05;
    a.resolution = 400;
    PinchParams b = a;
    b.volume = 7.0;
    auto ra = pinch_sweep(a, {a.eta}), rb = pinch_sweep(b, {b.eta});
    CHECK(rb[0].volume == doctest::Approx(7.0 * ra[0].volume).epsilon(1e-13));
    CHECK(rb[0].mu1 == doctest::Approx(ra[0].mu1).epsilon(1e-12));
    CHECK(rb[0].mu1_normalized == doctest::Approx(ra[0].mu1_normalized).epsilon(1e-12));
}

TEST_CASE("coarse complex reproduces the radial cylinder model when unpinched") {
    PinchParams prm;
    prm.eta = 1.0;
    auto c = coarse_pinch_check(prm, 4, 16);
    // same nodes and weights: invariant 1-forms see exactly the 16-point radial problem
    PinchParams radial = prm;
    radial.model = TransverseModel::cylinder;
    radial.resolution = 16;
    CHECK(c.mu1 == doctest::Approx(radial_spectrum(pinch_operator(radial), 1).values[0]).epsilon(1e-8));
    CHECK(c.mu1 <= c.bound);
    CHECK(c.mu1 == doctest::Approx(c.radial_mu1).epsilon(0.1));
    CHECK(c.mu_q1 > 0.0);

    prm.eta = 0.1;
    auto d = coarse_pinch_check(prm, 4, 16);
    CHECK(d.mu1 < c.mu1);
    CHECK(d.mu1 <= d.bound);
    CHECK(d.mu2 >= 0.5 * c.mu2);
    CHECK(d.mu_q1 >= 0.5 * c.mu_q1);

    prm.n = 7;
    CHECK_THROWS_AS(coarse_pinch_check(prm, 4, 12), InvalidArgument);
}

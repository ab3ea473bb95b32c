// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "conformal_spectra/cover.hpp"
#include "conformal_spectra/eigensolve.hpp"
#include "conformal_spectra/error.hpp"
#include "conformal_spectra/handle.hpp"
#include "conformal_spectra/pinch.hpp"
#include "conformal_spectra/prescriber.hpp"

using namespace cspec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int failures = 0;
bool quiet = false;  // set during the determinism rerun

void report(int id, bool ok, const std::string& name, const std::string& detail) {
    if (quiet) return;
    std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

// Serialized bodies of every run, compared across two passes for criterion 9.
struct Bodies {
    std::vector<std::string> items;
    void add(std::string s) { items.push_back(std::move(s)); }
};

const std::vector<std::pair<int, int>> kPinchCases{{5, 1}, {7, 1}, {7, 2}, {8, 2}};
const std::vector<double> kEtas{1.0, 1e-1, 1e-2, 1e-3, 1e-4};

std::string pinch_body(const PinchParams& prm, const std::vector<PinchRow>& rows) {
    std::ostringstream os;
    write_pinch_csv(os, prm, rows);
    return os.str();
}

std::vector<PinchRow> run_pinch(int n, int p, int threads) {
    PinchParams prm;
    prm.n = n;
    prm.p = p;
    prm.resolution = 2000;
    PinchSweepOptions o;
    o.coarse_check = (n == 5 && p == 1);
    o.threads = threads;
    return pinch_sweep(prm, kEtas, o);
}

void criteria_1_2(Bodies& bodies, int threads) {
    bool ok1 = true, ok2 = true;
    std::string d1, d2;
    for (auto [n, p] : kPinchCases) {
        const auto t0 = Clock::now();
        auto rows = run_pinch(n, p, threads);
        const double dt = seconds_since(t0);
        PinchParams prm;
        prm.n = n;
        prm.p = p;
        prm.resolution = 2000;
        bodies.add(pinch_body(prm, rows));

        const double expect = n - 2 * p - 2;
        const double slope = loglog_slope(rows);
        bool bound_ok = true;
        for (const auto& r : rows)
            if (!r.error.empty() || !(r.mu1 <= r.bound)) bound_ok = false;
        const bool slope_ok = std::abs(slope - expect) <= 0.15 * std::abs(expect);
        ok1 = ok1 && slope_ok && bound_ok && dt <= 60.0;
        char buf[200];
        std::snprintf(buf, sizeof buf, "(%d,%d) slope %.4f vs %g, bound %s, %.1fs; ", n, p, slope, expect,
                      bound_ok ? "ok" : "VIOLATED", dt);
        d1 += buf;

        // every tracked quantity against its eta = 1 value
        const auto& ref = rows.front();
        double worst = INFINITY;
        for (const auto& r : rows) {
            if (!r.error.empty()) {
                worst = -1.0;
                continue;
            }
            worst = std::min(worst, r.mu2 / ref.mu2);
            for (std::size_t q = 0; q < r.mu_other.size(); ++q)
                worst = std::min(worst, r.mu_other[q].second / ref.mu_other[q].second);
            if (r.coarse && ref.coarse) {
                worst = std::min(worst, r.coarse->mu2 / ref.coarse->mu2);
                worst = std::min(worst, r.coarse->mu_q1 / ref.coarse->mu_q1);
            }
        }
        ok2 = ok2 && worst >= 0.5;
        std::snprintf(buf, sizeof buf, "(%d,%d) min ratio %.3f; ", n, p, worst);
        d2 += buf;
    }
    report(1, ok1, "pinch scaling", d1 + "tolerance +-15%, <= 60 s each");
    report(2, ok2, "single small eigenvalue", d2 + "threshold 0.5 (mu_p2, cylinder mu_q1, coarse complex mu_12 and mu_21)");
}

struct Instance {
    CellComplex K;
    ConformalProfile h;
};

std::vector<Instance> hodge_instances(std::uint64_t seed) {
    const char* specs[] = {"cycle:9",           "path:7xcycle:4",   "simplex:3",           "simplex:4",
                           "cycle:4xcycle:5",   "halfopen:5xcycle:4", "cycle:3xcycle:3xcycle:3", "path:4xsimplex:3",
                           "halfopen:4xpath:4", "cycle:6:2xpath:3:0.5", "simplex:3xcycle:3",  "path:3xpath:3xpath:3"};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.3);
    std::vector<Instance> out;
    for (const char* s : specs) {
        Instance in;
        in.K = build_complex(ComplexSpec::parse(s));
        std::vector<double> samples(in.K.node_count());
        for (auto& x : samples) x = std::exp(g(rng));
        in.h = ConformalProfile(std::move(samples), "random");
        out.push_back(std::move(in));
    }
    return out;
}

std::size_t total_cells(const CellComplex& K) {
    std::size_t c = 0;
    for (int k = 0; k <= K.dimension(); ++k) c += K.cell_count(k);
    return c;
}

void criterion_3(Bodies& bodies) {
    auto inst = hodge_instances(3);
    double worst = 0.0;
    int betti_mismatch = 0, too_big = 0;
    for (const auto& in : inst) {
        if (total_cells(in.K) > 500) ++too_big;
        std::vector<int> degrees;
        for (int p = 0; p <= in.K.dimension(); ++p) degrees.push_back(p);
        auto rep = full_spectrum_report(in.K, in.h, degrees, 100000);
        for (const auto& d : rep.degrees) {
            worst = std::max(worst, d.union_error);
            if (d.harmonic_dim != d.betti) ++betti_mismatch;
        }
        std::ostringstream os;
        write_spectrum_csv(os, rep);
        bodies.add(os.str());
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu instances, max union error %.2e (tol 1e-8), harmonic/Betti mismatches %d, oversize %d",
                  inst.size(), worst, betti_mismatch, too_big);
    report(3, inst.size() >= 10 && worst <= 1e-8 && betti_mismatch == 0 && too_big == 0, "Hodge identities", buf);
}

void criterion_4(Bodies& bodies) {
    auto inst = hodge_instances(4);
    double worst_mu = 0.0, worst_vol = 0.0;
    for (const auto& in : inst) {
        const int n = in.K.ambient_dimension();
        const double v0 = conformal_volume(in.K, in.h);
        for (double c : {0.37, 2.5, 3.0}) {
            auto hc = in.h.scaled(c);
            const double v = conformal_volume(in.K, hc);
            worst_vol = std::max(worst_vol, std::abs(v / v0 / std::pow(c, n) - 1.0));
            for (int p = 0; p < in.K.dimension(); ++p) {
                if (in.K.boundary_rank(p + 1) == 0) continue;
                auto a = coexact_spectrum_all(in.K, in.h, p).values;
                auto b = coexact_spectrum_all(in.K, hc, p).values;
                for (std::size_t i = 0; i < a.size(); ++i)
                    worst_mu = std::max(worst_mu, std::abs(b[i] / a[i] * c * c - 1.0));
                std::string s;
                for (double x : b) s += g17(x) + '\n';
                bodies.add(s);
            }
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "max |ratio c^2 - 1| %.2e, max |vol ratio c^-n - 1| %.2e (tol 1e-12)", worst_mu,
                  worst_vol);
    report(4, worst_mu <= 1e-12 && worst_vol <= 1e-12, "homothety exactness", buf);
}

void criterion_5(Bodies& bodies, int threads) {
    DodziukOptions o;
    o.tau = 2.0;
    o.n = 5;
    o.trials = 100;
    o.seed = 1;
    o.threads = threads;
    const auto t0 = Clock::now();
    auto rep = dodziuk_check(o);
    const double dt = seconds_since(t0);
    double lo = INFINITY, hi = 0.0;
    std::string body;
    for (const auto& t : rep.trials) {
        lo = std::min(lo, t.min_ratio);
        hi = std::max(hi, t.max_ratio);
        body += std::to_string(t.index) + ',' + t.complex + ',' + std::to_string(t.compared) + ',' + g17(t.min_ratio) + ',' +
                g17(t.max_ratio) + '\n';
    }
    bodies.add(body);
    char buf[240];
    std::snprintf(buf, sizeof buf, "%zu pairs, tau 2, ratios in [%.3f, %.3f] inside [%.3g, %.3g], %d violations, %.1fs",
                  rep.trials.size(), lo, hi, rep.ratio_interval.lo, rep.ratio_interval.hi, rep.violations, dt);
    report(5, rep.trials.size() == 100 && rep.violations == 0 && dt <= 120.0, "Dodziuk containment", buf);
}

void criterion_6(Bodies& bodies) {
    auto corpus = cover_corpus(1);
    int unsound = 0;
    std::string body;
    for (const auto& inst : corpus) {
        auto c = evaluate_cover(inst);
        if (!(c.sound && c.glue_bound <= c.mu_true)) ++unsound;
        body += c.label + ',' + g17(c.mu_true) + ',' + g17(c.glue_bound) + ',' + g17(c.mcgowan.bound) + '\n';
    }
    bodies.add(body);

    // reference examples, exact arithmetic
    CoverData one;
    one.mu = {5.0};
    auto r1 = mcgowan_bound(one);
    CoverData two;
    two.mu = {1.0, 1.0};
    two.c_rho = 1.0;
    two.overlaps = {{0, 1, 1.0, 0}};
    auto r2 = mcgowan_bound(two);
    const bool refs = r1.denominator == 0.2 && r1.bound == 5.0 && r2.denominator == 10.0 && r2.bound == 0.1 &&
                      gluing_denominator(GlueData{1.0, 1.0, 1.0, 0.0, 1.0}) == 66.0;

    // monotonicity: bounds rise with the eigenvalues, fall with c_rho and volratio
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    int mono_fail = 0;
    for (int t = 0; t < 2000; ++t) {
        GlueData gd{u(rng), u(rng), u(rng), u(rng), u(rng)};
        const double b = gluing_bound(gd), s = 1.0 + u(rng);
        GlueData x = gd;
        x.mu1 *= s;
        mono_fail += gluing_bound(x) < b;
        x = gd;
        x.mu2 *= s;
        mono_fail += gluing_bound(x) < b;
        x = gd;
        x.mu12 *= s;
        mono_fail += gluing_bound(x) < b;
        x = gd;
        x.c_rho *= s;
        mono_fail += gluing_bound(x) > b;
        x = gd;
        x.volratio *= s;
        mono_fail += gluing_bound(x) > b;
        CoverData c;
        c.mu = {u(rng), u(rng), u(rng)};
        c.c_rho = u(rng);
        c.overlaps = {{0, 1, u(rng), 0}, {1, 2, u(rng), 1}};
        const double m = mcgowan_bound(c).bound;
        for (std::size_t i = 0; i < 3; ++i) {
            CoverData y = c;
            y.mu[i] *= s;
            mono_fail += mcgowan_bound(y).bound < m;
        }
        for (std::size_t i = 0; i < 2; ++i) {
            CoverData y = c;
            y.overlaps[i].mu *= s;
            mono_fail += mcgowan_bound(y).bound < m;
        }
        CoverData y = c;
        y.c_rho *= s;
        mono_fail += mcgowan_bound(y).bound > m;
    }
    char buf[240];
    std::snprintf(buf, sizeof buf, "%zu corpus instances, %d unsound; reference examples %s; %d monotonicity failures",
                  corpus.size(), unsound, refs ? "exact" : "MISMATCH", mono_fail);
    report(6, corpus.size() >= 5 && unsound == 0 && refs && mono_fail == 0, "bound soundness", buf);
}

void criterion_7(Bodies& bodies, int threads) {
    auto a = build_complex(ComplexSpec::parse("cycle:12:1xcycle:8:0.7")).with_ambient_dimension(3);
    auto b = build_complex(ComplexSpec::parse("cycle:10:1.3xcycle:9:0.9")).with_ambient_dimension(3);
    auto ha = ConformalProfile::constant(a, 1.0), hb = ConformalProfile::constant(b, 1.0);
    HandleSpec hs;
    hs.length = 0.1;
    HandleSweepOptions o;
    o.m = 4;
    o.threads = threads;
    const auto t0 = Clock::now();
    auto rows = handle_sweep(a, ha, b, hb, hs, {0.1, 0.05, 0.02, 0.01}, o);
    const double dt = seconds_since(t0);
    std::ostringstream os;
    write_handle_csv(os, rows);
    bodies.add(os.str());
    bool errors = false;
    for (const auto& r : rows) errors = errors || !r.error.empty() || r.values.size() != 4u;
    const double first = rows.front().deviation, last = rows.back().deviation;
    char buf[200];
    std::snprintf(buf, sizeof buf, "deviation %.4f at eps 0.1 -> %.4f at eps 0.01 (limits 0.05 and half), %.1fs", first,
                  last, dt);
    report(7, !errors && last <= 0.05 && last <= 0.5 * first && dt <= 60.0, "handle convergence", buf);
}

void criterion_8(Bodies& bodies, int threads) {
    PrescriptionTarget t;
    t.n = 5;
    t.N = 2;
    t.nu = {{1.0, 2.0}};
    t.V0 = 1.0;
    t.delta = 0.1;
    NetworkModel model;
    model.threads = threads;
    auto r = prescribe(t, {}, model);
    bodies.add(prescribe_json(t, r));
    const double e1 = std::abs(r.achieved.mu[0][0] - 1.0), e2 = std::abs(r.achieved.mu[0][1] - 2.0) / 2.0,
                 ev = std::abs(r.achieved.volume - 1.0);
    const bool multi_ok = r.converged && e1 <= 1e-2 && e2 <= 1e-2 && ev <= 1e-2 && r.achieved.mu_k1 > 2.0 &&
                          r.evaluations <= 200 && !r.achieved.ambiguous;

    PrescriptionTarget s;
    s.n = 5;
    s.N = 1;
    s.nu = {{1.0}};
    s.V0 = 1.0;
    s.delta = 0.1;
    PrescribeOptions tight;
    tight.tol = 1e-9;
    auto rs = prescribe(s, tight, model);
    auto oracle = bisection_oracle(s, tight.eps_schedule.back(), model);
    bodies.add(prescribe_json(s, rs));
    const double dc = std::abs(rs.point.c[0][0] - oracle.c) / oracle.c;
    const double db = std::abs(rs.point.base_c - oracle.base_c) / oracle.base_c;
    const double dmu = std::abs(rs.achieved.mu[0][0] - oracle.achieved.mu[0][0]);
    const bool single_ok = rs.converged && dc <= 1e-3 && db <= 1e-3 && dmu <= 1e-3;

    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "N=2: errors %.1e %.1e %.1e, mu_k+1,1 %.3f, %d evaluations; N=1 vs bisection: dc %.1e, dbase %.1e, "
                  "dmu %.1e (tol 1e-3)",
                  e1, e2, ev, r.achieved.mu_k1, r.evaluations, dc, db, dmu);
    report(8, multi_ok && single_ok, "prescription", buf);
}

Bodies run_all(int threads) {
    Bodies bodies;
    criteria_1_2(bodies, threads);
    criterion_3(bodies);
    criterion_4(bodies);
    criterion_5(bodies, threads);
    criterion_6(bodies);
    criterion_7(bodies, threads);
    criterion_8(bodies, threads);
    return bodies;
}

}  // namespace

int main() {
    try {
        const auto t0 = Clock::now();
        auto first = run_all(1);
        quiet = true;
        auto second = run_all(2);
        quiet = false;
        std::size_t differ = 0;
        for (std::size_t i = 0; i < first.items.size(); ++i)
            if (i >= second.items.size() || first.items[i] != second.items[i]) ++differ;
        char buf[200];
        std::snprintf(buf, sizeof buf, "%zu result bodies rerun (1 vs 2 threads), %zu differ", first.items.size(), differ);
        report(9, differ == 0 && first.items.size() == second.items.size(), "determinism", buf);
        std::printf("total %.1fs, %d failing\n", seconds_since(t0), failures);
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance harness aborted: %s\n", e.what());
        return 1;
    }
    return failures;
}

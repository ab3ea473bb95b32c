#include "conformal_spectra/prescriber.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "conformal_spectra/error.hpp"
#include "conformal_spectra/handle.hpp"
#include "conformal_spectra/parallel.hpp"
#include "conformal_spectra/pinch.hpp"
#include "conformal_spectra/radial.hpp"

namespace cspec {

using nlohmann::json;

void PrescriptionTarget::validate() const {
    if (n < 5) throw InvalidArgument("prescription needs n >= 5");
    if (N < 1) throw InvalidArgument("N must be >= 1");
    if (static_cast<int>(nu.size()) != k())
        throw InvalidArgument("nu needs one row per degree p = 1.." + std::to_string(k()));
    double min_gap = INFINITY;
    for (const auto& row : nu) {
        if (static_cast<int>(row.size()) != N) throw InvalidArgument("every nu row needs N entries");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!(row[i] > 0.0) || !std::isfinite(row[i])) throw InvalidArgument("targets must be positive");
            if (i > 0) {
                if (!(row[i] > row[i - 1])) throw InvalidArgument("targets must increase strictly within a degree");
                min_gap = std::min(min_gap, row[i] - row[i - 1]);
            }
        }
    }
    if (!(V0 > 0.0) || !std::isfinite(V0)) throw InvalidArgument("V0 must be positive");
    if (!(delta > 0.0) || !(delta < V0) || !(delta < 0.5 * min_gap))
        throw InvalidArgument("delta must satisfy 0 < delta < V0 and delta < half the smallest target gap");
}

double PrescriptionTarget::max_nu() const {
    double m = 0.0;
    for (const auto& row : nu)
        for (double x : row) m = std::max(m, x);
    return m;
}

PrescriptionTarget target_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("targets: ") + e.what());
    }
    PrescriptionTarget t;
    try {
        t.n = j.at("n").get<int>();
        t.N = j.at("N").get<int>();
        t.nu = j.at("nu").get<std::vector<std::vector<double>>>();
        t.V0 = j.at("V0").get<double>();
        if (j.contains("delta")) t.delta = j.at("delta").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("targets: ") + e.what());
    }
    return t;
}

namespace {

void check_model(const NetworkModel& m) {
    if (!(m.eta > 0.0) || !(m.eta <= 1.0)) throw InvalidArgument("pinch floor eta must lie in (0, 1]");
    if (!(m.R > 0.0)) throw InvalidArgument("pinch radius must be positive");
    if (m.sphere_resolution < 8 || m.base_resolution < 4 || m.handle_resolution < 2)
        throw InvalidArgument("network resolutions too small");
    if (!(m.base_gap_factor > 1.0)) throw InvalidArgument("base gap factor must exceed 1");
    if (!(m.base_volume > 0.0) || !(m.handle_length > 0.0)) throw InvalidArgument("base volume and handle length must be positive");
}

PinchParams sphere_params(const PrescriptionTarget& t, int p, double eta, const NetworkModel& m) {
    PinchParams prm;
    prm.n = t.n;
    prm.p = p;
    prm.R = m.R;
    prm.eta = eta;
    prm.resolution = m.sphere_resolution;
    prm.volume = 1.0;
    return prm;
}

// Radial chain of one pinched sphere in the degree-p network (unit homothety).
struct Sphere {
    CellComplex chain;
    std::vector<double> h;  // node samples of the pinch profile
};

Sphere make_sphere(const PrescriptionTarget& t, int p, double eta, const NetworkModel& m) {
    auto prm = sphere_params(t, p, eta, m);
    auto prof = default_profiles(prm);
    Sphere s;
    s.chain = radial_chain(prof.grid, [&](double r) { return prm.density(r); }, true, t.n - 2 * p);
    s.h = prof.h_samples;
    return s;
}

double isolated_mu1(const PrescriptionTarget& t, int p, double eta, const NetworkModel& m) {
    auto s = make_sphere(t, p, eta, m);
    return coexact_spectrum(s.chain, ConformalProfile(s.h), 0, 1, m.solver).values.at(0);
}

double base_length(const PrescriptionTarget& t, const NetworkModel& m) {
    return std::numbers::pi / (2.0 * std::sqrt(m.base_gap_factor * t.max_nu()));
}

// Degree-(q) value of a sphere pinched for degree p, from the invariant-form cylinder problem.
double cylinder_mu1(const PrescriptionTarget& t, int p, int q, double eta, const NetworkModel& m) {
    auto prm = sphere_params(t, p, eta, m);
    auto prof = default_profiles(prm);
    auto cyl = cylinder_operator(t.n, q, [&](double x) { return prof.h(x * prm.R); }, m.sphere_resolution);
    return radial_spectrum(cyl, 1).values.at(0);
}

double sphere_volume(const PrescriptionTarget& t, int p, double eta, const NetworkModel& m) {
    return pinch_volume(sphere_params(t, p, eta, m));
}

double handle_reference_volume(const PrescriptionTarget& t, double eps, const NetworkModel& m) {
    // every target sphere hangs on one handle; cross-section S^(n-1) of radius eps, length L
    return t.k() * t.N * unit_sphere_volume(t.n - 1) * std::pow(eps, t.n - 1) * m.handle_length;
}

void check_point(const PrescriptionTarget& t, const ParameterPoint& x) {
    const auto k = static_cast<std::size_t>(t.k());
    if (x.c.size() != k || x.eta.size() != k) throw InvalidArgument("parameter point does not match the targets");
    for (std::size_t p = 0; p < k; ++p) {
        if (static_cast<int>(x.c[p].size()) != t.N || static_cast<int>(x.eta[p].size()) != t.N)
            throw InvalidArgument("parameter point does not match the targets");
        for (int i = 0; i < t.N; ++i) {
            if (!(x.c[p][i] > 0.0) || !std::isfinite(x.c[p][i])) throw InvalidArgument("homothety factors must be positive");
            if (!(x.eta[p][i] > 0.0) || !(x.eta[p][i] <= 1.0)) throw InvalidArgument("pinch floors must lie in (0, 1]");
        }
    }
    if (!(x.base_c > 0.0) || !std::isfinite(x.base_c)) throw InvalidArgument("base factor must be positive");
}

double max_rel_error(const PrescriptionTarget& t, const PhiResult& r) {
    double e = std::abs(r.volume - t.V0) / t.V0;
    for (int p = 0; p < t.k(); ++p)
        for (int i = 0; i < t.N; ++i) e = std::max(e, std::abs(r.mu[p][i] - t.nu[p][i]) / t.nu[p][i]);
    return e;
}

bool gap_ok(const PrescriptionTarget& t, const PhiResult& r) {
    const double top = t.max_nu();
    if (!(r.mu_k1 > top)) return false;
    for (double v : r.mu_next)
        if (!(v > top)) return false;
    return true;
}

// Largest floor in model.eta / 2^j whose sphere, scaled to hit xi, takes at most
// its share V / (2 k N) of the volume.
double choose_eta(const PrescriptionTarget& t, int p, double xi, double V, const NetworkModel& m) {
    double eta = m.eta;
    for (int j = 0; j < 40; ++j, eta *= 0.5) {
        const double c = std::sqrt(isolated_mu1(t, p, eta, m) / xi);
        if (std::pow(c, t.n) * sphere_volume(t, p, eta, m) <= V / (2.0 * t.k() * t.N)) return eta;
    }
    throw InvalidArgument("no pinch floor fits the requested volume");
}

}  // namespace

PhiResult phi_map(const PrescriptionTarget& t, const ParameterPoint& x, double eps, const NetworkModel& m) {
    t.validate();
    check_model(m);
    check_point(t, x);
    if (!(eps > 0.0)) throw InvalidArgument("handle radius eps must be positive");
    const int k = t.k(), N = t.N, n = t.n;

    PhiResult out;
    out.mu.assign(k, {});
    out.mu_next.assign(k, 0.0);

    // cylinder values of every sphere in every degree other than its own, and in degree k+1
    std::vector<std::vector<double>> foreign(k + 1);
    double sphere_k1 = INFINITY;
    std::vector<std::vector<std::vector<double>>> cyl(k, std::vector<std::vector<double>>(N));
    parallel_for(static_cast<std::size_t>(k * N), m.threads, [&](std::size_t idx) {
        const int p = static_cast<int>(idx) / N + 1, i = static_cast<int>(idx) % N;
        auto& v = cyl[p - 1][i];
        v.assign(k + 2, 0.0);
        for (int q = 1; q <= k + 1; ++q)
            if (q != p) v[q] = cylinder_mu1(t, p, q, x.eta[p - 1][i], m) / (x.c[p - 1][i] * x.c[p - 1][i]);
    });
    for (int p = 1; p <= k; ++p)
        for (int i = 0; i < N; ++i) {
            for (int q = 1; q <= k; ++q)
                if (q != p) foreign[q].push_back(cyl[p - 1][i][q]);
            sphere_k1 = std::min(sphere_k1, cyl[p - 1][i][k + 1]);
        }

    const double lB = base_length(t, m);
    std::vector<int> ambiguous(k, 0);
    parallel_for(static_cast<std::size_t>(k), m.threads, [&](std::size_t idx) {
        const int p = static_cast<int>(idx) + 1;
        CellComplex G = halfopen_complex(m.base_resolution, lB).with_ambient_dimension(n - 2 * p);
        std::vector<double> prof(G.node_count(), x.base_c);
        const auto base_vertices = static_cast<int>(G.cell_count(0));
        for (int i = 0; i < N; ++i) {
            auto s = make_sphere(t, p, x.eta[p - 1][i], m);
            std::vector<double> hs = s.h;
            for (auto& v : hs) v *= x.c[p - 1][i];
            HandleSpec hsp;
            hsp.eps = eps;
            hsp.length = m.handle_length;
            hsp.resolution = m.handle_resolution;
            hsp.profile_scale = x.base_c;
            hsp.left_vertex = N == 1 ? 0 : i * (base_vertices - 1) / N;
            hsp.right_vertex = static_cast<int>(s.chain.cell_count(0)) - 1;
            auto g = glue_complexes(G, ConformalProfile(prof), s.chain, ConformalProfile(hs), hsp);
            G = std::move(g.complex);
            prof = g.profile.samples();
        }
        auto spec = coexact_spectrum(G, ConformalProfile(prof), 0, N + 1, m.solver);
        std::vector<double> all = spec.values;
        all.insert(all.end(), foreign[p].begin(), foreign[p].end());
        std::sort(all.begin(), all.end());
        all.resize(N + 1);
        auto clusters = multiplicity_clusters(all, m.solver.grouping);
        for (int c : clusters)
            if (c > 1) ambiguous[idx] = 1;
        out.mu_next[idx] = all[N];
        all.resize(N);
        out.mu[idx] = std::move(all);
    });
    out.ambiguous = std::any_of(ambiguous.begin(), ambiguous.end(), [](int a) { return a != 0; });

    // with a constant profile the base eigenvalue is the same in every degree
    const double base_lambda = std::pow(std::numbers::pi / (2.0 * lB), 2) / (x.base_c * x.base_c);
    out.mu_k1 = std::min(base_lambda, sphere_k1);

    double vol = std::pow(x.base_c, n) * (m.base_volume + handle_reference_volume(t, eps, m));
    for (int p = 1; p <= k; ++p)
        for (int i = 0; i < N; ++i)
            vol += std::pow(x.c[p - 1][i], n) * sphere_volume(t, p, x.eta[p - 1][i], m);
    out.volume = vol;
    return out;
}

void realize(const PrescriptionTarget& t, ParameterPoint& x, double eps, const NetworkModel& m) {
    t.validate();
    check_model(m);
    const int k = t.k(), N = t.N, n = t.n;
    if (static_cast<int>(x.xi.size()) != k) throw InvalidArgument("requested eigenvalues do not match the targets");
    if (x.eta.empty()) {
        x.eta.assign(k, std::vector<double>(N, m.eta));
        for (int p = 1; p <= k; ++p)
            for (int i = 0; i < N && i < static_cast<int>(x.xi[p - 1].size()); ++i)
                x.eta[p - 1][i] = choose_eta(t, p, x.xi[p - 1][i], x.V, m);
    }
    x.c.assign(k, std::vector<double>(N, 0.0));
    double spheres = 0.0;
    for (int p = 1; p <= k; ++p) {
        if (static_cast<int>(x.xi[p - 1].size()) != N || static_cast<int>(x.eta[p - 1].size()) != N)
            throw InvalidArgument("requested eigenvalues do not match the targets");
        for (int i = 0; i < N; ++i) {
            const double xi = x.xi[p - 1][i];
            if (!(xi > 0.0) || !std::isfinite(xi)) throw InvalidArgument("requested eigenvalues must be positive");
            const double eta = x.eta[p - 1][i];
            x.c[p - 1][i] = std::sqrt(isolated_mu1(t, p, eta, m) / xi);
            spheres += std::pow(x.c[p - 1][i], n) * sphere_volume(t, p, eta, m);
        }
    }
    const double rest = x.V - spheres;
    if (!(rest > 0.0)) throw InvalidArgument("infeasible: the pinched spheres alone exceed the requested volume");
    x.base_c = std::pow(rest / (m.base_volume + handle_reference_volume(t, eps, m)), 1.0 / n);
}

PrescribeResult prescribe(const PrescriptionTarget& t, const PrescribeOptions& o, const NetworkModel& m) {
    t.validate();
    check_model(m);
    if (!(o.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (o.eps_schedule.empty()) throw InvalidArgument("eps schedule is empty");
    for (std::size_t i = 0; i < o.eps_schedule.size(); ++i)
        if (!(o.eps_schedule[i] > 0.0) || (i > 0 && !(o.eps_schedule[i] < o.eps_schedule[i - 1])))
            throw InvalidArgument("eps schedule must be positive and strictly decreasing");
    if (!(o.damping > 0.0) || !(o.damping <= 1.0)) throw InvalidArgument("damping must lie in (0, 1]");
    if (o.max_evaluations < 1) throw InvalidArgument("evaluation budget must be positive");

    PrescribeResult res;
    ParameterPoint x;
    x.V = t.V0;
    x.xi = t.nu;
    double best = INFINITY;
    bool budget_left = true;
    for (double eps : o.eps_schedule) {
        PrescribeStage st;
        st.eps = eps;
        double err = INFINITY;
        PhiResult r;
        while (true) {
            if (res.evaluations >= o.max_evaluations) {
                budget_left = false;
                break;
            }
            realize(t, x, eps, m);
            r = phi_map(t, x, eps, m);
            ++res.evaluations;
            ++st.evaluations;
            err = max_rel_error(t, r);
            // only points at the finest eps count as answers
            if (eps == o.eps_schedule.back() && err < best) {
                best = err;
                res.point = x;
                res.achieved = r;
                res.error = err;
            }
            if (err <= o.tol) break;
            for (int p = 0; p < t.k(); ++p)
                for (int i = 0; i < t.N; ++i) x.xi[p][i] += o.damping * (t.nu[p][i] - r.mu[p][i]);
            x.V += o.damping * (t.V0 - r.volume);
        }
        st.error = err;
        double step = std::abs(r.volume - x.V) / x.V;
        for (int p = 0; p < t.k() && !r.mu.empty(); ++p)
            for (int i = 0; i < t.N; ++i) step = std::max(step, std::abs(r.mu[p][i] - x.xi[p][i]) / x.xi[p][i]);
        st.phi_step = step;
        res.stages.push_back(st);
        if (!budget_left) break;
    }
    if (!budget_left) {
        res.converged = false;
        res.message = "evaluation budget exhausted";
        if (!std::isfinite(best)) res.message += " before the finest eps";
        return res;
    }
    if (res.achieved.ambiguous) {
        res.message = "achieved values closer than the grouping threshold";
        return res;
    }
    if (!gap_ok(t, res.achieved)) {
        res.message = "spectral gap guard failed";
        return res;
    }
    res.converged = res.error <= o.tol;
    res.message = res.converged ? "converged" : "tolerance not reached";
    return res;
}

OracleResult bisection_oracle(const PrescriptionTarget& t, double eps, const NetworkModel& m, double rel_tol) {
    t.validate();
    if (t.k() != 1 || t.N != 1) throw InvalidArgument("the bisection oracle handles a single target (k = 1, N = 1)");
    const double nu = t.nu[0][0];
    const double eta = choose_eta(t, 1, nu, t.V0, m);
    const double Vs = sphere_volume(t, 1, eta, m);
    const double Vb = m.base_volume + handle_reference_volume(t, eps, m);
    OracleResult out;
    ParameterPoint x;
    x.V = t.V0;
    x.xi = t.nu;
    x.eta = {{eta}};
    auto eval = [&](double logc) {
        const double c = std::exp(logc);
        const double rest = t.V0 - std::pow(c, t.n) * Vs;
        if (!(rest > 0.0)) throw InvalidArgument("infeasible: the pinched sphere alone exceeds V0");
        x.c = {{c}};
        x.base_c = std::pow(rest / Vb, 1.0 / t.n);
        ++out.evaluations;
        return phi_map(t, x, eps, m);
    };
    // mu decreases with the sphere factor: bracket around the isolated-sphere guess
    const double c0 = std::sqrt(isolated_mu1(t, 1, eta, m) / nu);
    const double cmax = std::pow(t.V0 / Vs, 1.0 / t.n);
    double lo = std::log(c0) - 0.5, hi = std::min(std::log(c0) + 0.5, std::log(cmax) - 1e-12);
    for (int i = 0; i < 60 && eval(lo).mu[0][0] < nu; ++i) lo -= 0.5;
    if (!(eval(hi).mu[0][0] < nu)) throw SolverError("bisection oracle could not bracket the target", 1.0);
    while (hi - lo > rel_tol) {
        const double mid = 0.5 * (lo + hi);
        if (eval(mid).mu[0][0] > nu)
            lo = mid;
        else
            hi = mid;
    }
    out.achieved = eval(0.5 * (lo + hi));
    out.c = x.c[0][0];
    out.base_c = x.base_c;
    return out;
}

std::string prescribe_json(const PrescriptionTarget& t, const PrescribeResult& r) {
    json j;
    j["target"] = {{"n", t.n}, {"N", t.N}, {"nu", t.nu}, {"V0", t.V0}, {"delta", t.delta}};
    j["converged"] = r.converged;
    j["message"] = r.message;
    j["evaluations"] = r.evaluations;
    j["max_rel_error"] = r.error;
    j["point"] = {{"V", r.point.V}, {"xi", r.point.xi}, {"eta", r.point.eta}, {"c", r.point.c}, {"base_c", r.point.base_c}};
    j["achieved"] = {{"volume", r.achieved.volume},
                     {"mu", r.achieved.mu},
                     {"mu_next", r.achieved.mu_next},
                     {"mu_k1", r.achieved.mu_k1},
                     {"ambiguous", r.achieved.ambiguous}};
    json stages = json::array();
    for (const auto& s : r.stages)
        stages.push_back({{"eps", s.eps}, {"evaluations", s.evaluations}, {"error", s.error}, {"phi_step", s.phi_step}});
    j["stages"] = stages;
    return j.dump(2);
}

}  // namespace cspec

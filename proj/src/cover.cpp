#include "conformal_spectra/cover.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <json.hpp>

#include "conformal_spectra/error.hpp"
#include "conformal_spectra/parallel.hpp"

namespace cspec {

using nlohmann::json;

Interval dodziuk_interval(double lambda, double tau, int n) {
    if (!(tau >= 1.0) || !std::isfinite(tau)) throw InvalidArgument("quasi-isometry ratio tau must be >= 1");
    if (!(lambda >= 0.0)) throw InvalidArgument("eigenvalue must be nonnegative");
    if (n < 1) throw InvalidArgument("dimension must be positive");
    const double f = std::pow(tau, 3 * n - 1);
    return {lambda / f, lambda * f};
}

void CoverData::validate() const {
    if (mu.empty()) throw InvalidArgument("cover has no domains");
    if (degree < 1) throw InvalidArgument("cover degree q must be >= 1");
    for (double m : mu)
        if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("domain eigenvalues must be positive");
    if (!(c_rho >= 0.0) || !std::isfinite(c_rho)) throw InvalidArgument("c_rho must be nonnegative");
    std::set<std::pair<int, int>> seen;
    const int K = static_cast<int>(mu.size());
    for (const auto& o : overlaps) {
        if (o.i < 0 || o.j < 0 || o.i >= K || o.j >= K || o.i == o.j)
            throw InvalidArgument("overlap refers to an invalid domain pair");
        if (!(o.mu > 0.0) || !std::isfinite(o.mu)) throw InvalidArgument("intersection eigenvalues must be positive");
        if (o.harmonic_dim < 0) throw InvalidArgument("harmonic dimensions must be nonnegative");
        if (!seen.emplace(std::min(o.i, o.j), std::max(o.i, o.j)).second)
            throw InvalidArgument("each pair of domains may overlap at most once");
    }
}

McGowanResult mcgowan_bound(const CoverData& data, double a, double b) {
    data.validate();
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("constants a and b must be positive");
    McGowanResult r;
    for (const auto& o : data.overlaps) r.k_q += o.harmonic_dim;
    double D = 0.0;
    for (std::size_t i = 0; i < data.mu.size(); ++i) {
        D += 1.0 / data.mu[i];
        for (const auto& o : data.overlaps) {
            int j = -1;
            if (o.i == static_cast<int>(i)) j = o.j;
            if (o.j == static_cast<int>(i)) j = o.i;
            if (j < 0) continue;
            D += (b * data.c_rho / o.mu + 1.0) * (1.0 / data.mu[i] + 1.0 / data.mu[j]);
        }
    }
    r.denominator = D;
    r.bound = a / D;
    return r;
}

void GlueData::validate() const {
    for (double x : {mu1, mu2, mu12, volratio})
        if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("gluing data must be positive");
    if (!(c_rho >= 0.0) || !std::isfinite(c_rho)) throw InvalidArgument("c_rho must be nonnegative");
}

double gluing_denominator(const GlueData& g) {
    g.validate();
    const double s = 2.0 / g.mu1 + 2.0 / g.mu2;
    return 3.0 * (1.0 / g.mu1 + 1.0 / g.mu2 + 4.0 * (g.c_rho / g.mu12 + 1.0) * s + g.volratio * g.volratio * s);
}

double gluing_bound(const GlueData& g) { return 1.0 / gluing_denominator(g); }

double partition_gradient_bound(double w) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("overlap width must be positive");
    return 1.0 / (w * w);
}

namespace {

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
}

template <class F>
auto field(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad field '") + what + "': " + e.what());
    }
}

}  // namespace

CoverData cover_data_from_json(const std::string& text) {
    json j = parse_json(text);
    if (!j.is_object()) throw ParseError("cover config must be a JSON object");
    CoverData d;
    d.degree = field("degree", [&] { return j.value("degree", 1); });
    d.mu = field("mu", [&] { return j.at("mu").get<std::vector<double>>(); });
    d.c_rho = field("c_rho", [&] { return j.value("c_rho", 0.0); });
    if (j.contains("overlaps")) {
        for (const auto& o : field("overlaps", [&] { return j.at("overlaps"); })) {
            CoverOverlap ov;
            ov.i = field("overlaps.i", [&] { return o.at("i").get<int>(); });
            ov.j = field("overlaps.j", [&] { return o.at("j").get<int>(); });
            ov.mu = field("overlaps.mu", [&] { return o.at("mu").get<double>(); });
            ov.harmonic_dim = field("overlaps.harmonic_dim", [&] { return o.value("harmonic_dim", 0); });
            d.overlaps.push_back(ov);
        }
    }
    d.validate();
    return d;
}

GlueData glue_data_from_json(const std::string& text) {
    json j = parse_json(text);
    if (j.is_object() && j.contains("glue")) j = j["glue"];
    if (!j.is_object()) throw ParseError("glue config must be a JSON object");
    GlueData g;
    g.mu1 = field("mu1", [&] { return j.at("mu1").get<double>(); });
    g.mu2 = field("mu2", [&] { return j.at("mu2").get<double>(); });
    g.mu12 = field("mu12", [&] { return j.at("mu12").get<double>(); });
    g.c_rho = field("c_rho", [&] { return j.value("c_rho", 0.0); });
    g.volratio = field("volratio", [&] { return j.value("volratio", 1.0); });
    g.validate();
    return g;
}

namespace {

// Smooth random conformal factor: exp of a few low Fourier modes in every coordinate.
std::function<double(std::span<const double>)> smooth_random(std::uint64_t seed, int dims, double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(3 * dims), ph(3 * dims);
    for (auto& x : a) x = amplitude * u(rng);
    for (auto& x : ph) x = 3.0 * u(rng);
    return [a, ph, dims](std::span<const double> x) {
        double s = 0.0;
        for (int d = 0; d < dims; ++d)
            for (int k = 0; k < 3; ++k) s += a[3 * d + k] * std::sin(2.0 * std::numbers::pi * (k + 1) * x[d] + ph[3 * d + k]);
        return std::exp(s);
    };
}

// amplitude 0 gives the flat profile
CoverInstance split_product(const std::string& name, const CellComplex& F, int degree, std::uint64_t seed,
                            double amplitude) {
    // interval of 9 nodes on [0, 1]; pieces [0, 5/8] and [3/8, 1], overlap [3/8, 5/8]
    const int m = 9;
    const double a = 1.0 / (m - 1);
    CoverInstance inst;
    inst.label = name;
    inst.degree = degree;
    inst.whole = product_complex(F, path_complex(m, 1.0));
    inst.left = product_complex(F, path_complex(6, 5 * a, 0.0));
    inst.right = product_complex(F, path_complex(6, 5 * a, 3 * a));
    inst.overlap = product_complex(F, path_complex(3, 2 * a, 3 * a));
    inst.width = 2 * a;
    auto h = smooth_random(seed, inst.whole.coord_dim(), amplitude);
    inst.h_whole = ConformalProfile::from_function(inst.whole, h, name);
    inst.h_left = ConformalProfile::from_function(inst.left, h, name);
    inst.h_right = ConformalProfile::from_function(inst.right, h, name);
    inst.h_overlap = ConformalProfile::from_function(inst.overlap, h, name);
    return inst;
}

}  // namespace

std::vector<CoverInstance> cover_corpus(std::uint64_t seed) {
    std::vector<CoverInstance> out;
    const auto circle = cycle_complex(8);
    const auto s2 = simplex_boundary_complex(3);
    const auto torus = product_complex(cycle_complex(6), cycle_complex(6));
    const auto seg = path_complex(5);
    out.push_back(split_product("cycle:8 x I flat", circle, 1, seed, 0.0));
    out.push_back(split_product("cycle:8 x I random", circle, 1, seed + 1, 0.15));
    out.push_back(split_product("S2 x I flat p=1", s2, 1, seed + 2, 0.0));
    out.push_back(split_product("S2 x I random p=2", s2, 2, seed + 3, 0.1));
    out.push_back(split_product("T2 x I random p=1", torus, 1, seed + 4, 0.1));
    out.push_back(split_product("T2 x I flat p=2", torus, 2, seed + 5, 0.0));
    out.push_back(split_product("square random p=1", seg, 1, seed + 6, 0.15));
    return out;
}

CoverCheck evaluate_cover(const CoverInstance& inst, const SolverOptions& opts) {
    const int p = inst.degree;
    if (p < 1) throw InvalidArgument("gluing bound needs degree p >= 1");
    CoverCheck c;
    c.label = inst.label;
    c.degree = p;
    c.mu_true = coexact_spectrum(inst.whole, inst.h_whole, p, 1, opts).values[0];
    c.glue.mu1 = coexact_spectrum(inst.left, inst.h_left, p, 1, opts).values[0];
    c.glue.mu2 = coexact_spectrum(inst.right, inst.h_right, p, 1, opts).values[0];
    c.glue.mu12 = coexact_spectrum(inst.overlap, inst.h_overlap, p - 1, 1, opts).values[0];
    // |grad rho|^2 in the deformed metric picks up h^-2 on the overlap
    double hmin = INFINITY;
    for (double x : inst.h_overlap.samples()) hmin = std::min(hmin, x);
    c.glue.c_rho = partition_gradient_bound(inst.width) / (hmin * hmin);
    c.glue.volratio = conformal_volume(inst.right, inst.h_right) / conformal_volume(inst.overlap, inst.h_overlap);
    c.glue_bound = gluing_bound(c.glue);

    CoverData cd;
    cd.degree = p;
    cd.mu = {c.glue.mu1, c.glue.mu2};
    cd.c_rho = c.glue.c_rho;
    cd.overlaps.push_back({0, 1, c.glue.mu12, betti_numbers(inst.overlap)[p]});
    c.mcgowan = mcgowan_bound(cd);
    c.mu_kq_true = coexact_spectrum(inst.whole, inst.h_whole, p, c.mcgowan.k_q, opts).values.back();
    c.sound = c.glue_bound <= c.mu_true;
    return c;
}

namespace {

std::vector<CellComplex> dodziuk_pool(int n) {
    std::vector<CellComplex> pool;
    for (auto spec : {"cycle:7", "path:6xcycle:4", "simplex:3", "simplex:4", "cycle:4xcycle:4", "halfopen:5xcycle:4"})
        pool.push_back(build_complex(ComplexSpec::parse(spec)).with_ambient_dimension(n));
    return pool;
}

std::vector<std::vector<double>> all_coexact(const CellComplex& K, const ConformalProfile& h) {
    std::vector<std::vector<double>> out;
    for (int p = 0; p < K.dimension(); ++p) out.push_back(coexact_spectrum_all(K, h, p).values);
    return out;
}

}  // namespace

DodziukReport dodziuk_check(const DodziukOptions& opts) {
    if (opts.trials < 0) throw InvalidArgument("trial count must be nonnegative");
    DodziukReport rep;
    rep.ratio_interval = dodziuk_interval(1.0, opts.tau, opts.n);
    const auto pool = dodziuk_pool(opts.n);
    rep.trials.resize(opts.trials);
    const double spread = 0.5 * std::log(opts.tau);
    parallel_for(rep.trials.size(), opts.threads, [&](std::size_t t) {
        // per-trial stream so results do not depend on scheduling
        std::mt19937_64 rng(opts.seed * 0x9e3779b97f4a7c15ULL + t);
        const CellComplex& K = pool[t % pool.size()];
        std::normal_distribution<double> g(0.0, 0.3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> h(K.node_count()), ht(K.node_count());
        for (std::size_t i = 0; i < h.size(); ++i) {
            h[i] = std::exp(g(rng));
            ht[i] = h[i] * std::exp(spread * u(rng));
        }
        const auto ref = all_coexact(K, ConformalProfile(h));
        const auto def = all_coexact(K, ConformalProfile(ht));
        DodziukTrial& tr = rep.trials[t];
        tr.index = static_cast<int>(t);
        tr.complex = K.label();
        tr.min_ratio = INFINITY;
        tr.max_ratio = -INFINITY;
        for (std::size_t p = 0; p < ref.size(); ++p) {
            if (ref[p].size() != def[p].size()) throw SolverError("coexact ranks differ between conformal pair", 0.0);
            for (std::size_t i = 0; i < ref[p].size(); ++i) {
                const double r = def[p][i] / ref[p][i];
                tr.min_ratio = std::min(tr.min_ratio, r);
                tr.max_ratio = std::max(tr.max_ratio, r);
                ++tr.compared;
                if (!rep.ratio_interval.contains(r)) ++tr.violations;
            }
        }
    });
    for (const auto& tr : rep.trials) rep.violations += tr.violations;
    return rep;
}

}  // namespace cspec

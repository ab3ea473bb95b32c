#include "conformal_spectra/capi.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <random>
#include <sstream>

#include <json.hpp>

#include "conformal_spectra/cover.hpp"
#include "conformal_spectra/error.hpp"
#include "conformal_spectra/handle.hpp"
#include "conformal_spectra/pinch.hpp"
#include "conformal_spectra/prescriber.hpp"
#include "conformal_spectra/radial.hpp"

struct cs_complex {
    cspec::CellComplex complex;
};

struct cs_profile {
    cspec::ConformalProfile profile;
};

namespace {

thread_local std::string last_error;

cs_status fail(cs_status code, const std::string& what) {
    last_error = what;
    return code;
}

template <class F>
cs_status guarded(F&& body) {
    try {
        last_error.clear();
        body();
        return CS_OK;
    } catch (const cspec::Error& e) {
        switch (e.code()) {
            case cspec::ErrorCode::invalid_argument: return fail(CS_ERR_INVALID_ARGUMENT, e.what());
            case cspec::ErrorCode::parse: return fail(CS_ERR_PARSE, e.what());
            case cspec::ErrorCode::solver: return fail(CS_ERR_SOLVER, e.what());
            case cspec::ErrorCode::io: return fail(CS_ERR_IO, e.what());
        }
        return fail(CS_ERR_INTERNAL, e.what());
    } catch (const std::bad_alloc&) {
        return fail(CS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(CS_ERR_INTERNAL, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void need(const void* p, const char* what) {
    if (!p) throw cspec::InvalidArgument(std::string(what) + " is null");
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

std::vector<double> list(const double* v, std::size_t count) {
    if (count > 0) need(v, "list");
    return std::vector<double>(v, v + count);
}

}  // namespace

extern "C" {

const char* cs_version(void) { return "0.1.0"; }

const char* cs_last_error(void) { return last_error.c_str(); }

void cs_string_free(char* s) { std::free(s); }

cs_status cs_complex_create(const char* spec, int ambient_dim, cs_complex** out) {
    return guarded([&] {
        need(spec, "spec");
        need(out, "out");
        auto K = cspec::build_complex(cspec::ComplexSpec::parse(spec));
        if (ambient_dim > 0) K = K.with_ambient_dimension(ambient_dim);
        *out = new cs_complex{std::move(K)};
    });
}

void cs_complex_free(cs_complex* c) { delete c; }

cs_status cs_complex_dimension(const cs_complex* c, int* dim) {
    return guarded([&] {
        need(c, "complex");
        need(dim, "dim");
        *dim = c->complex.dimension();
    });
}

cs_status cs_complex_cell_count(const cs_complex* c, int k, size_t* count) {
    return guarded([&] {
        need(c, "complex");
        need(count, "count");
        *count = c->complex.cell_count(k);
    });
}

cs_status cs_complex_node_count(const cs_complex* c, size_t* count) {
    return guarded([&] {
        need(c, "complex");
        need(count, "count");
        *count = c->complex.node_count();
    });
}

cs_status cs_complex_betti(const cs_complex* c, int* betti, size_t capacity, size_t* count) {
    return guarded([&] {
        need(c, "complex");
        need(count, "count");
        auto b = cspec::betti_numbers(c->complex);
        *count = b.size();
        for (std::size_t i = 0; i < b.size() && i < capacity; ++i) betti[i] = b[i];
    });
}

cs_status cs_profile_constant(const cs_complex* c, double value, cs_profile** out) {
    return guarded([&] {
        need(c, "complex");
        need(out, "out");
        *out = new cs_profile{cspec::ConformalProfile::constant(c->complex, value)};
    });
}

cs_status cs_profile_from_samples(const double* samples, size_t count, cs_profile** out) {
    return guarded([&] {
        need(out, "out");
        *out = new cs_profile{cspec::ConformalProfile(list(samples, count))};
    });
}

cs_status cs_profile_random(const cs_complex* c, double sigma, uint64_t seed, cs_profile** out) {
    return guarded([&] {
        need(c, "complex");
        need(out, "out");
        if (!(sigma >= 0.0)) throw cspec::InvalidArgument("sigma must be nonnegative");
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<double> s(c->complex.node_count());
        for (auto& x : s) x = std::exp(sigma * g(rng));
        *out = new cs_profile{cspec::ConformalProfile(std::move(s), "random")};
    });
}

void cs_profile_free(cs_profile* h) { delete h; }

cs_status cs_conformal_volume(const cs_complex* c, const cs_profile* h, double* volume) {
    return guarded([&] {
        need(c, "complex");
        need(h, "profile");
        need(volume, "volume");
        *volume = cspec::conformal_volume(c->complex, h->profile);
    });
}

cs_status cs_spectrum_csv(const cs_complex* c, const cs_profile* h, const int* degrees, size_t ndegrees, int m,
                          double tol, char** csv) {
    return guarded([&] {
        need(c, "complex");
        need(h, "profile");
        need(csv, "csv");
        if (ndegrees == 0) throw cspec::InvalidArgument("no degrees requested");
        need(degrees, "degrees");
        cspec::SolverOptions o;
        if (tol > 0.0) o.tol = tol;
        auto rep = cspec::full_spectrum_report(c->complex, h->profile, std::vector<int>(degrees, degrees + ndegrees), m, o);
        std::ostringstream os;
        cspec::write_spectrum_csv(os, rep);
        *csv = dup_string(os.str());
    });
}

cs_status cs_coexact_values(const cs_complex* c, const cs_profile* h, int p, int m, double* values, int* harmonic_dim) {
    return guarded([&] {
        need(c, "complex");
        need(h, "profile");
        need(values, "values");
        auto s = cspec::coexact_spectrum(c->complex, h->profile, p, m);
        for (std::size_t i = 0; i < s.values.size(); ++i) values[i] = s.values[i];
        for (auto i = s.values.size(); i < static_cast<std::size_t>(m); ++i) values[i] = NAN;
        if (harmonic_dim) *harmonic_dim = s.harmonic_dim;
    });
}

cs_pinch_options cs_pinch_defaults(void) {
    cspec::PinchParams d;
    return {d.n, d.p, d.R, d.resolution, d.volume, 0, 1};
}

namespace {

cspec::PinchParams to_params(const cs_pinch_options* o) {
    need(o, "options");
    cspec::PinchParams prm;
    prm.n = o->n;
    prm.p = o->p;
    prm.R = o->R;
    prm.resolution = o->resolution;
    prm.volume = o->volume;
    return prm;
}

std::vector<cspec::PinchRow> sweep(const cs_pinch_options* o, const double* etas, size_t count) {
    auto prm = to_params(o);
    cspec::PinchSweepOptions so;
    so.coarse_check = o->coarse_check != 0;
    so.threads = o->threads;
    return cspec::pinch_sweep(prm, list(etas, count), so);
}

}  // namespace

cs_status cs_pinch_sweep_csv(const cs_pinch_options* opts, const double* etas, size_t count, char** csv) {
    return guarded([&] {
        need(csv, "csv");
        auto rows = sweep(opts, etas, count);
        std::ostringstream os;
        cspec::write_pinch_csv(os, to_params(opts), rows);
        *csv = dup_string(os.str());
        for (const auto& r : rows)
            if (!r.error.empty()) throw cspec::SolverError("pinch sweep row failed: " + r.error, NAN);
    });
}

cs_status cs_pinch_slope(const cs_pinch_options* opts, const double* etas, size_t count, double* slope,
                         int* bound_violations) {
    return guarded([&] {
        need(slope, "slope");
        auto rows = sweep(opts, etas, count);
        *slope = cspec::loglog_slope(rows);
        if (bound_violations) {
            *bound_violations = 0;
            for (const auto& r : rows)
                if (!r.error.empty() || r.mu1 > r.bound) ++*bound_violations;
        }
    });
}

cs_status cs_radial_csv(const char* op, int n, int p, double eta, int resolution, int m, char** csv) {
    return guarded([&] {
        need(op, "operator");
        need(csv, "csv");
        if (m < 1) throw cspec::InvalidArgument("m must be positive");
        cspec::PinchParams prm;
        prm.n = n;
        prm.p = p;
        prm.eta = eta;
        prm.resolution = resolution;
        cspec::RadialProblem prob;
        const std::string kind = op;
        if (kind == "pinch") {
            prob = cspec::pinch_operator(prm);
        } else if (kind == "cylinder") {
            // sharpening family: the pinch profile rescaled to [0, 1]; h does not depend on p
            cspec::PinchParams hp = prm;
            hp.p = 1;
            auto prof = cspec::default_profiles(hp);
            prob = cspec::cylinder_operator(n, p, [&](double t) { return prof.h(t * prm.R); }, resolution);
        } else {
            throw cspec::InvalidArgument("radial operator must be `pinch` or `cylinder`");
        }
        auto s = cspec::radial_spectrum(prob, m);
        std::string out = "index,value,residual\n";
        char buf[96];
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.15g,%.3e\n", i + 1, s.values[i], s.residuals[i]);
            out += buf;
        }
        *csv = dup_string(out);
    });
}

cs_status cs_mcgowan_json(const char* config_json, double a, double b, char** json_out) {
    return guarded([&] {
        need(config_json, "config");
        need(json_out, "json");
        nlohmann::json cfg;
        try {
            cfg = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::exception& e) {
            throw cspec::ParseError(std::string("cover config: ") + e.what());
        }
        nlohmann::json out;
        bool any = false;
        if (cfg.contains("mu")) {
            auto data = cspec::cover_data_from_json(config_json);
            auto r = cspec::mcgowan_bound(data, a, b);
            out["mcgowan"] = {{"a", a}, {"b", b}, {"k_q", r.k_q}, {"denominator", r.denominator}, {"bound", r.bound}};
            any = true;
        }
        if (cfg.contains("glue")) {
            auto g = cspec::glue_data_from_json(config_json);
            out["glue"] = {{"denominator", cspec::gluing_denominator(g)}, {"bound", cspec::gluing_bound(g)}};
            any = true;
        }
        if (!any) throw cspec::ParseError("cover config needs `mu` (cover data) or `glue`");
        *json_out = dup_string(out.dump(2));
    });
}

cs_status cs_cover_corpus_csv(uint64_t seed, char** csv, int* unsound) {
    return guarded([&] {
        need(csv, "csv");
        std::string out = "label,degree,mu_true,glue_bound,sound,k_q,mcgowan_bound,mu_kq_true\n";
        int bad = 0;
        for (const auto& inst : cspec::cover_corpus(seed)) {
            auto c = cspec::evaluate_cover(inst);
            if (!c.sound) ++bad;
            out += c.label + ',' + std::to_string(c.degree) + ',' + num(c.mu_true) + ',' + num(c.glue_bound) + ',' +
                   (c.sound ? "1" : "0") + ',' + std::to_string(c.mcgowan.k_q) + ',' + num(c.mcgowan.bound) + ',' +
                   num(c.mu_kq_true) + '\n';
        }
        *csv = dup_string(out);
        if (unsound) *unsound = bad;
    });
}

cs_dodziuk_options cs_dodziuk_defaults(void) {
    cspec::DodziukOptions d;
    return {d.tau, d.n, d.trials, d.seed, d.threads};
}

cs_status cs_dodziuk_csv(const cs_dodziuk_options* opts, char** csv, int* violations) {
    return guarded([&] {
        need(opts, "options");
        need(csv, "csv");
        cspec::DodziukOptions o;
        o.tau = opts->tau;
        o.n = opts->n;
        o.trials = opts->trials;
        o.seed = opts->seed;
        o.threads = opts->threads;
        auto rep = cspec::dodziuk_check(o);
        std::string out = "trial,complex,compared,min_ratio,max_ratio,lo,hi,inside\n";
        for (const auto& t : rep.trials) {
            out += std::to_string(t.index) + ',' + t.complex + ',' + std::to_string(t.compared) + ',' + num(t.min_ratio) +
                   ',' + num(t.max_ratio) + ',' + num(rep.ratio_interval.lo) + ',' + num(rep.ratio_interval.hi) + ',' +
                   (t.violations == 0 ? "1" : "0") + '\n';
        }
        *csv = dup_string(out);
        if (violations) *violations = rep.violations;
    });
}

cs_handle_options cs_handle_defaults(void) {
    cspec::HandleSpec h;
    cspec::HandleSweepOptions s;
    return {h.length, h.resolution, h.left_vertex, h.right_vertex, 0, s.m, s.threads};
}

cs_status cs_handle_sweep_csv(const char* left_spec, const char* right_spec, const cs_handle_options* opts,
                              const double* eps_list, size_t count, char** csv, double* final_deviation,
                              double* first_deviation) {
    return guarded([&] {
        need(left_spec, "left spec");
        need(right_spec, "right spec");
        need(opts, "options");
        need(csv, "csv");
        auto a = cspec::build_complex(cspec::ComplexSpec::parse(left_spec));
        auto b = cspec::build_complex(cspec::ComplexSpec::parse(right_spec));
        if (opts->ambient_dim > 0) {
            a = a.with_ambient_dimension(opts->ambient_dim);
            b = b.with_ambient_dimension(opts->ambient_dim);
        }
        auto ha = cspec::ConformalProfile::constant(a, 1.0), hb = cspec::ConformalProfile::constant(b, 1.0);
        cspec::HandleSpec hs;
        hs.length = opts->length;
        hs.resolution = opts->resolution;
        hs.left_vertex = opts->left_vertex;
        hs.right_vertex = opts->right_vertex;
        cspec::HandleSweepOptions so;
        so.m = opts->m;
        so.threads = opts->threads;
        auto rows = cspec::handle_sweep(a, ha, b, hb, hs, list(eps_list, count), so);
        std::ostringstream os;
        cspec::write_handle_csv(os, rows);
        *csv = dup_string(os.str());
        if (final_deviation) *final_deviation = rows.back().deviation;
        if (first_deviation) *first_deviation = rows.front().deviation;
        for (const auto& r : rows)
            if (!r.error.empty()) throw cspec::SolverError("handle sweep row failed: " + r.error, NAN);
    });
}

cs_status cs_prescribe_json(const char* targets_json, double tol, const double* eps_list, size_t count,
                            int max_evaluations, int threads, char** json_out, int* converged) {
    return guarded([&] {
        need(targets_json, "targets");
        need(json_out, "json");
        auto t = cspec::target_from_json(targets_json);
        t.validate();
        cspec::PrescribeOptions o;
        if (tol > 0.0) o.tol = tol;
        if (eps_list && count > 0) o.eps_schedule = list(eps_list, count);
        if (max_evaluations > 0) o.max_evaluations = max_evaluations;
        cspec::NetworkModel m;
        m.threads = threads;
        auto r = cspec::prescribe(t, o, m);
        *json_out = dup_string(cspec::prescribe_json(t, r));
        if (converged) *converged = r.converged ? 1 : 0;
    });
}

}  // extern "C"

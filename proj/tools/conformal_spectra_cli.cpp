// Command-line front end. Talks to the library through the C interface only.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "conformal_spectra/capi.h"

namespace {

using nlohmann::json;

// exit statuses
constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kSolver = 3;
constexpr int kInternal = 4;

int log_level() {
    const char* v = std::getenv("CONFORMAL_SPECTRA_LOG");
    if (!v) return 0;
    const std::string s = v;
    if (s == "debug" || s == "2") return 2;
    if (s == "info" || s == "1") return 1;
    return 0;
}

void log(int level, const std::string& msg) {
    if (log_level() >= level) std::cerr << "[conformal_spectra] " << msg << '\n';
}

struct Globals {
    int threads = 1;
    std::uint64_t seed = 1;
    std::string out = "-";
};

const char* kind_of(cs_status s) {
    switch (s) {
        case CS_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case CS_ERR_PARSE: return "parse";
        case CS_ERR_SOLVER: return "solver";
        case CS_ERR_IO: return "io";
        default: return "internal";
    }
}

int exit_code(cs_status s) {
    switch (s) {
        case CS_OK: return kOk;
        case CS_ERR_SOLVER: return kSolver;
        case CS_ERR_INTERNAL: return kInternal;
        default: return kConfig;
    }
}

int error_record(int code, const std::string& kind, const std::string& message) {
    json e = {{"error", {{"exit", code}, {"kind", kind}, {"message", message}}}};
    std::cerr << e.dump() << '\n';
    return code;
}

int library_error(cs_status s) { return error_record(exit_code(s), kind_of(s), cs_last_error()); }

struct Owned {
    char* p = nullptr;
    ~Owned() { cs_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

std::string join(const std::vector<double>& v) {
    std::string s;
    char buf[40];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.15g", v[i]);
        s += (i ? ";" : "") + std::string(buf);
    }
    return s;
}

std::string header(const Globals& g, const std::string& command, const std::vector<std::pair<std::string, std::string>>& params) {
    std::string h = std::string("# conformal_spectra ") + cs_version() + " command=" + command + " seed=" + std::to_string(g.seed);
    for (const auto& [k, v] : params) h += ' ' + k + '=' + v;
    return h + '\n';
}

bool emit(const Globals& g, const std::string& text) {
    if (g.out == "-" || g.out.empty()) {
        std::cout << text;
        return static_cast<bool>(std::cout);
    }
    std::ofstream f(g.out, std::ios::binary);
    f << text;
    return static_cast<bool>(f);
}

int finish(const Globals& g, const std::string& text, cs_status status) {
    if (!emit(g, text)) return error_record(kConfig, "io", "cannot write " + g.out);
    return status == CS_OK ? kOk : library_error(status);
}

bool read_file(const std::string& path, std::string& text) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    std::ostringstream ss;
    ss << f.rdbuf();
    text = ss.str();
    return true;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hodge spectra of conformally deformed cell complexes"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    Globals g;
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "random seed (recorded in every header)");
    app.add_option("--out", g.out, "output file, - for stdout");
    app.set_version_flag("--version", std::string(cs_version()));

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "coexact and exact spectra of a complex");
    std::string complex_spec, profile_spec = "const:1";
    std::vector<int> degrees{0};
    int m = 4, ambient = 0;
    double tol = 1e-9;
    spectrum->add_option("--complex", complex_spec, "complex spec, e.g. cycle:8 or cycle:6xcycle:6")->required();
    spectrum->add_option("--p", degrees, "form degree(s)")->delimiter(',');
    spectrum->add_option("--m", m, "values per degree")->check(CLI::PositiveNumber);
    spectrum->add_option("--profile", profile_spec, "const:C or random:SIGMA");
    spectrum->add_option("--ambient", ambient, "ambient dimension for the conformal weights (0: top cell dimension)");
    spectrum->add_option("--tol", tol, "relative eigen-residual");

    // pinch-sweep
    auto* pinch = app.add_subcommand("pinch-sweep", "radial pinch sweep over eta");
    cs_pinch_options po = cs_pinch_defaults();
    std::vector<double> etas{1.0, 0.1, 0.01, 0.001, 0.0001};
    bool coarse = false;
    pinch->add_option("--n", po.n, "ambient dimension")->required();
    pinch->add_option("--p", po.p, "form degree")->required();
    pinch->add_option("--eta-list", etas, "strictly decreasing eta values")->delimiter(',');
    pinch->add_option("--resolution", po.resolution, "radial grid points");
    pinch->add_option("--R", po.R, "ball radius");
    pinch->add_option("--volume", po.volume, "reference volume V");
    pinch->add_flag("--coarse", coarse, "add the coarse complex cross-check (n = 5, p = 1)");

    // radial
    auto* radial = app.add_subcommand("radial", "first eigenvalues of one radial problem");
    std::string op = "pinch";
    int rn = 5, rp = 1, rres = 2000, rm = 4;
    double reta = 0.1;
    radial->add_option("--operator", op, "pinch or cylinder")->check(CLI::IsMember({"pinch", "cylinder"}));
    radial->add_option("--n", rn, "ambient dimension");
    radial->add_option("--p", rp, "form degree");
    radial->add_option("--eta", reta, "pinch floor");
    radial->add_option("--resolution", rres, "grid points");
    radial->add_option("--m", rm, "number of eigenvalues")->check(CLI::PositiveNumber);

    // mcgowan
    auto* mcg = app.add_subcommand("mcgowan", "cover and gluing bounds");
    std::string config;
    double a = 1.0, b = 1.0;
    bool corpus = false;
    mcg->add_option("--config", config, "cover JSON (see docs/formats.md)");
    mcg->add_option("--a", a, "constant a");
    mcg->add_option("--b", b, "constant b");
    mcg->add_flag("--corpus", corpus, "evaluate the built-in split-product corpus instead");

    // dodziuk-check
    auto* dod = app.add_subcommand("dodziuk-check", "randomized quasi-isometric pairs");
    cs_dodziuk_options dopt = cs_dodziuk_defaults();
    dod->add_option("--tau", dopt.tau, "quasi-isometry ratio (>= 1)");
    dod->add_option("--n", dopt.n, "ambient dimension");
    dod->add_option("--trials", dopt.trials, "number of pairs")->check(CLI::PositiveNumber);

    // handle-sweep
    auto* hsw = app.add_subcommand("handle-sweep", "glue two complexes by a thin handle and sweep its radius");
    std::string left, right;
    std::vector<double> eps_list;
    cs_handle_options ho = cs_handle_defaults();
    hsw->add_option("--left", left, "first complex spec")->required();
    hsw->add_option("--right", right, "second complex spec")->required();
    hsw->add_option("--eps-list", eps_list, "strictly decreasing handle radii")->delimiter(',')->required();
    hsw->add_option("--length", ho.length, "handle length L");
    hsw->add_option("--resolution", ho.resolution, "cells along the handle");
    hsw->add_option("--left-vertex", ho.left_vertex, "attachment vertex on the left complex");
    hsw->add_option("--right-vertex", ho.right_vertex, "attachment vertex on the right complex");
    hsw->add_option("--ambient", ho.ambient_dim, "ambient dimension (0: top cell dimension)");
    hsw->add_option("--m", ho.m, "values compared")->check(CLI::PositiveNumber);

    // prescribe
    auto* pre = app.add_subcommand("prescribe", "prescribe small coexact eigenvalues and the volume");
    std::string targets;
    double ptol = 1e-2;
    std::vector<double> schedule;
    int max_evals = 200;
    pre->add_option("--targets", targets, "targets JSON {n, N, nu, V0, delta}")->required();
    pre->add_option("--tol", ptol, "relative tolerance");
    pre->add_option("--eps-list", schedule, "handle radius schedule")->delimiter(',');
    pre->add_option("--max-evals", max_evals, "evaluation budget")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return error_record(kConfig, "parse", e.what());
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto done = [&](int code) {
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log(1, "finished in " + fmt(dt) + " s with exit " + std::to_string(code));
        return code;
    };

    if (*spectrum) {
        cs_complex* K = nullptr;
        cs_status s = cs_complex_create(complex_spec.c_str(), ambient, &K);
        if (s != CS_OK) return done(library_error(s));
        cs_profile* h = nullptr;
        const auto colon = profile_spec.find(':');
        const std::string kind = profile_spec.substr(0, colon);
        double value = 1.0;
        try {
            if (colon != std::string::npos) value = std::stod(profile_spec.substr(colon + 1));
        } catch (const std::exception&) {
            cs_complex_free(K);
            return done(error_record(kConfig, "parse", "bad profile value in " + profile_spec));
        }
        if (kind == "const")
            s = cs_profile_constant(K, value, &h);
        else if (kind == "random")
            s = cs_profile_random(K, value, g.seed, &h);
        else {
            cs_complex_free(K);
            return done(error_record(kConfig, "parse", "profile must be const:C or random:SIGMA"));
        }
        if (s != CS_OK) {
            cs_complex_free(K);
            return done(library_error(s));
        }
        Owned csv;
        s = cs_spectrum_csv(K, h, degrees.data(), degrees.size(), m, tol, &csv.p);
        cs_profile_free(h);
        cs_complex_free(K);
        if (s != CS_OK) return done(library_error(s));
        std::string deg;
        for (std::size_t i = 0; i < degrees.size(); ++i) deg += (i ? ";" : "") + std::to_string(degrees[i]);
        auto text = header(g, "spectrum", {{"complex", complex_spec}, {"p", deg}, {"m", std::to_string(m)},
                                           {"profile", profile_spec}, {"ambient", std::to_string(ambient)}, {"tol", fmt(tol)}});
        return done(finish(g, text + csv.str(), CS_OK));
    }

    if (*pinch) {
        po.coarse_check = coarse ? 1 : 0;
        po.threads = g.threads;
        Owned csv;
        cs_status s = cs_pinch_sweep_csv(&po, etas.data(), etas.size(), &csv.p);
        if (!csv.p) return done(library_error(s));
        auto text = header(g, "pinch-sweep", {{"n", std::to_string(po.n)}, {"p", std::to_string(po.p)},
                                              {"eta_list", join(etas)}, {"resolution", std::to_string(po.resolution)},
                                              {"R", fmt(po.R)}, {"volume", fmt(po.volume)}, {"coarse", coarse ? "1" : "0"},
                                              {"status", s == CS_OK ? "ok" : "partial"}});
        return done(finish(g, text + csv.str(), s));
    }

    if (*radial) {
        Owned csv;
        cs_status s = cs_radial_csv(op.c_str(), rn, rp, reta, rres, rm, &csv.p);
        if (s != CS_OK) return done(library_error(s));
        auto text = header(g, "radial", {{"operator", op}, {"n", std::to_string(rn)}, {"p", std::to_string(rp)},
                                         {"eta", fmt(reta)}, {"resolution", std::to_string(rres)}, {"m", std::to_string(rm)}});
        return done(finish(g, text + csv.str(), CS_OK));
    }

    if (*mcg) {
        if (corpus) {
            Owned csv;
            int unsound = 0;
            cs_status s = cs_cover_corpus_csv(g.seed, &csv.p, &unsound);
            if (s != CS_OK) return done(library_error(s));
            auto text = header(g, "mcgowan", {{"corpus", "split-products"}, {"unsound", std::to_string(unsound)}});
            return done(finish(g, text + csv.str(), CS_OK));
        }
        if (config.empty()) return done(error_record(kConfig, "parse", "mcgowan needs --config FILE or --corpus"));
        std::string text;
        if (!read_file(config, text)) return done(error_record(kConfig, "io", "cannot read config file " + config));
        Owned out;
        cs_status s = cs_mcgowan_json(text.c_str(), a, b, &out.p);
        if (s != CS_OK) return done(library_error(s));
        json doc;
        doc["header"] = {{"version", cs_version()}, {"command", "mcgowan"}, {"seed", g.seed}, {"config", config},
                         {"a", a}, {"b", b}};
        doc["result"] = json::parse(out.str());
        return done(finish(g, doc.dump(2) + '\n', CS_OK));
    }

    if (*dod) {
        dopt.seed = g.seed;
        dopt.threads = g.threads;
        Owned csv;
        int violations = 0;
        cs_status s = cs_dodziuk_csv(&dopt, &csv.p, &violations);
        if (s != CS_OK) return done(library_error(s));
        auto text = header(g, "dodziuk-check", {{"tau", fmt(dopt.tau)}, {"n", std::to_string(dopt.n)},
                                                {"trials", std::to_string(dopt.trials)}, {"violations", std::to_string(violations)}});
        return done(finish(g, text + csv.str(), CS_OK));
    }

    if (*hsw) {
        ho.threads = g.threads;
        Owned csv;
        double last = 0.0, first = 0.0;
        cs_status s = cs_handle_sweep_csv(left.c_str(), right.c_str(), &ho, eps_list.data(), eps_list.size(), &csv.p,
                                          &last, &first);
        if (!csv.p) return done(library_error(s));
        auto text = header(g, "handle-sweep", {{"left", left}, {"right", right}, {"eps_list", join(eps_list)},
                                               {"length", fmt(ho.length)}, {"resolution", std::to_string(ho.resolution)},
                                               {"left_vertex", std::to_string(ho.left_vertex)},
                                               {"right_vertex", std::to_string(ho.right_vertex)},
                                               {"ambient", std::to_string(ho.ambient_dim)}, {"m", std::to_string(ho.m)},
                                               {"status", s == CS_OK ? "ok" : "partial"}});
        return done(finish(g, text + csv.str(), s));
    }

    if (*pre) {
        std::string text;
        if (!read_file(targets, text)) return done(error_record(kConfig, "io", "cannot read targets file " + targets));
        Owned out;
        int converged = 0;
        cs_status s = cs_prescribe_json(text.c_str(), ptol, schedule.empty() ? nullptr : schedule.data(), schedule.size(),
                                        max_evals, g.threads, &out.p, &converged);
        if (s != CS_OK) return done(library_error(s));
        json doc;
        doc["header"] = {{"version", cs_version()}, {"command", "prescribe"}, {"seed", g.seed}, {"targets", targets},
                         {"tol", ptol}, {"max_evals", max_evals}, {"eps_list", schedule}};
        doc["result"] = json::parse(out.str());
        if (!emit(g, doc.dump(2) + '\n')) return done(error_record(kConfig, "io", "cannot write " + g.out));
        if (!converged)
            return done(error_record(kSolver, "solver", doc["result"]["message"].get<std::string>()));
        return done(kOk);
    }
    return done(kInternal);
}

#include "conformal_spectra/pinch.hpp"

#include <cmath>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>

#include "conformal_spectra/error.hpp"
#include "conformal_spectra/parallel.hpp"
#include "conformal_spectra/radial.hpp"

namespace cspec {

namespace {

template <class F>
double gauss(F&& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

}  // namespace

void PinchParams::validate() const {
    if (n < 5) throw InvalidArgument("pinch needs n >= 5, got " + std::to_string(n));
    if (p < 1 || p > k())
        throw InvalidArgument("pinch needs 1 <= p <= k = " + std::to_string(k()) + ", got p = " + std::to_string(p));
    if (!(eta > 0.0) || !(eta <= 1.0)) throw InvalidArgument("pinch floor eta must lie in (0, 1]");
    if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("ball radius must be positive");
    if (!(volume > 0.0)) throw InvalidArgument("target volume must be positive");
    if (resolution < 16) throw InvalidArgument("radial resolution must be at least 16");
}

double PinchParams::transverse_constant() const {
    if (model == TransverseModel::cylinder) return 0.5 * volume / R;
    return 0.5 * volume * (n - p) / std::pow(R, n - p);
}

double PinchParams::density(double r) const {
    const double c = transverse_constant();
    return model == TransverseModel::cylinder ? c : c * std::pow(r, n - p - 1);
}

double smoothstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * (3.0 - 2.0 * x);
}

PinchProfiles default_profiles(const PinchParams& prm) {
    prm.validate();
    const double q = prm.R / 4.0;
    const double eta = prm.eta;
    PinchProfiles out;
    out.h = [q, eta](double r) { return 1.0 - (1.0 - eta) * smoothstep((r - q) / q); };
    out.f = [q](double r) { return 1.0 - smoothstep((r - 2.0 * q) / q); };
    out.df = [q](double r) {
        const double x = (r - 2.0 * q) / q;
        if (x <= 0.0 || x >= 1.0) return 0.0;
        return -6.0 * x * (1.0 - x) / q;
    };
    out.grid.resize(prm.resolution);
    out.f_samples.resize(prm.resolution);
    out.h_samples.resize(prm.resolution);
    for (int i = 0; i < prm.resolution; ++i) {
        const double r = prm.R * i / (prm.resolution - 1);
        out.grid[i] = r;
        out.f_samples[i] = out.f(r);
        out.h_samples[i] = out.h(r);
    }
    return out;
}

double rayleigh_bound(const PinchParams& prm) {
    prm.validate();
    auto prof = default_profiles(prm);
    const double q = prm.R / 4.0;
    const double num = gauss([&](double r) { return prof.df(r) * prof.df(r) * prm.density(r); }, 2.0 * q, 3.0 * q);
    const double den = gauss([&](double r) { return prm.density(r); }, 0.0, q);
    return std::pow(prm.eta, prm.n - 2 * prm.p - 2) * num / den;
}

double pinch_volume(const PinchParams& prm) {
    prm.validate();
    auto prof = default_profiles(prm);
    const double q = prm.R / 4.0;
    auto integrand = [&](double r) { return std::pow(prof.h(r), prm.n) * prm.density(r); };
    const double inside = gauss(integrand, 0.0, q) + gauss(integrand, q, 2.0 * q) + gauss(integrand, 2.0 * q, prm.R);
    return inside + std::pow(prm.eta, prm.n) * 0.5 * prm.volume;
}

CoarseCheck coarse_pinch_check(const PinchParams& params, int angular, int radial) {
    if (params.n != 5 || params.p != 1) throw InvalidArgument("coarse pinch cross-check is implemented for n = 5, p = 1");
    PinchParams prm = params;
    prm.model = TransverseModel::cylinder;
    prm.validate();
    auto prof = default_profiles(prm);
    // radial coordinate sits in coordinate slot 1
    CellComplex K = product_complex(product_complex(cycle_complex(angular), halfopen_complex(radial, prm.R)),
                                    simplex_boundary_complex(4));
    auto h = ConformalProfile::from_function(K, [&](std::span<const double> x) { return prof.h(x[1]); }, "pinch");
    SolverOptions opts;
    opts.dense_threshold = 2000;
    CoarseCheck c;
    auto s1 = coexact_spectrum(K, h, 1, 2, opts);
    c.mu1 = s1.values[0];
    c.mu2 = s1.values[1];
    c.mu_q1 = coexact_spectrum(K, h, 2, 1, opts).values[0];
    c.radial_mu1 = radial_spectrum(pinch_operator(prm), 1).values[0];
    c.bound = rayleigh_bound(prm);
    return c;
}

std::vector<PinchRow> pinch_sweep(const PinchParams& params, const std::vector<double>& etas,
                                  const PinchSweepOptions& opts) {
    params.validate();
    if (etas.empty()) throw InvalidArgument("eta list is empty");
    for (std::size_t i = 0; i < etas.size(); ++i) {
        if (!(etas[i] > 0.0) || !(etas[i] <= 1.0)) throw InvalidArgument("eta values must lie in (0, 1]");
        if (i > 0 && !(etas[i] < etas[i - 1])) throw InvalidArgument("eta list must be strictly decreasing");
    }
    std::vector<PinchRow> rows(etas.size());
    const int k = params.k();
    parallel_for(etas.size(), opts.threads, [&](std::size_t idx) {
        PinchRow& row = rows[idx];
        row.eta = etas[idx];
        try {
            PinchParams prm = params;
            prm.eta = etas[idx];
            auto s = radial_spectrum(pinch_operator(prm), 2);
            row.mu1 = s.values[0];
            row.mu2 = s.values[1];
            row.bound = rayleigh_bound(prm);
            row.volume = pinch_volume(prm);
            const double scale = std::pow(row.volume / prm.volume, 2.0 / prm.n);
            row.mu1_normalized = row.mu1 * scale;
            row.mu2_normalized = row.mu2 * scale;
            auto prof = default_profiles(prm);
            for (int qd = 1; qd <= k + 1; ++qd) {
                if (qd == prm.p) continue;
                auto cyl = cylinder_operator(prm.n, qd, [&](double t) { return prof.h(t * prm.R); }, prm.resolution);
                const double mu = radial_spectrum(cyl, 1).values[0];
                row.mu_other.emplace_back(qd, mu);
                if (qd == k + 1) row.mu_k1_normalized = mu * std::pow(row.volume, 2.0 / prm.n);
            }
            if (opts.coarse_check && prm.n == 5 && prm.p == 1)
                row.coarse = coarse_pinch_check(prm, opts.coarse_angular, opts.coarse_radial);
        } catch (const Error& e) {
            row.error = e.what();
        }
    });
    return rows;
}

double loglog_slope(const std::vector<PinchRow>& rows, double decades) {
    double eta_min = INFINITY;
    for (const auto& r : rows)
        if (r.error.empty()) eta_min = std::min(eta_min, r.eta);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (const auto& r : rows) {
        if (!r.error.empty() || r.eta > eta_min * std::pow(10.0, decades) * (1 + 1e-9)) continue;
        const double x = std::log10(r.eta), y = std::log10(r.mu1);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) throw InvalidArgument("slope fit needs at least two successful rows");
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

void write_pinch_csv(std::ostream& out, const PinchParams& params, const std::vector<PinchRow>& rows) {
    out << "n,p,eta,mu1,mu2,eq5_bound,volume,mu1_normalized,mu2_normalized,mu_k1_normalized";
    const int k = params.k();
    for (int q = 1; q <= k + 1; ++q)
        if (q != params.p) out << ",mu_" << q << "_1";
    out << ",coarse_mu1,coarse_mu2,coarse_mu_k1,coarse_radial_mu1,coarse_bound,error\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.15g", v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        out << params.n << ',' << params.p << ',' << num(r.eta);
        if (r.error.empty()) {
            out << ',' << num(r.mu1) << ',' << num(r.mu2) << ',' << num(r.bound) << ',' << num(r.volume) << ','
                << num(r.mu1_normalized) << ',' << num(r.mu2_normalized) << ',' << num(r.mu_k1_normalized);
            for (const auto& [q, mu] : r.mu_other) out << ',' << num(mu);
        } else {
            out << ",,,,,,,";
            for (int q = 1; q <= k + 1; ++q)
                if (q != params.p) out << ',';
        }
        if (r.coarse)
            out << ',' << num(r.coarse->mu1) << ',' << num(r.coarse->mu2) << ',' << num(r.coarse->mu_q1) << ','
                << num(r.coarse->radial_mu1) << ',' << num(r.coarse->bound);
        else
            out << ",,,,,";
        out << ',';
        // errors are free text; keep the CSV parseable
        std::string e = r.error;
        for (auto& ch : e)
            if (ch == ',' || ch == '\n') ch = ';';
        out << e << '\n';
    }
}

}  // namespace cspec

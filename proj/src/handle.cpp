#include "conformal_spectra/handle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "conformal_spectra/error.hpp"
#include "conformal_spectra/parallel.hpp"

namespace cspec {

double handle_profile(double eps, double L, double r) {
    if (!(eps > 0.0) || !(L > 0.0)) throw InvalidArgument("handle radius and length must be positive");
    const double r0 = eps * std::exp(-L / eps);
    if (r >= r0) return eps / r;
    return std::exp(L / eps);
}

std::vector<double> handle_profile(double eps, double L, std::span<const double> r) {
    std::vector<double> out;
    out.reserve(r.size());
    for (double x : r) out.push_back(handle_profile(eps, L, x));
    return out;
}

double unit_sphere_volume(int d) {
    if (d < 0) throw InvalidArgument("sphere dimension must be nonnegative");
    const double k = 0.5 * (d + 1);
    return 2.0 * std::pow(std::numbers::pi, k) / std::tgamma(k);
}

void HandleSpec::validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("handle radius eps must be positive");
    if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("handle length must be positive");
    if (resolution < 2) throw InvalidArgument("handle needs at least 2 cells");
    if (!(profile_scale > 0.0) || !std::isfinite(profile_scale)) throw InvalidArgument("handle profile scale must be positive");
}

namespace {

void append_levels(CellComplex::Data& d, const CellComplex& K, std::size_t node_offset,
                   const std::vector<std::size_t>& cell_offset) {
    for (int k = 0; k <= K.dimension(); ++k) {
        const auto& src = K.data().levels[k];
        auto& dst = d.levels[k];
        const auto face_shift = static_cast<std::int32_t>(k > 0 ? cell_offset[k - 1] : 0);
        for (std::size_t c = 0; c < src.size(); ++c) {
            for (auto f : K.faces(k, c)) dst.faces.push_back({f.index + face_shift, f.sign});
            dst.face_offsets.push_back(static_cast<std::int32_t>(dst.faces.size()));
            for (auto nd : K.cell_nodes(k, c)) dst.nodes.push_back(nd + static_cast<std::int32_t>(node_offset));
            dst.node_offsets.push_back(static_cast<std::int32_t>(dst.nodes.size()));
            dst.volume.push_back(src.volume[c]);
            dst.star.push_back(src.star[c]);
        }
    }
}

CellComplex::Data union_data(const CellComplex& a, const CellComplex& b) {
    if (a.dimension() != b.dimension()) throw InvalidArgument("glued complexes must have the same dimension");
    if (a.ambient_dimension() != b.ambient_dimension())
        throw InvalidArgument("glued complexes must have the same ambient dimension");
    CellComplex::Data d;
    d.levels.resize(a.dimension() + 1);
    d.ambient_dim = a.ambient_dimension();
    std::vector<std::size_t> zero(a.dimension() + 1, 0), shift(a.dimension() + 1);
    for (int k = 0; k <= a.dimension(); ++k) shift[k] = a.cell_count(k);
    append_levels(d, a, 0, zero);
    append_levels(d, b, a.node_count(), shift);
    // last coordinate tells the pieces apart: 0 on a, 1 on b, s/L along a handle
    d.coord_dim = std::max(a.coord_dim(), b.coord_dim()) + 1;
    d.node_count = a.node_count() + b.node_count();
    for (const CellComplex* K : {&a, &b}) {
        for (std::size_t i = 0; i < K->node_count(); ++i) {
            auto c = K->node_coords(i);
            d.coords.insert(d.coords.end(), c.begin(), c.end());
            d.coords.insert(d.coords.end(), d.coord_dim - 1 - c.size(), 0.0);
            d.coords.push_back(K == &a ? 0.0 : 1.0);
        }
    }
    d.label = a.label() + " + " + b.label();
    return d;
}

std::vector<double> concat(const ConformalProfile& ha, const ConformalProfile& hb) {
    std::vector<double> s = ha.samples();
    s.insert(s.end(), hb.samples().begin(), hb.samples().end());
    return s;
}

void check_profile(const CellComplex& K, const ConformalProfile& h) {
    if (h.size() != K.node_count()) throw InvalidArgument("profile size does not match the complex");
}

}  // namespace

GluedComplex disjoint_union(const CellComplex& a, const ConformalProfile& ha, const CellComplex& b,
                            const ConformalProfile& hb) {
    check_profile(a, ha);
    check_profile(b, hb);
    GluedComplex g;
    g.complex = CellComplex::from_data(union_data(a, b));
    g.profile = ConformalProfile(concat(ha, hb), "union");
    return g;
}

GluedComplex glue_complexes(const CellComplex& a, const ConformalProfile& ha, const CellComplex& b,
                            const ConformalProfile& hb, const HandleSpec& spec) {
    spec.validate();
    check_profile(a, ha);
    check_profile(b, hb);
    if (spec.left_vertex < 0 || static_cast<std::size_t>(spec.left_vertex) >= a.cell_count(0))
        throw InvalidArgument("left attachment vertex does not exist");
    if (spec.right_vertex < 0 || static_cast<std::size_t>(spec.right_vertex) >= b.cell_count(0))
        throw InvalidArgument("right attachment vertex does not exist");
    auto d = union_data(a, b);
    const int n = d.ambient_dim;
    if (n < 2) throw InvalidArgument("handles need ambient dimension >= 2");
    if (n * spec.length / spec.eps > 600.0)
        throw InvalidArgument("handle too long for its radius: h^n = e^(nL/eps) would overflow");

    const int N = spec.resolution;
    std::vector<double> r(N + 1);
    for (int i = 0; i <= N; ++i) r[i] = spec.eps * std::exp(-(spec.length * i / N) / spec.eps);
    const double omega = unit_sphere_volume(n - 1);
    auto density = [&](double x) { return omega * std::pow(x, n - 1); };

    const auto va = static_cast<std::int32_t>(spec.left_vertex);
    const auto vb = static_cast<std::int32_t>(a.cell_count(0) + spec.right_vertex);
    const auto first_new_vertex = static_cast<std::int32_t>(d.levels[0].size());
    const auto first_new_node = static_cast<std::int32_t>(d.node_count);
    auto vertex_of = [&](int i) { return i == 0 ? va : i == N ? vb : first_new_vertex + i - 1; };
    auto node_of = [&](int i) {
        if (i == 0) return d.levels[0].nodes[va];
        if (i == N) return d.levels[0].nodes[vb];
        return first_new_node + i - 1;
    };

    auto& V = d.levels[0];
    for (int i = 1; i < N; ++i) {
        V.nodes.push_back(first_new_node + i - 1);
        V.node_offsets.push_back(static_cast<std::int32_t>(V.nodes.size()));
        V.face_offsets.push_back(static_cast<std::int32_t>(V.faces.size()));
        V.volume.push_back(1.0);
        V.star.push_back(0.0);
    }
    auto& E = d.levels[1];
    for (int j = 0; j < N; ++j) {
        const double dr = r[j] - r[j + 1];
        const double v = density(0.5 * (r[j] + r[j + 1]));
        E.faces.push_back({vertex_of(j), -1});
        E.faces.push_back({vertex_of(j + 1), 1});
        E.face_offsets.push_back(static_cast<std::int32_t>(E.faces.size()));
        E.nodes.push_back(node_of(j));
        E.nodes.push_back(node_of(j + 1));
        E.node_offsets.push_back(static_cast<std::int32_t>(E.nodes.size()));
        E.volume.push_back(dr);
        E.star.push_back(v / dr);
        V.star[vertex_of(j)] += 0.5 * v * dr;
        V.star[vertex_of(j + 1)] += 0.5 * v * dr;
    }
    const int cd = d.coord_dim;
    for (int i = 1; i < N; ++i) {
        d.coords.insert(d.coords.end(), cd - 1, 0.0);
        d.coords.push_back(static_cast<double>(i) / N);
    }
    d.node_count += N - 1;
    d.label += " via handle";

    GluedComplex g;
    g.handle_vertices = N - 1;
    g.complex = CellComplex::from_data(std::move(d));
    auto s = concat(ha, hb);
    for (int i = 1; i < N; ++i) s.push_back(spec.profile_scale * handle_profile(spec.eps, spec.length, r[i]));
    g.profile = ConformalProfile(std::move(s), "handle");
    return g;
}

namespace {

std::vector<double> merged_union(const CellComplex& a, const ConformalProfile& ha, const CellComplex& b,
                                 const ConformalProfile& hb, int p, int m, const SolverOptions& opts, int& harmonic) {
    std::vector<double> all;
    harmonic = 0;
    for (auto [K, h] : {std::pair{&a, &ha}, std::pair{&b, &hb}}) {
        const int rank = K->boundary_rank(p + 1);
        auto s = coexact_spectrum(*K, *h, p, std::min(m, rank), opts);
        harmonic += s.harmonic_dim;
        all.insert(all.end(), s.values.begin(), s.values.end());
    }
    std::sort(all.begin(), all.end());
    if (static_cast<int>(all.size()) > m) all.resize(m);
    return all;
}

}  // namespace

std::vector<HandleRow> handle_sweep(const CellComplex& a, const ConformalProfile& ha, const CellComplex& b,
                                    const ConformalProfile& hb, const HandleSpec& base,
                                    const std::vector<double>& eps_list, const HandleSweepOptions& opts) {
    if (eps_list.empty()) throw InvalidArgument("eps list is empty");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1])) throw InvalidArgument("eps list must be strictly decreasing");
    if (opts.m < 1) throw InvalidArgument("m must be positive");
    struct Ref {
        std::vector<double> values;
        int harmonic = 0;
    };
    std::vector<Ref> refs;
    for (int p : opts.degrees) {
        if (p < 0 || p >= a.dimension()) throw InvalidArgument("degree out of range for the glued complexes");
        Ref r;
        r.values = merged_union(a, ha, b, hb, p, opts.m, opts.solver, r.harmonic);
        refs.push_back(std::move(r));
    }
    const std::size_t nd = opts.degrees.size();
    std::vector<HandleRow> rows(eps_list.size() * nd);
    parallel_for(eps_list.size(), opts.threads, [&](std::size_t e) {
        HandleSpec spec = base;
        spec.eps = eps_list[e];
        GluedComplex g;
        std::string failure;
        try {
            g = glue_complexes(a, ha, b, hb, spec);
        } catch (const Error& err) {
            failure = err.what();
        }
        for (std::size_t k = 0; k < nd; ++k) {
            HandleRow& row = rows[e * nd + k];
            row.eps = spec.eps;
            row.degree = opts.degrees[k];
            row.reference = refs[k].values;
            if (!failure.empty()) {
                row.error = failure;
                continue;
            }
            try {
                const int p = row.degree;
                const int rank = g.complex.boundary_rank(p + 1);
                // harmonic forms lost to the handle come back as small "tunneling" eigenvalues
                const int harmonic = g.complex.cell_count(p) - rank - g.complex.boundary_rank(p);
                const int drop = std::max(0, refs[k].harmonic - harmonic);
                const int want = std::min(rank, drop + static_cast<int>(row.reference.size()));
                auto s = coexact_spectrum(g.complex, g.profile, p, want, opts.solver);
                row.harmonic_dim = s.harmonic_dim;
                row.tunneling.assign(s.values.begin(), s.values.begin() + std::min<int>(drop, s.values.size()));
                row.values.assign(s.values.begin() + row.tunneling.size(), s.values.end());
                for (std::size_t i = 0; i < row.values.size() && i < row.reference.size(); ++i)
                    row.deviation =
                        std::max(row.deviation, std::abs(row.values[i] - row.reference[i]) / row.reference[i]);
            } catch (const Error& err) {
                row.error = err.what();
            }
        }
    });
    return rows;
}

void write_handle_csv(std::ostream& out, const std::vector<HandleRow>& rows) {
    out << "eps,degree,index,kind,value,union,rel_deviation,max_deviation,error\n";
    char buf[256];
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            std::string e = r.error;
            for (auto& ch : e)
                if (ch == ',' || ch == '\n') ch = ';';
            std::snprintf(buf, sizeof buf, "%.15g,%d,,,,,,,", r.eps, r.degree);
            out << buf << e << '\n';
            continue;
        }
        for (std::size_t i = 0; i < r.tunneling.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.15g,%d,%zu,tunneling,%.15g,0,,%.15g,\n", r.eps, r.degree, i + 1,
                          r.tunneling[i], r.deviation);
            out << buf;
        }
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            const double u = i < r.reference.size() ? r.reference[i] : NAN;
            std::snprintf(buf, sizeof buf, "%.15g,%d,%zu,value,%.15g,%.15g,%.15g,%.15g,\n", r.eps, r.degree, i + 1,
                          r.values[i], u, std::abs(r.values[i] - u) / u, r.deviation);
            out << buf;
        }
    }
}

}  // namespace cspec

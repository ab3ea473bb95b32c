#include "conformal_spectra/complex.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "conformal_spectra/error.hpp"
#include "exact_rank.hpp"

namespace cspec {

struct CellComplex::RankCache {
    explicit RankCache(int n) : flags(new std::once_flag[n + 1]), ranks(n + 1, 0) {}
    std::unique_ptr<std::once_flag[]> flags;
    std::vector<int> ranks;
};

namespace {

void check_level_shapes(const CellComplex::Data& d) {
    if (d.levels.empty()) throw InvalidArgument("complex has no cells");
    if (d.coords.size() != d.node_count * static_cast<std::size_t>(d.coord_dim))
        throw InvalidArgument("node coordinate array has the wrong size");
    for (std::size_t k = 0; k < d.levels.size(); ++k) {
        const auto& L = d.levels[k];
        const std::size_t n = L.size();
        if (n == 0) throw InvalidArgument("complex has no cells of dimension " + std::to_string(k));
        if (L.star.size() != n || L.face_offsets.size() != n + 1 || L.node_offsets.size() != n + 1)
            throw InvalidArgument("inconsistent cell arrays at dimension " + std::to_string(k));
        if (static_cast<std::size_t>(L.face_offsets.back()) != L.faces.size() ||
            static_cast<std::size_t>(L.node_offsets.back()) != L.nodes.size())
            throw InvalidArgument("offset arrays do not match payload at dimension " + std::to_string(k));
        if (k == 0 && !L.faces.empty()) throw InvalidArgument("vertices cannot have faces");
        for (std::size_t i = 0; i < n; ++i) {
            if (!(L.volume[i] > 0.0) || !std::isfinite(L.volume[i]) || !(L.star[i] > 0.0) || !std::isfinite(L.star[i]))
                throw InvalidArgument("nonpositive cell weight at dimension " + std::to_string(k));
            if (L.node_offsets[i + 1] <= L.node_offsets[i])
                throw InvalidArgument("cell without nodes at dimension " + std::to_string(k));
        }
        for (auto node : L.nodes)
            if (node < 0 || static_cast<std::size_t>(node) >= d.node_count) throw InvalidArgument("node index out of range");
        if (k > 0) {
            const auto below = static_cast<std::int32_t>(d.levels[k - 1].size());
            for (const auto& f : L.faces) {
                if (f.index < 0 || f.index >= below) throw InvalidArgument("face index out of range");
                if (f.sign != 1 && f.sign != -1) throw InvalidArgument("incidence sign must be +1 or -1");
            }
        }
    }
    for (std::size_t i = 0; i < d.levels[0].size(); ++i)
        if (d.levels[0].node_offsets[i + 1] - d.levels[0].node_offsets[i] != 1)
            throw InvalidArgument("each vertex must carry exactly one node");
}

void check_boundary_squared(const CellComplex::Data& d) {
    std::unordered_map<std::int32_t, std::int64_t> acc;
    for (std::size_t k = 2; k < d.levels.size(); ++k) {
        const auto& L = d.levels[k];
        const auto& B = d.levels[k - 1];
        for (std::size_t c = 0; c < L.size(); ++c) {
            acc.clear();
            for (auto i = L.face_offsets[c]; i < L.face_offsets[c + 1]; ++i) {
                const auto& f = L.faces[i];
                for (auto j = B.face_offsets[f.index]; j < B.face_offsets[f.index + 1]; ++j)
                    acc[B.faces[j].index] += static_cast<std::int64_t>(f.sign) * B.faces[j].sign;
            }
            for (auto& [idx, v] : acc)
                if (v != 0)
                    throw InvalidArgument("boundary of boundary is nonzero at dimension " + std::to_string(k));
        }
    }
}

double regular_simplex_volume(int k) {
    return std::sqrt(static_cast<double>(k + 1)) / (std::tgamma(k + 1.0) * std::pow(2.0, 0.5 * k));
}

// Every cell gets the nodes of the vertices in its closure.
void nodes_from_closure(CellComplex::Data& d) {
    for (std::size_t k = 1; k < d.levels.size(); ++k) {
        auto& L = d.levels[k];
        const auto& B = d.levels[k - 1];
        L.node_offsets.assign(1, 0);
        L.nodes.clear();
        std::vector<std::int32_t> tmp;
        for (std::size_t c = 0; c < L.size(); ++c) {
            tmp.clear();
            for (auto i = L.face_offsets[c]; i < L.face_offsets[c + 1]; ++i) {
                auto f = L.faces[i].index;
                tmp.insert(tmp.end(), B.nodes.begin() + B.node_offsets[f], B.nodes.begin() + B.node_offsets[f + 1]);
            }
            std::sort(tmp.begin(), tmp.end());
            tmp.erase(std::unique(tmp.begin(), tmp.end()), tmp.end());
            L.nodes.insert(L.nodes.end(), tmp.begin(), tmp.end());
            L.node_offsets.push_back(static_cast<std::int32_t>(L.nodes.size()));
        }
    }
}

// Lumped barycentric star: each top cell T shares its volume equally among its
// k-faces, giving a dual volume per k-cell; star = dual / primal^2 keeps the
// length^(n-2k) scaling of a Hodge star.
void barycentric_stars(CellComplex::Data& d) {
    const int n = static_cast<int>(d.levels.size()) - 1;
    for (int k = 0; k <= n; ++k) d.levels[k].star.assign(d.levels[k].size(), 0.0);
    const auto& top = d.levels[n];
    std::vector<std::vector<std::int32_t>> closure(n + 1);
    for (std::size_t t = 0; t < top.size(); ++t) {
        closure[n].assign(1, static_cast<std::int32_t>(t));
        for (int k = n; k >= 1; --k) {
            auto& below = closure[k - 1];
            below.clear();
            for (auto c : closure[k])
                for (auto i = d.levels[k].face_offsets[c]; i < d.levels[k].face_offsets[c + 1]; ++i)
                    below.push_back(d.levels[k].faces[i].index);
            std::sort(below.begin(), below.end());
            below.erase(std::unique(below.begin(), below.end()), below.end());
        }
        for (int k = 0; k <= n; ++k) {
            double share = top.volume[t] / static_cast<double>(closure[k].size());
            for (auto c : closure[k]) d.levels[k].star[c] += share;
        }
    }
    for (int k = 0; k <= n; ++k) {
        auto& L = d.levels[k];
        for (std::size_t c = 0; c < L.size(); ++c) {
            if (L.star[c] <= 0.0)
                throw InvalidArgument("cell of dimension " + std::to_string(k) +
                                      " is not in the closure of a top cell (complex must be pure)");
            L.star[c] /= L.volume[c] * L.volume[c];
        }
    }
}

CellComplex::Level make_vertices(std::size_t count, const std::vector<double>& stars) {
    CellComplex::Level L;
    for (std::size_t i = 0; i < count; ++i) {
        L.nodes.push_back(static_cast<std::int32_t>(i));
        L.node_offsets.push_back(static_cast<std::int32_t>(i + 1));
        L.face_offsets.push_back(0);
        L.volume.push_back(1.0);
    }
    L.star = stars;
    return L;
}

void push_cell(CellComplex::Level& L, std::initializer_list<Face> faces, std::initializer_list<std::int32_t> nodes,
               double volume, double star) {
    L.faces.insert(L.faces.end(), faces);
    L.face_offsets.push_back(static_cast<std::int32_t>(L.faces.size()));
    L.nodes.insert(L.nodes.end(), nodes);
    L.node_offsets.push_back(static_cast<std::int32_t>(L.nodes.size()));
    L.volume.push_back(volume);
    L.star.push_back(star);
}

void require_resolution(int m, const char* what) {
    if (m < 3) throw InvalidArgument(std::string(what) + " resolution must be at least 3, got " + std::to_string(m));
}

void require_length(double length) {
    if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("complex length must be positive");
}

}  // namespace

CellComplex CellComplex::from_data(Data data) {
    check_level_shapes(data);
    check_boundary_squared(data);
    CellComplex out;
    out.data_ = std::move(data);
    out.ranks_ = std::make_shared<RankCache>(out.dimension());
    return out;
}

std::size_t CellComplex::cell_count(int k) const {
    if (k < 0 || k > dimension()) return 0;
    return data_.levels[k].size();
}

std::span<const Face> CellComplex::faces(int k, std::size_t cell) const {
    const auto& L = data_.levels.at(k);
    return {L.faces.data() + L.face_offsets[cell], static_cast<std::size_t>(L.face_offsets[cell + 1] - L.face_offsets[cell])};
}

std::span<const std::int32_t> CellComplex::cell_nodes(int k, std::size_t cell) const {
    const auto& L = data_.levels.at(k);
    return {L.nodes.data() + L.node_offsets[cell], static_cast<std::size_t>(L.node_offsets[cell + 1] - L.node_offsets[cell])};
}

std::span<const double> CellComplex::volumes(int k) const { return data_.levels.at(k).volume; }
std::span<const double> CellComplex::stars(int k) const { return data_.levels.at(k).star; }

std::span<const double> CellComplex::node_coords(std::size_t node) const {
    return {data_.coords.data() + node * data_.coord_dim, static_cast<std::size_t>(data_.coord_dim)};
}

int CellComplex::boundary_rank(int k) const {
    if (k <= 0 || k > dimension()) return 0;
    std::call_once(ranks_->flags[k], [&] {
        const auto& L = data_.levels[k];
        std::vector<detail::SparseIntColumn> cols(L.size());
        for (std::size_t c = 0; c < L.size(); ++c)
            for (auto i = L.face_offsets[c]; i < L.face_offsets[c + 1]; ++i)
                cols[c].emplace_back(L.faces[i].index, L.faces[i].sign);
        ranks_->ranks[k] = detail::exact_rank(std::move(cols));
    });
    return ranks_->ranks[k];
}

CellComplex CellComplex::with_ambient_dimension(int n) const {
    if (n < 1) throw InvalidArgument("ambient dimension must be positive");
    CellComplex out = *this;
    out.data_.ambient_dim = n;
    return out;
}

CellComplex path_complex(int m, double length, double origin) {
    require_resolution(m, "path");
    require_length(length);
    const double a = length / (m - 1);
    CellComplex::Data d;
    std::vector<double> vstar(m, a);
    vstar.front() = vstar.back() = 0.5 * a;
    d.levels.push_back(make_vertices(m, vstar));
    d.levels.emplace_back();
    for (int j = 0; j + 1 < m; ++j) push_cell(d.levels[1], {{j, -1}, {j + 1, 1}}, {j, j + 1}, a, 1.0 / a);
    d.node_count = m;
    d.coord_dim = 1;
    for (int i = 0; i < m; ++i) d.coords.push_back(origin + a * i);
    d.label = "path:" + std::to_string(m);
    return CellComplex::from_data(std::move(d));
}

CellComplex cycle_complex(int m, double length) {
    require_resolution(m, "cycle");
    require_length(length);
    const double a = length / m;
    CellComplex::Data d;
    d.levels.push_back(make_vertices(m, std::vector<double>(m, a)));
    d.levels.emplace_back();
    for (int j = 0; j < m; ++j) {
        int k = (j + 1) % m;
        push_cell(d.levels[1], {{j, -1}, {k, 1}}, {j, k}, a, 1.0 / a);
    }
    d.node_count = m;
    d.coord_dim = 1;
    for (int i = 0; i < m; ++i) d.coords.push_back(a * i);
    d.label = "cycle:" + std::to_string(m);
    return CellComplex::from_data(std::move(d));
}

CellComplex halfopen_complex(int m, double length, double origin) {
    require_resolution(m, "halfopen");
    require_length(length);
    const double a = length / (m - 1);
    CellComplex::Data d;
    std::vector<double> vstar(m - 1, a);
    vstar.front() = 0.5 * a;
    d.levels.push_back(make_vertices(m - 1, vstar));
    d.levels.emplace_back();
    for (int j = 0; j + 1 < m; ++j) {
        if (j + 2 < m)
            push_cell(d.levels[1], {{j, -1}, {j + 1, 1}}, {j, j + 1}, a, 1.0 / a);
        else
            push_cell(d.levels[1], {{j, -1}}, {j, j + 1}, a, 1.0 / a);
    }
    d.node_count = m;
    d.coord_dim = 1;
    for (int i = 0; i < m; ++i) d.coords.push_back(origin + a * i);
    d.label = "halfopen:" + std::to_string(m);
    return CellComplex::from_data(std::move(d));
}

CellComplex simplex_boundary_complex(int m) {
    if (m < 2 || m > 20) throw InvalidArgument("simplex boundary needs 2 <= m <= 20, got " + std::to_string(m));
    const int verts = m + 1;
    CellComplex::Data d;
    d.levels.resize(m);  // dimensions 0..m-1
    // subsets of size k+1 encoded as bitmasks, lexicographic by sorted members
    std::vector<std::map<std::uint32_t, std::int32_t>> index(m);
    for (int k = 0; k < m; ++k) {
        std::vector<std::uint32_t> masks;
        for (std::uint32_t s = 0; s < (1u << verts); ++s)
            if (__builtin_popcount(s) == k + 1) masks.push_back(s);
        std::sort(masks.begin(), masks.end(), [](std::uint32_t x, std::uint32_t y) {
            for (std::uint32_t b = 1; b; b <<= 1)
                if ((x & b) != (y & b)) return (x & b) != 0;
            return false;
        });
        auto& L = d.levels[k];
        const double vol = regular_simplex_volume(k);
        for (auto s : masks) {
            index[k][s] = static_cast<std::int32_t>(L.volume.size());
            int pos = 0;
            for (int v = 0; v < verts; ++v) {
                if (!(s & (1u << v))) continue;
                if (k > 0) L.faces.push_back({index[k - 1].at(s & ~(1u << v)), pos % 2 == 0 ? 1 : -1});
                L.nodes.push_back(v);
                ++pos;
            }
            L.face_offsets.push_back(static_cast<std::int32_t>(L.faces.size()));
            L.node_offsets.push_back(static_cast<std::int32_t>(L.nodes.size()));
            L.volume.push_back(vol);
        }
    }
    d.node_count = verts;
    d.coord_dim = verts;
    d.coords.assign(static_cast<std::size_t>(verts) * verts, 0.0);
    for (int v = 0; v < verts; ++v) d.coords[v * verts + v] = 1.0;
    barycentric_stars(d);
    d.label = "simplex:" + std::to_string(m);
    return CellComplex::from_data(std::move(d));
}

CellComplex product_complex(const CellComplex& A, const CellComplex& B) {
    const auto& a = A.data();
    const auto& b = B.data();
    const int na = A.dimension(), nb = B.dimension();
    const int n = na + nb;
    if (n == 0) throw InvalidArgument("product complex has dimension 0");
    const auto NB = static_cast<std::int32_t>(B.node_count());

    // block_start[k][i]: first index of the (i, k-i) block among k-cells
    std::vector<std::vector<std::int32_t>> block_start(n + 1, std::vector<std::int32_t>(na + 1, -1));
    CellComplex::Data d;
    d.levels.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        std::int32_t off = 0;
        for (int i = std::max(0, k - nb); i <= std::min(k, na); ++i) {
            block_start[k][i] = off;
            off += static_cast<std::int32_t>(A.cell_count(i) * B.cell_count(k - i));
        }
    }
    auto id = [&](int k, int i, std::size_t s, std::size_t t) {
        return block_start[k][i] + static_cast<std::int32_t>(s * B.cell_count(k - i) + t);
    };
    for (int k = 0; k <= n; ++k) {
        auto& L = d.levels[k];
        for (int i = std::max(0, k - nb); i <= std::min(k, na); ++i) {
            const int j = k - i;
            for (std::size_t s = 0; s < A.cell_count(i); ++s) {
                for (std::size_t t = 0; t < B.cell_count(j); ++t) {
                    if (i > 0)
                        for (const auto& f : A.faces(i, s)) L.faces.push_back({id(k - 1, i - 1, f.index, t), f.sign});
                    if (j > 0) {
                        const int sg = (i % 2 == 0) ? 1 : -1;
                        for (const auto& f : B.faces(j, t)) L.faces.push_back({id(k - 1, i, s, f.index), sg * f.sign});
                    }
                    L.face_offsets.push_back(static_cast<std::int32_t>(L.faces.size()));
                    for (auto x : A.cell_nodes(i, s))
                        for (auto y : B.cell_nodes(j, t)) L.nodes.push_back(x * NB + y);
                    L.node_offsets.push_back(static_cast<std::int32_t>(L.nodes.size()));
                    L.volume.push_back(a.levels[i].volume[s] * b.levels[j].volume[t]);
                    L.star.push_back(a.levels[i].star[s] * b.levels[j].star[t]);
                }
            }
        }
    }
    d.node_count = A.node_count() * B.node_count();
    d.coord_dim = a.coord_dim + b.coord_dim;
    d.coords.reserve(d.node_count * d.coord_dim);
    for (std::size_t x = 0; x < A.node_count(); ++x)
        for (std::size_t y = 0; y < B.node_count(); ++y) {
            auto cx = A.node_coords(x);
            auto cy = B.node_coords(y);
            d.coords.insert(d.coords.end(), cx.begin(), cx.end());
            d.coords.insert(d.coords.end(), cy.begin(), cy.end());
        }
    if (a.ambient_dim >= 0 || b.ambient_dim >= 0) d.ambient_dim = A.ambient_dimension() + B.ambient_dimension();
    d.label = A.label() + "x" + B.label();
    return CellComplex::from_data(std::move(d));
}

CellComplex radial_chain(std::span<const double> r, const std::function<double(double)>& density, bool dirichlet_end,
                         int ambient_dim) {
    const std::size_t m = r.size();
    if (m < 3) throw InvalidArgument("radial chain needs at least 3 nodes");
    for (std::size_t i = 0; i + 1 < m; ++i)
        if (!(r[i + 1] > r[i])) throw InvalidArgument("radial chain nodes must be strictly increasing");
    const std::size_t nv = dirichlet_end ? m - 1 : m;
    std::vector<double> vstar(nv, 0.0);
    CellComplex::Data d;
    d.levels.resize(2);
    auto& E = d.levels[1];
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double dx = r[j + 1] - r[j];
        const double v = density(0.5 * (r[j] + r[j + 1]));
        if (!(v > 0.0)) throw InvalidArgument("transverse density must be positive");
        const auto a = static_cast<std::int32_t>(j), b = static_cast<std::int32_t>(j + 1);
        if (j + 1 < nv)
            push_cell(E, {{a, -1}, {b, 1}}, {a, b}, dx, v / dx);
        else
            push_cell(E, {{a, -1}}, {a, b}, dx, v / dx);
        vstar[j] += 0.5 * v * dx;
        if (j + 1 < nv) vstar[j + 1] += 0.5 * v * dx;
    }
    d.levels[0] = make_vertices(nv, vstar);
    d.node_count = m;
    d.coord_dim = 1;
    d.coords.assign(r.begin(), r.end());
    d.ambient_dim = ambient_dim;
    d.label = "radial";
    return CellComplex::from_data(std::move(d));
}

CellComplex import_complex(std::istream& in) {
    struct Raw {
        std::vector<std::pair<long long, int>> faces;
        double weight;
    };
    std::vector<std::vector<long long>> ids;
    std::vector<std::vector<Raw>> cells;
    std::vector<std::unordered_map<long long, std::int32_t>> lookup;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fail = [&](const std::string& why) {
            throw ParseError("cell list line " + std::to_string(lineno) + ": " + why);
        };
        auto c1 = line.find(':');
        auto c2 = c1 == std::string::npos ? c1 : line.find(':', c1 + 1);
        if (c2 == std::string::npos) fail("expected `dim id : boundary : weight`");
        std::istringstream head(line.substr(0, c1)), body(line.substr(c1 + 1, c2 - c1 - 1)), tail(line.substr(c2 + 1));
        int dim;
        long long id;
        if (!(head >> dim >> id) || dim < 0 || dim > 32) fail("bad dimension or id");
        Raw raw;
        std::string tok;
        while (body >> tok) {
            int sign = 1;
            std::size_t pos = 0;
            if (tok[0] == '+' || tok[0] == '-') {
                sign = tok[0] == '-' ? -1 : 1;
                pos = 1;
            }
            try {
                std::size_t used = 0;
                long long f = std::stoll(tok.substr(pos), &used);
                if (used + pos != tok.size()) fail("bad boundary entry '" + tok + "'");
                raw.faces.emplace_back(f, sign);
            } catch (const std::logic_error&) {
                fail("bad boundary entry '" + tok + "'");
            }
        }
        if (!(tail >> raw.weight)) fail("missing weight");
        if (!(raw.weight > 0.0)) fail("weight must be positive");
        if (dim == 0 && !raw.faces.empty()) fail("vertices cannot have a boundary");
        if (dim > 0 && raw.faces.empty()) fail("cell of positive dimension without boundary");
        if (static_cast<int>(cells.size()) <= dim) {
            cells.resize(dim + 1);
            ids.resize(dim + 1);
            lookup.resize(dim + 1);
        }
        if (!lookup[dim].emplace(id, static_cast<std::int32_t>(cells[dim].size())).second)
            fail("duplicate id " + std::to_string(id) + " in dimension " + std::to_string(dim));
        ids[dim].push_back(id);
        cells[dim].push_back(std::move(raw));
    }
    if (cells.empty()) throw ParseError("cell list is empty");
    CellComplex::Data d;
    d.levels.resize(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        auto& L = d.levels[k];
        if (cells[k].empty()) throw ParseError("cell list has no cells of dimension " + std::to_string(k));
        for (std::size_t c = 0; c < cells[k].size(); ++c) {
            for (auto [f, s] : cells[k][c].faces) {
                auto it = lookup[k - 1].find(f);
                if (it == lookup[k - 1].end())
                    throw ParseError("cell " + std::to_string(ids[k][c]) + " refers to unknown face " + std::to_string(f));
                L.faces.push_back({it->second, s});
            }
            L.face_offsets.push_back(static_cast<std::int32_t>(L.faces.size()));
            L.volume.push_back(cells[k][c].weight);
        }
    }
    auto& V = d.levels[0];
    for (std::size_t i = 0; i < V.size(); ++i) {
        V.nodes.push_back(static_cast<std::int32_t>(i));
        V.node_offsets.push_back(static_cast<std::int32_t>(i + 1));
    }
    d.node_count = V.size();
    nodes_from_closure(d);
    barycentric_stars(d);
    d.label = "imported";
    try {
        return CellComplex::from_data(std::move(d));
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("cell list is not a valid complex: ") + e.what());
    }
}

CellComplex import_complex_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cell list '" + path + "'");
    return import_complex(in);
}

Eigen::SparseMatrix<int> boundary_matrix(const CellComplex& K, int k) {
    if (k < 1 || k > K.dimension())
        throw InvalidArgument("boundary degree " + std::to_string(k) + " outside 1.." + std::to_string(K.dimension()));
    std::vector<Eigen::Triplet<int>> t;
    for (std::size_t c = 0; c < K.cell_count(k); ++c)
        for (const auto& f : K.faces(k, c)) t.emplace_back(f.index, static_cast<int>(c), f.sign);
    Eigen::SparseMatrix<int> B(static_cast<Eigen::Index>(K.cell_count(k - 1)), static_cast<Eigen::Index>(K.cell_count(k)));
    B.setFromTriplets(t.begin(), t.end());
    return B;
}

Eigen::SparseMatrix<double> coboundary_matrix(const CellComplex& K, int k) {
    if (k < 0 || k >= K.dimension())
        throw InvalidArgument("coboundary degree " + std::to_string(k) + " outside 0.." + std::to_string(K.dimension() - 1));
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t c = 0; c < K.cell_count(k + 1); ++c)
        for (const auto& f : K.faces(k + 1, c)) t.emplace_back(static_cast<int>(c), f.index, f.sign);
    Eigen::SparseMatrix<double> D(static_cast<Eigen::Index>(K.cell_count(k + 1)), static_cast<Eigen::Index>(K.cell_count(k)));
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

std::vector<int> betti_numbers(const CellComplex& K) {
    std::vector<int> b(K.dimension() + 1);
    for (int k = 0; k <= K.dimension(); ++k)
        b[k] = static_cast<int>(K.cell_count(k)) - K.boundary_rank(k) - K.boundary_rank(k + 1);
    return b;
}

namespace {

ComplexSpec parse_factor(std::string_view text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    auto bad = [&](const std::string& why) { return ParseError("complex spec '" + std::string(text) + "': " + why); };
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::logic_error&) {
            throw bad("expected an integer, got '" + s + "'");
        }
        if (used != s.size()) throw bad("expected an integer, got '" + s + "'");
        return v;
    };
    auto to_double = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::logic_error&) {
            throw bad("expected a number, got '" + s + "'");
        }
        if (used != s.size()) throw bad("expected a number, got '" + s + "'");
        return v;
    };
    ComplexSpec s;
    const std::string& kind = parts[0];
    if (kind == "path" || kind == "cycle" || kind == "halfopen") {
        s.kind = kind == "path" ? ComplexSpec::Kind::path
                 : kind == "cycle" ? ComplexSpec::Kind::cycle
                                   : ComplexSpec::Kind::halfopen;
        if (parts.size() < 2 || parts.size() > 3) throw bad("expected " + kind + ":M[:L]");
        s.resolution = to_int(parts[1]);
        if (parts.size() == 3) s.length = to_double(parts[2]);
    } else if (kind == "simplex") {
        if (parts.size() != 2) throw bad("expected simplex:M");
        s.kind = ComplexSpec::Kind::simplex_boundary;
        s.resolution = to_int(parts[1]);
    } else {
        throw bad("unknown kind '" + kind + "'");
    }
    return s;
}

}  // namespace

ComplexSpec ComplexSpec::parse(std::string_view text) {
    if (text.rfind("file:", 0) == 0) {
        ComplexSpec s;
        s.kind = Kind::imported;
        s.file = std::string(text.substr(5));
        if (s.file.empty()) throw ParseError("complex spec 'file:' needs a path");
        return s;
    }
    std::vector<ComplexSpec> factors;
    std::size_t start = 0;
    // 'x' separates factors only right after a number ("simplex" contains one too)
    auto next_sep = [&](std::size_t from) {
        for (auto pos = text.find('x', from); pos != std::string_view::npos; pos = text.find('x', pos + 1))
            if (pos > 0 && (std::isdigit(static_cast<unsigned char>(text[pos - 1])) || text[pos - 1] == '.')) return pos;
        return std::string_view::npos;
    };
    while (true) {
        auto pos = next_sep(start);
        factors.push_back(parse_factor(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (factors.size() == 1) return factors[0];
    ComplexSpec s;
    s.kind = Kind::product;
    s.factors = std::move(factors);
    return s;
}

std::string ComplexSpec::to_string() const {
    auto len = [&] {
        if (length == 1.0) return std::string();
        std::ostringstream os;
        os.precision(17);
        os << ':' << length;
        return os.str();
    };
    switch (kind) {
        case Kind::path: return "path:" + std::to_string(resolution) + len();
        case Kind::cycle: return "cycle:" + std::to_string(resolution) + len();
        case Kind::halfopen: return "halfopen:" + std::to_string(resolution) + len();
        case Kind::simplex_boundary: return "simplex:" + std::to_string(resolution);
        case Kind::imported: return "file:" + file;
        case Kind::product: {
            std::string out;
            for (std::size_t i = 0; i < factors.size(); ++i) out += (i ? "x" : "") + factors[i].to_string();
            return out;
        }
    }
    return {};
}

CellComplex build_complex(const ComplexSpec& spec) {
    switch (spec.kind) {
        case ComplexSpec::Kind::path: return path_complex(spec.resolution, spec.length);
        case ComplexSpec::Kind::cycle: return cycle_complex(spec.resolution, spec.length);
        case ComplexSpec::Kind::halfopen: return halfopen_complex(spec.resolution, spec.length);
        case ComplexSpec::Kind::simplex_boundary: return simplex_boundary_complex(spec.resolution);
        case ComplexSpec::Kind::imported: return import_complex_file(spec.file);
        case ComplexSpec::Kind::product: {
            if (spec.factors.empty()) throw InvalidArgument("product needs at least one factor");
            CellComplex K = build_complex(spec.factors[0]);
            for (std::size_t i = 1; i < spec.factors.size(); ++i) K = product_complex(K, build_complex(spec.factors[i]));
            return K;
        }
    }
    throw InvalidArgument("unknown complex kind");
}

}  // namespace cspec

#include "exact_rank.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <unordered_map>

#include <boost/multiprecision/cpp_int.hpp>

namespace cspec::detail {
namespace {

using boost::multiprecision::cpp_int;

struct Overflow {};

// Checked arithmetic so the fast path can bail out.
struct I64 {
    using T = std::int64_t;
    static T mul(T a, T b) {
        T r;
        if (__builtin_mul_overflow(a, b, &r)) throw Overflow{};
        return r;
    }
    static T sub(T a, T b) {
        T r;
        if (__builtin_sub_overflow(a, b, &r)) throw Overflow{};
        return r;
    }
    static T gcd(T a, T b) { return std::gcd(a, b); }
    static bool negative(const T& a) { return a < 0; }
};

struct Big {
    using T = cpp_int;
    static T mul(const T& a, const T& b) { return a * b; }
    static T sub(const T& a, const T& b) { return a - b; }
    static T gcd(const T& a, const T& b) { return boost::multiprecision::gcd(a, b); }
    static bool negative(const T& a) { return a < 0; }
};

template <class A>
using Column = std::vector<std::pair<std::int32_t, typename A::T>>;

template <class A>
void make_primitive(Column<A>& c) {
    using T = typename A::T;
    T g = 0;
    for (auto& [r, v] : c) {
        g = A::gcd(g, v);
        if (g == 1) break;
    }
    if (g < 0) g = -g;
    bool flip = A::negative(c.back().second);
    if (g != 1 || flip) {
        if (flip) g = -g;
        for (auto& [r, v] : c) v /= g;
    }
}

// c <- a*c - b*p, with both sorted by row; entries that cancel are dropped.
template <class A>
void combine(Column<A>& c, const typename A::T& a, const Column<A>& p, const typename A::T& b, Column<A>& scratch) {
    scratch.clear();
    std::size_t i = 0, j = 0;
    while (i < c.size() || j < p.size()) {
        if (j == p.size() || (i < c.size() && c[i].first < p[j].first)) {
            scratch.emplace_back(c[i].first, A::mul(a, c[i].second));
            ++i;
        } else if (i == c.size() || p[j].first < c[i].first) {
            scratch.emplace_back(p[j].first, A::sub(0, A::mul(b, p[j].second)));
            ++j;
        } else {
            auto v = A::sub(A::mul(a, c[i].second), A::mul(b, p[j].second));
            if (v != 0) scratch.emplace_back(c[i].first, std::move(v));
            ++i;
            ++j;
        }
    }
    c.swap(scratch);
}

template <class A>
int reduce(const std::vector<SparseIntColumn>& input) {
    std::vector<Column<A>> pivots;
    std::unordered_map<std::int32_t, std::size_t> pivot_of_row;
    Column<A> scratch;
    for (const auto& raw : input) {
        Column<A> c;
        c.reserve(raw.size());
        for (auto& [r, v] : raw)
            if (v != 0) c.emplace_back(r, typename A::T(v));
        std::sort(c.begin(), c.end(), [](auto& x, auto& y) { return x.first < y.first; });
        // merge duplicate rows
        std::size_t w = 0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (w > 0 && c[w - 1].first == c[i].first) {
                c[w - 1].second += c[i].second;
            } else {
                c[w++] = c[i];
            }
        }
        c.resize(w);
        c.erase(std::remove_if(c.begin(), c.end(), [](auto& e) { return e.second == 0; }), c.end());

        while (!c.empty()) {
            auto it = pivot_of_row.find(c.back().first);
            if (it == pivot_of_row.end()) break;
            const auto& p = pivots[it->second];
            typename A::T a = p.back().second;
            typename A::T b = c.back().second;
            auto g = A::gcd(a, b);
            a /= g;
            b /= g;
            combine<A>(c, a, p, b, scratch);
            if (!c.empty()) make_primitive<A>(c);
        }
        if (!c.empty()) {
            pivot_of_row.emplace(c.back().first, pivots.size());
            pivots.push_back(std::move(c));
        }
    }
    return static_cast<int>(pivots.size());
}

}  // namespace

int exact_rank(std::vector<SparseIntColumn> columns) {
    try {
        return reduce<I64>(columns);
    } catch (const Overflow&) {
        return reduce<Big>(columns);
    }
}

}  // namespace cspec::detail

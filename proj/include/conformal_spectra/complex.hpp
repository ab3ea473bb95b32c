#pragma once

// Cell complexes with signed boundary incidence: the discretized manifolds
// every other module works on.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

namespace cspec {

struct Face {
    std::int32_t index;
    std::int32_t sign;  // +1 or -1
};

/// A finite oriented cell complex.
///
/// Besides the combinatorics, every k-cell carries a reference volume (units
/// length^k) and a diagonal Hodge-star weight (dual volume over primal volume,
/// units length^(n-2k)). Profiles are sampled on *nodes*: every 0-cell is a
/// node, and relative complexes keep extra nodes for the vertices that were
/// quotiented out so that boundary cells can still average a profile.
class CellComplex {
public:
    struct Level {
        std::vector<std::int32_t> face_offsets{0};
        std::vector<Face> faces;
        std::vector<std::int32_t> node_offsets{0};
        std::vector<std::int32_t> nodes;
        std::vector<double> volume;
        std::vector<double> star;

        std::size_t size() const { return volume.size(); }
    };

    struct Data {
        std::vector<Level> levels;  // levels[k] holds the k-cells
        int ambient_dim = -1;       // -1: use the top cell dimension
        int coord_dim = 0;
        std::size_t node_count = 0;
        std::vector<double> coords;  // node_count * coord_dim
        std::string label;
    };

    CellComplex() = default;

    /// Validates (boundary of boundary is zero, positive weights, index ranges) and freezes.
    static CellComplex from_data(Data data);

    int dimension() const { return static_cast<int>(data_.levels.size()) - 1; }
    int ambient_dimension() const { return data_.ambient_dim < 0 ? dimension() : data_.ambient_dim; }
    std::size_t cell_count(int k) const;
    std::span<const Face> faces(int k, std::size_t cell) const;
    std::span<const std::int32_t> cell_nodes(int k, std::size_t cell) const;
    std::span<const double> volumes(int k) const;
    std::span<const double> stars(int k) const;

    std::size_t node_count() const { return data_.node_count; }
    int coord_dim() const { return data_.coord_dim; }
    std::span<const double> node_coords(std::size_t node) const;
    /// Node index carrying 0-cell `v`.
    std::int32_t vertex_node(std::size_t v) const { return data_.levels[0].nodes[v]; }

    /// Rank over the rationals of the boundary map from k-cells to (k-1)-cells.
    /// Zero for k <= 0 or k > dimension(). Computed once, exactly.
    int boundary_rank(int k) const;

    const std::string& label() const { return data_.label; }
    const Data& data() const { return data_; }

    /// Same complex, but conformal weight exponents use `n` instead of the cell dimension.
    CellComplex with_ambient_dimension(int n) const;

private:
    struct RankCache;
    Data data_;
    std::shared_ptr<RankCache> ranks_;
};

/// Declarative description of a complex. Text form (CLI):
///   path:M[:L]  cycle:M[:L]  halfopen:M[:L]  simplex:M  file:PATH
/// and products joined by 'x', e.g. `cycle:8xcycle:8`.
struct ComplexSpec {
    enum class Kind { path, cycle, halfopen, simplex_boundary, product, imported };

    Kind kind = Kind::path;
    int resolution = 0;
    double length = 1.0;
    std::vector<ComplexSpec> factors;
    std::string file;

    static ComplexSpec parse(std::string_view text);
    std::string to_string() const;
};

CellComplex build_complex(const ComplexSpec& spec);

/// m vertices on [origin, origin + length], uniform spacing.
CellComplex path_complex(int m, double length = 1.0, double origin = 0.0);
/// m vertices on a circle of circumference `length`.
CellComplex cycle_complex(int m, double length = 1.0);
/// path_complex with its last vertex quotiented out (cochains vanish there).
CellComplex halfopen_complex(int m, double length = 1.0, double origin = 0.0);
/// Boundary of the standard m-simplex (m+1 vertices): a triangulated S^(m-1).
CellComplex simplex_boundary_complex(int m);
CellComplex product_complex(const CellComplex& a, const CellComplex& b);

/// 1D chain on the given increasing nodes whose reference weights carry a
/// transverse density v(r) evaluated at cell midpoints (midpoint rule).
CellComplex radial_chain(std::span<const double> nodes, const std::function<double(double)>& density,
                         bool dirichlet_end, int ambient_dim);

/// Plain-text cell list, one cell per line: `dim id : signed-boundary-id-list : volume`.
CellComplex import_complex(std::istream& in);
CellComplex import_complex_file(const std::string& path);

/// Signed incidence matrix from k-cells (columns) to (k-1)-cells (rows).
Eigen::SparseMatrix<int> boundary_matrix(const CellComplex& complex, int k);
/// Coboundary d_k: k-cochains -> (k+1)-cochains, as a real matrix.
Eigen::SparseMatrix<double> coboundary_matrix(const CellComplex& complex, int k);

std::vector<int> betti_numbers(const CellComplex& complex);

}  // namespace cspec

#pragma once

// Thin handles: join two complexes by a 1D chain whose transverse weight is an
// eps-sphere cross-section, carrying the conformal factor h = eps / r that turns
// the punctured eps-ball into a cylinder of length L.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "conformal_spectra/eigensolve.hpp"

namespace cspec {

/// eps / r on [eps e^(-L/eps), eps], e^(L/eps) below that. Throws InvalidArgument unless eps, L > 0.
double handle_profile(double eps, double L, double r);
std::vector<double> handle_profile(double eps, double L, std::span<const double> r);

/// Volume of the unit sphere S^(d).
double unit_sphere_volume(int d);

struct HandleSpec {
    double eps = 0.1;
    double length = 0.1;
    int left_vertex = 0;   // 0-cell of the first complex
    int right_vertex = 0;  // 0-cell of the second complex
    int resolution = 16;   // cells along the handle
    double profile_scale = 1.0;  // homothety factor applied to the handle profile

    void validate() const;
};

struct GluedComplex {
    CellComplex complex;
    ConformalProfile profile;
    std::size_t handle_vertices = 0;  // interior handle vertices, appended after both complexes
};

/// Block-diagonal union: cells of `a` first, then `b`; profiles concatenated.
GluedComplex disjoint_union(const CellComplex& a, const ConformalProfile& ha, const CellComplex& b,
                            const ConformalProfile& hb);

/// Disjoint union plus the handle chain from a's left_vertex to b's right_vertex.
/// Both complexes need the same dimension and ambient dimension n >= 2.
/// The handle nodes are at r_i = eps e^(-s_i/eps), s_i = L i / resolution; its end
/// nodes are the attachment vertices and keep the profiles of a and b (the
/// singular junction is blended over one cell).
GluedComplex glue_complexes(const CellComplex& a, const ConformalProfile& ha, const CellComplex& b,
                            const ConformalProfile& hb, const HandleSpec& spec);

struct HandleRow {
    double eps = 0.0;
    int degree = 0;
    std::vector<double> values;     // first m nonzero coexact values after the tunneling ones
    std::vector<double> tunneling;  // small values that replace lost harmonic forms
    std::vector<double> reference;  // first m values of the union of the separate spectra
    double deviation = 0.0;         // max relative deviation values vs reference
    int harmonic_dim = 0;
    std::string error;
};

struct HandleSweepOptions {
    int m = 4;
    std::vector<int> degrees{0};
    int threads = 1;
    SolverOptions solver;
};

/// Glues at every eps in the (strictly decreasing) list and compares the spectra to the union.
std::vector<HandleRow> handle_sweep(const CellComplex& a, const ConformalProfile& ha, const CellComplex& b,
                                    const ConformalProfile& hb, const HandleSpec& base,
                                    const std::vector<double>& eps_list, const HandleSweepOptions& opts = {});

/// CSV: eps,degree,index,kind,value,union,rel_deviation,max_deviation,error
void write_handle_csv(std::ostream& out, const std::vector<HandleRow>& rows);

}  // namespace cspec

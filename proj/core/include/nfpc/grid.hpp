#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace nfpc {

/// Spatial point; the second coordinate is unused (zero) when dim == 1.
using Point = std::array<double, 2>;

/**
 * Uniform cell-centred periodic grid on [-L, L]^d together with the time
 * discretisation of [0, T].
 *
 * Cells are indexed row-major: in 2-d the flat index is ix * cells + iy with
 * ix running along the first axis.
 */
struct GridSpec {
    int dim = 1;
    double half_width = 1.0;
    int cells = 64;
    double horizon = 1.0;
    int steps = 1;

    double dx() const { return 2.0 * half_width / cells; }
    double dt() const { return horizon / steps; }
    double cell_volume() const;
    std::size_t cell_count() const;
    double center(int i) const { return -half_width + (i + 0.5) * dx(); }
    Point point(std::size_t flat) const;
    std::array<int, 2> unflatten(std::size_t flat) const;
    std::size_t flatten(int ix, int iy) const;
    double time(int n) const { return n * dt(); }

    /// Throws ContractError when the grid is not usable.
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

/// One value per cell.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& grid, double fill = 0.0);
    ScalarField(const GridSpec& grid, std::vector<double> values);

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double min() const;
    double max() const;
    bool all_finite() const;

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double a);

private:
    GridSpec grid_{};
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double a, ScalarField f);
/// Cell-wise product.
ScalarField hadamard(const ScalarField& a, const ScalarField& b);

/// d values per cell, stored component-major.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const GridSpec& grid, double fill = 0.0);

    const GridSpec& grid() const { return grid_; }
    int dim() const { return grid_.dim; }
    const std::vector<double>& component(int k) const { return comps_[k]; }
    std::vector<double>& component(int k) { return comps_[k]; }
    ScalarField component_field(int k) const { return ScalarField(grid_, comps_[k]); }
    bool all_finite() const;
    /// Max over cells of the Euclidean norm.
    double max_norm() const;

private:
    GridSpec grid_{};
    std::array<std::vector<double>, 2> comps_;
};

/// Tabulates f at every cell centre.
template <class F>
ScalarField tabulate(const GridSpec& grid, F&& f) {
    ScalarField out(grid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(grid.point(i));
    return out;
}

/// Midpoint quadrature: sum of values times dx^d.
double integrate(const ScalarField& f);
/// Quadrature-weighted L2 inner product.
double inner(const ScalarField& f, const ScalarField& g);
double l1_distance(const ScalarField& f, const ScalarField& g);
double l2_norm(const ScalarField& f);
double l2_distance(const ScalarField& f, const ScalarField& g);

/// Second-order central differences with periodic wrap.
VectorField gradient(const ScalarField& f);
/// 3-point (1-d) or 5-point (2-d) periodic Laplacian.
ScalarField laplacian(const ScalarField& f);

/// Mean and per-axis variance of a density (first axis only in 1-d).
struct Moments {
    double mass = 0.0;
    Point mean{};
    Point variance{};
};
Moments moments(const ScalarField& density);

/// Integral of |f| over cells within `band` (fraction of L) of the box boundary.
double boundary_mass(const ScalarField& f, double band = 0.05);

/// CSV with header `x[,y],value`, row-major, 17 significant digits.
void write_csv(std::ostream& os, const ScalarField& f);
void write_csv(const std::string& path, const ScalarField& f);
/// Reads a field written by write_csv onto `grid`; throws ContractError on
/// shape mismatch.
ScalarField read_csv(std::istream& is, const GridSpec& grid);

}  // namespace nfpc

#include "nfpc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "nfpc/error.hpp"

namespace nfpc {

double GridSpec::cell_volume() const { return dim == 1 ? dx() : dx() * dx(); }

std::size_t GridSpec::cell_count() const {
    const auto n = static_cast<std::size_t>(cells);
    return dim == 1 ? n : n * n;
}

std::array<int, 2> GridSpec::unflatten(std::size_t flat) const {
    if (dim == 1) return {static_cast<int>(flat), 0};
    return {static_cast<int>(flat / cells), static_cast<int>(flat % cells)};
}

std::size_t GridSpec::flatten(int ix, int iy) const {
    if (dim == 1) return static_cast<std::size_t>(ix);
    return static_cast<std::size_t>(ix) * cells + iy;
}

Point GridSpec::point(std::size_t flat) const {
    const auto [ix, iy] = unflatten(flat);
    return {center(ix), dim == 2 ? center(iy) : 0.0};
}

void GridSpec::validate() const {
    if (dim != 1 && dim != 2) throw ContractError("grid: dim must be 1 or 2");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw ContractError("grid: half_width must be positive");
    if (cells < 8) throw ContractError("grid: cells per axis must be >= 8");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ContractError("grid: horizon must be positive");
    if (steps < 1) throw ContractError("grid: time steps must be >= 1");
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const GridSpec& grid, double fill)
    : grid_(grid), values_(grid.cell_count(), fill) {}

ScalarField::ScalarField(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.cell_count())
        throw ContractError("field: value count does not match grid");
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

static void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw ContractError("field: grid mismatch");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
    require_same_grid(grid_, other.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
    require_same_grid(grid_, other.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double a, ScalarField f) { return f *= a; }

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid());
    ScalarField out(a.grid());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

VectorField::VectorField(const GridSpec& grid, double fill) : grid_(grid) {
    for (int k = 0; k < grid.dim; ++k) comps_[k].assign(grid.cell_count(), fill);
}

bool VectorField::all_finite() const {
    for (int k = 0; k < dim(); ++k)
        for (double v : comps_[k])
            if (!std::isfinite(v)) return false;
    return true;
}

double VectorField::max_norm() const {
    double best = 0.0;
    for (std::size_t i = 0; i < grid_.cell_count(); ++i) {
        double s = 0.0;
        for (int k = 0; k < dim(); ++k) s += comps_[k][i] * comps_[k][i];
        best = std::max(best, std::sqrt(s));
    }
    return best;
}

// ---------------------------------------------------------------------------

double integrate(const ScalarField& f) {
    double sum = 0.0;
    for (double v : f.values()) sum += v;
    return sum * f.grid().cell_volume();
}

double inner(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f.grid(), g.grid());
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += f[i] * g[i];
    return sum * f.grid().cell_volume();
}

double l1_distance(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f.grid(), g.grid());
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += std::abs(f[i] - g[i]);
    return sum * f.grid().cell_volume();
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double l2_distance(const ScalarField& f, const ScalarField& g) { return l2_norm(f - g); }

namespace {

inline int wrap(int i, int n) { return i < 0 ? i + n : (i >= n ? i - n : i); }

}  // namespace

VectorField gradient(const ScalarField& f) {
    const GridSpec& g = f.grid();
    const int n = g.cells;
    const double inv = 1.0 / (2.0 * g.dx());
    VectorField out(g);
    for (std::size_t c = 0; c < f.size(); ++c) {
        const auto [ix, iy] = g.unflatten(c);
        out.component(0)[c] = (f[g.flatten(wrap(ix + 1, n), iy)] - f[g.flatten(wrap(ix - 1, n), iy)]) * inv;
        if (g.dim == 2)
            out.component(1)[c] = (f[g.flatten(ix, wrap(iy + 1, n))] - f[g.flatten(ix, wrap(iy - 1, n))]) * inv;
    }
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    const GridSpec& g = f.grid();
    const int n = g.cells;
    const double inv = 1.0 / (g.dx() * g.dx());
    ScalarField out(g);
    for (std::size_t c = 0; c < f.size(); ++c) {
        const auto [ix, iy] = g.unflatten(c);
        double v = f[g.flatten(wrap(ix + 1, n), iy)] - 2.0 * f[c] + f[g.flatten(wrap(ix - 1, n), iy)];
        if (g.dim == 2)
            v += f[g.flatten(ix, wrap(iy + 1, n))] - 2.0 * f[c] + f[g.flatten(ix, wrap(iy - 1, n))];
        out[c] = v * inv;
    }
    return out;
}

Moments moments(const ScalarField& density) {
    const GridSpec& g = density.grid();
    Moments m;
    m.mass = integrate(density);
    for (int k = 0; k < g.dim; ++k) {
        double first = 0.0;
        for (std::size_t c = 0; c < density.size(); ++c) first += density[c] * g.point(c)[k];
        m.mean[k] = first * g.cell_volume() / m.mass;
        double second = 0.0;
        for (std::size_t c = 0; c < density.size(); ++c) {
            const double d = g.point(c)[k] - m.mean[k];
            second += density[c] * d * d;
        }
        m.variance[k] = second * g.cell_volume() / m.mass;
    }
    return m;
}

double boundary_mass(const ScalarField& f, double band) {
    const GridSpec& g = f.grid();
    const double inner_edge = (1.0 - band) * g.half_width;
    double sum = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c) {
        const Point p = g.point(c);
        bool near = std::abs(p[0]) > inner_edge;
        if (g.dim == 2) near = near || std::abs(p[1]) > inner_edge;
        if (near) sum += std::abs(f[c]);
    }
    return sum * g.cell_volume();
}

void write_csv(std::ostream& os, const ScalarField& f) {
    const GridSpec& g = f.grid();
    os << (g.dim == 1 ? "x,value\n" : "x,y,value\n");
    char buf[128];
    for (std::size_t c = 0; c < f.size(); ++c) {
        const Point p = g.point(c);
        if (g.dim == 1)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p[0], f[c]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p[0], p[1], f[c]);
        os << buf;
    }
}

void write_csv(const std::string& path, const ScalarField& f) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_csv(os, f);
}

ScalarField read_csv(std::istream& is, const GridSpec& grid) {
    std::string line;
    if (!std::getline(is, line)) throw ContractError("csv: empty input");
    const std::string expected = grid.dim == 1 ? "x,value" : "x,y,value";
    if (line != expected) throw ContractError("csv: unexpected header '" + line + "'");
    std::vector<double> values;
    values.reserve(grid.cell_count());
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto pos = line.rfind(',');
        values.push_back(std::stod(line.substr(pos + 1)));
    }
    if (values.size() != grid.cell_count()) throw ContractError("csv: row count does not match grid");
    return ScalarField(grid, std::move(values));
}

}  // namespace nfpc

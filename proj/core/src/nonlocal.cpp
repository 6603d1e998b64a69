#include "nfpc/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fft.hpp"
#include "nfpc/error.hpp"

namespace nfpc {

// ---------------------------------------------------------------------------
// OmegaMask / fields on omega
// ---------------------------------------------------------------------------

OmegaMask::OmegaMask(const GridSpec& grid, std::vector<std::uint8_t> mask)
    : grid_(grid), mask_(std::move(mask)) {
    grid_.validate();
    if (mask_.size() != grid_.cell_count()) throw ContractError("omega: mask size does not match grid");
    for (std::size_t c = 0; c < mask_.size(); ++c) {
        if (!mask_[c]) continue;
        const auto [ix, iy] = grid_.unflatten(c);
        const bool edge = ix == 0 || ix == grid_.cells - 1 ||
                          (grid_.dim == 2 && (iy == 0 || iy == grid_.cells - 1));
        if (edge) throw ContractError("omega: must lie strictly inside the box");
        cells_.push_back(c);
    }
    if (cells_.empty()) throw ContractError("omega: region is empty");
}

OmegaMask OmegaMask::box(const GridSpec& grid, Point lower, Point upper) {
    grid.validate();
    std::vector<std::uint8_t> mask(grid.cell_count(), 0);
    for (std::size_t c = 0; c < mask.size(); ++c) {
        const Point p = grid.point(c);
        bool in = true;
        for (int k = 0; k < grid.dim; ++k) in = in && p[k] >= lower[k] && p[k] <= upper[k];
        mask[c] = in ? 1 : 0;
    }
    return OmegaMask(grid, std::move(mask));
}

double OmegaMask::reach() const {
    double r = 0.0;
    for (std::size_t c : cells_) {
        const Point p = grid_.point(c);
        for (int k = 0; k < grid_.dim; ++k) r = std::max(r, std::abs(p[k]));
    }
    return r;
}

double conjugate_exponent(double l) {
    if (l <= 1.0) return std::numeric_limits<double>::infinity();
    return l / (l - 1.0);
}

ScalarField OmegaField::zero_extended() const {
    ScalarField out(omega->grid());
    const auto& cells = omega->cells();
    for (std::size_t j = 0; j < cells.size(); ++j) out[cells[j]] = values[j];
    return out;
}

OmegaField OmegaField::restrict(const ScalarField& f, OmegaPtr omega) {
    if (!(f.grid() == omega->grid())) throw ContractError("omega: grid mismatch");
    OmegaField out{std::move(omega), {}};
    out.values.reserve(out.omega->count());
    for (std::size_t c : out.omega->cells()) out.values.push_back(f[c]);
    return out;
}

double omega_inner(const OmegaField& a, const OmegaField& b) {
    if (a.values.size() != b.values.size()) throw ContractError("omega: field size mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j) s += a.values[j] * b.values[j];
    return s * a.omega->grid().cell_volume();
}

double omega_l2_norm(const OmegaField& a) { return std::sqrt(omega_inner(a, a)); }

double omega_l2_distance(const OmegaField& a, const OmegaField& b) {
    OmegaField d = a;
    for (std::size_t j = 0; j < d.values.size(); ++j) d.values[j] -= b.values[j];
    return omega_l2_norm(d);
}

ControlField::ControlField(OmegaPtr omega, double bound, std::vector<double> values)
    : omega_(std::move(omega)), bound_(bound), values_(std::move(values)) {
    if (!omega_) throw ContractError("control: missing omega");
    if (!(bound_ > 0.0) || !std::isfinite(bound_))
        throw ContractError("admissible set: control bound M0 must be positive");
    if (values_.size() != omega_->count()) throw ContractError("control: size does not match omega");
    for (double v : values_)
        if (!(v >= 0.0 && v <= bound_))
            throw ContractError("admissible set: control value outside [0, M0]");
}

ControlField ControlField::constant(OmegaPtr omega, double bound, double value) {
    const std::size_t n = omega ? omega->count() : 0;
    return ControlField(std::move(omega), bound, std::vector<double>(n, value));
}

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

namespace {

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

Kernel::Kernel(const GridSpec& grid, std::vector<double> values, double exponent)
    : grid_(grid), values_(std::move(values)), exponent_(exponent) {
    grid_.validate();
    if (values_.size() != grid_.cell_count()) throw ContractError("kernel: table size does not match grid");
    if (!(exponent_ >= 1.0 && exponent_ <= 2.0)) throw ContractError("kernel: exponent l must lie in [1, 2]");
    for (double v : values_) {
        if (!std::isfinite(v)) throw ContractError("kernel: non-finite entry");
        if (v < 0.0) throw ContractError("kernel: K must be nonnegative");
    }

    const int n = grid_.cells;
    const double inv = 1.0 / (2.0 * grid_.dx());
    for (int k = 0; k < grid_.dim; ++k) grad_[k].assign(values_.size(), 0.0);
    for (std::size_t c = 0; c < values_.size(); ++c) {
        const auto [mx, my] = grid_.unflatten(c);
        grad_[0][c] = (values_[grid_.flatten(wrap(mx + 1, n), my)] - values_[grid_.flatten(wrap(mx - 1, n), my)]) * inv;
        if (grid_.dim == 2)
            grad_[1][c] = (values_[grid_.flatten(mx, wrap(my + 1, n))] - values_[grid_.flatten(mx, wrap(my - 1, n))]) * inv;
        if (values_[c] != 0.0) support_.push_back(c);
    }

    const double vol = grid_.cell_volume();
    double lp = 0.0, glp = 0.0, mass = 0.0, sup = 0.0;
    for (std::size_t c = 0; c < values_.size(); ++c) {
        lp += std::pow(values_[c], exponent_);
        double g2 = 0.0;
        for (int k = 0; k < grid_.dim; ++k) g2 += grad_[k][c] * grad_[k][c];
        glp += std::pow(std::sqrt(g2), exponent_);
        mass += values_[c];
        sup = std::max(sup, values_[c]);
    }
    norms_.lp = std::pow(lp * vol, 1.0 / exponent_);
    norms_.grad_lp = std::pow(glp * vol, 1.0 / exponent_);
    norms_.mass = mass * vol;
    norms_.sup = sup;
    if (!std::isfinite(norms_.lp) || !std::isfinite(norms_.grad_lp))
        throw ContractError("kernel: norm diagnostics are not finite");
}

int Kernel::displacement(int m) const {
    const int n = grid_.cells;
    return m < (n + 1) / 2 ? m : m - n;
}

double Kernel::tail_fraction(double min_distance) const {
    double tail = 0.0, total = 0.0;
    for (std::size_t c = 0; c < values_.size(); ++c) {
        const auto [mx, my] = grid_.unflatten(c);
        double r = std::abs(displacement(mx)) * grid_.dx();
        if (grid_.dim == 2) r = std::max(r, std::abs(displacement(my)) * grid_.dx());
        total += values_[c];
        if (r >= min_distance) tail += values_[c];
    }
    return total > 0.0 ? tail / total : 0.0;
}

double Kernel::sup_bound(double bound, double omega_measure) const {
    return bound * std::pow(omega_measure, 1.0 - 1.0 / exponent_) * norms_.lp;
}

double Kernel::grad_sup_bound(double bound, double omega_measure) const {
    return bound * std::pow(omega_measure, 1.0 - 1.0 / exponent_) * norms_.grad_lp;
}

Kernel build_kernel(const GridSpec& grid, const KernelParams& params) {
    grid.validate();
    if (params.type != KernelType::delta && !(params.width > 0.0))
        throw ContractError("kernel: width must be positive");
    if (!(params.amplitude > 0.0)) throw ContractError("kernel: amplitude must be positive");
    if (params.type == KernelType::bump && params.width >= grid.half_width)
        throw ContractError("kernel: bump radius must be smaller than the box half-width");

    std::vector<double> table(grid.cell_count(), 0.0);
    const double dx = grid.dx();
    const int n = grid.cells;
    auto disp = [n](int m) { return m < (n + 1) / 2 ? m : m - n; };

    switch (params.type) {
        case KernelType::delta:
            table[0] = 1.0 / grid.cell_volume();
            break;
        case KernelType::gaussian:
        case KernelType::bump:
            for (std::size_t c = 0; c < table.size(); ++c) {
                const auto [mx, my] = grid.unflatten(c);
                const double x = disp(mx) * dx;
                const double y = grid.dim == 2 ? disp(my) * dx : 0.0;
                const double r2 = x * x + y * y;
                if (params.type == KernelType::gaussian) {
                    table[c] = params.amplitude * std::exp(-r2 / (2.0 * params.width * params.width));
                } else {
                    const double rho2 = r2 / (params.width * params.width);
                    table[c] = rho2 < 1.0 ? params.amplitude * std::exp(1.0 - 1.0 / (1.0 - rho2)) : 0.0;
                }
            }
            break;
    }

    if (params.normalize && params.type != KernelType::delta) {
        double mass = 0.0;
        for (double v : table) mass += v;
        mass *= grid.cell_volume();
        if (!(mass > 0.0)) throw ContractError("kernel: cannot normalise a kernel with zero mass (width below grid resolution)");
        for (double& v : table) v /= mass;
    }
    return Kernel(grid, std::move(table), params.exponent);
}

// ---------------------------------------------------------------------------
// Convolution operators
// ---------------------------------------------------------------------------

namespace {

void require_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw ContractError("nonlocal operator: grid mismatch between kernel and field");
}

bool use_direct(ConvolutionMethod method, std::size_t nnz, std::size_t omega_count, const GridSpec& grid) {
    switch (method) {
        case ConvolutionMethod::direct: return true;
        case ConvolutionMethod::fft: return false;
        case ConvolutionMethod::automatic: break;
    }
    const double n = static_cast<double>(grid.cell_count());
    return static_cast<double>(nnz) * static_cast<double>(omega_count) <= 4.0 * n * std::log2(n);
}

std::vector<std::size_t> nonzero(const std::vector<double>& table) {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < table.size(); ++c)
        if (table[c] != 0.0) out.push_back(c);
    return out;
}

std::size_t shift(const GridSpec& g, std::size_t cell, std::size_t tap) {
    const auto [ix, iy] = g.unflatten(cell);
    const auto [mx, my] = g.unflatten(tap);
    return g.flatten((ix + mx) % g.cells, (iy + my) % g.cells);
}

// out = (table * u_ext) dx^d
std::vector<double> convolve_table(const GridSpec& g, const std::vector<double>& table,
                                   const std::vector<std::size_t>& taps, const ControlField& u,
                                   ConvolutionMethod method) {
    const double vol = g.cell_volume();
    if (use_direct(method, taps.size(), u.size(), g)) {
        std::vector<double> out(g.cell_count(), 0.0);
        const auto& cells = u.omega()->cells();
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const double w = u[j] * vol;
            if (w == 0.0) continue;
            for (std::size_t m : taps) out[shift(g, cells[j], m)] += table[m] * w;
        }
        return out;
    }
    const ScalarField ext = u.zero_extended();
    std::vector<double> out = detail::circular_convolve(g, table, ext.values());
    for (double& v : out) v *= vol;
    return out;
}

}  // namespace

ScalarField apply_S(const Kernel& kernel, const ControlField& u, ConvolutionMethod method) {
    require_grid(kernel.grid(), u.grid());
    return ScalarField(kernel.grid(), convolve_table(kernel.grid(), kernel.values(), kernel.support(), u, method));
}

VectorField apply_grad_S(const Kernel& kernel, const ControlField& u, ConvolutionMethod method) {
    require_grid(kernel.grid(), u.grid());
    const GridSpec& g = kernel.grid();
    VectorField out(g);
    for (int k = 0; k < g.dim; ++k) {
        const auto& table = kernel.gradient_table(k);
        out.component(k) = convolve_table(g, table, nonzero(table), u, method);
    }
    return out;
}

OmegaField apply_S_adjoint(const Kernel& kernel, const ScalarField& f, OmegaPtr omega,
                           ConvolutionMethod method) {
    require_grid(kernel.grid(), f.grid());
    require_grid(kernel.grid(), omega->grid());
    const GridSpec& g = kernel.grid();
    const double vol = g.cell_volume();
    OmegaField out{omega, std::vector<double>(omega->count(), 0.0)};
    const auto& cells = omega->cells();
    if (use_direct(method, kernel.support().size(), omega->count(), g)) {
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double s = 0.0;
            for (std::size_t m : kernel.support()) s += kernel.values()[m] * f[shift(g, cells[j], m)];
            out.values[j] = s * vol;
        }
        return out;
    }
    const std::vector<double> corr = detail::circular_correlate(g, kernel.values(), f.values());
    for (std::size_t j = 0; j < cells.size(); ++j) out.values[j] = corr[cells[j]] * vol;
    return out;
}

// ---------------------------------------------------------------------------
// Elliptic smoother
// ---------------------------------------------------------------------------

double laplacian_symbol(const GridSpec& grid, int kx, int ky) {
    const double dx2 = grid.dx() * grid.dx();
    const double theta = 2.0 * std::numbers::pi / grid.cells;
    double lam = (2.0 - 2.0 * std::cos(theta * kx)) / dx2;
    if (grid.dim == 2) lam += (2.0 - 2.0 * std::cos(theta * ky)) / dx2;
    return lam;
}

ScalarField elliptic_smoother(const ScalarField& u) {
    const GridSpec& g = u.grid();
    detail::Spectrum spec = detail::forward_fft(g, u.values());
    detail::for_each_mode(g, [&](std::size_t idx, int kx, int ky) {
        spec[idx] /= 1.0 + laplacian_symbol(g, kx, ky);
    });
    return ScalarField(g, detail::inverse_fft(g, spec));
}

ScalarField EllipticOperator::apply(const ControlField& u) const {
    require_grid(grid_, u.grid());
    return elliptic_smoother(u.zero_extended());
}

VectorField EllipticOperator::apply_gradient(const ControlField& u) const { return gradient(apply(u)); }

OmegaField EllipticOperator::apply_adjoint(const ScalarField& f, OmegaPtr omega) const {
    require_grid(grid_, f.grid());
    return OmegaField::restrict(elliptic_smoother(f), std::move(omega));
}

}  // namespace nfpc

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nfpc/grid.hpp"

namespace nfpc {

// ---------------------------------------------------------------------------
// Control support and admissible controls
// ---------------------------------------------------------------------------

/// Cells of the control region omega. Must be nonempty and keep clear of the
/// outermost cell layer of the box.
class OmegaMask {
public:
    OmegaMask(const GridSpec& grid, std::vector<std::uint8_t> mask);
    /// Cells whose centres lie in the closed box [lower, upper].
    static OmegaMask box(const GridSpec& grid, Point lower, Point upper);

    const GridSpec& grid() const { return grid_; }
    bool contains(std::size_t flat) const { return mask_[flat] != 0; }
    const std::vector<std::size_t>& cells() const { return cells_; }
    std::size_t count() const { return cells_.size(); }
    /// m(omega) = count * dx^d.
    double measure() const { return static_cast<double>(count()) * grid_.cell_volume(); }
    /// Largest |x|_inf over omega cell centres.
    double reach() const;

private:
    GridSpec grid_;
    std::vector<std::uint8_t> mask_;
    std::vector<std::size_t> cells_;
};

using OmegaPtr = std::shared_ptr<const OmegaMask>;

/// Conjugate exponent l* with 1/l + 1/l* = 1 (infinity for l == 1).
double conjugate_exponent(double l);

/// A field living on omega only (values ordered as OmegaMask::cells()).
struct OmegaField {
    OmegaPtr omega;
    std::vector<double> values;

    ScalarField zero_extended() const;
    /// Restriction of a full-grid field to omega.
    static OmegaField restrict(const ScalarField& f, OmegaPtr omega);
};

double omega_inner(const OmegaField& a, const OmegaField& b);
double omega_l2_norm(const OmegaField& a);
double omega_l2_distance(const OmegaField& a, const OmegaField& b);

/// Control u on omega with 0 <= u <= bound, zero outside omega.
class ControlField {
public:
    /// Empty placeholder (no omega); not admissible input to any operator.
    ControlField() = default;
    /// Throws ContractError if bound <= 0 or any value leaves [0, bound].
    ControlField(OmegaPtr omega, double bound, std::vector<double> values);
    static ControlField constant(OmegaPtr omega, double bound, double value);

    const OmegaPtr& omega() const { return omega_; }
    const GridSpec& grid() const { return omega_->grid(); }
    double bound() const { return bound_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    OmegaField as_omega_field() const { return {omega_, values_}; }
    ScalarField zero_extended() const { return as_omega_field().zero_extended(); }

private:
    OmegaPtr omega_;
    double bound_ = 0.0;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

enum class KernelType { gaussian, bump, delta };

struct KernelParams {
    KernelType type = KernelType::gaussian;
    /// Standard deviation (gaussian) or support radius (bump). Ignored by delta.
    double width = 0.2;
    double amplitude = 1.0;
    /// Rescale so that the quadrature of K equals 1.
    bool normalize = true;
    /// Integrability exponent l in [1, 2]; only used for diagnostics.
    double exponent = 1.0;
};

struct KernelNorms {
    double lp = 0.0;       ///< ||K||_{L^l}
    double grad_lp = 0.0;  ///< ||grad K||_{L^l} (central-difference gradient)
    double sup = 0.0;      ///< ||K||_inf
    double mass = 0.0;     ///< quadrature of K
};

/**
 * Nonnegative kernel tabulated on the periodic displacement lattice.
 *
 * Storage follows FFT order: entry m along an axis holds displacement
 * m (m < (N+1)/2) or m - N otherwise.
 */
class Kernel {
public:
    /// Takes a table in FFT order. Throws ContractError on negative or
    /// non-finite entries, or an exponent outside [1, 2].
    Kernel(const GridSpec& grid, std::vector<double> values, double exponent);

    const GridSpec& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double exponent() const { return exponent_; }
    const KernelNorms& norms() const { return norms_; }
    /// Central-difference gradient of the table, component k, FFT order.
    const std::vector<double>& gradient_table(int k) const { return grad_[k]; }
    /// Flat indices of nonzero table entries.
    const std::vector<std::size_t>& support() const { return support_; }
    /// Displacement (in cells) of storage index m along one axis.
    int displacement(int m) const;
    /// Fraction of kernel mass at |displacement|_inf >= min_distance.
    double tail_fraction(double min_distance) const;
    /// max ||Su||_inf over admissible u: bound * m(omega)^{1/l*} * ||K||_{L^l}.
    double sup_bound(double bound, double omega_measure) const;
    double grad_sup_bound(double bound, double omega_measure) const;

private:
    GridSpec grid_;
    std::vector<double> values_;
    double exponent_;
    KernelNorms norms_;
    std::array<std::vector<double>, 2> grad_;
    std::vector<std::size_t> support_;
};

/// Throws ContractError for non-positive width/amplitude or a bump radius that
/// does not fit in the box.
Kernel build_kernel(const GridSpec& grid, const KernelParams& params);

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

enum class ConvolutionMethod {
    automatic,  ///< direct summation for sparse kernels, FFT otherwise
    fft,
    direct,
};

/// (Su)(x_i) = sum_j K(x_i - x_j) u_j dx^d on the torus.
ScalarField apply_S(const Kernel& kernel, const ControlField& u,
                    ConvolutionMethod method = ConvolutionMethod::automatic);
/// Convolution of u with the central-difference gradient of K.
VectorField apply_grad_S(const Kernel& kernel, const ControlField& u,
                         ConvolutionMethod method = ConvolutionMethod::automatic);
/// (S*f)(x_j) = sum_i K(x_i - x_j) f_i dx^d, restricted to omega.
OmegaField apply_S_adjoint(const Kernel& kernel, const ScalarField& f, OmegaPtr omega,
                           ConvolutionMethod method = ConvolutionMethod::automatic);

/// Solves (I - Delta_h) eta = u on the periodic grid by Fourier diagonalisation.
ScalarField elliptic_smoother(const ScalarField& u);
/// Discrete symbol of -Delta_h for wavenumbers (kx, ky).
double laplacian_symbol(const GridSpec& grid, int kx, int ky);

/// Common face of the two nonlocal actions so the optimiser can use either.
class NonlocalOperator {
public:
    virtual ~NonlocalOperator() = default;
    virtual const GridSpec& grid() const = 0;
    virtual ScalarField apply(const ControlField& u) const = 0;
    virtual VectorField apply_gradient(const ControlField& u) const = 0;
    virtual OmegaField apply_adjoint(const ScalarField& f, OmegaPtr omega) const = 0;
    /// Upper bound of ||Su||_inf over controls with values in [0, bound].
    virtual double sup_bound(const OmegaMask& omega, double bound) const = 0;
    virtual std::string name() const = 0;
};

class ConvolutionOperator final : public NonlocalOperator {
public:
    explicit ConvolutionOperator(Kernel kernel, ConvolutionMethod method = ConvolutionMethod::automatic)
        : kernel_(std::move(kernel)), method_(method) {}

    const Kernel& kernel() const { return kernel_; }
    const GridSpec& grid() const override { return kernel_.grid(); }
    ScalarField apply(const ControlField& u) const override { return apply_S(kernel_, u, method_); }
    VectorField apply_gradient(const ControlField& u) const override {
        return apply_grad_S(kernel_, u, method_);
    }
    OmegaField apply_adjoint(const ScalarField& f, OmegaPtr omega) const override {
        return apply_S_adjoint(kernel_, f, std::move(omega), method_);
    }
    double sup_bound(const OmegaMask& omega, double bound) const override {
        return kernel_.sup_bound(bound, omega.measure());
    }
    std::string name() const override { return "convolution"; }

private:
    Kernel kernel_;
    ConvolutionMethod method_;
};

/// eta = (I - Delta_h)^{-1} u; self-adjoint, so the adjoint restricts the
/// smoothed field to omega.
class EllipticOperator final : public NonlocalOperator {
public:
    explicit EllipticOperator(const GridSpec& grid) : grid_(grid) {}

    const GridSpec& grid() const override { return grid_; }
    ScalarField apply(const ControlField& u) const override;
    VectorField apply_gradient(const ControlField& u) const override;
    OmegaField apply_adjoint(const ScalarField& f, OmegaPtr omega) const override;
    double sup_bound(const OmegaMask&, double bound) const override { return bound; }
    std::string name() const override { return "elliptic"; }

private:
    GridSpec grid_;
};

}  // namespace nfpc

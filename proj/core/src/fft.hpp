#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "nfpc/grid.hpp"

namespace nfpc::detail {

using Spectrum = std::vector<std::complex<double>>;

/// Real-to-complex transforms on the periodic grid (FFTW backed). Plans are
/// created and destroyed under a process-wide lock, execution is lock-free.
Spectrum forward_fft(const GridSpec& grid, std::span<const double> values);
/// Normalised inverse: inverse_fft(forward_fft(v)) == v up to round-off.
std::vector<double> inverse_fft(const GridSpec& grid, const Spectrum& spectrum);

/// Calls f(index, kx, ky) for every half-spectrum entry, with (kx, ky) the
/// integer wavenumbers in [0, N).
void for_each_mode(const GridSpec& grid, const std::function<void(std::size_t, int, int)>& f);

/// out_i = sum_j a_{(i-j) mod N} b_j  (no dx^d factor).
std::vector<double> circular_convolve(const GridSpec& grid, std::span<const double> a,
                                      std::span<const double> b);
/// out_j = sum_i a_{(i-j) mod N} f_i  (no dx^d factor).
std::vector<double> circular_correlate(const GridSpec& grid, std::span<const double> a,
                                       std::span<const double> f);

}  // namespace nfpc::detail

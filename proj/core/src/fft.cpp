#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <mutex>

namespace nfpc::detail {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> allocate(std::size_t n) {
    return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1))));
}

std::size_t half_spectrum_size(const GridSpec& g) {
    const std::size_t half = static_cast<std::size_t>(g.cells / 2 + 1);
    return g.dim == 1 ? half : static_cast<std::size_t>(g.cells) * half;
}

class Plan {
public:
    explicit Plan(fftw_plan p) : plan_(p) {}
    ~Plan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

}  // namespace

Spectrum forward_fft(const GridSpec& grid, std::span<const double> values) {
    const std::size_t n = grid.cell_count();
    const std::size_t m = half_spectrum_size(grid);
    auto in = allocate<double>(n);
    auto out = allocate<fftw_complex>(m);
    std::unique_ptr<Plan> plan;
    {
        std::lock_guard lock(planner_mutex());
        fftw_plan p = grid.dim == 1
                          ? fftw_plan_dft_r2c_1d(grid.cells, in.get(), out.get(), FFTW_ESTIMATE)
                          : fftw_plan_dft_r2c_2d(grid.cells, grid.cells, in.get(), out.get(), FFTW_ESTIMATE);
        plan = std::make_unique<Plan>(p);
    }
    std::copy(values.begin(), values.end(), in.get());
    plan->execute();
    Spectrum result(m);
    for (std::size_t i = 0; i < m; ++i) result[i] = {out[i][0], out[i][1]};
    return result;
}

std::vector<double> inverse_fft(const GridSpec& grid, const Spectrum& spectrum) {
    const std::size_t n = grid.cell_count();
    const std::size_t m = half_spectrum_size(grid);
    auto in = allocate<fftw_complex>(m);
    auto out = allocate<double>(n);
    std::unique_ptr<Plan> plan;
    {
        std::lock_guard lock(planner_mutex());
        fftw_plan p = grid.dim == 1
                          ? fftw_plan_dft_c2r_1d(grid.cells, in.get(), out.get(), FFTW_ESTIMATE)
                          : fftw_plan_dft_c2r_2d(grid.cells, grid.cells, in.get(), out.get(), FFTW_ESTIMATE);
        plan = std::make_unique<Plan>(p);
    }
    for (std::size_t i = 0; i < m; ++i) {
        in[i][0] = spectrum[i].real();
        in[i][1] = spectrum[i].imag();
    }
    plan->execute();
    const double scale = 1.0 / static_cast<double>(n);
    std::vector<double> result(n);
    for (std::size_t i = 0; i < n; ++i) result[i] = out[i] * scale;
    return result;
}

void for_each_mode(const GridSpec& grid, const std::function<void(std::size_t, int, int)>& f) {
    const int half = grid.cells / 2 + 1;
    if (grid.dim == 1) {
        for (int k = 0; k < half; ++k) f(static_cast<std::size_t>(k), k, 0);
        return;
    }
    std::size_t idx = 0;
    for (int kx = 0; kx < grid.cells; ++kx)
        for (int ky = 0; ky < half; ++ky) f(idx++, kx, ky);
}

std::vector<double> circular_convolve(const GridSpec& grid, std::span<const double> a,
                                      std::span<const double> b) {
    Spectrum fa = forward_fft(grid, a);
    const Spectrum fb = forward_fft(grid, b);
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
    return inverse_fft(grid, fa);
}

std::vector<double> circular_correlate(const GridSpec& grid, std::span<const double> a,
                                       std::span<const double> f) {
    Spectrum fa = forward_fft(grid, a);
    const Spectrum ff = forward_fft(grid, f);
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] = std::conj(fa[i]) * ff[i];
    return inverse_fft(grid, fa);
}

}  // namespace nfpc::detail

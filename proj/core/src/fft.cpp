#include "rieszlab/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace rieszlab {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

ComplexGrid::ComplexGrid(int n) : n_(n), data_(static_cast<std::size_t>(n) * n) {
    if (n <= 0) throw std::invalid_argument("ComplexGrid: n must be positive");
}

void ComplexGrid::forward() {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(n_, n_, reinterpret_cast<fftw_complex*>(data_.data()),
                                reinterpret_cast<fftw_complex*>(data_.data()),
                                FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
}

void ComplexGrid::inverse() {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(n_, n_, reinterpret_cast<fftw_complex*>(data_.data()),
                                reinterpret_cast<fftw_complex*>(data_.data()),
                                FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
}

double dft_freq(int k, int n, double period) {
    const int m = (k <= n / 2) ? k : k - n;
    return m / period;
}

GridField convolve_kernel(const GridField& f,
                          const std::function<double(Vec2)>& kernel,
                          double singular_self) {
    if (f.components() != 1)
        throw std::invalid_argument("convolve_kernel: scalar input expected");
    const int n = f.n();
    const int big = 2 * n;
    const double h = f.spec().spacing();

    ComplexGrid fpad(big), ker(big);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            fpad.at(ix, iy) = f.at(0, ix, iy);
    for (int iy = 0; iy < big; ++iy) {
        const int oy = (iy <= n) ? iy : iy - big;
        for (int ix = 0; ix < big; ++ix) {
            const int ox = (ix <= n) ? ix : ix - big;
            if (ox == 0 && oy == 0)
                ker.at(ix, iy) = singular_self;
            else
                ker.at(ix, iy) = kernel({ox * h, oy * h});
        }
    }
    fpad.forward();
    ker.forward();
    const double scale = h * h / (static_cast<double>(big) * big);
    for (auto i = 0u; i < fpad.data().size(); ++i) fpad.data()[i] *= ker.data()[i] * scale;
    fpad.inverse();

    GridField out(f.spec(), 1);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            out.at(0, ix, iy) = fpad.at(ix, iy).real();
    return out;
}

} // namespace rieszlab

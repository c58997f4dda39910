#ifndef RIESZLAB_FFT_HPP
#define RIESZLAB_FFT_HPP

#include <complex>
#include <functional>
#include <vector>

#include "rieszlab/grid.hpp"

namespace rieszlab {

/// Square complex array with FFTW-backed in-place transforms. Plans use
/// FFTW_ESTIMATE so results are bit-reproducible run to run.
class ComplexGrid {
public:
    explicit ComplexGrid(int n);
    int n() const { return n_; }
    std::complex<double>& at(int ix, int iy) { return data_[std::size_t(iy) * n_ + ix]; }
    const std::complex<double>& at(int ix, int iy) const { return data_[std::size_t(iy) * n_ + ix]; }
    std::vector<std::complex<double>>& data() { return data_; }

    void forward();  // unnormalized DFT
    void inverse();  // unnormalized inverse; caller divides by n^2

private:
    int n_;
    std::vector<std::complex<double>> data_;
};

/// True (non-circular) convolution of `f` against a kernel sampled in real
/// space: out(x_i) = h^2 * sum_j K(x_i - x_j) f(x_j) + singular correction.
/// The kernel is evaluated on the doubled lattice, so every in-window pair
/// is covered exactly; `singular_self` supplies the analytic value of the
/// kernel integrated against a unit-density cell at zero offset, divided
/// by h^2 (the effective kernel value at offset 0).
GridField convolve_kernel(const GridField& f,
                          const std::function<double(Vec2)>& kernel,
                          double singular_self);

/// Frequency of DFT bin k on a length-P periodic window (signed).
double dft_freq(int k, int n, double period);

} // namespace rieszlab

#endif

#pragma once

#include "aerotrack/imaging.hpp"

#include <complex>

namespace aerotrack {

using ComplexImage =
    Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Unnormalized forward 2-D DFT; the inverse carries the 1/N factor.
ComplexImage fft2(const Image& input);
ComplexImage fft2(const ComplexImage& input);
ComplexImage ifft2(const ComplexImage& input);
Image ifft2_real(const ComplexImage& input);

}  // namespace aerotrack

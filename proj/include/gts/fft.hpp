#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "gts/error.hpp"

namespace gts {

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && std::has_single_bit(n); }

// Unscaled transform in place; sign = -1 forward, +1 inverse.
inline void fft_in_place(std::vector<std::complex<double>>& a, int sign) {
    thread_local Eigen::FFT<double> engine;
    engine.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<std::complex<double>> out;
    if (sign < 0) {
        engine.fwd(out, a);
    } else {
        engine.inv(out, a);
    }
    a.swap(out);
}

} // namespace detail

/// Plain forward DFT, X_k = sum_j x_j exp(-2 pi i j k / n).
inline std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x) {
    if (!detail::is_power_of_two(x.size())) throw domain_error("SizeError", "fft length must be a power of two");
    std::vector<std::complex<double>> a(x.begin(), x.end());
    detail::fft_in_place(a, -1);
    return a;
}

/// Fractional Fourier transform
///   G_k = sum_{j<m} x_j exp(-2 pi i j k delta),  k = 0..m-1,
/// for arbitrary real delta, via the chirp decomposition jk = (j^2 + k^2 - (k-j)^2)/2
/// and three FFTs of length 2m.
inline std::vector<std::complex<double>> frft(std::span<const std::complex<double>> x, double delta) {
    const std::size_t m = x.size();
    if (!detail::is_power_of_two(m)) throw domain_error("SizeError", "frft length must be a power of two");

    const std::size_t n = 2 * m;
    const auto chirp = [delta](std::size_t j) {
        const double jj = static_cast<double>(j);
        const double ang = std::numbers::pi * delta * jj * jj;
        return std::complex<double>(std::cos(ang), std::sin(ang));
    };

    std::vector<std::complex<double>> y(n), z(n);
    for (std::size_t j = 0; j < m; ++j) {
        const auto c = chirp(j);
        y[j] = x[j] * std::conj(c);
        z[j] = c;
        z[n - 1 - j] = chirp(j + 1); // negative lags wrap around
    }

    detail::fft_in_place(y, -1);
    detail::fft_in_place(z, -1);
    for (std::size_t i = 0; i < n; ++i) y[i] *= z[i];
    detail::fft_in_place(y, +1);

    std::vector<std::complex<double>> out(m);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < m; ++k) out[k] = std::conj(chirp(k)) * y[k] * scale;
    return out;
}

} // namespace gts

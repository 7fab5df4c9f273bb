#ifndef GAZEFILT_FFT_HPP
#define GAZEFILT_FFT_HPP

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gazefilt/errors.hpp"

namespace gazefilt {

namespace detail {

// iterative radix-2 decimation-in-time, in place
inline void fft_radix2(std::vector<std::complex<double>>& data, bool inverse) {
    const std::size_t n = data.size();
    if (n < 2 || !std::has_single_bit(n)) {
        throw InvalidArgument("fft: length must be a power of two >= 2, got " + std::to_string(n));
    }

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(data[i], data[j]);
        }
    }

    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        // twiddles computed directly rather than by recurrence to keep the error O(log n)
        std::vector<std::complex<double>> twiddle(half);
        for (std::size_t k = 0; k < half; ++k) {
            twiddle[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len));
        }
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const auto even = data[start + k];
                const auto odd  = data[start + k + half] * twiddle[k];
                data[start + k]        = even + odd;
                data[start + k + half] = even - odd;
            }
        }
    }
}

} // namespace detail

/// Unnormalized forward DFT, X[k] = Σ x[n]·e^{-j2πkn/N}. N must be a power of two.
[[nodiscard]] inline std::vector<std::complex<double>> fft(std::span<const std::complex<double>> samples) {
    std::vector<std::complex<double>> data(samples.begin(), samples.end());
    detail::fft_radix2(data, false);
    return data;
}

/// Real-input convenience overload.
[[nodiscard]] inline std::vector<std::complex<double>> fft(std::span<const double> samples) {
    std::vector<std::complex<double>> data(samples.begin(), samples.end());
    detail::fft_radix2(data, false);
    return data;
}

/// Inverse of fft (includes the 1/N factor).
[[nodiscard]] inline std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> spectrum) {
    std::vector<std::complex<double>> data(spectrum.begin(), spectrum.end());
    detail::fft_radix2(data, true);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) {
        v *= scale;
    }
    return data;
}

} // namespace gazefilt

#endif // GAZEFILT_FFT_HPP

#ifndef GAZEFILT_SPECTRAL_HPP
#define GAZEFILT_SPECTRAL_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazefilt/errors.hpp"
#include "gazefilt/fft.hpp"
#include "gazefilt/filters.hpp"

namespace gazefilt {

/// Magnitudes below this are treated as zero when converting to dB or dividing.
inline constexpr double kMagnitudeFloor = 1e-300;
/// Reference amplitudes below this make a ratio-method bin undefined.
inline constexpr double kRatioFloor = 1e-12;

/// 20·log10(magnitude), with magnitude floored at kMagnitudeFloor so the result stays finite.
[[nodiscard]] inline double to_db(double magnitude) noexcept {
    return 20.0 * std::log10(std::max(magnitude, kMagnitudeFloor));
}

struct AmplitudeSpectrum {
    std::vector<double> freqs_hz;
    std::vector<double> amplitude_deg;
    std::size_t         n_blocks_averaged{0};

    [[nodiscard]] double resolution_hz() const { return freqs_hz.size() > 1 ? freqs_hz[1] - freqs_hz[0] : 0.0; }
};

enum class ResponseSource { Analytic, RatioMethod };

struct FrequencyResponse {
    std::vector<double> freqs_hz;
    std::vector<double> magnitude_db;  /// reference = 1; NaN where undefined
    std::vector<bool>   defined;
    ResponseSource      source{ResponseSource::Analytic};
    double              resolution_hz{0.0}; /// bin spacing, 0 for arbitrary grids

    [[nodiscard]] std::size_t size() const noexcept { return freqs_hz.size(); }
};

/// Removes the least-squares quadratic trend (over sample index) from a signal.
[[nodiscard]] inline std::vector<double> detrend_poly2(std::span<const double> signal) {
    const std::size_t n = signal.size();
    detail::require(n >= 3, "detrend_poly2: need at least 3 samples, got " + std::to_string(n));

    // orthonormal basis of span{1, t, t^2} by modified Gram-Schmidt on a centered, scaled index
    const double center = static_cast<double>(n - 1) / 2.0;
    const double scale  = std::max(center, 1.0);
    std::array<std::vector<double>, 3> basis;
    for (std::size_t d = 0; d < 3; ++d) {
        basis[d].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = (static_cast<double>(i) - center) / scale;
            basis[d][i]    = std::pow(t, static_cast<double>(d));
        }
    }
    auto dot = [n](const std::vector<double>& u, auto&& v) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += u[i] * v[i];
        }
        return acc;
    };
    for (std::size_t d = 0; d < 3; ++d) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t e = 0; e < d; ++e) {
                const double proj = dot(basis[e], basis[d]);
                for (std::size_t i = 0; i < n; ++i) {
                    basis[d][i] -= proj * basis[e][i];
                }
            }
        }
        const double norm = std::sqrt(dot(basis[d], basis[d]));
        for (auto& v : basis[d]) {
            v /= norm;
        }
    }

    std::vector<double> residual(signal.begin(), signal.end());
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) {
            const double proj = dot(q, residual);
            for (std::size_t i = 0; i < n; ++i) {
                residual[i] -= proj * q[i];
            }
        }
    }
    return residual;
}

/// Periodic Hann window, w[k] = 0.5·(1 - cos(2πk/n)).
[[nodiscard]] inline std::vector<double> hanning_window(std::size_t n) {
    detail::require(n >= 2, "hanning_window: n must be >= 2");
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) {
        w[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)));
    }
    return w;
}

namespace detail {

inline void check_blocks(std::span<const std::vector<double>> blocks, const char* who) {
    require(!blocks.empty(), std::string(who) + ": at least one block is required");
    const std::size_t len = blocks.front().size();
    require(len >= 4 && std::has_single_bit(len),
            std::string(who) + ": block length must be a power of two >= 4, got " + std::to_string(len));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        require(blocks[i].size() == len, std::string(who) + ": block " + std::to_string(i) + " has length " +
                                             std::to_string(blocks[i].size()) + ", expected " + std::to_string(len));
    }
}

/// Mean over blocks of |FFT(hann · detrend(block))| for bins 0..N/2-1, unscaled.
inline std::vector<double> mean_magnitude(std::span<const std::vector<double>> blocks) {
    const std::size_t len    = blocks.front().size();
    const auto        window = hanning_window(len);
    std::vector<double> acc(len / 2, 0.0);
    std::vector<std::complex<double>> work(len);
    for (const auto& block : blocks) {
        const auto residual = detrend_poly2(block);
        for (std::size_t i = 0; i < len; ++i) {
            work[i] = residual[i] * window[i];
        }
        detail::fft_radix2(work, false);
        for (std::size_t k = 0; k < len / 2; ++k) {
            acc[k] += std::abs(work[k]);
        }
    }
    for (auto& v : acc) {
        v /= static_cast<double>(blocks.size());
    }
    return acc;
}

inline std::vector<double> bin_frequencies(std::size_t len, double fs_hz) {
    std::vector<double> freqs(len / 2);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        freqs[k] = static_cast<double>(k) * fs_hz / static_cast<double>(len);
    }
    return freqs;
}

} // namespace detail

/// Averaged single-sided amplitude spectrum: each block is detrended with a
/// quadratic, Hann-windowed and transformed; magnitudes (not complex values)
/// are averaged. Scaled by 2/Σw so an in-bin sinusoid of amplitude A reads A.
[[nodiscard]] inline AmplitudeSpectrum amplitude_spectrum(std::span<const std::vector<double>> blocks, double fs_hz) {
    detail::require(fs_hz > 0.0, "amplitude_spectrum: fs must be positive");
    detail::check_blocks(blocks, "amplitude_spectrum");
    const std::size_t len        = blocks.front().size();
    const auto        window     = hanning_window(len);
    const double      window_sum = std::reduce(window.begin(), window.end());

    AmplitudeSpectrum spectrum;
    spectrum.freqs_hz          = detail::bin_frequencies(len, fs_hz);
    spectrum.amplitude_deg     = detail::mean_magnitude(blocks);
    spectrum.n_blocks_averaged = blocks.size();
    for (std::size_t k = 0; k < spectrum.amplitude_deg.size(); ++k) {
        spectrum.amplitude_deg[k] *= (k == 0 ? 1.0 : 2.0) / window_sum;
    }
    return spectrum;
}

/// Evaluates the coefficient-domain response on a frequency grid. For a
/// zero-phase filter the single-pass magnitude is squared (dB doubled).
[[nodiscard]] inline FrequencyResponse analytic_frequency_response(const DigitalFilter& filter,
                                                                   std::span<const double> freqs_hz) {
    const double fs = filter.spec.fs_hz;
    detail::require(fs > 0.0, "analytic_frequency_response: filter has no sampling rate");
    FrequencyResponse response;
    response.source = ResponseSource::Analytic;
    response.freqs_hz.assign(freqs_hz.begin(), freqs_hz.end());
    response.magnitude_db.resize(freqs_hz.size());
    response.defined.resize(freqs_hz.size());
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
        const double f = freqs_hz[i];
        detail::require(f >= 0.0 && f <= fs / 2.0 + 1e-9, "analytic_frequency_response: frequency " +
                                                               std::to_string(f) + " Hz outside [0, fs/2]");
        if (i > 0) {
            detail::require(f > freqs_hz[i - 1], "analytic_frequency_response: frequencies must be strictly increasing");
        }
        const double omega = 2.0 * std::numbers::pi * f / fs;
        const auto   den   = detail::eval_on_unit_circle(filter.a, omega);
        if (std::abs(den) < kMagnitudeFloor) {
            response.magnitude_db[i] = std::numeric_limits<double>::quiet_NaN();
            response.defined[i]      = false;
            continue;
        }
        double mag = std::abs(detail::eval_on_unit_circle(filter.b, omega) / den);
        if (filter.zero_phase) {
            mag *= mag;
        }
        response.magnitude_db[i] = to_db(mag);
        response.defined[i]      = true;
    }
    if (freqs_hz.size() > 1) {
        response.resolution_hz = freqs_hz[1] - freqs_hz[0];
    }
    return response;
}

/// Uniform grid 0, step, 2·step, ... up to and including fs/2 when it falls on the grid.
[[nodiscard]] inline std::vector<double> frequency_grid(double fs_hz, double step_hz) {
    detail::require(fs_hz > 0.0 && step_hz > 0.0, "frequency_grid: fs and step must be positive");
    const auto count = static_cast<std::size_t>(std::floor(fs_hz / 2.0 / step_hz + 1e-9)) + 1;
    std::vector<double> freqs(count);
    for (std::size_t i = 0; i < count; ++i) {
        freqs[i] = static_cast<double>(i) * step_hz;
    }
    return freqs;
}

/// Ratio method: mean filtered magnitude over mean unfiltered magnitude per FFT bin.
[[nodiscard]] inline FrequencyResponse empirical_frequency_response(std::span<const std::vector<double>> unfiltered,
                                                                    std::span<const std::vector<double>> filtered,
                                                                    double                               fs_hz) {
    detail::require(fs_hz > 0.0, "empirical_frequency_response: fs must be positive");
    detail::require(unfiltered.size() == filtered.size(),
                    "empirical_frequency_response: " + std::to_string(unfiltered.size()) + " unfiltered blocks vs " +
                        std::to_string(filtered.size()) + " filtered blocks");
    detail::check_blocks(unfiltered, "empirical_frequency_response");
    detail::check_blocks(filtered, "empirical_frequency_response");
    detail::require(unfiltered.front().size() == filtered.front().size(),
                    "empirical_frequency_response: block lengths differ between inputs");

    const auto reference = detail::mean_magnitude(unfiltered);
    const auto output    = detail::mean_magnitude(filtered);

    FrequencyResponse response;
    response.source        = ResponseSource::RatioMethod;
    response.freqs_hz      = detail::bin_frequencies(unfiltered.front().size(), fs_hz);
    response.resolution_hz = fs_hz / static_cast<double>(unfiltered.front().size());
    response.magnitude_db.resize(reference.size());
    response.defined.resize(reference.size());
    for (std::size_t k = 0; k < reference.size(); ++k) {
        if (reference[k] < kRatioFloor) {
            response.magnitude_db[k] = std::numeric_limits<double>::quiet_NaN();
            response.defined[k]      = false;
        } else {
            response.magnitude_db[k] = to_db(output[k] / reference[k]);
            response.defined[k]      = true;
        }
    }
    return response;
}

struct DbCrossing {
    double frequency_hz{0.0};
    double uncertainty_hz{0.0}; /// spacing of the bracketing bins
};

/// Lowest frequency at which the response first falls to level_db or below,
/// linearly interpolated in dB between the bracketing bins. Undefined bins are skipped.
[[nodiscard]] inline std::optional<DbCrossing> find_db_crossing(const FrequencyResponse& response, double level_db) {
    detail::require(!response.freqs_hz.empty(), "find_db_crossing: empty response");
    detail::require(level_db < 0.0, "find_db_crossing: level must be negative");
    std::optional<std::size_t> previous;
    for (std::size_t i = 0; i < response.size(); ++i) {
        if (!response.defined[i]) {
            continue;
        }
        const double db = response.magnitude_db[i];
        if (db <= level_db) {
            if (!previous) {
                return DbCrossing{response.freqs_hz[i], 0.0};
            }
            const double f0 = response.freqs_hz[*previous];
            const double f1 = response.freqs_hz[i];
            const double d0 = response.magnitude_db[*previous];
            const double t  = d0 == db ? 1.0 : (d0 - level_db) / (d0 - db);
            return DbCrossing{f0 + t * (f1 - f0), f1 - f0};
        }
        previous = i;
    }
    return std::nullopt;
}

} // namespace gazefilt

#endif // GAZEFILT_SPECTRAL_HPP

#ifndef GAZEFILT_FILTERS_HPP
#define GAZEFILT_FILTERS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazefilt/detail/linalg.hpp"
#include "gazefilt/errors.hpp"

namespace gazefilt {

enum class FilterKind { SavitzkyGolay, ButterworthLowpass, WindowedSincFir };

[[nodiscard]] inline std::string_view to_string(FilterKind kind) noexcept {
    switch (kind) {
    case FilterKind::SavitzkyGolay: return "savitzky-golay";
    case FilterKind::ButterworthLowpass: return "butterworth";
    case FilterKind::WindowedSincFir: return "fir";
    }
    return "unknown";
}

/// Design parameters. Only the fields relevant to `kind` are meaningful.
struct FilterSpec {
    FilterKind  kind{FilterKind::ButterworthLowpass};
    std::size_t window_length{0}; /// SG only, odd
    std::size_t poly_order{0};    /// SG only
    std::size_t order{0};         /// Butterworth only
    std::size_t n_taps{0};        /// FIR only
    double      cutoff_hz{0.0};   /// -3 dB point of a single pass (Butterworth/FIR)
    double      fs_hz{0.0};

    void validate() const {
        using detail::require;
        require(fs_hz > 0.0 && std::isfinite(fs_hz), "sampling rate must be positive");
        switch (kind) {
        case FilterKind::SavitzkyGolay:
            require(window_length % 2 == 1, "Savitzky-Golay window length must be odd");
            require(window_length > poly_order, "Savitzky-Golay window length must exceed the polynomial order");
            return;
        case FilterKind::ButterworthLowpass:
            require(order >= 1, "Butterworth order must be >= 1");
            break;
        case FilterKind::WindowedSincFir:
            require(n_taps >= 2, "FIR tap count must be >= 2");
            break;
        }
        require(cutoff_hz > 0.0 && cutoff_hz < fs_hz / 2.0,
                "cutoff must lie strictly between 0 and the Nyquist frequency (" + std::to_string(fs_hz / 2.0) + " Hz)");
    }
};

/// Rational transfer function H(z) = B(z)/A(z) with a[0] = 1.
///
/// `zero_phase` selects forward-backward application (effective response |H|^2).
/// Savitzky-Golay kernels are symmetric and applied centered, so they stay
/// zero-phase with zero_phase == false and their effective response is |H|.
struct DigitalFilter {
    std::vector<double> b{1.0};
    std::vector<double> a{1.0};
    FilterSpec          spec{};
    bool                zero_phase{false};

    [[nodiscard]] bool is_fir() const noexcept { return a.size() == 1; }

    [[nodiscard]] DigitalFilter with_zero_phase(bool enabled = true) const {
        DigitalFilter copy = *this;
        copy.zero_phase    = enabled;
        return copy;
    }

    [[nodiscard]] double dc_gain() const {
        return std::reduce(b.begin(), b.end()) / std::reduce(a.begin(), a.end());
    }
};

/// Pass-through filter b = [1], a = [1].
[[nodiscard]] inline DigitalFilter identity_filter(double fs_hz = 1000.0) {
    DigitalFilter filter;
    filter.spec.kind      = FilterKind::WindowedSincFir;
    filter.spec.n_taps    = 1;
    filter.spec.fs_hz     = fs_hz;
    filter.spec.cutoff_hz = fs_hz / 2.0;
    return filter;
}

struct FirTapParams {
    double delta1{0.0};              /// passband ripple
    double delta2{0.0};              /// stopband suppression
    double fs_hz{0.0};
    double transition_width_hz{0.0};
};

/// Tap-count rule of thumb N = (2/3)·log10(1/(10·δ1·δ2))·fs/Δf, rounded, floor of 2.
[[nodiscard]] inline std::size_t estimate_fir_taps(const FirTapParams& params) {
    using detail::require;
    require(params.delta1 > 0.0 && params.delta2 > 0.0, "ripple parameters must be positive");
    require(params.fs_hz > 0.0 && params.transition_width_hz > 0.0, "fs and transition width must be positive");
    const double taps = (2.0 / 3.0) * std::log10(1.0 / (10.0 * params.delta1 * params.delta2)) * params.fs_hz /
                        params.transition_width_hz;
    const double rounded = std::round(taps);
    return rounded < 2.0 ? 2U : static_cast<std::size_t>(rounded);
}

/// Complex response H(e^{j2πf/fs}) of a single pass.
[[nodiscard]] inline std::complex<double> transfer_at(const DigitalFilter& filter, double freq_hz) {
    const double omega = 2.0 * std::numbers::pi * freq_hz / filter.spec.fs_hz;
    const auto   den   = detail::eval_on_unit_circle(filter.a, omega);
    if (std::abs(den) < 1e-300) {
        throw NumericalError("denominator vanishes at " + std::to_string(freq_hz) + " Hz");
    }
    return detail::eval_on_unit_circle(filter.b, omega) / den;
}

/// True iff every pole lies strictly inside the unit circle (|p| < 1 - 1e-10).
[[nodiscard]] inline bool is_stable(const DigitalFilter& filter) {
    if (filter.is_fir()) {
        return true;
    }
    const auto poles = detail::poly_roots(filter.a);
    return std::ranges::all_of(poles, [](const auto& p) { return std::abs(p) < 1.0 - 1e-10; });
}

/// Least-squares polynomial smoothing kernel: the fitted value at the window
/// center expressed as a weighted sum of the window samples.
[[nodiscard]] inline DigitalFilter design_savitzky_golay(std::size_t window_length, std::size_t poly_order,
                                                         double fs_hz = 1000.0) {
    FilterSpec spec{.kind = FilterKind::SavitzkyGolay, .window_length = window_length, .poly_order = poly_order,
                    .fs_hz = fs_hz};
    spec.validate();

    const auto half  = static_cast<long>(window_length / 2);
    const auto terms = poly_order + 1;
    // offsets scaled to [-1, 1] keep the normal equations well conditioned
    const double scale = half == 0 ? 1.0 : static_cast<double>(half);

    detail::SquareMatrix gram(terms);
    for (long m = -half; m <= half; ++m) {
        const double t = static_cast<double>(m) / scale;
        for (std::size_t i = 0; i < terms; ++i) {
            for (std::size_t j = 0; j < terms; ++j) {
                gram(i, j) += std::pow(t, static_cast<double>(i + j));
            }
        }
    }
    std::vector<double> unit(terms, 0.0);
    unit[0]                        = 1.0;
    const std::vector<double> gvec = detail::solve(gram, unit);

    DigitalFilter filter;
    filter.spec = spec;
    filter.b.assign(window_length, 0.0);
    for (long m = -half; m <= half; ++m) {
        const double t   = static_cast<double>(m) / scale;
        double       acc = 0.0;
        double       tp  = 1.0;
        for (std::size_t i = 0; i < terms; ++i) {
            acc += tp * gvec[i];
            tp *= t;
        }
        filter.b[static_cast<std::size_t>(m + half)] = acc;
    }
    // exact symmetry
    for (std::size_t i = 0; i < window_length / 2; ++i) {
        const double avg = 0.5 * (filter.b[i] + filter.b[window_length - 1 - i]);
        filter.b[i] = filter.b[window_length - 1 - i] = avg;
    }
    filter.a = {1.0};
    return filter;
}

/// Digital Butterworth lowpass via the bilinear transform of the analog prototype,
/// prewarped so the single-pass -3 dB point lands at cutoff_hz.
[[nodiscard]] inline DigitalFilter design_butterworth_lowpass(std::size_t order, double cutoff_hz, double fs_hz) {
    FilterSpec spec{.kind = FilterKind::ButterworthLowpass, .order = order, .cutoff_hz = cutoff_hz, .fs_hz = fs_hz};
    spec.validate();

    using cplx              = std::complex<double>;
    const double n          = static_cast<double>(order);
    const double warped     = 2.0 * fs_hz * std::tan(std::numbers::pi * cutoff_hz / fs_hz); // rad/s
    const double two_fs     = 2.0 * fs_hz;
    std::vector<cplx> poles;
    std::vector<cplx> zeros(order, cplx{-1.0, 0.0});
    poles.reserve(order);
    for (std::size_t k = 0; k < order; ++k) {
        const double theta = std::numbers::pi * (2.0 * static_cast<double>(k) + n + 1.0) / (2.0 * n);
        const cplx   s     = warped * std::polar(1.0, theta);
        poles.push_back((two_fs + s) / (two_fs - s));
    }

    DigitalFilter filter;
    filter.spec = spec;
    filter.b    = detail::poly_from_roots(zeros);
    filter.a    = detail::poly_from_roots(poles);
    const double gain = std::reduce(filter.a.begin(), filter.a.end()) / std::reduce(filter.b.begin(), filter.b.end());
    for (auto& c : filter.b) {
        c *= gain;
    }
    if (!std::ranges::all_of(poles, [](const cplx& p) { return std::abs(p) < 1.0 - 1e-10; }) || !is_stable(filter)) {
        throw DesignError("Butterworth design produced poles on or outside the unit circle");
    }
    return filter;
}

namespace detail {

/// Hamming-windowed sinc with unit DC gain and the given nominal cutoff.
inline std::vector<double> hamming_sinc(std::size_t n_taps, double nominal_hz, double fs_hz) {
    const double fc     = nominal_hz / fs_hz;
    const double center = static_cast<double>(n_taps - 1) / 2.0;
    const double span   = static_cast<double>(n_taps - 1);
    std::vector<double> h(n_taps);
    for (std::size_t i = 0; i < n_taps; ++i) {
        const double x    = static_cast<double>(i) - center;
        const double arg  = 2.0 * std::numbers::pi * fc * x;
        const double sinc = x == 0.0 ? 2.0 * fc : std::sin(arg) / (std::numbers::pi * x);
        const double w    = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / span);
        h[i]              = sinc * w;
    }
    const double sum = std::reduce(h.begin(), h.end());
    for (auto& c : h) {
        c /= sum;
    }
    for (std::size_t i = 0; i < n_taps / 2; ++i) {
        const double avg = 0.5 * (h[i] + h[n_taps - 1 - i]);
        h[i] = h[n_taps - 1 - i] = avg;
    }
    return h;
}

inline double fir_gain_at(std::span<const double> h, double freq_hz, double fs_hz) {
    return std::abs(eval_on_unit_circle(h, 2.0 * std::numbers::pi * freq_hz / fs_hz));
}

} // namespace detail

/// Linear-phase windowed-sinc lowpass. The nominal sinc cutoff is tuned by
/// bisection so that the single-pass magnitude at cutoff_hz is exactly 1/√2.
[[nodiscard]] inline DigitalFilter design_fir_lowpass(std::size_t n_taps, double cutoff_hz, double fs_hz) {
    FilterSpec spec{.kind = FilterKind::WindowedSincFir, .n_taps = n_taps, .cutoff_hz = cutoff_hz, .fs_hz = fs_hz};
    spec.validate();

    const double target = 1.0 / std::numbers::sqrt2;
    const double nyq    = fs_hz / 2.0;
    double       lo     = nyq * 1e-6;
    double       hi     = nyq * (1.0 - 1e-9);
    auto gain = [&](double nominal) { return detail::fir_gain_at(detail::hamming_sinc(n_taps, nominal, fs_hz), cutoff_hz, fs_hz); };
    if (gain(lo) > target || gain(hi) < target) {
        throw DesignError("cannot place the -3 dB point at " + std::to_string(cutoff_hz) + " Hz with " +
                          std::to_string(n_taps) + " taps");
    }
    // gain at the cutoff rises monotonically with the nominal cutoff near the solution
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * nyq; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (gain(mid) < target ? lo : hi) = mid;
    }

    DigitalFilter filter;
    filter.spec = spec;
    filter.b    = detail::hamming_sinc(n_taps, 0.5 * (lo + hi), fs_hz);
    filter.a    = {1.0};
    return filter;
}

[[nodiscard]] inline DigitalFilter design(const FilterSpec& spec, bool zero_phase = false) {
    switch (spec.kind) {
    case FilterKind::SavitzkyGolay: return design_savitzky_golay(spec.window_length, spec.poly_order, spec.fs_hz).with_zero_phase(zero_phase);
    case FilterKind::ButterworthLowpass: return design_butterworth_lowpass(spec.order, spec.cutoff_hz, spec.fs_hz).with_zero_phase(zero_phase);
    case FilterKind::WindowedSincFir: return design_fir_lowpass(spec.n_taps, spec.cutoff_hz, spec.fs_hz).with_zero_phase(zero_phase);
    }
    throw InvalidArgument("unknown filter kind");
}

namespace detail {

inline void normalize_coefficients(std::vector<double>& b, std::vector<double>& a) {
    require(!a.empty() && !b.empty(), "filter coefficients must not be empty");
    require(a[0] != 0.0, "a[0] must be non-zero");
    if (a[0] != 1.0) {
        const double a0 = a[0];
        for (auto& c : b) {
            c /= a0;
        }
        for (auto& c : a) {
            c /= a0;
        }
    }
}

/// Transposed direct-form II with explicit initial state (length max(|a|,|b|) - 1).
inline std::vector<double> lfilter(std::span<const double> b_in, std::span<const double> a_in, std::span<const double> x,
                                   std::vector<double> state) {
    const std::size_t order = std::max(a_in.size(), b_in.size());
    std::vector<double> b(b_in.begin(), b_in.end());
    std::vector<double> a(a_in.begin(), a_in.end());
    normalize_coefficients(b, a);
    b.resize(order, 0.0);
    a.resize(order, 0.0);
    state.resize(order - 1, 0.0);

    std::vector<double> y(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double out = b[0] * x[n] + (order > 1 ? state[0] : 0.0);
        for (std::size_t k = 1; k + 1 < order; ++k) {
            state[k - 1] = state[k] + b[k] * x[n] - a[k] * out;
        }
        if (order > 1) {
            state[order - 2] = b[order - 1] * x[n] - a[order - 1] * out;
        }
        y[n] = out;
    }
    return y;
}

/// Initial state of lfilter that corresponds to a unit step having been applied forever.
inline std::vector<double> steady_state_initial(std::span<const double> b_in, std::span<const double> a_in) {
    const std::size_t order = std::max(a_in.size(), b_in.size());
    if (order <= 1) {
        return {};
    }
    std::vector<double> b(b_in.begin(), b_in.end());
    std::vector<double> a(a_in.begin(), a_in.end());
    normalize_coefficients(b, a);
    b.resize(order, 0.0);
    a.resize(order, 0.0);

    const std::size_t m = order - 1;
    SquareMatrix      system(m); // I - companion(a)^T
    for (std::size_t i = 0; i < m; ++i) {
        system(i, i) = 1.0;
        system(i, 0) += a[i + 1];
        if (i + 1 < m) {
            system(i, i + 1) -= 1.0;
        }
    }
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
        rhs[i] = b[i + 1] - a[i + 1] * b[0];
    }
    return solve(system, rhs);
}

inline std::vector<double> scaled(std::vector<double> v, double factor) {
    for (auto& e : v) {
        e *= factor;
    }
    return v;
}

} // namespace detail

/// Causal difference equation y[n] = Σ b[k]x[n-k] - Σ a[k]y[n-k] from zero state.
[[nodiscard]] inline std::vector<double> apply_forward(const DigitalFilter& filter, std::span<const double> signal) {
    detail::require(!signal.empty(), "apply_forward: signal must not be empty");
    return detail::lfilter(filter.b, filter.a, signal, {});
}

/// Minimum signal length accepted by apply_zero_phase.
[[nodiscard]] inline std::size_t zero_phase_min_length(const DigitalFilter& filter) {
    return 3 * std::max(filter.a.size(), filter.b.size()) + 1;
}

/// Forward-backward filtering with odd-reflection padding of 3·(max(|a|,|b|) - 1)
/// samples and steady-state initial conditions on both passes.
[[nodiscard]] inline std::vector<double> apply_zero_phase(const DigitalFilter& filter, std::span<const double> signal) {
    const std::size_t min_len = zero_phase_min_length(filter);
    if (signal.size() < min_len) {
        throw InvalidArgument("apply_zero_phase: signal of length " + std::to_string(signal.size()) +
                              " is too short; at least " + std::to_string(min_len) + " samples are required");
    }
    const std::size_t n      = signal.size();
    const std::size_t padlen = std::min(3 * (std::max(filter.a.size(), filter.b.size()) - 1), n - 1);

    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i) {
        ext.push_back(2.0 * signal.front() - signal[i]);
    }
    ext.insert(ext.end(), signal.begin(), signal.end());
    for (std::size_t i = 1; i <= padlen; ++i) {
        ext.push_back(2.0 * signal.back() - signal[n - 1 - i]);
    }

    const auto zi  = detail::steady_state_initial(filter.b, filter.a);
    auto       fwd = detail::lfilter(filter.b, filter.a, ext, detail::scaled(zi, ext.front()));
    std::ranges::reverse(fwd);
    auto bwd = detail::lfilter(filter.b, filter.a, fwd, detail::scaled(zi, fwd.front()));
    std::ranges::reverse(bwd);
    return {bwd.begin() + static_cast<std::ptrdiff_t>(padlen), bwd.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
}

/// Non-causal convolution with an odd-length symmetric FIR kernel centered on
/// each sample; edges are extended by odd reflection.
[[nodiscard]] inline std::vector<double> apply_centered(const DigitalFilter& filter, std::span<const double> signal) {
    detail::require(filter.is_fir(), "apply_centered: filter must be FIR");
    detail::require(filter.b.size() % 2 == 1, "apply_centered: kernel length must be odd");
    const std::size_t half = filter.b.size() / 2;
    const std::size_t n    = signal.size();
    if (n <= half) {
        throw InvalidArgument("apply_centered: signal of length " + std::to_string(n) + " is too short; at least " +
                              std::to_string(half + 1) + " samples are required");
    }
    auto at = [&](std::ptrdiff_t i) {
        const auto last = static_cast<std::ptrdiff_t>(n) - 1;
        if (i < 0) {
            return 2.0 * signal[0] - signal[static_cast<std::size_t>(-i)];
        }
        if (i > last) {
            return 2.0 * signal[n - 1] - signal[static_cast<std::size_t>(2 * last - i)];
        }
        return signal[static_cast<std::size_t>(i)];
    };
    const double a0 = filter.a[0];
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < filter.b.size(); ++k) {
            acc += filter.b[k] * at(static_cast<std::ptrdiff_t>(t + half) - static_cast<std::ptrdiff_t>(k));
        }
        y[t] = acc / a0;
    }
    return y;
}

/// Applies a filter the way it is meant to be used: forward-backward when
/// zero_phase is set, centered for Savitzky-Golay kernels, causal otherwise.
[[nodiscard]] inline std::vector<double> apply(const DigitalFilter& filter, std::span<const double> signal) {
    if (filter.zero_phase) {
        return apply_zero_phase(filter, signal);
    }
    if (filter.spec.kind == FilterKind::SavitzkyGolay) {
        return apply_centered(filter, signal);
    }
    return apply_forward(filter, signal);
}

} // namespace gazefilt

#endif // GAZEFILT_FILTERS_HPP

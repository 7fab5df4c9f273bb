#ifndef GAZEFILT_KINEMATICS_HPP
#define GAZEFILT_KINEMATICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "gazefilt/errors.hpp"

namespace gazefilt {

/// Uniformly sampled gaze positions in degrees of visual angle.
struct Recording {
    double              fs_hz{1000.0};
    std::vector<double> t_ms;
    std::vector<double> x_deg;
    std::vector<double> y_deg;

    [[nodiscard]] std::size_t size() const noexcept { return x_deg.size(); }

    /// Checks channel lengths and that every timestamp step is within half a
    /// sample period of 1000/fs ms.
    void validate() const {
        detail::require(fs_hz > 0.0 && std::isfinite(fs_hz), "recording: sampling rate must be positive");
        detail::require(t_ms.size() == x_deg.size() && x_deg.size() == y_deg.size(),
                        "recording: channels must have equal length");
        const double period = 1000.0 / fs_hz;
        for (std::size_t i = 1; i < t_ms.size(); ++i) {
            const double step = t_ms[i] - t_ms[i - 1];
            detail::require(std::abs(step - period) < 0.5 * period,
                            "recording: sample " + std::to_string(i) + " breaks uniform sampling (step " +
                                std::to_string(step) + " ms, expected " + std::to_string(period) + " ms)");
        }
    }
};

enum class Channel { X, Y };

[[nodiscard]] inline std::span<const double> channel_of(const Recording& rec, Channel channel) noexcept {
    return channel == Channel::X ? std::span<const double>(rec.x_deg) : std::span<const double>(rec.y_deg);
}

/// A contiguous window of a recording.
struct Segment {
    std::size_t         start_index{0};
    std::size_t         length{0};
    std::vector<double> x_deg;
    std::vector<double> y_deg;

    [[nodiscard]] std::span<const double> samples(Channel channel = Channel::X) const noexcept {
        return channel == Channel::X ? std::span<const double>(x_deg) : std::span<const double>(y_deg);
    }
};

/// Central six-sample difference (x[t+3] - x[t-3]) / (6/fs), for t in [3, N-4].
/// Element i of the result is the velocity at sample i + 3.
[[nodiscard]] inline std::vector<double> sixpoint_velocity(std::span<const double> x, double fs_hz) {
    detail::require(x.size() >= 7, "sixpoint_velocity: need at least 7 samples, got " + std::to_string(x.size()));
    detail::require(fs_hz > 0.0, "sixpoint_velocity: fs must be positive");
    const double        scale = fs_hz / 6.0;
    std::vector<double> v(x.size() - 6);
    for (std::size_t t = 3; t + 3 < x.size(); ++t) {
        v[t - 3] = (x[t + 3] - x[t - 3]) * scale;
    }
    return v;
}

/// Backward difference (x[t] - x[t-1])·fs. Element i is the velocity at sample i + 1.
[[nodiscard]] inline std::vector<double> instantaneous_velocity(std::span<const double> x, double fs_hz) {
    detail::require(x.size() >= 2, "instantaneous_velocity: need at least 2 samples, got " + std::to_string(x.size()));
    detail::require(fs_hz > 0.0, "instantaneous_velocity: fs must be positive");
    std::vector<double> v(x.size() - 1);
    for (std::size_t t = 1; t < x.size(); ++t) {
        v[t - 1] = (x[t] - x[t - 1]) * fs_hz;
    }
    return v;
}

enum class VelocityScreen {
    EitherChannel, /// reject if |vx| or |vy| exceeds the limit
    Radial         /// reject if sqrt(vx² + vy²) exceeds the limit
};

/// Per-sample admissibility: six-point velocity defined and within vmax.
[[nodiscard]] inline std::vector<bool> quiet_mask(const Recording& rec, double vmax_deg_s,
                                                  VelocityScreen screen = VelocityScreen::EitherChannel) {
    const std::size_t n = rec.size();
    std::vector<bool> mask(n, false);
    if (n < 7) {
        return mask;
    }
    const auto vx = sixpoint_velocity(rec.x_deg, rec.fs_hz);
    const auto vy = sixpoint_velocity(rec.y_deg, rec.fs_hz);
    for (std::size_t i = 0; i < vx.size(); ++i) {
        const bool ok = screen == VelocityScreen::Radial
                            ? std::hypot(vx[i], vy[i]) <= vmax_deg_s
                            : std::abs(vx[i]) <= vmax_deg_s && std::abs(vy[i]) <= vmax_deg_s;
        mask[i + 3] = ok;
    }
    return mask;
}

/// Greedy left-to-right packing of non-overlapping seg_len windows in which
/// every sample passes the velocity screen. May return an empty list.
[[nodiscard]] inline std::vector<Segment> select_quiet_segments(const Recording& rec, std::size_t seg_len = 2048,
                                                                double         vmax_deg_s = 25.0,
                                                                VelocityScreen screen     = VelocityScreen::EitherChannel) {
    rec.validate();
    detail::require(seg_len >= 1, "select_quiet_segments: segment length must be positive");
    detail::require(seg_len <= rec.size(), "select_quiet_segments: segment length " + std::to_string(seg_len) +
                                               " exceeds recording length " + std::to_string(rec.size()));
    const auto mask = quiet_mask(rec, vmax_deg_s, screen);

    std::vector<Segment> segments;
    std::size_t          run_start = 0; // first sample of the current admissible run
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) {
            run_start = i + 1;
            continue;
        }
        if (i + 1 - run_start == seg_len) {
            Segment seg;
            seg.start_index = run_start;
            seg.length      = seg_len;
            seg.x_deg.assign(rec.x_deg.begin() + static_cast<std::ptrdiff_t>(run_start),
                             rec.x_deg.begin() + static_cast<std::ptrdiff_t>(i + 1));
            seg.y_deg.assign(rec.y_deg.begin() + static_cast<std::ptrdiff_t>(run_start),
                             rec.y_deg.begin() + static_cast<std::ptrdiff_t>(i + 1));
            segments.push_back(std::move(seg));
            run_start = i + 1;
        }
    }
    return segments;
}

/// Re-cuts the windows of `segments` out of another recording of the same
/// length (e.g. a filtered copy of the one that was screened).
[[nodiscard]] inline std::vector<Segment> same_windows(const Recording& rec, std::span<const Segment> segments) {
    std::vector<Segment> out;
    out.reserve(segments.size());
    for (const auto& s : segments) {
        detail::require(s.start_index + s.length <= rec.size(), "same_windows: window exceeds recording length");
        Segment seg{s.start_index, s.length, {}, {}};
        const auto first = static_cast<std::ptrdiff_t>(s.start_index);
        const auto last  = static_cast<std::ptrdiff_t>(s.start_index + s.length);
        seg.x_deg.assign(rec.x_deg.begin() + first, rec.x_deg.begin() + last);
        seg.y_deg.assign(rec.y_deg.begin() + first, rec.y_deg.begin() + last);
        out.push_back(std::move(seg));
    }
    return out;
}

/// Splits a segment into contiguous non-overlapping blocks of block_len samples.
[[nodiscard]] inline std::vector<std::vector<double>> split_blocks(std::span<const double> segment,
                                                                   std::size_t             block_len = 256) {
    detail::require(block_len >= 1, "split_blocks: block length must be positive");
    detail::require(!segment.empty() && segment.size() % block_len == 0,
                    "split_blocks: segment length " + std::to_string(segment.size()) +
                        " is not a positive multiple of block length " + std::to_string(block_len));
    std::vector<std::vector<double>> blocks;
    blocks.reserve(segment.size() / block_len);
    for (std::size_t start = 0; start < segment.size(); start += block_len) {
        blocks.emplace_back(segment.begin() + static_cast<std::ptrdiff_t>(start),
                            segment.begin() + static_cast<std::ptrdiff_t>(start + block_len));
    }
    return blocks;
}

/// Blocks from a list of segments, in segment order.
[[nodiscard]] inline std::vector<std::vector<double>> split_segments(std::span<const Segment> segments,
                                                                     std::size_t block_len = 256,
                                                                     Channel     channel   = Channel::X) {
    std::vector<std::vector<double>> blocks;
    for (const auto& seg : segments) {
        auto part = split_blocks(seg.samples(channel), block_len);
        std::ranges::move(part, std::back_inserter(blocks));
    }
    return blocks;
}

/// Consecutive full blocks of an arbitrary-length signal; a trailing partial block is dropped.
[[nodiscard]] inline std::vector<std::vector<double>> consecutive_blocks(std::span<const double> signal,
                                                                         std::size_t             block_len) {
    detail::require(block_len >= 1, "consecutive_blocks: block length must be positive");
    const std::size_t usable = signal.size() - signal.size() % block_len;
    if (usable == 0) {
        return {};
    }
    return split_blocks(signal.first(usable), block_len);
}

} // namespace gazefilt

#endif // GAZEFILT_KINEMATICS_HPP

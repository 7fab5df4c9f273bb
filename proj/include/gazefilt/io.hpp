#ifndef GAZEFILT_IO_HPP
#define GAZEFILT_IO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gazefilt/errors.hpp"
#include "gazefilt/kinematics.hpp"

namespace gazefilt::io {

inline constexpr std::string_view kRecordingHeader = "t_ms,x_deg,y_deg";

/// Shortest decimal text that parses back to the identical double.
[[nodiscard]] inline std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        throw NumericalError("format_double: conversion failed");
    }
    return {buf, end};
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t                   start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

inline double parse_double(std::string_view field, std::size_t line_no, std::string_view column) {
    if (field == "nan" || field == "NaN" || field == "NAN") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (field == "inf" || field == "-inf") {
        return field.front() == '-' ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    }
    double value = 0.0;
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError("column '" + std::string(column) + "': cannot parse '" + std::string(field) + "' as a number",
                         line_no);
    }
    return value;
}

} // namespace detail

/// Parses a recording in `t_ms,x_deg,y_deg` CSV form. When fs_hz is 0 the rate
/// is inferred from the median timestamp step.
[[nodiscard]] inline Recording parse_recording(std::istream& in, double fs_hz = 0.0) {
    std::string line;
    std::size_t line_no = 0;
    bool        header  = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) {
            header = true;
            break;
        }
    }
    if (!header) {
        throw ParseError("empty recording: no header line");
    }
    const auto columns = detail::split_fields(line);
    const std::vector<std::string_view> expected{"t_ms", "x_deg", "y_deg"};
    if (columns != expected) {
        throw ParseError("header must be '" + std::string(kRecordingHeader) + "', got '" +
                             std::string(detail::trim(line)) + "'",
                         line_no);
    }

    Recording                rec;
    std::vector<std::size_t> line_of_sample;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::split_fields(line);
        if (fields.size() != 3) {
            throw ParseError("expected 3 columns, found " + std::to_string(fields.size()), line_no);
        }
        const double t = detail::parse_double(fields[0], line_no, "t_ms");
        const double x = detail::parse_double(fields[1], line_no, "x_deg");
        const double y = detail::parse_double(fields[2], line_no, "y_deg");
        if (!std::isfinite(t) || !std::isfinite(x) || !std::isfinite(y)) {
            throw ParseError("non-finite sample (blink or dropout); recordings with missing data are rejected", line_no);
        }
        if (!rec.t_ms.empty() && t <= rec.t_ms.back()) {
            throw ParseError("timestamps must be strictly increasing", line_no);
        }
        rec.t_ms.push_back(t);
        rec.x_deg.push_back(x);
        rec.y_deg.push_back(y);
        line_of_sample.push_back(line_no);
    }
    if (rec.t_ms.empty()) {
        throw ParseError("empty recording: header but no samples");
    }

    if (fs_hz > 0.0) {
        rec.fs_hz = fs_hz;
    } else if (rec.t_ms.size() >= 2) {
        std::vector<double> steps(rec.t_ms.size() - 1);
        for (std::size_t i = 1; i < rec.t_ms.size(); ++i) {
            steps[i - 1] = rec.t_ms[i] - rec.t_ms[i - 1];
        }
        std::ranges::nth_element(steps, steps.begin() + static_cast<std::ptrdiff_t>(steps.size() / 2));
        rec.fs_hz = 1000.0 / steps[steps.size() / 2];
    } else {
        rec.fs_hz = 1000.0;
    }
    const double period = 1000.0 / rec.fs_hz;
    for (std::size_t i = 1; i < rec.t_ms.size(); ++i) {
        const double step = rec.t_ms[i] - rec.t_ms[i - 1];
        if (std::abs(step - period) >= 0.5 * period) {
            throw ParseError("non-uniform sampling: step of " + format_double(step) + " ms, expected " +
                                 format_double(period) + " ms at " + format_double(rec.fs_hz) + " Hz",
                             line_of_sample[i]);
        }
    }
    return rec;
}

[[nodiscard]] inline Recording load_recording(const std::filesystem::path& path, double fs_hz = 0.0) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path.string() + "'");
    }
    return parse_recording(in, fs_hz);
}

inline void write_recording(std::ostream& out, const Recording& rec) {
    out << kRecordingHeader << '\n';
    for (std::size_t i = 0; i < rec.size(); ++i) {
        out << format_double(rec.t_ms[i]) << ',' << format_double(rec.x_deg[i]) << ',' << format_double(rec.y_deg[i])
            << '\n';
    }
}

/// Named equal-length columns, the shape of every analysis CSV.
struct Table {
    std::vector<std::string>         header;
    std::vector<std::vector<double>> columns;

    [[nodiscard]] std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
};

inline void write_table(std::ostream& out, const Table& table) {
    gazefilt::detail::require(table.header.size() == table.columns.size(), "write_table: header/column count mismatch");
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        out << (c ? "," : "") << table.header[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            out << (c ? "," : "") << format_double(table.columns[c][r]);
        }
        out << '\n';
    }
}

[[nodiscard]] inline Table read_table(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    Table       table;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) {
            for (auto field : detail::split_fields(line)) {
                table.header.emplace_back(field);
            }
            break;
        }
    }
    if (table.header.empty()) {
        throw ParseError("empty table: no header line");
    }
    table.columns.resize(table.header.size());
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::split_fields(line);
        if (fields.size() != table.header.size()) {
            throw ParseError("expected " + std::to_string(table.header.size()) + " columns, found " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            table.columns[c].push_back(detail::parse_double(fields[c], line_no, table.header[c]));
        }
    }
    return table;
}

/// Writes via a sibling temp file and rename so readers never see a partial file.
template <typename Writer>
void write_file_atomically(const std::filesystem::path& path, Writer&& writer) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ParseError("cannot open '" + tmp.string() + "' for writing");
        }
        writer(out);
        out.flush();
        if (!out) {
            throw ParseError("write to '" + tmp.string() + "' failed");
        }
    }
    std::filesystem::rename(tmp, path);
}

enum class SyntheticKind { WhiteNoiseFixation, SaccadeWithNoise, Sinusoid };

struct SyntheticSpec {
    SyntheticKind kind{SyntheticKind::WhiteNoiseFixation};
    double        duration_s{30.0};
    double        fs_hz{1000.0};
    double        noise_sigma_deg{0.01};
    double        saccade_amplitude_deg{1.25};
    double        sinusoid_freq_hz{62.5};
    double        sinusoid_amplitude_deg{1.0};
    std::uint64_t seed{1};
};

/// Saccade duration from the main-sequence rule of thumb, 2.2 ms/deg + 21 ms.
[[nodiscard]] inline double saccade_duration_ms(double amplitude_deg) {
    return 2.2 * std::abs(amplitude_deg) + 21.0;
}

/// Deterministic test recordings. The saccade follows a raised-cosine profile
/// centred in the recording, so with zero noise it moves by exactly the amplitude.
[[nodiscard]] inline Recording generate_synthetic(const SyntheticSpec& spec) {
    gazefilt::detail::require(spec.duration_s > 0.0, "generate_synthetic: duration must be positive");
    gazefilt::detail::require(spec.fs_hz > 0.0, "generate_synthetic: fs must be positive");
    gazefilt::detail::require(spec.noise_sigma_deg >= 0.0, "generate_synthetic: noise sigma must be >= 0");
    const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.fs_hz));
    gazefilt::detail::require(n >= 1, "generate_synthetic: duration shorter than one sample");

    Recording rec;
    rec.fs_hz = spec.fs_hz;
    rec.t_ms.resize(n);
    rec.x_deg.assign(n, 0.0);
    rec.y_deg.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        rec.t_ms[i] = static_cast<double>(i) * 1000.0 / spec.fs_hz;
    }

    switch (spec.kind) {
    case SyntheticKind::Sinusoid:
        for (std::size_t i = 0; i < n; ++i) {
            rec.x_deg[i] = spec.sinusoid_amplitude_deg *
                           std::sin(2.0 * std::numbers::pi * spec.sinusoid_freq_hz * static_cast<double>(i) / spec.fs_hz);
        }
        return rec;
    case SyntheticKind::SaccadeWithNoise: {
        const double dur_samples = saccade_duration_ms(spec.saccade_amplitude_deg) * spec.fs_hz / 1000.0;
        const double onset       = static_cast<double>(n) / 2.0 - dur_samples / 2.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = std::clamp((static_cast<double>(i) - onset) / dur_samples, 0.0, 1.0);
            rec.x_deg[i]   = spec.saccade_amplitude_deg * 0.5 * (1.0 - std::cos(std::numbers::pi * u));
        }
        break;
    }
    case SyntheticKind::WhiteNoiseFixation: break;
    }

    if (spec.noise_sigma_deg > 0.0) {
        std::mt19937_64                  rng(spec.seed);
        std::normal_distribution<double> noise(0.0, spec.noise_sigma_deg);
        for (std::size_t i = 0; i < n; ++i) {
            rec.x_deg[i] += noise(rng);
            rec.y_deg[i] += noise(rng);
        }
    }
    return rec;
}

} // namespace gazefilt::io

#endif // GAZEFILT_IO_HPP

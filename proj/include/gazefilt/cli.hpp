#ifndef GAZEFILT_CLI_HPP
#define GAZEFILT_CLI_HPP

// Subcommand front end for the gazefilt tool. Kept in a header so tests can
// drive it in-process with string streams.

#include <bit>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gazefilt/errors.hpp"
#include "gazefilt/filters.hpp"
#include "gazefilt/io.hpp"
#include "gazefilt/kinematics.hpp"
#include "gazefilt/spectral.hpp"
#include "gazefilt/stats.hpp"

namespace gazefilt::cli {

inline constexpr int kExitOk    = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData  = 2;

/// Pipeline defaults; each is overridable from the command line.
struct RunConfig {
    double                   fs_hz{1000.0};
    double                   cutoff_hz{100.0};
    std::size_t              seg_len{2048};
    std::size_t              block_len{256};
    double                   vmax_deg_s{25.0};
    std::size_t              max_lag{5};
    double                   alpha{0.05};
    std::size_t              butterworth_order{7};
    std::size_t              fir_taps{80};
    std::size_t              sg_window{11};
    std::size_t              sg_polyorder{2};
    std::vector<std::string> filters{"sg", "iir", "fir"};

    void validate() const {
        detail::require(fs_hz > 0.0, "--fs must be positive");
        detail::require(block_len >= 4 && std::has_single_bit(block_len), "--block-len must be a power of two >= 4");
        detail::require(seg_len >= block_len && seg_len % block_len == 0,
                        "--seg-len must be a positive multiple of --block-len");
        detail::require(vmax_deg_s > 0.0, "--vmax must be positive");
        detail::require(alpha > 0.0 && alpha < 1.0, "--alpha must be in (0, 1)");
        detail::require(max_lag >= 1, "--max-lag must be >= 1");
    }
};

/// Thrown for problems with the command line itself (exit code 1).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline FilterKind parse_kind(const std::string& name) {
    if (name == "sg" || name == "savitzky-golay" || name == "savgol") {
        return FilterKind::SavitzkyGolay;
    }
    if (name == "iir" || name == "butterworth" || name == "butter") {
        return FilterKind::ButterworthLowpass;
    }
    if (name == "fir") {
        return FilterKind::WindowedSincFir;
    }
    throw UsageError("unknown filter '" + name + "' (expected sg, iir or fir)");
}

/// Builds the configured filter. SG is applied centered (already zero-phase);
/// --zero-phase on SG requests an explicit forward-backward pass instead.
inline DigitalFilter make_filter(const RunConfig& cfg, const std::string& name, bool zero_phase) {
    FilterSpec spec;
    spec.kind          = parse_kind(name);
    spec.fs_hz         = cfg.fs_hz;
    spec.cutoff_hz     = cfg.cutoff_hz;
    spec.order         = cfg.butterworth_order;
    spec.n_taps        = cfg.fir_taps;
    spec.window_length = cfg.sg_window;
    spec.poly_order    = cfg.sg_polyorder;
    try {
        return design(spec, zero_phase);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

/// Study default: IIR/FIR are applied forward-backward, SG centered.
inline DigitalFilter make_study_filter(const RunConfig& cfg, const std::string& name) {
    return make_filter(cfg, name, parse_kind(name) != FilterKind::SavitzkyGolay);
}

struct Streams {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

inline Recording read_input(const std::string& path, Streams io, double fs_override) {
    if (path.empty() || path == "-") {
        return io::parse_recording(io.in, fs_override);
    }
    return io::load_recording(path, fs_override);
}

inline void emit(const std::string& path, Streams io, const std::function<void(std::ostream&)>& writer) {
    if (path.empty() || path == "-") {
        writer(io.out);
        io.out.flush();
        return;
    }
    io::write_file_atomically(path, writer);
}

inline Channel parse_channel(const std::string& name) {
    if (name == "x") {
        return Channel::X;
    }
    if (name == "y") {
        return Channel::Y;
    }
    throw UsageError("--channel must be x or y");
}

inline nlohmann::json filter_json(const DigitalFilter& f) {
    nlohmann::json spec{{"kind", std::string(to_string(f.spec.kind))}, {"fs_hz", f.spec.fs_hz}};
    switch (f.spec.kind) {
    case FilterKind::SavitzkyGolay:
        spec["window_length"] = f.spec.window_length;
        spec["poly_order"]    = f.spec.poly_order;
        break;
    case FilterKind::ButterworthLowpass:
        spec["order"]     = f.spec.order;
        spec["cutoff_hz"] = f.spec.cutoff_hz;
        break;
    case FilterKind::WindowedSincFir:
        spec["n_taps"]    = f.spec.n_taps;
        spec["cutoff_hz"] = f.spec.cutoff_hz;
        break;
    }
    return {{"spec", spec},          {"b", f.b},
            {"a", f.a},              {"zero_phase", f.zero_phase},
            {"stable", is_stable(f)}, {"dc_gain", f.dc_gain()}};
}

inline io::Table response_table(const FrequencyResponse& r) {
    return {{"freq_hz", "mag_db"}, {r.freqs_hz, r.magnitude_db}};
}

/// Blocks of one channel: consecutive blocks of the whole recording, or the
/// blocks of the quiet segments found in `screen` when quiet_only is set.
inline std::vector<std::vector<double>> blocks_of(const Recording& rec, const Recording& screen, const RunConfig& cfg,
                                                  Channel channel, bool quiet_only) {
    if (!quiet_only) {
        return consecutive_blocks(channel_of(rec, channel), cfg.block_len);
    }
    const auto segments = select_quiet_segments(screen, cfg.seg_len, cfg.vmax_deg_s);
    return split_segments(same_windows(rec, segments), cfg.block_len, channel);
}

inline Recording filtered_copy(const Recording& rec, const DigitalFilter& filter) {
    Recording out = rec;
    out.x_deg     = gazefilt::apply(filter, rec.x_deg);
    out.y_deg     = gazefilt::apply(filter, rec.y_deg);
    return out;
}

inline void add_filter_options(CLI::App& sub, RunConfig& cfg, std::string& filter_name, bool& zero_phase) {
    sub.add_option("--filter", filter_name, "Filter: sg, iir (Butterworth) or fir")->capture_default_str();
    sub.add_option("--cutoff", cfg.cutoff_hz, "Single-pass -3 dB frequency in Hz")->capture_default_str();
    sub.add_option("--order", cfg.butterworth_order, "Butterworth order")->capture_default_str();
    sub.add_option("--taps", cfg.fir_taps, "FIR tap count")->capture_default_str();
    sub.add_option("--window", cfg.sg_window, "Savitzky-Golay window length (odd)")->capture_default_str();
    sub.add_option("--polyorder", cfg.sg_polyorder, "Savitzky-Golay polynomial order")->capture_default_str();
    sub.add_flag("--zero-phase", zero_phase, "Apply forward-backward (response squared)");
}

} // namespace detail

/// Runs one subcommand. Exit codes: 0 success, 1 usage error, 2 data error.
inline int cli_dispatch(int argc, const char* const* argv, std::istream& in = std::cin, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    detail::Streams io{in, out, err};
    RunConfig       cfg;
    std::string     in_path;
    std::string     out_path;
    std::string     filter_name = "fir";
    bool            zero_phase  = false;
    bool            quiet_only  = false;
    std::string     channel_name = "x";
    double          fs_flag      = 0.0;

    CLI::App app{"Eye-tracking filter design, spectra and autocorrelation statistics", "gazefilt"};
    app.require_subcommand(1);
    app.fallthrough();

    auto add_io = [&](CLI::App* sub, bool has_input, bool has_output = true) {
        if (has_input) {
            sub->add_option("--in", in_path, "Input recording CSV (t_ms,x_deg,y_deg); '-' or omitted reads stdin");
        }
        if (has_output) {
            sub->add_option("--out", out_path, "Output file; '-' or omitted writes stdout");
        }
    };
    auto add_blocking = [&](CLI::App* sub) {
        sub->add_option("--block-len", cfg.block_len, "FFT block length")->capture_default_str();
        sub->add_option("--seg-len", cfg.seg_len, "Quiet segment length")->capture_default_str();
        sub->add_option("--vmax", cfg.vmax_deg_s, "Velocity screen in deg/s")->capture_default_str();
        sub->add_flag("--quiet-only", quiet_only, "Use only blocks from quiet (saccade-free) segments");
        sub->add_option("--channel", channel_name, "Channel to analyse: x or y")->capture_default_str();
    };

    // design
    auto* design_cmd = app.add_subcommand("design", "Design a filter and print its coefficients as JSON");
    detail::add_filter_options(*design_cmd, cfg, filter_name, zero_phase);
    design_cmd->add_option("--fs", cfg.fs_hz, "Sampling rate in Hz")->capture_default_str();
    double delta1 = 0.0, delta2 = 0.0, transition = 0.0;
    design_cmd->add_option("--delta1", delta1, "Passband ripple for the tap-count estimate");
    design_cmd->add_option("--delta2", delta2, "Stopband suppression for the tap-count estimate");
    design_cmd->add_option("--transition", transition, "Transition width in Hz for the tap-count estimate");
    add_io(design_cmd, false);

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "Filter both channels of a recording");
    detail::add_filter_options(*filter_cmd, cfg, filter_name, zero_phase);
    filter_cmd->add_option("--fs", fs_flag, "Override the sampling rate inferred from timestamps");
    add_io(filter_cmd, true);

    // freqz
    auto* freqz_cmd = app.add_subcommand("freqz", "Analytic frequency response as CSV freq_hz,mag_db");
    detail::add_filter_options(*freqz_cmd, cfg, filter_name, zero_phase);
    freqz_cmd->add_option("--fs", cfg.fs_hz, "Sampling rate in Hz")->capture_default_str();
    double step_hz = 0.5;
    freqz_cmd->add_option("--step", step_hz, "Frequency grid spacing in Hz")->capture_default_str();
    add_io(freqz_cmd, false);

    // measure-response
    auto* measure_cmd = app.add_subcommand("measure-response", "Ratio-method response from unfiltered/filtered recordings");
    std::string filtered_path;
    measure_cmd->add_option("--filtered", filtered_path, "Filtered recording CSV")->required();
    measure_cmd->add_option("--fs", fs_flag, "Override the sampling rate inferred from timestamps");
    add_blocking(measure_cmd);
    add_io(measure_cmd, true);

    // spectrum
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Averaged amplitude spectrum as CSV freq_hz,amplitude_deg");
    spectrum_cmd->add_option("--fs", fs_flag, "Override the sampling rate inferred from timestamps");
    add_blocking(spectrum_cmd);
    add_io(spectrum_cmd, true);

    // segments
    auto* segments_cmd = app.add_subcommand("segments", "List quiet segments as CSV start_index,length,start_t_ms");
    segments_cmd->add_option("--fs", fs_flag, "Override the sampling rate inferred from timestamps");
    segments_cmd->add_option("--seg-len", cfg.seg_len, "Segment length")->capture_default_str();
    segments_cmd->add_option("--vmax", cfg.vmax_deg_s, "Velocity screen in deg/s")->capture_default_str();
    bool radial = false;
    segments_cmd->add_flag("--radial", radial, "Screen radial speed instead of each channel");
    add_io(segments_cmd, true);

    // velocity
    auto* velocity_cmd = app.add_subcommand("velocity", "Velocity trace as CSV t_ms,v_deg_s");
    std::string method = "sixpoint";
    double      offset = 0.0;
    velocity_cmd->add_option("--method", method, "sixpoint or instantaneous")
        ->check(CLI::IsMember({"sixpoint", "instantaneous"}))
        ->capture_default_str();
    velocity_cmd->add_option("--offset", offset, "Constant added to the trace, for stacked plots (deg/s)");
    velocity_cmd->add_option("--channel", channel_name, "Channel: x or y")->capture_default_str();
    velocity_cmd->add_option("--fs", fs_flag, "Override the sampling rate inferred from timestamps");
    add_io(velocity_cmd, true);

    // acf-stats
    auto* acf_cmd = app.add_subcommand("acf-stats", "ACF, Friedman and Tukey HSD across filter conditions (JSON)");
    std::vector<std::string> extra_conditions;
    acf_cmd->add_option("--filters", cfg.filters, "Designed filters to compare against the unfiltered data")
        ->delimiter(',')
        ->capture_default_str();
    acf_cmd->add_option("--condition", extra_conditions, "Extra pre-filtered recording as name=path (repeatable)");
    acf_cmd->add_option("--cutoff", cfg.cutoff_hz, "Single-pass -3 dB frequency in Hz")->capture_default_str();
    acf_cmd->add_option("--order", cfg.butterworth_order, "Butterworth order")->capture_default_str();
    acf_cmd->add_option("--taps", cfg.fir_taps, "FIR tap count")->capture_default_str();
    acf_cmd->add_option("--window", cfg.sg_window, "Savitzky-Golay window length")->capture_default_str();
    acf_cmd->add_option("--polyorder", cfg.sg_polyorder, "Savitzky-Golay polynomial order")->capture_default_str();
    acf_cmd->add_option("--max-lag", cfg.max_lag, "Largest ACF lag")->capture_default_str();
    acf_cmd->add_option("--alpha", cfg.alpha, "Significance level")->capture_default_str();
    acf_cmd->add_option("--fs", fs_flag, "Override the sampling rate inferred from timestamps");
    add_blocking(acf_cmd);
    add_io(acf_cmd, true);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic recording");
    io::SyntheticSpec synth;
    std::string       kind_name = "noise";
    synth_cmd->add_option("--kind", kind_name, "noise, saccade or sinusoid")
        ->check(CLI::IsMember({"noise", "saccade", "sinusoid"}))
        ->capture_default_str();
    synth_cmd->add_option("--duration", synth.duration_s, "Duration in seconds")->capture_default_str();
    synth_cmd->add_option("--fs", synth.fs_hz, "Sampling rate in Hz")->capture_default_str();
    synth_cmd->add_option("--sigma", synth.noise_sigma_deg, "Gaussian noise sigma in deg")->capture_default_str();
    synth_cmd->add_option("--amplitude", synth.saccade_amplitude_deg, "Saccade amplitude in deg")->capture_default_str();
    synth_cmd->add_option("--freq", synth.sinusoid_freq_hz, "Sinusoid frequency in Hz")->capture_default_str();
    synth_cmd->add_option("--sine-amplitude", synth.sinusoid_amplitude_deg, "Sinusoid amplitude in deg")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
    add_io(synth_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    // Stage 1: everything derived from flags alone. Failures are usage errors.
    std::optional<DigitalFilter> filter;
    Channel                      channel = Channel::X;
    try {
        if (fs_flag > 0.0) {
            cfg.fs_hz = fs_flag;
        }
        cfg.validate();
        channel = detail::parse_channel(channel_name);
        if (*design_cmd || *freqz_cmd) {
            if (*design_cmd && transition > 0.0) {
                cfg.fir_taps = estimate_fir_taps({delta1, delta2, cfg.fs_hz, transition});
            }
            filter = detail::make_filter(cfg, filter_name, zero_phase);
        }
        if (*synth_cmd) {
            gazefilt::detail::require(synth.duration_s > 0.0, "--duration must be positive");
            gazefilt::detail::require(synth.fs_hz > 0.0, "--fs must be positive");
            gazefilt::detail::require(synth.noise_sigma_deg >= 0.0, "--sigma must be >= 0");
        }
        if (*acf_cmd) {
            for (const auto& name : cfg.filters) {
                (void)detail::make_study_filter(cfg, name);
            }
        }
    } catch (const UsageError& e) {
        err << "gazefilt: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "gazefilt: " << e.what() << '\n';
        return kExitUsage;
    }

    // Stage 2: data processing. Failures are data errors.
    try {
        if (*design_cmd) {
            auto doc = detail::filter_json(*filter);
            if (transition > 0.0) {
                doc["estimated_taps"] = cfg.fir_taps;
            }
            detail::emit(out_path, io, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
        } else if (*freqz_cmd) {
            const auto freqs    = frequency_grid(cfg.fs_hz, step_hz);
            const auto response = analytic_frequency_response(*filter, freqs);
            detail::emit(out_path, io, [&](std::ostream& os) { io::write_table(os, detail::response_table(response)); });
        } else if (*filter_cmd) {
            const auto rec = detail::read_input(in_path, io, fs_flag);
            cfg.fs_hz      = rec.fs_hz;
            DigitalFilter f;
            try {
                f = detail::make_filter(cfg, filter_name, zero_phase);
            } catch (const UsageError& e) {
                err << "gazefilt: " << e.what() << '\n';
                return kExitUsage;
            }
            const auto result = detail::filtered_copy(rec, f);
            detail::emit(out_path, io, [&](std::ostream& os) { io::write_recording(os, result); });
        } else if (*measure_cmd) {
            const auto raw      = detail::read_input(in_path, io, fs_flag);
            const auto filtered = io::load_recording(filtered_path, fs_flag);
            gazefilt::detail::require(raw.size() == filtered.size(),
                                      "unfiltered and filtered recordings differ in length");
            const auto a        = detail::blocks_of(raw, raw, cfg, channel, quiet_only);
            const auto b        = detail::blocks_of(filtered, raw, cfg, channel, quiet_only);
            if (a.empty()) {
                throw DegenerateInput("no complete blocks available for the ratio method");
            }
            const auto response = empirical_frequency_response(a, b, raw.fs_hz);
            detail::emit(out_path, io, [&](std::ostream& os) { io::write_table(os, detail::response_table(response)); });
        } else if (*spectrum_cmd) {
            const auto rec    = detail::read_input(in_path, io, fs_flag);
            const auto blocks = detail::blocks_of(rec, rec, cfg, channel, quiet_only);
            if (blocks.empty()) {
                throw DegenerateInput("no complete blocks available for the spectrum");
            }
            const auto spec = amplitude_spectrum(blocks, rec.fs_hz);
            err << "gazefilt: averaged " << spec.n_blocks_averaged << " blocks\n";
            detail::emit(out_path, io, [&](std::ostream& os) {
                io::write_table(os, {{"freq_hz", "amplitude_deg"}, {spec.freqs_hz, spec.amplitude_deg}});
            });
        } else if (*segments_cmd) {
            const auto rec      = detail::read_input(in_path, io, fs_flag);
            const auto segments = select_quiet_segments(rec, cfg.seg_len, cfg.vmax_deg_s,
                                                        radial ? VelocityScreen::Radial : VelocityScreen::EitherChannel);
            if (segments.empty()) {
                err << "gazefilt: warning: no segment of " << cfg.seg_len << " samples stays below " << cfg.vmax_deg_s
                    << " deg/s\n";
            }
            io::Table table{{"start_index", "length", "start_t_ms"}, {{}, {}, {}}};
            for (const auto& s : segments) {
                table.columns[0].push_back(static_cast<double>(s.start_index));
                table.columns[1].push_back(static_cast<double>(s.length));
                table.columns[2].push_back(rec.t_ms[s.start_index]);
            }
            detail::emit(out_path, io, [&](std::ostream& os) { io::write_table(os, table); });
        } else if (*velocity_cmd) {
            const auto rec    = detail::read_input(in_path, io, fs_flag);
            const auto signal = channel_of(rec, channel);
            const bool six    = method == "sixpoint";
            const auto v      = six ? sixpoint_velocity(signal, rec.fs_hz) : instantaneous_velocity(signal, rec.fs_hz);
            const std::size_t first = six ? 3 : 1;
            io::Table         table{{"t_ms", "v_deg_s"}, {{}, {}}};
            for (std::size_t i = 0; i < v.size(); ++i) {
                table.columns[0].push_back(rec.t_ms[i + first]);
                table.columns[1].push_back(v[i] + offset);
            }
            detail::emit(out_path, io, [&](std::ostream& os) { io::write_table(os, table); });
        } else if (*acf_cmd) {
            const auto rec = detail::read_input(in_path, io, fs_flag);
            cfg.fs_hz      = rec.fs_hz;
            std::vector<Condition> conditions;
            conditions.push_back({"unfiltered", detail::blocks_of(rec, rec, cfg, channel, quiet_only)});
            for (const auto& name : cfg.filters) {
                const auto filtered = detail::filtered_copy(rec, detail::make_study_filter(cfg, name));
                conditions.push_back({name, detail::blocks_of(filtered, rec, cfg, channel, quiet_only)});
            }
            for (const auto& spec : extra_conditions) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos || eq == 0) {
                    err << "gazefilt: --condition expects name=path, got '" << spec << "'\n";
                    return kExitUsage;
                }
                const auto other = io::load_recording(spec.substr(eq + 1), fs_flag);
                gazefilt::detail::require(other.size() == rec.size(),
                                          "condition '" + spec.substr(0, eq) + "' differs in length from --in");
                conditions.push_back({spec.substr(0, eq), detail::blocks_of(other, rec, cfg, channel, quiet_only)});
            }
            const auto study = run_acf_study(conditions, cfg.max_lag, cfg.alpha);

            nlohmann::json doc;
            doc["conditions"] = study.conditions;
            doc["n_blocks"]   = study.n_blocks;
            doc["max_lag"]    = study.max_lag;
            doc["alpha"]      = study.alpha;
            for (std::size_t c = 0; c < study.conditions.size(); ++c) {
                const auto& name                 = study.conditions[c];
                doc["median_acf"][name]          = study.median_acf[c];
                doc["median_fisher_z"][name]     = study.median_fisher_z[c];
                doc["significant_counts"][name]  = study.significant_counts[c];
            }
            doc["comparisons"] = nlohmann::json::array();
            for (const auto& cmp : study.comparisons) {
                nlohmann::json entry;
                entry["lag"]                = cmp.lag;
                entry["friedman"]["chi2"]   = cmp.friedman.chi2;
                entry["friedman"]["df"]     = cmp.friedman.df;
                entry["friedman"]["p"]      = cmp.friedman.p;
                for (std::size_t c = 0; c < study.conditions.size(); ++c) {
                    entry["friedman"]["mean_ranks"][study.conditions[c]] = cmp.friedman.mean_ranks[c];
                }
                entry["tukey"] = nlohmann::json::array();
                for (const auto& t : cmp.tukey) {
                    entry["tukey"].push_back({{"pair", {study.conditions[t.first], study.conditions[t.second]}},
                                              {"difference", t.difference},
                                              {"q", t.q},
                                              {"p", t.p},
                                              {"significant", t.p < study.alpha}});
                }
                doc["comparisons"].push_back(std::move(entry));
            }
            detail::emit(out_path, io, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
        } else if (*synth_cmd) {
            synth.kind = kind_name == "saccade"    ? io::SyntheticKind::SaccadeWithNoise
                         : kind_name == "sinusoid" ? io::SyntheticKind::Sinusoid
                                                   : io::SyntheticKind::WhiteNoiseFixation;
            const auto rec = io::generate_synthetic(synth);
            detail::emit(out_path, io, [&](std::ostream& os) { io::write_recording(os, rec); });
        }
    } catch (const std::exception& e) {
        err << "gazefilt: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

} // namespace gazefilt::cli

#endif // GAZEFILT_CLI_HPP

// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gazefilt/cli.hpp"
#include "gazefilt/gazefilt.hpp"
#include "oracles.hpp"

using namespace gazefilt;

namespace {

constexpr double kFs     = 1000.0;
constexpr double kCutoff = 100.0;

struct Outcome {
    bool        pass;
    std::string detail;
};

struct Criterion {
    int                      id;
    std::string              name;
    double                   time_limit_s;
    std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string fmt_sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

DigitalFilter iir() { return design_butterworth_lowpass(7, kCutoff, kFs).with_zero_phase(); }
DigitalFilter fir() { return design_fir_lowpass(80, kCutoff, kFs).with_zero_phase(); }
DigitalFilter sg() { return design_savitzky_golay(11, 2, kFs); }

struct CrossingTarget {
    const char* filter;
    double      level_db;
    double      target_hz;
    double      tolerance_hz;
};

// single-pass −3 dB cutoff 100 Hz; IIR and FIR zero-phase, SG centered
const std::vector<CrossingTarget> kCrossings{
    {"iir", -30.0, 127.0, 5.0}, {"iir", -40.0, 135.0, 5.0}, {"fir", -30.0, 110.0, 5.0},
    {"fir", -40.0, 114.0, 5.0}, {"sg", -3.0, 100.0, 5.0},   {"sg", -30.0, 158.0, 10.0},
};

DigitalFilter by_name(const std::string& name) {
    return name == "iir" ? iir() : name == "fir" ? fir() : sg();
}

Outcome check_crossings(const std::function<FrequencyResponse(const std::string&)>& response_of,
                        std::optional<double> tolerance_override) {
    bool        pass = true;
    std::string detail;
    for (const auto& c : kCrossings) {
        const auto   crossing = find_db_crossing(response_of(c.filter), c.level_db);
        const double tol      = tolerance_override.value_or(c.tolerance_hz);
        const bool   ok = crossing && std::abs(crossing->frequency_hz - c.target_hz) <= tol;
        pass            = pass && ok;
        detail += std::string(c.filter) + "@" + fmt(c.level_db, 0) + "dB=" +
                  (crossing ? fmt(crossing->frequency_hz, 1) : std::string("none")) + "(" + fmt(c.target_hz, 0) +
                  "±" + fmt(tol, 0) + ") ";
    }
    return {pass, detail};
}

Outcome criterion_crossings() {
    const auto grid = frequency_grid(kFs, 0.05);
    return check_crossings([&](const std::string& f) { return analytic_frequency_response(by_name(f), grid); },
                           std::nullopt);
}

Outcome criterion_sg_ringing() {
    const auto r      = analytic_frequency_response(sg(), frequency_grid(kFs, 0.5));
    int        maxima = 0;
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        if (r.freqs_hz[i] > 150.0 && r.magnitude_db[i] > r.magnitude_db[i - 1] &&
            r.magnitude_db[i] > r.magnitude_db[i + 1]) {
            ++maxima;
        }
    }
    return {maxima >= 2, std::to_string(maxima) + " local maxima above 150 Hz (need >= 2)"};
}

Outcome criterion_ratio_method() {
    constexpr std::size_t kBlocks = 200;
    constexpr std::size_t kLen    = 256;
    constexpr double      kMaxRms = 1.0;
    const auto            noise   = oracle::white_noise(kBlocks * kLen, 2024);
    const auto            raw     = consecutive_blocks(noise, kLen);
    bool                  pass    = true;
    std::string           detail;
    for (const std::string name : {"sg", "iir", "fir"}) {
        const auto f        = by_name(name);
        const auto filtered = consecutive_blocks(gazefilt::apply(f, noise), kLen);
        const auto measured = empirical_frequency_response(raw, filtered, kFs);
        const auto analytic = analytic_frequency_response(f, measured.freqs_hz);
        double     sq       = 0.0;
        int        n = 0, undefined = 0;
        for (std::size_t k = 0; k < measured.size() && measured.freqs_hz[k] <= 400.0; ++k) {
            if (!measured.defined[k] || !analytic.defined[k]) {
                ++undefined;
                continue;
            }
            sq += std::pow(measured.magnitude_db[k] - analytic.magnitude_db[k], 2);
            ++n;
        }
        const double rms = std::sqrt(sq / n);
        pass             = pass && rms < kMaxRms && undefined == 0;
        detail += name + " " + fmt(rms) + " dB RMS" + (undefined ? " (" + std::to_string(undefined) + " undefined)" : "") +
                  "; ";
    }
    return {pass, detail + "limit " + fmt(kMaxRms, 1) + " dB over 0-400 Hz"};
}

Outcome criterion_fft() {
    std::mt19937_64                        rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double                                 worst_rel = 0.0, worst_parseval = 0.0;
    for (std::size_t n = 2; n <= 256; n *= 2) {
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<std::complex<double>> x(n);
            for (auto& v : x) {
                v = {u(rng), u(rng)};
            }
            const auto got  = fft(x);
            const auto want = oracle::naive_dft(x);
            double     err = 0.0, scale = 0.0, ex = 0.0, eX = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                err   = std::max(err, std::abs(got[k] - want[k]));
                scale = std::max(scale, std::abs(want[k]));
                ex += std::norm(x[k]);
                eX += std::norm(got[k]);
            }
            worst_rel      = std::max(worst_rel, err / scale);
            worst_parseval = std::max(worst_parseval, std::abs(ex - eX / static_cast<double>(n)) / ex);
        }
    }
    return {worst_rel < 1e-9 && worst_parseval < 1e-9,
            "max rel err " + fmt_sci(worst_rel) + ", Parseval " + fmt_sci(worst_parseval) + " (limit 1e-9)"};
}

Outcome criterion_sg_kernel() {
    const auto f    = sg();
    const auto want = oracle::savgol_pinv(11, 2);
    double     err  = 0.0;
    for (std::size_t i = 0; i < 11; ++i) {
        err = std::max(err, std::abs(f.b[i] - want[i]));
    }
    const double end_err = std::max(std::abs(f.b.front() + 36.0 / 429.0), std::abs(f.b.back() + 36.0 / 429.0));
    return {err < 1e-12 && end_err < 1e-12,
            "max |b - pinv| " + fmt_sci(err) + ", end values off -36/429 by " + fmt_sci(end_err) + " (limit 1e-12)"};
}

Outcome criterion_acf_induction() {
    constexpr std::size_t kBlocks = 216;
    const auto            noise   = oracle::white_noise(kBlocks * 256, 6);
    std::vector<Condition> conditions{{"unfiltered", consecutive_blocks(noise, 256)}};
    for (const std::string name : {"sg", "iir", "fir"}) {
        conditions.push_back({name, consecutive_blocks(gazefilt::apply(by_name(name), noise), 256)});
    }
    const auto   study = run_acf_study(conditions, 5, 0.05);
    const double raw1  = study.median_acf[0][1];
    const double iir1  = study.median_acf[2][1];
    const double fir1  = study.median_acf[3][1];
    const auto&  lag1  = study.comparisons.front();
    double       p_unf_fir = 1.0;
    for (const auto& t : lag1.tukey) {
        if (t.first == 0 && t.second == 3) {
            p_unf_fir = t.p;
        }
    }
    const bool pass = study.n_blocks == kBlocks && std::abs(raw1) <= 0.1 && iir1 > 0.9 && fir1 > 0.9 &&
                      lag1.friedman.p < 1e-6 && p_unf_fir < 0.05;
    return {pass, "median r1 unfiltered " + fmt(raw1, 3) + ", iir " + fmt(iir1, 3) + ", fir " + fmt(fir1, 3) +
                      "; Friedman chi2 " + fmt(lag1.friedman.chi2, 1) + " p " + fmt_sci(lag1.friedman.p) +
                      "; Tukey unfiltered-fir p " + fmt_sci(p_unf_fir)};
}

Outcome criterion_stats_oracles() {
    const auto   f      = friedman_test({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}});
    const bool   f_ok   = std::abs(f.chi2 - 6.0) < 1e-12 && std::abs(f.p - std::exp(-3.0)) < 1e-9;
    const double srange = studentized_range_sf(1.96 * std::sqrt(2.0), 2);
    const bool   s_ok   = std::abs(srange - 0.05) <= 1e-3;

    std::mt19937_64                  rng(7);
    std::normal_distribution<double> z;
    std::vector<double>              p;
    // blocks x conditions of the autocorrelation study; at a few dozen blocks the
    // chi-square approximation to the discrete statistic is visibly off
    for (int trial = 0; trial < 1000; ++trial) {
        RankMatrix m(216, std::vector<double>(4));
        for (auto& row : m) {
            for (auto& v : row) {
                v = z(rng);
            }
        }
        p.push_back(friedman_test(m).p);
    }
    const double d      = oracle::ks_uniform_statistic(p);
    const double ks_p   = oracle::kolmogorov_sf(std::sqrt(1000.0) * d);
    const bool   ks_ok  = ks_p > 0.01;
    return {f_ok && s_ok && ks_ok, "Friedman chi2 " + fmt(f.chi2, 3) + " p " + fmt(f.p, 6) + "; srange_sf " +
                                       fmt(srange, 5) + "; KS D " + fmt(d, 4) + " p " + fmt(ks_p, 3)};
}

Outcome criterion_zero_phase() {
    constexpr std::size_t n = 4000;
    std::vector<double>   x(n);
    for (std::size_t t = 0; t < n; ++t) {
        x[t] = std::sin(2.0 * std::numbers::pi * 50.0 * static_cast<double>(t) / kFs);
    }
    bool        pass = true;
    std::string detail;
    for (const std::string name : {"iir", "fir"}) {
        const auto f = by_name(name);
        const auto y = gazefilt::apply(f, x);
        // interior only, away from the padded edges
        const std::span<const double> yi(y.data() + 500, n - 1000);
        const std::span<const double> xi(x.data() + 500, n - 1000);
        const double amp = oracle::fit_sine(yi, 50.0, kFs).amplitude;
        int          best_lag = 0;
        double       best     = -std::numeric_limits<double>::infinity();
        // a 50 Hz tone repeats every 20 samples, so lags beyond ±9 are aliases
        for (int lag = -9; lag <= 9; ++lag) {
            double acc = 0.0;
            for (std::size_t t = 0; t < xi.size(); ++t) {
                acc += xi[t] * y[static_cast<std::size_t>(500 + static_cast<long>(t) + lag)];
            }
            if (acc > best) {
                best     = acc;
                best_lag = lag;
            }
        }
        const bool ok = std::abs(amp - 1.0) <= 0.01 && best_lag == 0;
        pass          = pass && ok;
        detail += name + " amp " + fmt(amp, 4) + " lag " + std::to_string(best_lag) + "; ";
    }
    const auto grid    = frequency_grid(kFs, 0.5);
    double     dev     = 0.0;
    for (const auto& f : {design_butterworth_lowpass(7, kCutoff, kFs), design_fir_lowpass(80, kCutoff, kFs), sg()}) {
        const auto one = analytic_frequency_response(f, grid);
        const auto two = analytic_frequency_response(f.with_zero_phase(), grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (one.defined[i] && one.magnitude_db[i] > 20.0 * std::log10(kMagnitudeFloor) / 2.0) {
                dev = std::max(dev, std::abs(two.magnitude_db[i] - 2.0 * one.magnitude_db[i]));
            }
        }
    }
    pass = pass && dev < 1e-9;
    return {pass, detail + "max |two-pass - 2 x single| " + fmt_sci(dev) + " dB"};
}

Outcome criterion_pipeline() {
    const auto dir = std::filesystem::temp_directory_path() / "gazefilt_acceptance";
    std::filesystem::create_directories(dir);
    auto run = [](std::vector<std::string> args) {
        args.insert(args.begin(), "gazefilt");
        std::vector<const char*> argv;
        for (const auto& a : args) {
            argv.push_back(a.c_str());
        }
        std::istringstream in;
        std::ostringstream out, err;
        const int code = cli::cli_dispatch(static_cast<int>(argv.size()), argv.data(), in, out, err);
        if (code != 0) {
            throw std::runtime_error("gazefilt " + args[1] + " exited " + std::to_string(code) + ": " + err.str());
        }
        return out.str();
    };
    const auto raw = (dir / "raw.csv").string();
    run({"synth", "--kind", "noise", "--duration", "60", "--sigma", "1", "--seed", "9", "--out", raw});

    std::map<std::string, FrequencyResponse> measured;
    for (const std::string name : {"iir", "fir", "sg"}) {
        const auto filtered = (dir / (name + ".csv")).string();
        std::vector<std::string> args{"filter", "--filter", name, "--in", raw, "--out", filtered};
        if (name != "sg") {
            args.emplace_back("--zero-phase");
        }
        run(args);
        std::istringstream table_text(run({"measure-response", "--in", raw, "--filtered", filtered}));
        const auto         table = io::read_table(table_text);
        FrequencyResponse  r;
        r.freqs_hz     = table.columns[0];
        r.magnitude_db = table.columns[1];
        for (double v : r.magnitude_db) {
            r.defined.push_back(!std::isnan(v));
        }
        measured[name] = std::move(r);
    }
    std::filesystem::remove_all(dir);
    return check_crossings([&](const std::string& f) { return measured.at(f); }, 8.0);
}

Outcome criterion_taps() {
    const auto taps = estimate_fir_taps({0.01, 0.01, kFs, 25.0});
    return {taps == 80, "estimate_fir_taps(0.01, 0.01, 1000, 25) = " + std::to_string(taps) + " (expected 80)"};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "frequency-response crossings", 1.0, criterion_crossings},
        {2, "SG stop-band ringing", 1.0, criterion_sg_ringing},
        {3, "ratio-method fidelity", 10.0, criterion_ratio_method},
        {4, "FFT oracle equivalence", 10.0, criterion_fft},
        {5, "SG kernel oracle", 1.0, criterion_sg_kernel},
        {6, "autocorrelation induction", 30.0, criterion_acf_induction},
        {7, "statistics oracles", 60.0, criterion_stats_oracles},
        {8, "zero-phase contract", 5.0, criterion_zero_phase},
        {9, "end-to-end pipeline", 30.0, criterion_pipeline},
        {10, "tap-count formula", 1.0, criterion_taps},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome    outcome{false, ""};
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool   in_time = elapsed < c.time_limit_s;
        const bool   pass    = outcome.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s  criterion %2d  %-30s %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), outcome.detail.c_str(), elapsed, c.time_limit_s, in_time ? "" : ", too slow");
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

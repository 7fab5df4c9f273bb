#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gazefilt/io.hpp"
#include "gazefilt/kinematics.hpp"
#include "gazefilt/spectral.hpp"
#include "oracles.hpp"

using namespace gazefilt;

namespace {

Recording parse(const std::string& text, double fs = 0.0) {
    std::istringstream in(text);
    return io::parse_recording(in, fs);
}

std::string parse_error_of(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("parsing a small recording", "[io][parse]") {
    const auto rec = parse("t_ms,x_deg,y_deg\n0,1.5,-2\n1,1.25,-2.5\n2,1.0,-3\n");
    REQUIRE(rec.size() == 3);
    CHECK(rec.fs_hz == 1000.0);
    CHECK(rec.x_deg == std::vector<double>{1.5, 1.25, 1.0});
    CHECK(rec.y_deg == std::vector<double>{-2.0, -2.5, -3.0});

    const auto half = parse("t_ms,x_deg,y_deg\n0,0,0\n2,0,0\n4,0,0\n6,0,0\n");
    CHECK(half.fs_hz == 500.0);
    CHECK(parse("t_ms,x_deg,y_deg\n0,0,0\n2,0,0\n", 500.0).fs_hz == 500.0);
    // whitespace and CRLF line endings
    CHECK(parse("t_ms, x_deg, y_deg\r\n0, 1, 2\r\n1, 3, 4\r\n").x_deg == std::vector<double>{1.0, 3.0});
}

TEST_CASE("parse errors carry line numbers", "[io][parse][error]") {
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THAT(parse_error_of("t_ms,x_deg,y_deg\n"), Catch::Matchers::ContainsSubstring("empty"));
    CHECK_THAT(parse_error_of("time,x,y\n0,0,0\n"), Catch::Matchers::ContainsSubstring("line 1"));

    const auto gap = parse_error_of("t_ms,x_deg,y_deg\n0,0,0\n1,0,0\n2,0,0\n4,0,0\n5,0,0\n");
    CHECK_THAT(gap, Catch::Matchers::ContainsSubstring("line 5"));
    CHECK_THAT(gap, Catch::Matchers::ContainsSubstring("non-uniform"));

    CHECK_THAT(parse_error_of("t_ms,x_deg,y_deg\n0,0,0\n1,nan,0\n"), Catch::Matchers::ContainsSubstring("line 3"));
    CHECK_THAT(parse_error_of("t_ms,x_deg,y_deg\n0,0,0\n1,abc,0\n"), Catch::Matchers::ContainsSubstring("line 3"));
    CHECK_THAT(parse_error_of("t_ms,x_deg,y_deg\n0,0,0\n0,0,0\n"), Catch::Matchers::ContainsSubstring("increasing"));
    CHECK_THAT(parse_error_of("t_ms,x_deg,y_deg\n0,0\n"), Catch::Matchers::ContainsSubstring("3 columns"));

    try {
        (void)parse("t_ms,x_deg,y_deg\n0,0,0\n1,inf,0\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(io::load_recording("/nonexistent/gazefilt.csv"), ParseError);
}

TEST_CASE("recordings round-trip bit-exactly", "[io][roundtrip]") {
    io::SyntheticSpec spec;
    spec.duration_s      = 2.0;
    spec.noise_sigma_deg = 0.37;
    spec.seed            = 99;
    const auto rec       = io::generate_synthetic(spec);
    std::stringstream buffer;
    io::write_recording(buffer, rec);
    const auto back = io::parse_recording(buffer);
    CHECK(back.t_ms == rec.t_ms);
    CHECK(back.x_deg == rec.x_deg);
    CHECK(back.y_deg == rec.y_deg);
    CHECK(back.fs_hz == rec.fs_hz);

    const auto path = std::filesystem::temp_directory_path() / "gazefilt_io_roundtrip.csv";
    io::write_file_atomically(path, [&](std::ostream& os) { io::write_recording(os, rec); });
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    CHECK(io::load_recording(path).x_deg == rec.x_deg);
    std::filesystem::remove(path);
}

TEST_CASE("number formatting", "[io][format]") {
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(-2.0) == "-2");
    CHECK(io::format_double(std::nan("")) == "nan");
    CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("tables round-trip", "[io][table]") {
    const io::Table table{{"a", "b"}, {{1.0, 2.5, -3.0}, {0.1, std::nan(""), 1e-300}}};
    std::stringstream buffer;
    io::write_table(buffer, table);
    const auto back = io::read_table(buffer);
    CHECK(back.header == table.header);
    CHECK(back.columns[0] == table.columns[0]);
    CHECK(back.columns[1][0] == 0.1);
    CHECK(std::isnan(back.columns[1][1]));
    CHECK(back.columns[1][2] == 1e-300);
}

TEST_CASE("synthetic recordings", "[io][synthetic]") {
    io::SyntheticSpec spec;
    spec.duration_s = 1.0;
    const auto a    = io::generate_synthetic(spec);
    const auto b    = io::generate_synthetic(spec);
    CHECK(a.x_deg == b.x_deg);
    CHECK(a.size() == 1000);
    spec.seed = 2;
    CHECK(io::generate_synthetic(spec).x_deg != a.x_deg);

    io::SyntheticSpec sac;
    sac.kind            = io::SyntheticKind::SaccadeWithNoise;
    sac.duration_s      = 1.0;
    sac.noise_sigma_deg = 0.0;
    const auto s        = io::generate_synthetic(sac);
    CHECK(s.x_deg.back() - s.x_deg.front() == 1.25);
    CHECK(io::saccade_duration_ms(1.25) == Catch::Approx(23.75));
    for (std::size_t i = 1; i < s.size(); ++i) {
        CHECK(s.x_deg[i] >= s.x_deg[i - 1]);
    }

    io::SyntheticSpec sine;
    sine.kind       = io::SyntheticKind::Sinusoid;
    sine.duration_s = 2.56;
    const auto sr   = io::generate_synthetic(sine);
    const auto spectrum = amplitude_spectrum(consecutive_blocks(sr.x_deg, 256), sr.fs_hz);
    const auto peak     = static_cast<std::size_t>(std::ranges::max_element(spectrum.amplitude_deg) -
                                               spectrum.amplitude_deg.begin());
    CHECK(spectrum.freqs_hz[peak] == 62.5);
    CHECK(std::abs(spectrum.amplitude_deg[peak] - 1.0) < 0.02);
    CHECK(oracle::fit_sine(sr.x_deg, 62.5, 1000.0).amplitude == Catch::Approx(1.0).epsilon(1e-9));

    io::SyntheticSpec bad;
    bad.duration_s = -1.0;
    CHECK_THROWS_AS(io::generate_synthetic(bad), InvalidArgument);
}

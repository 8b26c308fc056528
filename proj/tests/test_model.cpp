#include <catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "ionpulse/chain.hpp"
#include "ionpulse/io.hpp"
#include "ionpulse/pulse.hpp"
#include "support.hpp"

using namespace ionpulse;
using testsupport::sample_chain;

namespace {

std::filesystem::path tmp_dir() {
    const std::filesystem::path dir = IONPULSE_TEST_TMP;
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& body) {
    const auto path = tmp_dir() / name;
    std::ofstream out(path);
    out << body;
    return path.string();
}

}  // namespace

TEST_CASE("chain config round trip is bit exact") {
    const auto path = (tmp_dir() / "sample_chain.json").string();
    io::save_chain(sample_chain(), path);
    const IonChain back = io::load_chain(path);
    REQUIRE(back.num_modes() == 5);
    REQUIRE(back.num_ions() == 5);
    REQUIRE(back.label == sample_chain().label);
    for (int p = 0; p < 5; ++p) {
        REQUIRE(back.mode_freqs(p) == sample_chain().mode_freqs(p));
        for (int i = 0; i < 5; ++i) {
            REQUIRE(back.lamb_dicke(p, i) == sample_chain().lamb_dicke(p, i));
        }
    }
    // lowest mode is the published 2.26870 MHz
    REQUIRE(radps_to_mhz(back.mode_freqs(0)) == Catch::Approx(2.26870).epsilon(1e-12));
}

TEST_CASE("chain config rejects malformed input with field paths") {
    SECTION("empty mode list") {
        const auto p = write_file("empty_modes.json",
                                  R"({"mode_freqs_mhz": [], "lamb_dicke": [[0.1]]})");
        REQUIRE_THROWS_MATCHES(io::load_chain(p), validation_error,
                               Catch::Matchers::MessageMatches(
                                   Catch::Matchers::ContainsSubstring("mode_freqs_mhz")));
    }
    SECTION("ragged lamb_dicke row") {
        const auto p = write_file(
            "ragged.json",
            R"({"mode_freqs_mhz": [2.0, 2.1], "lamb_dicke": [[0.1, 0.1], [0.1]]})");
        REQUIRE_THROWS_MATCHES(io::load_chain(p), validation_error,
                               Catch::Matchers::MessageMatches(
                                   Catch::Matchers::ContainsSubstring("lamb_dicke")));
    }
    SECTION("wrong lamb_dicke row count") {
        const auto p = write_file(
            "shape.json", R"({"mode_freqs_mhz": [2.0, 2.1], "lamb_dicke": [[0.1, 0.1]]})");
        REQUIRE_THROWS_MATCHES(io::load_chain(p), validation_error,
                               Catch::Matchers::MessageMatches(
                                   Catch::Matchers::ContainsSubstring("lamb_dicke")));
    }
    SECTION("non increasing frequencies") {
        const auto p = write_file(
            "order.json",
            R"({"mode_freqs_mhz": [2.1, 2.0], "lamb_dicke": [[0.1, 0.1], [0.1, 0.1]]})");
        REQUIRE_THROWS_MATCHES(io::load_chain(p), validation_error,
                               Catch::Matchers::MessageMatches(
                                   Catch::Matchers::ContainsSubstring("increasing")));
    }
    SECTION("unknown key") {
        const auto p = write_file(
            "extra.json",
            R"({"mode_freqs_mhz": [2.0], "lamb_dicke": [[0.1]], "lable": "typo"})");
        REQUIRE_THROWS_MATCHES(io::load_chain(p), validation_error,
                               Catch::Matchers::MessageMatches(
                                   Catch::Matchers::ContainsSubstring("lable")));
    }
    SECTION("missing file names the path") {
        REQUIRE_THROWS_MATCHES(io::load_chain("/nonexistent/chain.json"), validation_error,
                               Catch::Matchers::MessageMatches(
                                   Catch::Matchers::ContainsSubstring("/nonexistent/chain.json")));
    }
}

TEST_CASE("chain invariants") {
    IonChain c = sample_chain();
    SECTION("eta magnitude below one") {
        c.lamb_dicke(2, 2) = 1.0;
        REQUIRE_THROWS_AS(c.validate(), validation_error);
    }
    SECTION("fewer modes than ions is accepted") {
        c.mode_freqs.conservativeResize(3);
        c.lamb_dicke.conservativeResize(3, 5);
        REQUIRE_NOTHROW(c.validate());
    }
    SECTION("more modes than ions is rejected") {
        c.lamb_dicke.conservativeResize(5, 4);
        REQUIRE_THROWS_AS(c.validate(), validation_error);
    }
}

TEST_CASE("gate spec invariants") {
    GateSpec g;
    g.ion_i = 2;
    g.ion_j = 2;
    REQUIRE_THROWS_AS(g.validate(sample_chain()), validation_error);
    g.ion_j = 9;
    REQUIRE_THROWS_AS(g.validate(sample_chain()), validation_error);
    g.ion_j = 3;
    g.chi_target = 0.0;
    REQUIRE_THROWS_AS(g.validate(sample_chain()), validation_error);
    g.chi_target = pi / 3.9;  // above pi/4
    REQUIRE_THROWS_AS(g.validate(sample_chain()), validation_error);
    g.chi_target = -pi / 8;
    REQUIRE_NOTHROW(g.validate(sample_chain()));
}

TEST_CASE("generated chain has orthonormal mode vectors") {
    const IonChain c = generate_chain(5, mhz_to_radps(2.48038), 0.088);
    REQUIRE(c.num_modes() == 5);
    const double pref2 = c.lamb_dicke.row(0).squaredNorm();
    const Eigen::MatrixXd gram = c.lamb_dicke * c.lamb_dicke.transpose() / pref2;
    const double resid = (gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff();
    REQUIRE(resid < 1e-10);
    REQUIRE(c.lamb_dicke.cwiseAbs().maxCoeff() == Catch::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("two ion chain couples both ions equally to the common mode") {
    const IonChain c = generate_chain(2, mhz_to_radps(2.5), 0.1);
    REQUIRE(c.num_modes() == 2);
    // transverse COM is the highest mode; its eta entries agree up to sign
    const double a = c.lamb_dicke(1, 0), b = c.lamb_dicke(1, 1);
    REQUIRE(std::min(std::abs(a - b), std::abs(a + b)) < 1e-12);
}

TEST_CASE("fifty ion chain lands in the published spacing regime") {
    const IonChain c = generate_chain(50, mhz_to_radps(2.48038), 0.088);
    REQUIRE(c.num_modes() == 50);
    const double span_hz = radps_to_mhz(c.mode_freqs(49) - c.mode_freqs(0)) * 1e6;
    const double mean_spacing_khz = span_hz / 49.0 / 1e3;
    REQUIRE(mean_spacing_khz > 1.46 / 3.0);
    REQUIRE(mean_spacing_khz < 1.46 * 3.0);
}

TEST_CASE("chain generator rejects bad arguments") {
    REQUIRE_THROWS_AS(generate_chain(1, mhz_to_radps(2.5), 0.1), validation_error);
    REQUIRE_THROWS_AS(generate_chain(5, mhz_to_radps(2.5), 1.2), validation_error);
    REQUIRE_THROWS_AS(generate_chain(5, -1.0, 0.1), validation_error);
    // too-tight spacing drives the chain through the zigzag transition
    ChainGenOptions opts;
    opts.spacing_um = 0.3;
    REQUIRE_THROWS_AS(generate_chain(20, mhz_to_radps(2.5), 0.3, opts), numerical_error);
}

TEST_CASE("pulse parity symmetry about the midpoint") {
    std::mt19937 rng(42);
    std::normal_distribution<double> dist;
    const double tau = us_to_s(120.0);
    for (Parity parity : {Parity::negative, Parity::positive}) {
        FourierPulse pulse;
        pulse.basis = PulseBasis{tau, 60, parity};
        pulse.amplitudes.resize(60);
        for (int n = 0; n < 60; ++n) pulse.amplitudes(n) = dist(rng);
        const double tol = 1e-12 * pulse.amplitudes.cwiseAbs().maxCoeff() * 60;
        const double sgn = parity == Parity::negative ? 1.0 : -1.0;
        double worst = 0.0;
        for (int k = 0; k <= 400; ++k) {
            const double s = 0.5 * tau * k / 400.0;
            worst = std::max(worst,
                             std::abs(pulse.eval(0.5 * tau + s) + sgn * pulse.eval(0.5 * tau - s)));
        }
        INFO(to_string(parity));
        REQUIRE(worst < tol);
        REQUIRE(std::abs(pulse.eval(0.0)) < tol);
        REQUIRE(std::abs(pulse.eval(tau)) < tol);
    }
}

TEST_CASE("basis and stabilization specs validate") {
    REQUIRE_THROWS_AS((PulseBasis{0.0, 100, Parity::negative}.validate()), validation_error);
    REQUIRE_THROWS_AS((PulseBasis{1e-4, 0, Parity::negative}.validate()), validation_error);
    REQUIRE_THROWS_AS((StabilizationSpec{-1, 0}.validate()), validation_error);
    REQUIRE_THROWS_AS((StabilizationSpec{0, -2}.validate()), validation_error);
    REQUIRE_NOTHROW((StabilizationSpec{3, 4}.validate()));
    REQUIRE_THROWS_AS(parity_from_string("diagonal"), validation_error);
}

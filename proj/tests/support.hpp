#pragma once

// Shared fixtures and independent oracles for the test suites. The
// quadrature oracles here deliberately avoid the library's closed-form
// and panel-integration code paths.

#include <cmath>
#include <complex>
#include <deque>
#include <functional>
#include <random>

#include "ionpulse/analysis.hpp"
#include "ionpulse/chain.hpp"
#include "ionpulse/pulse.hpp"
#include "ionpulse/quad.hpp"
#include "ionpulse/synthesis.hpp"

namespace testsupport {

using namespace ionpulse;

/// Five-ion sample chain (transverse modes, MHz) used throughout.
inline const IonChain& sample_chain() {
    static const IonChain chain = [] {
        IonChain c;
        c.mode_freqs.resize(5);
        const double f[5] = {2.26870, 2.33944, 2.39955, 2.44820, 2.48038};
        for (int p = 0; p < 5; ++p) c.mode_freqs(p) = mhz_to_radps(f[p]);
        const double eta[5][5] = {
            {0.01248, -0.05479, 0.08428, -0.05440, 0.01243},
            {0.03474, -0.07263, -0.00002, 0.07306, -0.03514},
            {0.06091, -0.03150, -0.05848, -0.03098, 0.06094},
            {0.07149, 0.03406, -0.00021, -0.03459, -0.07163},
            {-0.04996, -0.05016, -0.05013, -0.04991, -0.04946}};
        c.lamb_dicke.resize(5, 5);
        for (int p = 0; p < 5; ++p)
            for (int i = 0; i < 5; ++i) c.lamb_dicke(p, i) = eta[p][i];
        c.label = "five-ion sample";
        c.validate();
        return c;
    }();
    return chain;
}

inline GateSpec pair13() {
    GateSpec g;
    g.ion_i = 1;
    g.ion_j = 3;
    return g;
}

/// Cached synthesis results keyed by the few configurations the suites
/// share; avoids re-running the eigensolves per test case.
inline const OptimizationResult& cached_pulse(double tau_us, int na, Parity parity, int order) {
    struct Key {
        double tau_us;
        int na;
        Parity parity;
        int order;
        bool operator==(const Key& o) const {
            return tau_us == o.tau_us && na == o.na && parity == o.parity && order == o.order;
        }
    };
    static std::deque<std::pair<Key, OptimizationResult>> cache;
    const Key key{tau_us, na, parity, order};
    for (const auto& entry : cache) {
        if (entry.first == key) return entry.second;
    }
    PulseBasis basis{us_to_s(tau_us), na, parity};
    cache.emplace_back(key, synthesize(sample_chain(), pair13(), basis,
                                       StabilizationSpec{order, 0}));
    return cache.back().second;
}

/// Adaptive-Simpson oracle for int_0^tau f(t) dt.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
    return quad::adaptive_simpson(f, a, b, tol);
}

inline std::complex<double> integrate_c(const std::function<std::complex<double>(double)>& f,
                                        double a, double b, double tol = 1e-13) {
    const double re = quad::adaptive_simpson([&](double t) { return f(t).real(); }, a, b, tol);
    const double im = quad::adaptive_simpson([&](double t) { return f(t).imag(); }, a, b, tol);
    return {re, im};
}

inline double rel_err(double got, double want, double floor_eps = 0.0) {
    return std::abs(got - want) / (std::abs(want) + floor_eps);
}

/// Rounds to three significant figures, for the published-table checks.
inline double round3(double x) {
    if (x == 0.0) return 0.0;
    const double scale = std::pow(10.0, 2 - std::floor(std::log10(std::abs(x))));
    return std::round(x * scale) / scale;
}

}  // namespace testsupport

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "ionpulse/units.hpp"

namespace ionpulse::quad {

/// 16-node Gauss-Legendre rule on [-1, 1], nodes ascending.
struct Gauss16 {
    Eigen::Matrix<double, 16, 1> x;
    Eigen::Matrix<double, 16, 1> w;

    Gauss16() {
        // Newton iteration on Legendre roots.
        for (int i = 0; i < 8; ++i) {
            double z = std::cos(pi * (i + 0.75) / 16.5);
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = 1.0, p2 = 0.0;
                for (int k = 1; k <= 16; ++k) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * k - 1.0) * z * p2 - (k - 1.0) * p3) / k;
                }
                pp = 16.0 * (z * p1 - p2) / (z * z - 1.0);
                const double dz = -p1 / pp;
                z += dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x(i) = -z;
            x(15 - i) = z;
            w(i) = w(15 - i) = 2.0 / ((1.0 - z * z) * pp * pp);
        }
    }
};

inline const Gauss16& gauss16() {
    static const Gauss16 g;
    return g;
}

/// Number of equal panels so that each spans at most a quarter period of
/// an oscillation at angular frequency w_fast.
inline int panel_count(double w_fast, double tau) {
    const int n = static_cast<int>(std::ceil(tau * 2.0 * w_fast / pi));
    return n < 1 ? 1 : n;
}

/// Composite 16-node Gauss-Legendre integral of f over [0, tau].
template <typename F>
double composite(F&& f, double tau, int panels) {
    const auto& g = gauss16();
    const double h = tau / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        double acc = 0.0;
        for (int k = 0; k < 16; ++k) acc += g.w(k) * f(mid + 0.5 * h * g.x(k));
        total += acc * 0.5 * h;
    }
    return total;
}

/// Adaptive Simpson with absolute tolerance; used as an independent check
/// and as a fallback in tests.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol, int depth = 60) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    struct Rec {
        static double go(const F& f, double a, double m, double b, double fa, double fm,
                         double fb, double whole, double tol, int depth) {
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
                return left + right + (left + right - whole) / 15.0;
            }
            return go(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   go(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec::go(f, a, m, b, fa, fm, fb, whole, tol, depth);
}

/// Maps function values at the 16 Gauss nodes of a panel to the partial
/// integrals from the panel's left edge to each node (reference scale;
/// multiply by the half-width). Exact for polynomials of degree <= 15.
inline const Eigen::Matrix<double, 16, 16>& partial_integral_map() {
    static const Eigen::Matrix<double, 16, 16> W = [] {
        const auto& g = gauss16();
        Eigen::Matrix<double, 17 + 1, 16> P;  // Legendre values up to degree 17
        for (int j = 0; j < 16; ++j) {
            P(0, j) = 1.0;
            P(1, j) = g.x(j);
            for (int m = 1; m <= 16; ++m) {
                P(m + 1, j) = ((2.0 * m + 1.0) * g.x(j) * P(m, j) - m * P(m - 1, j)) / (m + 1.0);
            }
        }
        // values -> Legendre coefficients (degree <= 15 exact under Gauss16)
        Eigen::Matrix<double, 16, 16> C;
        for (int m = 0; m < 16; ++m) {
            for (int j = 0; j < 16; ++j) C(m, j) = (2.0 * m + 1.0) / 2.0 * g.w(j) * P(m, j);
        }
        // coefficients -> partial integrals int_{-1}^{x_j} P_m
        Eigen::Matrix<double, 16, 16> E;
        for (int j = 0; j < 16; ++j) {
            E(j, 0) = g.x(j) + 1.0;
            for (int m = 1; m < 16; ++m) {
                E(j, m) = (P(m + 1, j) - P(m - 1, j)) / (2.0 * m + 1.0);
            }
        }
        return (E * C).eval();
    }();
    return W;
}

}  // namespace ionpulse::quad

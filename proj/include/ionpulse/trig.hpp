#pragma once

#include <cmath>

namespace ionpulse::trig {

// Closed forms for products of sinusoids integrated over [0, tau] or a
// segment [a, b]. The half-angle product forms avoid cancellation; series
// limits cover x -> 0.

/// sin(x*tau)/x, limit tau as x -> 0.
inline double sinc_int(double x, double tau) {
    const double xt = x * tau;
    if (std::abs(xt) < 1e-8) {
        return tau * (1.0 - xt * xt / 6.0 * (1.0 - xt * xt / 20.0));
    }
    return std::sin(xt) / x;
}

/// (1 - cos(x*tau))/x = 2 sin^2(x*tau/2)/x, limit 0 as x -> 0.
inline double vers_int(double x, double tau) {
    const double xt = x * tau;
    if (std::abs(xt) < 1e-8) {
        return x * tau * tau * 0.5 * (1.0 - xt * xt / 12.0);
    }
    const double s = std::sin(0.5 * xt);
    return 2.0 * s * s / x;
}

/// int_0^tau sin(a t) sin(b t) dt
inline double iss(double a, double b, double tau) {
    return 0.5 * (sinc_int(a - b, tau) - sinc_int(a + b, tau));
}

/// int_0^tau sin(a t) cos(b t) dt
inline double isc(double a, double b, double tau) {
    return 0.5 * (vers_int(a + b, tau) + vers_int(a - b, tau));
}

/// int_a^b cos(x t) dt = (sin(xb) - sin(xa))/x, stable for all x.
inline double seg_cos(double x, double a, double b) {
    const double h = 0.5 * x * (b - a);
    if (std::abs(h) < 1e-8) {
        return (b - a) * std::cos(0.5 * x * (a + b)) * (1.0 - h * h / 6.0);
    }
    return 2.0 * std::cos(0.5 * x * (a + b)) * std::sin(h) / x;
}

/// int_a^b sin(x t) dt = (cos(xa) - cos(xb))/x, stable for all x.
inline double seg_sin(double x, double a, double b) {
    const double h = 0.5 * x * (b - a);
    if (std::abs(h) < 1e-8) {
        return (b - a) * std::sin(0.5 * x * (a + b)) * (1.0 - h * h / 6.0);
    }
    return 2.0 * std::sin(0.5 * x * (a + b)) * std::sin(h) / x;
}

/// int_a^b sin(u t) sin(v t) dt
inline double seg_ss(double u, double v, double a, double b) {
    return 0.5 * (seg_cos(u - v, a, b) - seg_cos(u + v, a, b));
}

/// int_a^b sin(u t) cos(v t) dt
inline double seg_sc(double u, double v, double a, double b) {
    return 0.5 * (seg_sin(u + v, a, b) + seg_sin(u - v, a, b));
}

/// int_a^b cos(u t) cos(v t) dt
inline double seg_cc(double u, double v, double a, double b) {
    return 0.5 * (seg_cos(u - v, a, b) + seg_cos(u + v, a, b));
}

}  // namespace ionpulse::trig

#pragma once

#include <array>
#include <cmath>
#include <string>

#include "ionpulse/errors.hpp"
#include "ionpulse/units.hpp"

namespace ionpulse {

/// One gate of the broadband compensation sequence: an XX rotation,
/// conjugated on the second qubit by Rz(z_conjugation) when nonzero.
struct SkGate {
    std::string label;
    double xx_angle = 0.0;
    double z_conjugation = 0.0;
};

/// Three-gate first-order compensation of a scaling error in the gate
/// angle: applying gates[0], then gates[1], then gates[2], each with the
/// common relative error, reproduces XX(theta) to second order.
struct SkSequence {
    double phi_sk = 0.0;
    std::array<SkGate, 3> gates;
};

inline SkSequence sk_compensation(double theta) {
    if (std::abs(theta) > 8.0 * pi) {
        throw validation_error("theta: |theta| <= 8 pi required for the corrector angle");
    }
    SkSequence seq;
    seq.phi_sk = std::acos(-theta / (8.0 * pi));
    seq.gates[0] = {"xx", theta, 0.0};
    seq.gates[1] = {"xx_conj", 4.0 * pi, seq.phi_sk};
    seq.gates[2] = {"xx_conj", 4.0 * pi, -seq.phi_sk};
    return seq;
}

}  // namespace ionpulse

#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "types.hpp"

namespace omdce {

// Model frequencies and couplings, all in units of omega_1 (hbar = 1).
// omega_1 stays an explicit field so formulas keep their shape, but the
// bundled configurations always set it to 1.
struct SystemParams {
    double omega_c = 1.0;
    double omega_1 = 1.0;
    double omega_2 = 1.0;
    double g_1 = 0.0;
    double g_2 = 0.0;

    double beta1() const { return g_1 / omega_1; }
    double beta2() const { return g_2 / omega_2; }

    void validate() const {
        if (!(omega_c > 0.0) || !(omega_1 > 0.0) || !(omega_2 > 0.0))
            throw config_error("all mode frequencies must be positive");
        if (g_1 < 0.0 || g_2 < 0.0)
            throw config_error("couplings must be non-negative");
        // the displaced-oscillator picture only makes sense for small
        // displacements per photon
        if (std::abs(beta1()) >= 1.0 || std::abs(beta2()) >= 1.0)
            throw config_error("g_i/omega_i must stay below 1");
    }
};

enum class Target { mirror1, mirror2 };
enum class DriveKind { none, continuous, gaussian_pulse };

// F(t)(b_i + b_i^dag) acting on one mirror in the lab frame:
//   continuous:     F(t) = A cos(w_d t)
//   gaussian_pulse: F(t) = A G(t - t0) cos(w_d t), G a normalized Gaussian
struct DriveSpec {
    Target target = Target::mirror1;
    DriveKind kind = DriveKind::none;
    double amplitude = 0.0;
    double omega_d = 1.0;
    double t0 = 0.0;
    double sigma = 1.0;

    void validate() const {
        if (amplitude < 0.0)
            throw config_error("drive amplitude must be non-negative");
        if (kind == DriveKind::gaussian_pulse && !(sigma > 0.0))
            throw config_error("pulse sigma must be positive");
    }
};

// Smoothed frequency step on mirror 2: f(t) * b2^dag b2 with f ramping
// from 0 to delta over a quarter period pi/(2 Omega_s) starting at t0,
// and optionally back down starting at t_f (t_f = inf keeps the plateau).
struct ModulationSpec {
    bool enabled = false;
    double delta = 0.0;
    double t0 = 0.0;
    double t_f = std::numeric_limits<double>::infinity();
    double Omega_s = 0.2;

    void validate() const {
        if (enabled && !(Omega_s > 0.0))
            throw config_error("modulation smoothing frequency must be positive");
    }
};

struct BathSpec {
    double gamma_1 = 0.0;
    double gamma_2 = 0.0;
    double kappa = 0.0;
    double temperature = 0.0; // k_B T in units of omega_1

    void validate() const {
        if (gamma_1 < 0.0 || gamma_2 < 0.0 || kappa < 0.0)
            throw config_error("loss rates must be non-negative");
        if (temperature < 0.0)
            throw config_error("bath temperature must be non-negative");
    }
};

} // namespace omdce

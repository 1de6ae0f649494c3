#pragma once

#include <cmath>

#include "hilbert.hpp"
#include "params.hpp"
#include "types.hpp"

namespace omdce {

// H0 = wc a^dag a + w1 b1^dag b1 + w2 b2^dag b2, diagonal in the Fock basis.
inline Mat build_H0(const HilbertSpace& s, const SystemParams& p) {
    Mat h = Mat::Zero(s.dim(), s.dim());
    for (int i = 0; i < s.dim(); ++i) {
        auto [k, q, n] = s.unflat(i);
        h(i, i) = p.omega_c * n + p.omega_1 * k + p.omega_2 * q;
    }
    return h;
}

namespace detail {

// g1(b1 + b1^dag) + g2(b2 + b2^dag), the mirror quadrature the cavity couples to
inline Mat mirror_quadrature(const HilbertSpace& s, const SystemParams& p) {
    SpMat b1 = annihilator(s, Mode::mirror1);
    SpMat b2 = annihilator(s, Mode::mirror2);
    SpMat x = p.g_1 * (b1 + SpMat(b1.adjoint())) + p.g_2 * (b2 + SpMat(b2.adjoint()));
    return Mat(x);
}

} // namespace detail

// Photon-number conserving optomechanical coupling a^dag a * sum_i g_i(b_i + b_i^dag)
inline Mat build_V_om(const HilbertSpace& s, const SystemParams& p) {
    SpMat a = annihilator(s, Mode::cavity);
    Mat nphot = Mat(SpMat(a.adjoint()) * a);
    return nphot * detail::mirror_quadrature(s, p);
}

// Counter-rotating part kept by the paper's Hamiltonian: photon pairs are
// created or destroyed while a mirror gains or loses one phonon.
inline Mat build_V_DCE(const HilbertSpace& s, const SystemParams& p) {
    SpMat a = annihilator(s, Mode::cavity);
    SpMat aa = a * a;
    Mat pair = 0.5 * Mat(aa + SpMat(aa.adjoint()));
    return pair * detail::mirror_quadrature(s, p);
}

inline Mat build_H(const HilbertSpace& s, const SystemParams& p) {
    return build_H0(s, p) + build_V_om(s, p) + build_V_DCE(s, p);
}

// Scalar force F(t) multiplying (b_i + b_i^dag).
inline double drive_envelope(const DriveSpec& d, double t) {
    switch (d.kind) {
    case DriveKind::none:
        return 0.0;
    case DriveKind::continuous:
        return d.amplitude * std::cos(d.omega_d * t);
    case DriveKind::gaussian_pulse: {
        const double x = (t - d.t0) / d.sigma;
        const double gauss = std::exp(-0.5 * x * x) / (d.sigma * std::sqrt(2.0 * M_PI));
        return d.amplitude * gauss * std::cos(d.omega_d * t);
    }
    }
    return 0.0;
}

inline Mat drive_term(const HilbertSpace& s, const DriveSpec& d, double t) {
    Mode m = d.target == Target::mirror1 ? Mode::mirror1 : Mode::mirror2;
    SpMat b = annihilator(s, m);
    return drive_envelope(d, t) * Mat(b + SpMat(b.adjoint()));
}

// Smoothed step: sin^2 ramp of duration pi/(2 Omega_s) up to delta at t0,
// flat plateau, mirrored ramp back down at t_f.
inline double modulation_f(const ModulationSpec& m, double t) {
    if (!m.enabled || m.delta == 0.0) return 0.0;
    const double ramp = M_PI / (2.0 * m.Omega_s);
    if (t < m.t0) return 0.0;
    if (t < m.t0 + ramp) {
        double s = std::sin(m.Omega_s * (t - m.t0));
        return m.delta * s * s;
    }
    if (t < m.t_f) return m.delta;
    if (t < m.t_f + ramp) {
        double c = std::cos(m.Omega_s * (t - m.t_f));
        return m.delta * c * c;
    }
    return 0.0;
}

inline Mat modulation_term(const HilbertSpace& s, const ModulationSpec& m, double t) {
    const double f = modulation_f(m, t);
    Mat h = Mat::Zero(s.dim(), s.dim());
    if (f == 0.0) return h;
    for (int i = 0; i < s.dim(); ++i) {
        auto [k, q, n] = s.unflat(i);
        (void)k; (void)n;
        h(i, i) = f * q;
    }
    return h;
}

} // namespace omdce

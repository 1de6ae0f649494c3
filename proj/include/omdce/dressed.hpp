#pragma once

#include "hilbert.hpp"
#include "model.hpp"
#include "spectrum.hpp"
#include "types.hpp"

namespace omdce {

// Quadrature o + o^dag of one bare mode, rotated into the eigenbasis.
inline Mat quadrature_in_eigenbasis(const EigenSystem& es, const HilbertSpace& s, Mode mode) {
    SpMat o = annihilator(s, mode);
    Mat x = Mat(o + SpMat(o.adjoint()));
    return es.states.adjoint() * x * es.states;
}

// Keep only the energy-lowering transitions of a quadrature written in the
// (ascending) eigenbasis: entry (m, n) survives when E_n exceeds E_m by more
// than the degeneracy tolerance. The result annihilates the ground state.
inline Mat energy_lowering_part(const RVec& energies, const Mat& S) {
    Mat b = Mat::Zero(S.rows(), S.cols());
    for (int n = 0; n < int(S.cols()); ++n)
        for (int m = 0; m < n; ++m)
            if (energies(n) - energies(m) > 1e-10) b(m, n) = S(m, n);
    return b;
}

// Physical (dressed) ladder operators: O = sum_{E_n > E_m} <psi_m|(o+o^dag)|psi_n>
// |psi_m><psi_n|. Unlike the bare o these commute with nothing simple, but
// their number operators count real excitations on top of the true ground
// state, which contains virtual photons and phonons.
struct DressedOperatorSet {
    Mat A_phys;
    Mat B1_phys;
    Mat B2_phys;
};

inline DressedOperatorSet dressed_operators(const EigenSystem& es, const HilbertSpace& s) {
    DressedOperatorSet set;
    set.A_phys = energy_lowering_part(es.energies, quadrature_in_eigenbasis(es, s, Mode::cavity));
    set.B1_phys = energy_lowering_part(es.energies, quadrature_in_eigenbasis(es, s, Mode::mirror1));
    set.B2_phys = energy_lowering_part(es.energies, quadrature_in_eigenbasis(es, s, Mode::mirror2));
    return set;
}

} // namespace omdce

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <complex>
#ifndef lapack_complex_double
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "model.hpp"
#include "params.hpp"
#include "types.hpp"

namespace omdce {

// Energies ascending (E_j > E_k for j > k), eigenvectors as columns of
// `states` in the same order.
struct EigenSystem {
    RVec energies;
    Mat states;
    SystemParams params;

    int dim() const { return int(energies.size()); }
};

namespace detail {

// zheevd leaves the order inside a degenerate cluster and the overall phase
// of every column arbitrary. Pin both so that repeated runs, and the dressed
// operators built on top, come out bit-identical: clusters are sorted by the
// basis index of each state's dominant component, and each column is rotated
// so its dominant component is real positive.
inline void canonicalize(EigenSystem& es) {
    const int n = es.dim();
    auto dominant = [&](int col) {
        int r = 0;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            double a = std::norm(es.states(i, col));
            if (a > best + 1e-14) { best = a; r = i; }
        }
        return r;
    };
    int i = 0;
    while (i < n) {
        int j = i + 1;
        while (j < n && es.energies(j) - es.energies(i) < 1e-10) ++j;
        if (j - i > 1) {
            std::vector<std::pair<int, int>> key; // (dominant basis index, column)
            for (int c = i; c < j; ++c) key.emplace_back(dominant(c), c);
            std::sort(key.begin(), key.end());
            Mat block(n, j - i);
            RVec en(j - i);
            for (int c = 0; c < j - i; ++c) {
                block.col(c) = es.states.col(key[c].second);
                en(c) = es.energies(key[c].second);
            }
            es.states.middleCols(i, j - i) = block;
            es.energies.segment(i, j - i) = en;
        }
        i = j;
    }
    for (int c = 0; c < n; ++c) {
        cxd z = es.states(dominant(c), c);
        double a = std::abs(z);
        if (a > 0.0) es.states.col(c) *= std::conj(z) / a;
    }
}

} // namespace detail

inline EigenSystem diagonalize(const Mat& H, const SystemParams& p = {}) {
    const int n = int(H.rows());
    if (H.cols() != n)
        throw numeric_error("diagonalize needs a square matrix");
    const double scale = H.cwiseAbs().maxCoeff();
    const double herm = (H - H.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10 * std::max(scale, 1.0))
        throw numeric_error("matrix is not Hermitian (max asymmetry "
                            + std::to_string(herm) + ")");

    EigenSystem es;
    es.params = p;
    es.states = H; // zheevd overwrites the input with the eigenvectors
    es.energies.resize(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                     es.states.data(), n, es.energies.data());
    if (info != 0)
        throw numeric_error("zheevd failed to converge (info="
                            + std::to_string(info) + ", dim=" + std::to_string(n) + ")");
    detail::canonicalize(es);
    return es;
}

// Closed-form spectrum of H0 + V_om after the polaron transformation:
// E = wc n - sum_i (g_i^2/w_i) n^2 + w1 k1 + w2 k2.
inline double analytic_om_spectrum(const SystemParams& p, int k1, int k2, int n) {
    if (k1 < 0 || k2 < 0 || n < 0)
        throw numeric_error("negative quantum number");
    const double shift = (p.g_1 * p.g_1 / p.omega_1 + p.g_2 * p.g_2 / p.omega_2);
    return p.omega_c * n - shift * double(n) * double(n)
           + p.omega_1 * k1 + p.omega_2 * k2;
}

struct SweepResult {
    std::vector<double> sweep_values;
    // level_curves[j][i] = E_label_j - E_0 at sweep point i
    std::vector<std::vector<double>> level_curves;
    // adiabatic_labels[i][j] = eigenindex carrying label j at point i
    std::vector<std::vector<int>> adiabatic_labels;
    bool tracking_degraded = false; // grid too coarse somewhere, energy-order fallback used
};

// Follow the lowest n_levels levels across an omega_2 grid, matching states
// between neighbouring points by eigenvector overlap so that each curve keeps
// its identity through anticrossings.
inline SweepResult sweep_levels(const HilbertSpace& s, SystemParams p,
                                const std::vector<double>& omega2_grid,
                                int n_levels = 12) {
    if (omega2_grid.size() < 2)
        throw config_error("sweep grid needs at least two points");
    if (!std::is_sorted(omega2_grid.begin(), omega2_grid.end()))
        throw config_error("sweep grid must be ascending");
    n_levels = std::min(n_levels, s.dim());

    SweepResult out;
    out.sweep_values = omega2_grid;
    out.level_curves.assign(n_levels, {});
    out.adiabatic_labels.reserve(omega2_grid.size());

    Mat prev_states; // tracked columns from the previous point, label order
    for (size_t i = 0; i < omega2_grid.size(); ++i) {
        p.omega_2 = omega2_grid[i];
        p.validate();
        EigenSystem es = diagonalize(build_H(s, p), p);

        std::vector<int> labels(n_levels);
        if (i == 0) {
            for (int j = 0; j < n_levels; ++j) labels[j] = j;
        } else {
            // greedy max-overlap assignment between old labels and the
            // lowest candidate eigenstates, striking out used pairs
            const int n_cand = std::min(2 * n_levels, s.dim());
            Eigen::MatrixXd ov =
                (prev_states.adjoint() * es.states.leftCols(n_cand)).cwiseAbs();
            std::vector<bool> row_used(n_levels, false), col_used(n_cand, false);
            std::vector<double> matched(n_levels, 0.0);
            for (int pass = 0; pass < n_levels; ++pass) {
                int bi = -1, bj = -1;
                double best = -1.0;
                for (int r = 0; r < n_levels; ++r) {
                    if (row_used[r]) continue;
                    for (int c = 0; c < n_cand; ++c) {
                        if (col_used[c]) continue;
                        if (ov(r, c) > best) { best = ov(r, c); bi = r; bj = c; }
                    }
                }
                row_used[bi] = true;
                col_used[bj] = true;
                labels[bi] = bj;
                matched[bi] = best;
            }
            if (*std::min_element(matched.begin(), matched.end()) < 0.5) {
                out.tracking_degraded = true;
                for (int j = 0; j < n_levels; ++j) labels[j] = j;
            }
        }

        prev_states.resize(s.dim(), n_levels);
        for (int j = 0; j < n_levels; ++j) {
            out.level_curves[j].push_back(es.energies(labels[j]) - es.energies(0));
            prev_states.col(j) = es.states.col(labels[j]);
        }
        out.adiabatic_labels.push_back(labels);
    }
    return out;
}

struct SplittingReport {
    double omega2_min = 0.0;
    double gap = 0.0;
    std::pair<int, int> level_pair{0, 0};
    // overlap of each hybridized eigenstate with its best match among
    // (|b1> +- |b2>)/sqrt(2) built from the selector states
    std::array<double, 2> hybridization_check{0.0, 0.0};
};

namespace detail {

// Gap between the two eigenstates carrying the most weight on the selector
// bare states (summed over the selector), plus their indices.
struct GapPoint {
    double gap;
    int lo, hi;
    EigenSystem es;
};

inline GapPoint gap_at(const HilbertSpace& s, SystemParams p, double omega2,
                       const std::vector<int>& bare_selector) {
    p.omega_2 = omega2;
    p.validate();
    EigenSystem es = diagonalize(build_H(s, p), p);
    std::vector<std::pair<double, int>> weight(es.dim());
    for (int j = 0; j < es.dim(); ++j) {
        double w = 0.0;
        for (int b : bare_selector) w += std::norm(es.states(b, j));
        weight[j] = {w, j};
    }
    std::sort(weight.begin(), weight.end(),
              [](auto& a, auto& b) { return a.first > b.first; });
    int j0 = weight[0].second, j1 = weight[1].second;
    if (j0 > j1) std::swap(j0, j1);
    return {es.energies(j1) - es.energies(j0), j0, j1, std::move(es)};
}

} // namespace detail

// Coarse scan over the bracket followed by golden-section refinement of the
// avoided-crossing gap. The level pair is re-selected at every omega_2 by
// bare-state overlap, so other levels crossing through do not confuse it.
inline SplittingReport find_min_splitting(const HilbertSpace& s, const SystemParams& p,
                                          const std::vector<int>& bare_selector,
                                          double omega2_lo, double omega2_hi,
                                          int coarse_points = 31) {
    if (!(omega2_hi > omega2_lo))
        throw config_error("empty omega_2 bracket");
    if (bare_selector.size() < 2)
        throw config_error("level-pair selector needs at least two bare states");

    auto gap_fn = [&](double w2) { return detail::gap_at(s, p, w2, bare_selector); };

    int m = 0;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> xs(coarse_points);
    for (int i = 0; i < coarse_points; ++i) {
        xs[i] = omega2_lo + (omega2_hi - omega2_lo) * i / double(coarse_points - 1);
        double g = gap_fn(xs[i]).gap;
        if (g < best) { best = g; m = i; }
    }
    if (m == 0 || m == coarse_points - 1)
        throw resonance_error("gap minimum sits on the bracket edge ["
                              + std::to_string(omega2_lo) + ", "
                              + std::to_string(omega2_hi) + "]; widen the bracket");

    double a = xs[m - 1], b = xs[m + 1];
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = gap_fn(c).gap, fd = gap_fn(d).gap;
    while (b - a > 1e-6 * std::max(1.0, std::abs(a))) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a);
            fc = gap_fn(c).gap;
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a);
            fd = gap_fn(d).gap;
        }
    }

    SplittingReport rep;
    rep.omega2_min = 0.5 * (a + b);
    detail::GapPoint gp = gap_fn(rep.omega2_min);
    rep.gap = gp.gap;
    rep.level_pair = {gp.lo, gp.hi};

    // compare against the symmetric/antisymmetric combinations of the first
    // two selector states
    Vec plus = Vec::Zero(s.dim()), minus = Vec::Zero(s.dim());
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    plus(bare_selector[0]) = inv_sqrt2;
    plus(bare_selector[1]) = inv_sqrt2;
    minus(bare_selector[0]) = inv_sqrt2;
    minus(bare_selector[1]) = -inv_sqrt2;
    for (int which = 0; which < 2; ++which) {
        const auto& psi = gp.es.states.col(which == 0 ? gp.lo : gp.hi);
        double op = std::abs((plus.adjoint() * psi)(0, 0));
        double om = std::abs((minus.adjoint() * psi)(0, 0));
        rep.hybridization_check[which] = std::max(op, om);
    }
    return rep;
}

// Minimum one-phonon splitting as a function of g (g_1 = g_2 = g).
inline std::vector<std::pair<double, double>>
splitting_vs_coupling(const HilbertSpace& s, SystemParams p,
                      const std::vector<double>& g_grid,
                      double omega2_lo = 0.9, double omega2_hi = 1.1) {
    const std::vector<int> one_phonon{s.flat(1, 0, 0), s.flat(0, 1, 0)};
    std::vector<std::pair<double, double>> table;
    table.reserve(g_grid.size());
    for (double g : g_grid) {
        p.g_1 = g;
        p.g_2 = g;
        auto rep = find_min_splitting(s, p, one_phonon, omega2_lo, omega2_hi);
        table.emplace_back(g, rep.gap);
    }
    return table;
}

} // namespace omdce

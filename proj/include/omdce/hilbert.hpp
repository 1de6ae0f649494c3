#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "types.hpp"

namespace omdce {

// Truncated Fock space of cavity x mirror1 x mirror2. The flat index runs
// with the cavity slowest and mirror 2 fastest; a ket is written |k,q,n>
// with k phonons on mirror 1, q on mirror 2, n photons.
struct HilbertSpace {
    int n_cav = 8;
    int n_m1 = 8;
    int n_m2 = 8;

    int dim() const { return n_cav * n_m1 * n_m2; }

    int flat(int k, int q, int n) const {
        return (n * n_m1 + k) * n_m2 + q;
    }

    // returns {k, q, n}
    std::array<int, 3> unflat(int i) const {
        int q = i % n_m2;
        int r = i / n_m2;
        int k = r % n_m1;
        int n = r / n_m1;
        return {k, q, n};
    }

    bool operator==(const HilbertSpace& o) const {
        return n_cav == o.n_cav && n_m1 == o.n_m1 && n_m2 == o.n_m2;
    }
};

inline HilbertSpace make_space(int n_cav, int n_m1, int n_m2) {
    if (n_cav < 2 || n_m1 < 2 || n_m2 < 2)
        throw truncation_error("every mode needs at least two Fock states");
    return HilbertSpace{n_cav, n_m1, n_m2};
}

enum class Mode { cavity, mirror1, mirror2 };

// Lowering operator of one mode, embedded in the full tensor space.
inline SpMat annihilator(const HilbertSpace& s, Mode mode) {
    const int d = s.dim();
    SpMat m(d, d);
    std::vector<Eigen::Triplet<cxd>> trip;
    trip.reserve(d);
    for (int i = 0; i < d; ++i) {
        auto [k, q, n] = s.unflat(i);
        switch (mode) {
        case Mode::cavity:
            if (n > 0) trip.emplace_back(s.flat(k, q, n - 1), i, std::sqrt(double(n)));
            break;
        case Mode::mirror1:
            if (k > 0) trip.emplace_back(s.flat(k - 1, q, n), i, std::sqrt(double(k)));
            break;
        case Mode::mirror2:
            if (q > 0) trip.emplace_back(s.flat(k, q - 1, n), i, std::sqrt(double(q)));
            break;
        }
    }
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

namespace detail {

// Associated Laguerre L_n^m(x) by the three-term recurrence; factorial
// ratios would overflow long before the cutoffs used here.
inline double laguerre(int n, int m, double x) {
    if (n == 0) return 1.0;
    double lm1 = 1.0;
    double l = 1.0 + m - x;
    for (int j = 1; j < n; ++j) {
        double next = ((2.0 * j + 1.0 + m - x) * l - (j + m) * lm1) / (j + 1.0);
        lm1 = l;
        l = next;
    }
    return l;
}

} // namespace detail

// <k'| exp[alpha(b^dag - b)] |k> for real alpha. For k' >= k this is
//   sqrt(k!/k'!) alpha^(k'-k) e^(-alpha^2/2) L_k^(k'-k)(alpha^2);
// the k' < k case follows from the adjoint with alpha -> -alpha.
inline double displacement_overlap(int k_prime, int k, double alpha) {
    if (k_prime < 0 || k < 0)
        throw numeric_error("negative Fock index in displacement overlap");
    if (alpha == 0.0) return k_prime == k ? 1.0 : 0.0;
    if (k_prime < k) return displacement_overlap(k, k_prime, -alpha);
    const int d = k_prime - k;
    const double amp = std::exp(0.5 * (std::lgamma(k + 1.0) - std::lgamma(k_prime + 1.0))
                                + d * std::log(std::abs(alpha)) - 0.5 * alpha * alpha);
    const double sign = (alpha < 0.0 && (d % 2)) ? -1.0 : 1.0;
    return sign * amp * detail::laguerre(k, d, alpha * alpha);
}

// Truncated D(alpha)|k>. Throws when the truncation eats too much norm.
inline RVec displaced_fock_state(int k, double alpha, int cutoff) {
    if (k >= cutoff)
        throw truncation_error("displaced Fock index at or above cutoff");
    RVec v(cutoff);
    for (int j = 0; j < cutoff; ++j)
        v(j) = displacement_overlap(j, k, alpha);
    const double deficit = std::abs(1.0 - v.squaredNorm());
    if (deficit > 1e-6)
        throw truncation_error("displaced state loses " + std::to_string(deficit)
                               + " of its norm at cutoff " + std::to_string(cutoff));
    return v;
}

} // namespace omdce

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <fftw3.h>

#include "types.hpp"

namespace omdce {

struct Spectrum {
    std::vector<double> frequencies; // angular, units of omega_1
    std::vector<double> magnitudes;
};

// One-sided magnitude spectrum of a real series on a uniform time grid.
inline Spectrum fft_signal(const std::vector<double>& times,
                           const std::vector<double>& series) {
    const size_t n = times.size();
    if (n < 4 || series.size() != n)
        throw numeric_error("fft needs matching time and value arrays with at least 4 points");
    const double dt = times[1] - times[0];
    if (dt <= 0.0)
        throw numeric_error("fft time grid must be increasing");
    for (size_t i = 1; i < n; ++i)
        if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * dt)
            throw numeric_error("fft needs a uniform time grid; resample first (step changes at index "
                                + std::to_string(i) + ")");

    std::vector<double> in(series);
    std::vector<fftw_complex> out(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(int(n), in.data(), out.data(), FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    Spectrum sp;
    sp.frequencies.resize(n / 2 + 1);
    sp.magnitudes.resize(n / 2 + 1);
    const double dw = 2.0 * M_PI / (double(n) * dt);
    for (size_t k = 0; k <= n / 2; ++k) {
        sp.frequencies[k] = dw * double(k);
        sp.magnitudes[k] = std::hypot(out[k][0], out[k][1]);
    }
    return sp;
}

// Subtract a centered moving average (window about a third of the series,
// forced odd, edges padded with the end values). Slow drifts and decay
// envelopes otherwise bury the oscillation peaks under a wide lobe at zero
// frequency.
inline std::vector<double> detrend_boxcar(const std::vector<double>& y) {
    const int n = int(y.size());
    if (n < 3) return std::vector<double>(n, 0.0);
    const int w = std::max(3, (n / 3) | 1);
    const int h = w / 2;
    std::vector<double> pad;
    pad.reserve(n + 2 * h);
    pad.insert(pad.end(), h, y.front());
    pad.insert(pad.end(), y.begin(), y.end());
    pad.insert(pad.end(), h, y.back());
    std::vector<double> csum(pad.size() + 1, 0.0);
    for (size_t i = 0; i < pad.size(); ++i) csum[i + 1] = csum[i] + pad[i];
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = y[i] - (csum[i + w] - csum[i]) / double(w);
    return out;
}

// Index of the largest magnitude away from the zero-frequency bin.
inline int dominant_nonzero_bin(const Spectrum& sp) {
    int best = 1;
    for (int k = 2; k < int(sp.magnitudes.size()); ++k)
        if (sp.magnitudes[k] > sp.magnitudes[best]) best = k;
    return best;
}

} // namespace omdce

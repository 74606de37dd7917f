#include "crackle/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "crackle/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace crackle {

std::function<void(std::size_t)> scaler_fit_observer;

namespace {

// Two-pass mean with a correction pass; constant inputs give back the
// constant exactly, so their variance comes out as exactly zero.
double corrected_mean(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double residual = 0.0;
    for (double v : values) residual += v - mean;
    return mean + residual / n;
}

}  // namespace

double variance(const Window& window) {
    const auto& s = window.samples;
    const double mean = corrected_mean(s);
    double acc = 0.0;
    for (double v : s) {
        const double d = v - mean;
        acc += d * d;
    }
    return acc / static_cast<double>(s.size());
}

double amplitude_range(const Window& window) {
    const auto [lo, hi] = std::minmax_element(window.samples.begin(),
                                              window.samples.end());
    return *hi - *lo;
}

double sma_coarse(std::span<const double> signal) {
    if (signal.size() < 2) {
        throw DegenerateInputError("sma_coarse needs at least 2 samples, got " +
                                   std::to_string(signal.size()));
    }
    double acc = 0.0;
    for (std::size_t n = 1; n < signal.size(); ++n) {
        acc += std::abs(signal[n - 1] - signal[n]);
    }
    return acc;
}

double sma_fine(const Window& window, std::size_t subwindow_len,
                std::size_t subwindow_stride) {
    const auto& s = window.samples;
    if (subwindow_len < 2) {
        throw ParameterError("sma_fine sub-window length must be >= 2");
    }
    if (subwindow_stride < 1) {
        throw ParameterError("sma_fine stride must be >= 1");
    }
    if (subwindow_len > s.size()) {
        throw ParameterError("sma_fine sub-window length " +
                             std::to_string(subwindow_len) +
                             " exceeds window length " + std::to_string(s.size()));
    }
    double best = 0.0;
    for (std::size_t off = 0; off + subwindow_len <= s.size(); off += subwindow_stride) {
        best = std::max(best,
                        sma_coarse(std::span<const double>(s).subspan(off, subwindow_len)));
    }
    return best;
}

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Twiddle table for the last transform size used on this thread. Batch
// extraction reuses it across windows.
const std::vector<std::complex<double>>& twiddles_for(std::size_t n) {
    thread_local std::vector<std::complex<double>> table;
    thread_local std::size_t table_n = 0;
    if (table_n != n) {
        table.resize(n / 2);
        for (std::size_t j = 0; j < n / 2; ++j) {
            const double ang =
                -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
            table[j] = {std::cos(ang), std::sin(ang)};
        }
        table_n = n;
    }
    return table;
}

void fft_in_place(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    const auto& tw = twiddles_for(n);

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> w = tw[k * step];
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

}  // namespace

Spectrum dft_magnitudes(const Window& window) {
    const std::size_t n = window.samples.size();
    if (!is_power_of_two(n)) {
        throw TransformError("transform length " + std::to_string(n) +
                             " is not a power of two");
    }
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) {
        buf[i] = {window.samples[i], 0.0};
    }
    fft_in_place(buf);

    Spectrum spec;
    spec.magnitudes.resize(n);
    const std::size_t half = n / 2;
    for (std::size_t k = 0; k < n; ++k) {
        spec.magnitudes[(k + half) % n] = std::abs(buf[k]);
    }
    return spec;
}

double spectrum_mean(const Spectrum& spectrum) {
    if (spectrum.magnitudes.empty()) {
        throw DegenerateInputError("spectrum is empty");
    }
    // Summed in sorted order so the mean is bit-identical under any bin
    // rotation of the spectrum.
    std::vector<double> sorted(spectrum.magnitudes);
    std::sort(sorted.begin(), sorted.end());
    double acc = 0.0;
    for (double m : sorted) acc += m;
    return acc / static_cast<double>(sorted.size());
}

FeatureVector extract_features(const Window& window, const FeatureParams& params) {
    FeatureVector fv;
    fv.variance = variance(window);
    fv.range = amplitude_range(window);
    fv.sma_coarse = sma_coarse(window.samples);
    fv.sma_fine = sma_fine(window, params.sma_subwindow_len, params.sma_subwindow_stride);
    fv.spectrum_mean = spectrum_mean(dft_magnitudes(window));
    fv.scaled = false;
    return fv;
}

std::vector<FeatureVector> extract_features_batch(std::span<const Window> windows,
                                                  const FeatureParams& params,
                                                  Exec exec) {
    std::vector<FeatureVector> out(windows.size());
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < windows.size(); ++i) {
            out[i] = extract_features(windows[i], params);
        }
        return out;
    }

    // Exceptions must not escape the parallel region; keep the first one
    // (by lowest index, so failure reporting is schedule-independent).
    std::exception_ptr error;
    std::size_t error_index = windows.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(windows.size()); ++i) {
        try {
            out[static_cast<std::size_t>(i)] =
                extract_features(windows[static_cast<std::size_t>(i)], params);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(crackle_feature_error)
#endif
            {
                if (static_cast<std::size_t>(i) < error_index) {
                    error_index = static_cast<std::size_t>(i);
                    error = std::current_exception();
                }
            }
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

ScalerStats fit_scaler(std::span<const FeatureVector> training_features) {
    if (training_features.size() < 2) {
        throw InsufficientDataError("scaler needs at least 2 rows, got " +
                                    std::to_string(training_features.size()));
    }
    if (scaler_fit_observer) scaler_fit_observer(training_features.size());

    const double n = static_cast<double>(training_features.size());
    ScalerStats stats;
    std::vector<double> column(training_features.size());
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
        for (std::size_t i = 0; i < training_features.size(); ++i) {
            column[i] = training_features[i].values()[d];
        }
        stats.means[d] = corrected_mean(column);
        double acc = 0.0;
        for (double v : column) {
            const double diff = v - stats.means[d];
            acc += diff * diff;
        }
        stats.stds[d] = std::sqrt(acc / n);
    }
    return stats;
}

FeatureVector apply_scaler(const ScalerStats& stats, const FeatureVector& features) {
    const auto v = features.values();
    std::array<double, kFeatureCount> scaled{};
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
        scaled[d] = stats.stds[d] == 0.0 ? 0.0 : (v[d] - stats.means[d]) / stats.stds[d];
    }
    return FeatureVector::from_values(scaled, true);
}

std::vector<FeatureVector> apply_scaler(const ScalerStats& stats,
                                        std::span<const FeatureVector> features) {
    std::vector<FeatureVector> out;
    out.reserve(features.size());
    for (const auto& fv : features) out.push_back(apply_scaler(stats, fv));
    return out;
}

}  // namespace crackle

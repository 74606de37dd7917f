#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "crackle/audio.hpp"

namespace crackle {

inline constexpr std::size_t kFeatureCount = 5;
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "variance", "range", "sma_coarse", "sma_fine", "spectrum_mean"};

// The 5-dimensional descriptor of one window: four time-domain features and
// the mean of the magnitude spectrum. Dimension order is fixed and is the
// order used everywhere (persistence included).
struct FeatureVector {
    double variance = 0.0;
    double range = 0.0;
    double sma_coarse = 0.0;
    double sma_fine = 0.0;
    double spectrum_mean = 0.0;
    bool scaled = false;

    std::array<double, kFeatureCount> values() const {
        return {variance, range, sma_coarse, sma_fine, spectrum_mean};
    }

    static FeatureVector from_values(const std::array<double, kFeatureCount>& v,
                                     bool scaled_flag) {
        return FeatureVector{v[0], v[1], v[2], v[3], v[4], scaled_flag};
    }

    bool operator==(const FeatureVector&) const = default;
};

// Magnitude spectrum with the zero-frequency bin rotated to the center
// index (length/2).
struct Spectrum {
    std::vector<double> magnitudes;
};

// Per-dimension standardization statistics, fitted on training rows only.
struct ScalerStats {
    std::array<double, kFeatureCount> means{};
    std::array<double, kFeatureCount> stds{};
};

struct FeatureParams {
    std::size_t sma_subwindow_len = 256;
    std::size_t sma_subwindow_stride = 128;
};

// --- individual features --------------------------------------------------

// Population variance (divide by N).
double variance(const Window& window);

// max(samples) - min(samples).
double amplitude_range(const Window& window);

// Total variation: sum of |signal[n-1] - signal[n]| over n = 1 .. len-1.
// Throws DegenerateInputError for signals shorter than 2 samples.
double sma_coarse(std::span<const double> signal);

// Maximum sma_coarse over all full sub-windows taken at the given stride.
double sma_fine(const Window& window, std::size_t subwindow_len = 256,
                std::size_t subwindow_stride = 128);

// In-place radix-2 FFT over interleaved (re, im) pairs is internal; this
// returns the center-shifted magnitude spectrum of the window. Requires a
// power-of-two window length.
Spectrum dft_magnitudes(const Window& window);

// Arithmetic mean of all magnitude bins.
double spectrum_mean(const Spectrum& spectrum);

// Assembles the unscaled 5-dimensional vector for one window.
FeatureVector extract_features(const Window& window, const FeatureParams& params = {});

// --- batch extraction (parallel kernel + serial reference) ----------------

enum class Exec {
    serial,    // reference implementation
    parallel,  // OpenMP when available, identical results
};

std::vector<FeatureVector> extract_features_batch(std::span<const Window> windows,
                                                  const FeatureParams& params = {},
                                                  Exec exec = Exec::parallel);

// --- standardization -------------------------------------------------------

// Per-dimension mean and population standard deviation over >= 2 rows.
ScalerStats fit_scaler(std::span<const FeatureVector> training_features);

// (x - mean) / std per dimension; dimensions with std == 0 map to 0.
FeatureVector apply_scaler(const ScalerStats& stats, const FeatureVector& features);

std::vector<FeatureVector> apply_scaler(const ScalerStats& stats,
                                        std::span<const FeatureVector> features);

// Test seam: invoked with the row count of every fit_scaler call. Used to
// assert the evaluation harness fits on training rows only.
extern std::function<void(std::size_t)> scaler_fit_observer;

}  // namespace crackle

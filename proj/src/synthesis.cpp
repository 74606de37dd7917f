#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "crackle/dataset.hpp"
#include "crackle/errors.hpp"
#include "crackle/rng.hpp"

namespace crackle {

AudioRecording synth_noise_recording(std::string source_id, double seconds,
                                     std::uint32_t sample_rate, double noise_rms,
                                     double gain, double breath_depth,
                                     double breath_rate_hz, double breath_phase,
                                     std::uint64_t seed) {
    if (seconds <= 0.0 || sample_rate == 0) {
        throw ParameterError("synthetic recording needs positive duration and rate");
    }
    const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));

    AudioRecording rec;
    rec.source_id = std::move(source_id);
    rec.sample_rate = sample_rate;
    rec.samples.resize(n);

    // Gaussian noise through a one-pole lowpass, plus a wideband remainder.
    // Gives a pink-ish spectrum without claiming physiological fidelity.
    Rng rng(seed);
    const double fc = 800.0;
    const double a = std::exp(-2.0 * std::numbers::pi * fc / sample_rate);
    double lp = 0.0;
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double white = rng.next_gaussian();
        lp = a * lp + (1.0 - a) * white;
        const double s = 0.85 * lp + 0.15 * white;
        rec.samples[i] = s;
        energy += s * s;
    }
    const double rms = std::sqrt(energy / static_cast<double>(n));
    const double scale = rms > 0.0 ? noise_rms * gain / rms : 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double breath =
            1.0 + breath_depth * std::sin(2.0 * std::numbers::pi * breath_rate_hz * t +
                                          breath_phase);
        rec.samples[i] *= scale * breath;
    }
    return rec;
}

void inject_crackle(AudioRecording& recording, double t_seconds,
                    double duration_seconds, double amplitude, double freq_hz) {
    const auto start = static_cast<std::size_t>(
        std::llround(t_seconds * recording.sample_rate));
    const auto len = static_cast<std::size_t>(
        std::llround(duration_seconds * recording.sample_rate));
    const double tau = duration_seconds / 5.0;  // envelope ~0.7% at the end
    for (std::size_t i = 0; i < len && start + i < recording.samples.size(); ++i) {
        const double t = static_cast<double>(i) / recording.sample_rate;
        recording.samples[start + i] +=
            amplitude * std::exp(-t / tau) *
            std::sin(2.0 * std::numbers::pi * freq_hz * t);
    }
}

namespace {

// Draws `count` event times in [lo, hi] with pairwise spacing >= min_gap and
// distance >= min_gap from every time already in `taken`.
std::vector<double> draw_positions(Rng& rng, std::size_t count, double lo, double hi,
                                   double min_gap, const std::vector<double>& taken,
                                   const char* what) {
    std::vector<double> out;
    std::size_t attempts = 0;
    const std::size_t max_attempts = 2000 * (count + 1);
    while (out.size() < count) {
        if (++attempts > max_attempts) {
            throw CapacityError(std::string("cannot place ") + what +
                                    " transients without overlap",
                                out.size());
        }
        const double t = rng.next_in(lo, hi);
        bool ok = true;
        for (double o : out) {
            if (std::abs(o - t) < min_gap) { ok = false; break; }
        }
        for (double o : taken) {
            if (std::abs(o - t) < min_gap) { ok = false; break; }
        }
        if (ok) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SynthSpec& spec) {
    if (spec.num_recordings == 0) {
        throw ParameterError("synthetic corpus needs at least one recording");
    }
    if (spec.noise_level <= 0.0 || spec.noise_level > 1.0) {
        throw ParameterError("noise_level must be in (0, 1]");
    }
    if (spec.crackle_amplitude <= 0.0 || spec.crackle_amplitude > 1.0) {
        throw ParameterError("crackle_amplitude must be in (0, 1]");
    }
    if (spec.duration_seconds <= 0.0) {
        throw ParameterError("duration must be positive");
    }

    SyntheticCorpus corpus;
    const double margin = 0.10;   // keep events clear of the file edges
    const double min_gap = 0.18;  // between event midpoints, seconds

    for (std::size_t r = 0; r < spec.num_recordings; ++r) {
        // Distribute totals as evenly as the counts allow.
        const std::size_t crackles =
            spec.total_crackles / spec.num_recordings +
            (r < spec.total_crackles % spec.num_recordings ? 1 : 0);
        const std::size_t normals =
            spec.total_normals / spec.num_recordings +
            (r < spec.total_normals % spec.num_recordings ? 1 : 0);

        Rng rng(derive_seed(spec.seed, r));
        const double gain = rng.next_in(spec.gain_low, spec.gain_high);
        const double phase = rng.next_in(0.0, 2.0 * std::numbers::pi);

        char name[32];
        std::snprintf(name, sizeof name, "synth%03zu", r);
        AudioRecording rec = synth_noise_recording(
            name, spec.duration_seconds, spec.sample_rate, spec.noise_level, gain,
            spec.breath_depth, spec.breath_rate_hz, phase,
            derive_seed(spec.seed, 0x10000 + r));

        const double lo = margin;
        const double hi = spec.duration_seconds - margin - spec.crackle_duration_high;
        if (hi <= lo && (crackles > 0 || normals > 0)) {
            throw CapacityError("recording too short for any event", 0);
        }

        const auto crackle_times =
            draw_positions(rng, crackles, lo, hi, min_gap, {}, "crackle");
        for (double t : crackle_times) {
            const double dur =
                rng.next_in(spec.crackle_duration_low, spec.crackle_duration_high);
            const double freq =
                rng.next_in(spec.crackle_freq_low_hz, spec.crackle_freq_high_hz);
            inject_crackle(rec, t, dur, spec.crackle_amplitude, freq);
            corpus.annotations.push_back({rec.source_id, t, t + dur, Label::crackle});
        }

        const auto normal_times =
            draw_positions(rng, normals, lo, hi, min_gap, crackle_times, "normal");
        for (double t : normal_times) {
            corpus.annotations.push_back(
                {rec.source_id, t, t + 0.02, Label::normal});
        }

        for (double s : rec.samples) {
            if (std::abs(s) > 1.0) {
                throw ValueRangeError(
                    "synthesis parameters clip: |sample| exceeds 1.0 in '" +
                    rec.source_id + "'");
            }
        }
        corpus.recordings.push_back(std::move(rec));
    }
    return corpus;
}

}  // namespace crackle

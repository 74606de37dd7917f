#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace crackle {

// Decoded mono recording. Samples are normalized amplitudes in [-1, 1].
struct AudioRecording {
    std::vector<double> samples;
    std::uint32_t sample_rate = 0;
    std::string source_id;

    double duration_seconds() const {
        return sample_rate == 0 ? 0.0
                                : static_cast<double>(samples.size()) / sample_rate;
    }
};

// One fixed-length analysis frame cut from a recording.
struct Window {
    std::vector<double> samples;
    std::size_t start_sample = 0;
    double start_time = 0.0;  // start_sample / sample_rate, seconds
};

enum class WavSampleFormat {
    pcm16,
    pcm32,
    float32,
};

// Decodes a RIFF/WAVE container. Supported encodings: PCM 16-bit, PCM 32-bit
// (format code 1) and IEEE float 32-bit (format code 3), 1 or 2 channels.
// Integer samples are scaled by the encoding's maximum magnitude; stereo is
// averaged to mono. Throws DecodeError / UnsupportedFormatError.
AudioRecording decode_wav(std::span<const std::uint8_t> bytes,
                          std::string source_id = {});

// Reads and decodes a WAV file; source_id defaults to the file stem.
AudioRecording decode_wav_file(const std::string& path);

// Serializes a recording back to a RIFF/WAVE byte buffer.
std::vector<std::uint8_t> encode_wav(const AudioRecording& recording,
                                     WavSampleFormat format = WavSampleFormat::pcm16);

// Writes a recording to disk (atomic: temp file + rename).
void write_wav_file(const AudioRecording& recording, const std::string& path,
                    WavSampleFormat format = WavSampleFormat::float32);

struct WindowParams {
    std::size_t window_len = 4096;
    double overlap_fraction = 0.5;  // in [0, 1)

    std::size_t stride() const;
};

// Splits a recording into overlapping full-length windows. Windows start at
// stride = window_len * (1 - overlap_fraction) intervals; a trailing partial
// remainder is dropped. Throws EmptyInputError when the recording is shorter
// than one window.
std::vector<Window> segment_windows(const AudioRecording& recording,
                                    const WindowParams& params = {});

// Number of windows segment_windows would produce, without materializing them.
std::size_t count_windows(std::size_t num_samples, const WindowParams& params);

}  // namespace crackle

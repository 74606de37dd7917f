#include "crackle/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "crackle/errors.hpp"

namespace crackle {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

bool fourcc_is(const std::uint8_t* p, const char* id) {
    return std::memcmp(p, id, 4) == 0;
}

struct FmtChunk {
    std::uint16_t format_tag = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

}  // namespace

AudioRecording decode_wav(std::span<const std::uint8_t> bytes, std::string source_id) {
    if (bytes.size() < 12) {
        throw DecodeError("RIFF header truncated: file is " +
                          std::to_string(bytes.size()) + " bytes");
    }
    if (!fourcc_is(bytes.data(), "RIFF")) {
        throw DecodeError("missing RIFF chunk id");
    }
    if (!fourcc_is(bytes.data() + 8, "WAVE")) {
        throw DecodeError("RIFF form type is not WAVE");
    }

    FmtChunk fmt;
    bool have_fmt = false;
    const std::uint8_t* data_ptr = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* hdr = bytes.data() + pos;
        const std::uint32_t chunk_size = read_u32(hdr + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size()) {
            char id[5] = {static_cast<char>(hdr[0]), static_cast<char>(hdr[1]),
                          static_cast<char>(hdr[2]), static_cast<char>(hdr[3]), 0};
            throw DecodeError(std::string("chunk '") + id + "' truncated");
        }
        if (fourcc_is(hdr, "fmt ")) {
            if (chunk_size < 16) {
                throw DecodeError("fmt chunk too small");
            }
            const std::uint8_t* f = bytes.data() + body;
            fmt.format_tag = read_u16(f);
            fmt.channels = read_u16(f + 2);
            fmt.sample_rate = read_u32(f + 4);
            fmt.bits_per_sample = read_u16(f + 14);
            have_fmt = true;
        } else if (fourcc_is(hdr, "data")) {
            data_ptr = bytes.data() + body;
            data_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1);  // chunks are 2-byte aligned
    }

    if (!have_fmt) {
        throw DecodeError("missing fmt chunk");
    }
    if (data_ptr == nullptr) {
        throw DecodeError("missing data chunk");
    }
    if (fmt.format_tag != kFormatPcm && fmt.format_tag != kFormatIeeeFloat) {
        throw UnsupportedFormatError("unsupported format code " +
                                     std::to_string(fmt.format_tag) +
                                     " (supported: 1 = PCM, 3 = IEEE float)");
    }
    if (fmt.channels != 1 && fmt.channels != 2) {
        throw UnsupportedFormatError("unsupported channel count " +
                                     std::to_string(fmt.channels));
    }
    if (fmt.format_tag == kFormatPcm && fmt.bits_per_sample != 16 &&
        fmt.bits_per_sample != 32) {
        throw UnsupportedFormatError("unsupported PCM bit depth " +
                                     std::to_string(fmt.bits_per_sample));
    }
    if (fmt.format_tag == kFormatIeeeFloat && fmt.bits_per_sample != 32) {
        throw UnsupportedFormatError("unsupported float bit depth " +
                                     std::to_string(fmt.bits_per_sample));
    }
    if (fmt.sample_rate == 0) {
        throw DecodeError("fmt chunk declares sample rate 0");
    }

    const std::size_t bytes_per_sample = fmt.bits_per_sample / 8;
    const std::size_t frame_size = bytes_per_sample * fmt.channels;
    const std::size_t frames = data_size / frame_size;

    AudioRecording rec;
    rec.sample_rate = fmt.sample_rate;
    rec.source_id = std::move(source_id);
    rec.samples.resize(frames);

    auto sample_at = [&](std::size_t frame, std::size_t ch) -> double {
        const std::uint8_t* p = data_ptr + frame * frame_size + ch * bytes_per_sample;
        if (fmt.format_tag == kFormatIeeeFloat) {
            const std::uint32_t raw = read_u32(p);
            const float v = std::bit_cast<float>(raw);
            return std::clamp(static_cast<double>(v), -1.0, 1.0);
        }
        if (fmt.bits_per_sample == 16) {
            const auto v = static_cast<std::int16_t>(read_u16(p));
            return static_cast<double>(v) / 32768.0;
        }
        const auto v = static_cast<std::int32_t>(read_u32(p));
        return static_cast<double>(v) / 2147483648.0;
    };

    for (std::size_t i = 0; i < frames; ++i) {
        if (fmt.channels == 1) {
            rec.samples[i] = sample_at(i, 0);
        } else {
            rec.samples[i] = 0.5 * (sample_at(i, 0) + sample_at(i, 1));
        }
    }
    return rec;
}

AudioRecording decode_wav_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open WAV file: " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_wav(bytes, std::filesystem::path(path).stem().string());
}

std::vector<std::uint8_t> encode_wav(const AudioRecording& recording,
                                     WavSampleFormat format) {
    const std::uint16_t bits = format == WavSampleFormat::pcm16 ? 16 : 32;
    const std::uint16_t tag =
        format == WavSampleFormat::float32 ? kFormatIeeeFloat : kFormatPcm;
    const std::uint32_t data_size =
        static_cast<std::uint32_t>(recording.samples.size() * (bits / 8));

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_size);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put_u32(out, 36 + data_size);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    put_u32(out, 16);
    put_u16(out, tag);
    put_u16(out, 1);  // mono
    put_u32(out, recording.sample_rate);
    put_u32(out, recording.sample_rate * (bits / 8));
    put_u16(out, static_cast<std::uint16_t>(bits / 8));
    put_u16(out, bits);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put_u32(out, data_size);

    for (double s : recording.samples) {
        const double c = std::clamp(s, -1.0, 1.0);
        switch (format) {
            case WavSampleFormat::pcm16: {
                const auto v = static_cast<std::int32_t>(std::lrint(c * 32768.0));
                put_u16(out, static_cast<std::uint16_t>(
                                 std::clamp(v, -32768, 32767) & 0xffff));
                break;
            }
            case WavSampleFormat::pcm32: {
                const double scaled = c * 2147483648.0;
                const auto v = static_cast<std::int64_t>(std::llrint(scaled));
                const auto clamped = static_cast<std::int32_t>(std::clamp<std::int64_t>(
                    v, -2147483648LL, 2147483647LL));
                put_u32(out, static_cast<std::uint32_t>(clamped));
                break;
            }
            case WavSampleFormat::float32: {
                put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(c)));
                break;
            }
        }
    }
    return out;
}

void write_wav_file(const AudioRecording& recording, const std::string& path,
                    WavSampleFormat format) {
    const auto bytes = encode_wav(recording, format);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write file: " + tmp);
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IoError("short write: " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

std::size_t WindowParams::stride() const {
    if (window_len == 0) {
        throw ParameterError("window_len must be positive");
    }
    if (overlap_fraction < 0.0 || overlap_fraction >= 1.0) {
        throw ParameterError("overlap_fraction must be in [0, 1)");
    }
    const auto s = static_cast<std::size_t>(
        std::llround(static_cast<double>(window_len) * (1.0 - overlap_fraction)));
    return std::max<std::size_t>(1, s);
}

std::size_t count_windows(std::size_t num_samples, const WindowParams& params) {
    if (num_samples < params.window_len) {
        return 0;
    }
    return (num_samples - params.window_len) / params.stride() + 1;
}

std::vector<Window> segment_windows(const AudioRecording& recording,
                                    const WindowParams& params) {
    const std::size_t n = recording.samples.size();
    if (n < params.window_len) {
        throw EmptyInputError("recording shorter than one window", n);
    }
    const std::size_t stride = params.stride();
    const std::size_t count = count_windows(n, params);

    std::vector<Window> windows;
    windows.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        const std::size_t start = w * stride;
        Window win;
        win.samples.assign(recording.samples.begin() + static_cast<std::ptrdiff_t>(start),
                           recording.samples.begin() +
                               static_cast<std::ptrdiff_t>(start + params.window_len));
        win.start_sample = start;
        win.start_time = static_cast<double>(start) / recording.sample_rate;
        windows.push_back(std::move(win));
    }
    return windows;
}

}  // namespace crackle

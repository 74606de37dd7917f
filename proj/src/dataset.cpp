#include "crackle/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "crackle/errors.hpp"
#include "crackle/rng.hpp"

namespace crackle {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_seconds(const std::string& field, const char* what, long line_no) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(std::string("cannot parse ") + what + " '" + field + "'",
                         line_no);
    }
    return value;
}

}  // namespace

std::vector<Annotation> parse_annotations(std::istream& in) {
    std::vector<Annotation> out;
    std::string line;
    long line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!saw_header) {
            if (line != kAnnotationCsvHeader) {
                throw ParseError("expected header '" + std::string(kAnnotationCsvHeader) +
                                     "', got '" + line + "'",
                                 line_no);
            }
            saw_header = true;
            continue;
        }
        if (line.empty()) continue;

        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw ParseError("expected 4 comma-separated fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        Annotation ann;
        ann.source_id = fields[0];
        ann.start_time = parse_seconds(fields[1], "start_time", line_no);
        ann.end_time = parse_seconds(fields[2], "end_time", line_no);
        if (fields[3] == "crackle") {
            ann.label = Label::crackle;
        } else if (fields[3] == "normal") {
            ann.label = Label::normal;
        } else {
            throw ValidationError("unknown label '" + fields[3] + "' (line " +
                                  std::to_string(line_no) + ")");
        }
        if (ann.source_id.empty()) {
            throw ValidationError("empty source_id (line " + std::to_string(line_no) + ")");
        }
        if (ann.start_time < 0.0) {
            throw ValidationError("start_time must be >= 0 (line " +
                                  std::to_string(line_no) + ")");
        }
        if (!(ann.end_time > ann.start_time)) {
            throw ValidationError("end_time must exceed start_time (line " +
                                  std::to_string(line_no) + ")");
        }
        out.push_back(std::move(ann));
    }
    if (!saw_header) {
        throw ParseError("annotation stream is empty (missing header)", 0);
    }
    return out;
}

std::vector<Annotation> parse_annotations_text(const std::string& text) {
    std::istringstream in(text);
    return parse_annotations(in);
}

std::vector<Annotation> parse_annotations_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open annotation file: " + path);
    }
    return parse_annotations(in);
}

std::string annotations_to_csv(std::span<const Annotation> annotations) {
    std::string out = kAnnotationCsvHeader;
    out.push_back('\n');
    char buf[256];
    for (const auto& a : annotations) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%s\n", a.source_id.c_str(),
                      a.start_time, a.end_time, label_name(a.label));
        out += buf;
    }
    return out;
}

namespace {

Window window_at(const AudioRecording& recording, std::size_t start,
                 std::size_t window_len) {
    Window w;
    w.samples.assign(recording.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     recording.samples.begin() +
                         static_cast<std::ptrdiff_t>(start + window_len));
    w.start_sample = start;
    w.start_time = static_cast<double>(start) / recording.sample_rate;
    return w;
}

// Start offset of the window_len window centered on the annotation midpoint,
// clamped to the recording bounds.
std::size_t centered_start(const AudioRecording& recording, const Annotation& ann,
                           std::size_t window_len) {
    const double mid_time = 0.5 * (ann.start_time + ann.end_time);
    const auto mid_sample = static_cast<long long>(
        std::llround(mid_time * static_cast<double>(recording.sample_rate)));
    long long start = mid_sample - static_cast<long long>(window_len / 2);
    const long long max_start =
        static_cast<long long>(recording.samples.size()) -
        static_cast<long long>(window_len);
    start = std::clamp<long long>(start, 0, max_start);
    return static_cast<std::size_t>(start);
}

}  // namespace

Window extract_crackle_window(const AudioRecording& recording,
                              const Annotation& annotation, std::size_t window_len) {
    if (annotation.label != Label::crackle) {
        throw ValidationError("extract_crackle_window needs a crackle annotation");
    }
    if (recording.samples.size() < window_len) {
        throw EmptyInputError("recording shorter than one window",
                              recording.samples.size());
    }
    return window_at(recording, centered_start(recording, annotation, window_len),
                     window_len);
}

std::vector<Window> sample_normal_windows(const AudioRecording& recording,
                                          std::span<const Annotation> crackle_annotations,
                                          std::size_t count, std::uint64_t seed,
                                          std::size_t window_len) {
    if (recording.samples.size() < window_len) {
        throw EmptyInputError("recording shorter than one window",
                              recording.samples.size());
    }
    const long long n = static_cast<long long>(recording.samples.size());
    const long long wl = static_cast<long long>(window_len);
    const long long half = wl / 2;

    // Exclusion intervals over start offsets: a window starting at s covers
    // [s, s + wl); it may not intersect any crackle interval padded by half
    // a window per side.
    std::vector<std::pair<long long, long long>> excluded;  // [lo, hi) of starts
    for (const auto& ann : crackle_annotations) {
        if (ann.label != Label::crackle) continue;
        const auto a = static_cast<long long>(
            std::floor(ann.start_time * recording.sample_rate));
        const auto b = static_cast<long long>(
            std::ceil(ann.end_time * recording.sample_rate));
        const long long pad_lo = a - half;
        const long long pad_hi = b + half;
        // overlap iff s < pad_hi && s + wl > pad_lo
        excluded.emplace_back(pad_lo - wl + 1, pad_hi);
    }
    std::sort(excluded.begin(), excluded.end());

    // Allowed start segments within [0, n - wl].
    std::vector<std::pair<long long, long long>> allowed;  // [lo, hi] inclusive
    long long cursor = 0;
    const long long max_start = n - wl;
    for (const auto& [lo, hi] : excluded) {
        if (lo > cursor) {
            allowed.emplace_back(cursor, std::min(lo - 1, max_start));
        }
        cursor = std::max(cursor, hi);
        if (cursor > max_start) break;
    }
    if (cursor <= max_start) {
        allowed.emplace_back(cursor, max_start);
    }
    std::erase_if(allowed, [](const auto& seg) { return seg.second < seg.first; });

    std::uint64_t total_allowed = 0;
    for (const auto& [lo, hi] : allowed) {
        total_allowed += static_cast<std::uint64_t>(hi - lo + 1);
    }
    if (total_allowed < count) {
        throw CapacityError("crackle-free extent cannot host " + std::to_string(count) +
                                " normal windows",
                            static_cast<std::size_t>(total_allowed));
    }

    Rng rng(seed);
    std::set<long long> used;

    auto offset_for = [&](std::uint64_t r) {
        for (const auto& [lo, hi] : allowed) {
            const auto len = static_cast<std::uint64_t>(hi - lo + 1);
            if (r < len) return lo + static_cast<long long>(r);
            r -= len;
        }
        throw InternalError("normal-window draw out of range");
    };

    std::vector<Window> out;
    out.reserve(count);
    if (total_allowed <= 4 * static_cast<std::uint64_t>(count)) {
        // Tight feasible set: enumerate and take a seeded partial shuffle.
        std::vector<long long> offsets;
        offsets.reserve(static_cast<std::size_t>(total_allowed));
        for (const auto& [lo, hi] : allowed) {
            for (long long s = lo; s <= hi; ++s) offsets.push_back(s);
        }
        rng.shuffle(offsets);
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(window_at(recording, static_cast<std::size_t>(offsets[i]),
                                    window_len));
        }
        return out;
    }
    while (out.size() < count) {
        const long long s = offset_for(rng.next_below(total_allowed));
        if (used.insert(s).second) {
            out.push_back(window_at(recording, static_cast<std::size_t>(s), window_len));
        }
    }
    return out;
}

Corpus build_corpus(std::span<const AudioRecording> recordings,
                    std::span<const Annotation> annotations,
                    std::size_t normals_per_file, std::uint64_t seed,
                    const WindowParams& window_params,
                    const FeatureParams& feature_params, Exec exec) {
    std::map<std::string, const AudioRecording*> by_id;
    for (const auto& rec : recordings) {
        if (!by_id.emplace(rec.source_id, &rec).second) {
            throw ReferenceError("duplicate recording source_id '" + rec.source_id + "'");
        }
    }

    std::map<std::string, std::vector<const Annotation*>> anns_by_id;
    for (const auto& ann : annotations) {
        const auto it = by_id.find(ann.source_id);
        if (it == by_id.end()) {
            throw ReferenceError("annotation references unknown source_id '" +
                                 ann.source_id + "'");
        }
        if (ann.end_time > it->second->duration_seconds() + 1e-9) {
            throw ValidationError("annotation [" + std::to_string(ann.start_time) + ", " +
                                  std::to_string(ann.end_time) + "] exceeds duration of '" +
                                  ann.source_id + "'");
        }
        anns_by_id[ann.source_id].push_back(&ann);
    }

    struct Row {
        Window window;
        Label label;
        SampleProvenance provenance;
    };
    std::vector<Row> rows;

    std::uint64_t file_index = 0;
    for (const auto& [source_id, rec_ptr] : by_id) {  // map order: sorted by id
        const AudioRecording& rec = *rec_ptr;
        std::vector<Annotation> crackles;
        if (const auto it = anns_by_id.find(source_id); it != anns_by_id.end()) {
            for (const Annotation* ann : it->second) {
                if (ann->label == Label::crackle) {
                    crackles.push_back(*ann);
                    rows.push_back(
                        {extract_crackle_window(rec, *ann, window_params.window_len),
                         Label::crackle,
                         {source_id, 0}});
                } else {
                    const std::size_t start =
                        centered_start(rec, *ann, window_params.window_len);
                    rows.push_back({window_at(rec, start, window_params.window_len),
                                    Label::normal,
                                    {source_id, 0}});
                }
                rows.back().provenance.start_sample = rows.back().window.start_sample;
            }
        }
        if (normals_per_file > 0) {
            auto windows = sample_normal_windows(rec, crackles, normals_per_file,
                                                 derive_seed(seed, file_index),
                                                 window_params.window_len);
            for (auto& w : windows) {
                const std::size_t start = w.start_sample;
                rows.push_back({std::move(w), Label::normal, {source_id, start}});
            }
        }
        ++file_index;
    }

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.provenance.source_id != b.provenance.source_id) {
            return a.provenance.source_id < b.provenance.source_id;
        }
        if (a.provenance.start_sample != b.provenance.start_sample) {
            return a.provenance.start_sample < b.provenance.start_sample;
        }
        return static_cast<int>(a.label) < static_cast<int>(b.label);
    });

    std::vector<Window> windows;
    windows.reserve(rows.size());
    for (auto& row : rows) windows.push_back(std::move(row.window));
    const auto features = extract_features_batch(windows, feature_params, exec);

    Corpus corpus;
    corpus.samples.reserve(rows.size());
    corpus.provenance.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        corpus.samples.push_back({features[i], rows[i].label});
        corpus.provenance.push_back(std::move(rows[i].provenance));
        if (rows[i].label == Label::crackle) {
            ++corpus.crackle_count;
        } else {
            ++corpus.normal_count;
        }
    }
    return corpus;
}

std::string corpus_to_csv(const Corpus& corpus) {
    std::string out = "source_id,start_sample,label,variance,range,sma_coarse,"
                      "sma_fine,spectrum_mean\n";
    char buf[512];
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
        const auto v = corpus.samples[i].features.values();
        std::snprintf(buf, sizeof buf, "%s,%zu,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      corpus.provenance[i].source_id.c_str(),
                      corpus.provenance[i].start_sample,
                      label_name(corpus.samples[i].label), v[0], v[1], v[2], v[3], v[4]);
        out += buf;
    }
    return out;
}

}  // namespace crackle

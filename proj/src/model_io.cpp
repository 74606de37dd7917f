#include "crackle/model_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "crackle/errors.hpp"

namespace crackle {

namespace {

constexpr std::uint8_t kMagic[4] = {'C', 'K', 'L', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

enum SectionId : std::uint32_t {
    kSectionMeta = 1,
    kSectionScaler = 2,
    kSectionVariant = 3,
};

enum VariantTag : std::uint8_t {
    kVariantSvm = 0,
    kVariantKnn = 1,
    kVariantAdaBoost = 2,
    kVariantDummy = 3,
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }
    void raw(const std::vector<std::uint8_t>& bytes) {
        buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    }

    std::vector<std::uint8_t> take() { return std::move(buf_); }
    const std::vector<std::uint8_t>& bytes() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        const auto* p = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const auto* p = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t len = u32();
        const auto* p = take(len);
        return std::string(reinterpret_cast<const char*>(p), len);
    }
    void skip(std::size_t n) { take(n); }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::size_t position() const { return pos_; }

private:
    const std::uint8_t* take(std::size_t n) {
        if (pos_ + n > bytes_.size()) {
            throw IntegrityError("model payload truncated at offset " +
                                 std::to_string(pos_));
        }
        const std::uint8_t* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void write_feature_values(ByteWriter& w, const FeatureVector& fv) {
    for (double v : fv.values()) w.f64(v);
}

FeatureVector read_feature_values(ByteReader& r, bool scaled) {
    std::array<double, kFeatureCount> v{};
    for (auto& x : v) x = r.f64();
    return FeatureVector::from_values(v, scaled);
}

std::vector<std::uint8_t> encode_variant(const ModelVariant& variant) {
    ByteWriter w;
    if (const auto* svm = std::get_if<SvmModel>(&variant)) {
        w.u8(kVariantSvm);
        w.u8(static_cast<std::uint8_t>(svm->kernel));
        w.f64(svm->gamma);
        w.f64(svm->c);
        w.f64(svm->bias);
        w.u64(svm->support_vectors.size());
        for (std::size_t i = 0; i < svm->support_vectors.size(); ++i) {
            w.f64(svm->dual_coefficients[i]);
            write_feature_values(w, svm->support_vectors[i]);
        }
    } else if (const auto* knn = std::get_if<KnnModel>(&variant)) {
        w.u8(kVariantKnn);
        w.u64(knn->k);
        w.u64(knn->training_points.size());
        for (const auto& pt : knn->training_points) {
            w.u8(static_cast<std::uint8_t>(pt.label));
            write_feature_values(w, pt.features);
        }
    } else if (const auto* ada = std::get_if<AdaBoostModel>(&variant)) {
        w.u8(kVariantAdaBoost);
        w.u64(ada->stumps.size());
        for (std::size_t t = 0; t < ada->stumps.size(); ++t) {
            w.u64(ada->stumps[t].dimension);
            w.f64(ada->stumps[t].threshold);
            w.u8(ada->stumps[t].polarity > 0 ? 1 : 0);
            w.f64(ada->stage_weights[t]);
            w.f64(ada->round_errors[t]);
        }
    } else {
        const auto& dummy = std::get<DummyModel>(variant);
        w.u8(kVariantDummy);
        w.f64(dummy.prior_normal);
        w.f64(dummy.prior_crackle);
        w.u64(dummy.rng_seed);
    }
    return w.take();
}

ModelVariant decode_variant(ByteReader& r) {
    const std::uint8_t tag = r.u8();
    switch (tag) {
        case kVariantSvm: {
            SvmModel svm;
            const std::uint8_t kernel = r.u8();
            if (kernel > 1) throw IntegrityError("unknown kernel tag");
            svm.kernel = static_cast<Kernel>(kernel);
            svm.gamma = r.f64();
            svm.c = r.f64();
            svm.bias = r.f64();
            const std::uint64_t n = r.u64();
            svm.support_vectors.reserve(n);
            svm.dual_coefficients.reserve(n);
            for (std::uint64_t i = 0; i < n; ++i) {
                svm.dual_coefficients.push_back(r.f64());
                svm.support_vectors.push_back(read_feature_values(r, true));
            }
            return svm;
        }
        case kVariantKnn: {
            KnnModel knn;
            knn.k = r.u64();
            const std::uint64_t n = r.u64();
            knn.training_points.reserve(n);
            for (std::uint64_t i = 0; i < n; ++i) {
                LabeledSample s;
                s.label = r.u8() ? Label::crackle : Label::normal;
                s.features = read_feature_values(r, true);
                knn.training_points.push_back(std::move(s));
            }
            return knn;
        }
        case kVariantAdaBoost: {
            AdaBoostModel ada;
            const std::uint64_t n = r.u64();
            for (std::uint64_t t = 0; t < n; ++t) {
                DecisionStump stump;
                stump.dimension = r.u64();
                stump.threshold = r.f64();
                stump.polarity = r.u8() ? +1 : -1;
                ada.stumps.push_back(stump);
                ada.stage_weights.push_back(r.f64());
                ada.round_errors.push_back(r.f64());
            }
            return ada;
        }
        case kVariantDummy: {
            DummyModel dummy;
            dummy.prior_normal = r.f64();
            dummy.prior_crackle = r.f64();
            dummy.rng_seed = r.u64();
            return dummy;
        }
        default:
            throw IntegrityError("unknown model variant tag " + std::to_string(tag));
    }
}

}  // namespace

std::vector<std::uint8_t> save_model(const TrainedModel& model) {
    ByteWriter out;
    out.u8(kMagic[0]);
    out.u8(kMagic[1]);
    out.u8(kMagic[2]);
    out.u8(kMagic[3]);
    out.u32(kFormatVersion);

    auto section = [&out](std::uint32_t id, const std::vector<std::uint8_t>& payload) {
        out.u32(id);
        out.u64(payload.size());
        out.raw(payload);
    };

    {
        ByteWriter meta;
        meta.str(model.meta.version_tag);
        meta.u8(static_cast<std::uint8_t>(model.meta.kind));
        meta.f64(model.meta.hyperparams.svm_c);
        meta.f64(model.meta.hyperparams.svm_gamma);
        meta.u64(model.meta.hyperparams.knn_k);
        meta.u64(model.meta.hyperparams.ada_rounds);
        meta.u64(model.meta.window.window_len);
        meta.f64(model.meta.window.overlap_fraction);
        meta.u64(model.meta.feature_params.sma_subwindow_len);
        meta.u64(model.meta.feature_params.sma_subwindow_stride);
        section(kSectionMeta, meta.bytes());
    }
    {
        ByteWriter scaler;
        for (double m : model.scaler.means) scaler.f64(m);
        for (double s : model.scaler.stds) scaler.f64(s);
        section(kSectionScaler, scaler.bytes());
    }
    section(kSectionVariant, encode_variant(model.variant));

    auto bytes = out.take();
    const std::uint64_t checksum = fnv1a64(bytes);
    for (int i = 0; i < 8; ++i) {
        bytes.push_back(static_cast<std::uint8_t>(checksum >> (8 * i)));
    }
    return bytes;
}

TrainedModel load_model(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw IntegrityError("not a crackle model file (bad magic)");
    }
    if (bytes.size() < 8) {
        throw IntegrityError("model file truncated before format version");
    }
    ByteReader header(bytes.subspan(4));
    const std::uint32_t version = header.u32();
    if (version != kFormatVersion) {
        throw FormatVersionError("unsupported model format version " +
                                 std::to_string(version) + " (expected " +
                                 std::to_string(kFormatVersion) + ")");
    }
    if (bytes.size() < 16) {
        throw IntegrityError("model file truncated");
    }
    const std::uint64_t stored = ByteReader(bytes.subspan(bytes.size() - 8)).u64();
    if (fnv1a64(bytes.first(bytes.size() - 8)) != stored) {
        throw IntegrityError("model checksum mismatch (corrupt or truncated payload)");
    }

    ByteReader r(bytes.subspan(8, bytes.size() - 16));
    TrainedModel model;
    bool have_meta = false, have_scaler = false, have_variant = false;
    while (r.remaining() > 0) {
        const std::uint32_t id = r.u32();
        const std::uint64_t len = r.u64();
        if (len > r.remaining()) {
            throw IntegrityError("section " + std::to_string(id) + " overruns file");
        }
        const std::size_t end = r.position() + len;
        switch (id) {
            case kSectionMeta: {
                model.meta.version_tag = r.str();
                const std::uint8_t kind = r.u8();
                if (kind > 4) throw IntegrityError("unknown classifier kind tag");
                model.meta.kind = static_cast<ClassifierKind>(kind);
                model.meta.hyperparams.svm_c = r.f64();
                model.meta.hyperparams.svm_gamma = r.f64();
                model.meta.hyperparams.knn_k = r.u64();
                model.meta.hyperparams.ada_rounds = r.u64();
                model.meta.window.window_len = r.u64();
                model.meta.window.overlap_fraction = r.f64();
                model.meta.feature_params.sma_subwindow_len = r.u64();
                model.meta.feature_params.sma_subwindow_stride = r.u64();
                have_meta = true;
                break;
            }
            case kSectionScaler: {
                for (auto& m : model.scaler.means) m = r.f64();
                for (auto& s : model.scaler.stds) s = r.f64();
                have_scaler = true;
                break;
            }
            case kSectionVariant: {
                model.variant = decode_variant(r);
                have_variant = true;
                break;
            }
            default:
                r.skip(len);  // unknown section, tolerated
                break;
        }
        if (r.position() != end) {
            throw IntegrityError("section " + std::to_string(id) + " has trailing bytes");
        }
    }
    if (!have_meta || !have_scaler || !have_variant) {
        throw IntegrityError("model file is missing a required section");
    }
    return model;
}

void save_model_file(const TrainedModel& model, const std::string& path) {
    const auto bytes = save_model(model);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write model file: " + tmp);
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IoError("short write: " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

TrainedModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open model file: " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return load_model(bytes);
}

}  // namespace crackle

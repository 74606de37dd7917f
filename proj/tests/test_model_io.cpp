#include <doctest.h>

#include <cstring>

#include "crackle/errors.hpp"
#include "crackle/model_io.hpp"
#include "crackle/rng.hpp"
#include "oracles.hpp"

using namespace crackle;

namespace {

std::vector<LabeledSample> training_data() {
    Rng rng(101);
    std::vector<LabeledSample> data;
    for (int i = 0; i < 40; ++i) {
        const bool pos = i % 2 == 0;
        std::array<double, 5> v{};
        for (auto& x : v) x = rng.next_gaussian() + (pos ? 1.0 : -1.0);
        data.push_back({FeatureVector::from_values(v, true),
                        pos ? Label::crackle : Label::normal});
    }
    return data;
}

TrainedModel make_model(ClassifierKind kind) {
    const auto data = training_data();
    TrainedModel model;
    model.meta.kind = kind;
    model.variant = train_classifier(kind, data, HyperParams{}, 33);
    // Scaler values are arbitrary here; persistence must keep them bit-exact.
    for (std::size_t d = 0; d < kFeatureCount; ++d) {
        model.scaler.means[d] = 0.1 * static_cast<double>(d) + 0.037;
        model.scaler.stds[d] = 1.0 + 0.01 * static_cast<double>(d);
    }
    return model;
}

std::vector<FeatureVector> probe_queries(std::size_t n) {
    Rng rng(202);
    std::vector<FeatureVector> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_scaled_features(rng));
    return out;
}

}  // namespace

TEST_CASE("every model kind round-trips to identical predictions on a probe set") {
    const auto queries = probe_queries(100);
    for (auto kind : {ClassifierKind::svm_rbf, ClassifierKind::svm_linear,
                      ClassifierKind::knn, ClassifierKind::adaboost,
                      ClassifierKind::dummy}) {
        const auto model = make_model(kind);
        const auto restored = load_model(save_model(model));
        CHECK(restored.meta.kind == kind);
        CHECK(restored.meta.version_tag == model.meta.version_tag);
        for (std::size_t q = 0; q < queries.size(); ++q) {
            const auto a = predict(model.variant, queries[q], q);
            const auto b = predict(restored.variant, queries[q], q);
            REQUIRE(a.label == b.label);
            REQUIRE(a.confidence == b.confidence);  // bit-identical
        }
        for (std::size_t d = 0; d < kFeatureCount; ++d) {
            REQUIRE(restored.scaler.means[d] == model.scaler.means[d]);
            REQUIRE(restored.scaler.stds[d] == model.scaler.stds[d]);
        }
    }
}

TEST_CASE("svm dual coefficients survive bit-for-bit") {
    const auto model = make_model(ClassifierKind::svm_rbf);
    const auto restored = load_model(save_model(model));
    const auto& a = std::get<SvmModel>(model.variant);
    const auto& b = std::get<SvmModel>(restored.variant);
    REQUIRE(a.dual_coefficients.size() == b.dual_coefficients.size());
    for (std::size_t i = 0; i < a.dual_coefficients.size(); ++i) {
        REQUIRE(std::memcmp(&a.dual_coefficients[i], &b.dual_coefficients[i],
                            sizeof(double)) == 0);
    }
    REQUIRE(a.bias == b.bias);
    REQUIRE(a.gamma == b.gamma);
    REQUIRE(a.c == b.c);
}

TEST_CASE("saving is deterministic") {
    const auto model = make_model(ClassifierKind::adaboost);
    CHECK(save_model(model) == save_model(model));
}

TEST_CASE("tampering and truncation are rejected") {
    const auto model = make_model(ClassifierKind::knn);
    auto bytes = save_model(model);

    SUBCASE("tampered version field is a versioned-format error") {
        auto bad = bytes;
        bad[4] = 0x7f;  // format version lives right after the magic
        CHECK_THROWS_AS(load_model(bad), FormatVersionError);
    }

    SUBCASE("bad magic") {
        auto bad = bytes;
        bad[0] = 'X';
        CHECK_THROWS_AS(load_model(bad), IntegrityError);
    }

    SUBCASE("truncated payload") {
        auto bad = bytes;
        bad.resize(bad.size() / 2);
        CHECK_THROWS_AS(load_model(bad), IntegrityError);
    }

    SUBCASE("flipped payload byte fails the checksum") {
        auto bad = bytes;
        bad[bad.size() / 2] ^= 0x40;
        CHECK_THROWS_AS(load_model(bad), IntegrityError);
    }

    SUBCASE("pristine bytes load fine") {
        CHECK_NOTHROW(load_model(bytes));
    }
}

TEST_CASE("file round trip") {
    const auto model = make_model(ClassifierKind::svm_linear);
    const std::string path = "test_model_io_roundtrip.cklm";
    save_model_file(model, path);
    const auto restored = load_model_file(path);
    CHECK(save_model(restored) == save_model(model));
    std::remove(path.c_str());
}

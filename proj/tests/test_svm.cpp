#include <doctest.h>

#include <cmath>

#include "crackle/classifiers.hpp"
#include "crackle/errors.hpp"
#include "crackle/rng.hpp"
#include "oracles.hpp"

using namespace crackle;

namespace {

LabeledSample sample_at(std::array<double, 5> v, Label label) {
    return {FeatureVector::from_values(v, true), label};
}

// Random two-class blobs in scaled feature space.
std::vector<LabeledSample> random_dataset(Rng& rng, std::size_t n) {
    std::vector<LabeledSample> data;
    for (std::size_t i = 0; i < n; ++i) {
        const bool pos = i % 2 == 0;
        std::array<double, 5> v{};
        for (auto& x : v) x = rng.next_gaussian() + (pos ? 0.8 : -0.8);
        data.push_back(sample_at(v, pos ? Label::crackle : Label::normal));
    }
    return data;
}

}  // namespace

TEST_CASE("two symmetric points put the linear boundary at zero with zero bias") {
    const std::vector<LabeledSample> data = {
        sample_at({-1, 0, 0, 0, 0}, Label::normal),
        sample_at({+1, 0, 0, 0, 0}, Label::crackle),
    };
    const auto model = train_svm(data, 1e6, Kernel::linear, 1.0);

    CHECK(std::abs(model.bias) < 1e-6);
    // Symmetric probes on either side of the first dimension.
    CHECK(svm_decision(model, FeatureVector::from_values({0.5, 0, 0, 0, 0}, true)) > 0.0);
    CHECK(svm_decision(model, FeatureVector::from_values({-0.5, 0, 0, 0, 0}, true)) < 0.0);
    CHECK(std::abs(svm_decision(model, FeatureVector::from_values({0, 0, 0, 0, 0}, true))) <
          1e-6);
    // The lone support vector keeps its own sign.
    CHECK(svm_decision(model, data[1].features) > 0.0);
}

TEST_CASE("XOR with the RBF kernel reaches 100% training accuracy") {
    const std::vector<LabeledSample> xor_data = {
        sample_at({+1, +1, 0, 0, 0}, Label::crackle),
        sample_at({-1, -1, 0, 0, 0}, Label::crackle),
        sample_at({+1, -1, 0, 0, 0}, Label::normal),
        sample_at({-1, +1, 0, 0, 0}, Label::normal),
    };
    const auto model = train_svm(xor_data, 1000.0, Kernel::rbf, 1.0);
    for (const auto& s : xor_data) {
        const double decision = svm_decision(model, s.features);
        CHECK((decision > 0.0) == (s.label == Label::crackle));
        // Decision values agree with the brute-force kernel expansion.
        CHECK(std::abs(decision - oracle::svm_decision(model, s.features)) < 1e-9);
    }
}

TEST_CASE("KKT feasibility holds after training on randomized datasets") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const auto data = random_dataset(rng, 10 + rng.next_below(40));
        const double c = std::exp2(static_cast<double>(rng.next_below(12)));
        const Kernel kernel = trial % 3 == 0 ? Kernel::linear : Kernel::rbf;
        const auto model = train_svm(data, c, kernel, 0.5);

        double coef_sum = 0.0;
        for (double d : model.dual_coefficients) {
            CHECK(std::abs(d) <= c + 1e-9);
            coef_sum += d;
        }
        CHECK(std::abs(coef_sum) < 1e-6);

        // Decision values match the independent oracle.
        for (int q = 0; q < 5; ++q) {
            const auto x = oracle::random_scaled_features(rng);
            CHECK(std::abs(svm_decision(model, x) - oracle::svm_decision(model, x)) <
                  1e-9);
        }
    }
}

TEST_CASE("RBF kernel is bounded by (0, 1] with equality only at zero distance") {
    Rng rng(5);
    const auto u = oracle::random_scaled_features(rng);
    CHECK(kernel_value(Kernel::rbf, 0.7, u, u) == 1.0);
    for (int i = 0; i < 20; ++i) {
        const auto v = oracle::random_scaled_features(rng);
        const double k = kernel_value(Kernel::rbf, 0.7, u, v);
        CHECK(k > 0.0);
        CHECK(k <= 1.0);
    }
}

TEST_CASE("single-class input is a training error") {
    const std::vector<LabeledSample> data = {
        sample_at({1, 0, 0, 0, 0}, Label::crackle),
        sample_at({2, 0, 0, 0, 0}, Label::crackle),
    };
    CHECK_THROWS_AS(train_svm(data, 10.0, Kernel::rbf, 0.2), TrainingError);
}

TEST_CASE("unscaled features are rejected") {
    const std::vector<LabeledSample> data = {
        {FeatureVector::from_values({1, 0, 0, 0, 0}, false), Label::crackle},
        {FeatureVector::from_values({-1, 0, 0, 0, 0}, false), Label::normal},
    };
    CHECK_THROWS_AS(train_svm(data, 10.0, Kernel::rbf, 0.2), TrainingError);
}

TEST_CASE("the predicted label is the sign of the decision value") {
    Rng rng(9);
    const auto data = random_dataset(rng, 40);
    const auto model = train_svm(data, 100.0, Kernel::rbf, 0.5);
    for (int q = 0; q < 50; ++q) {
        const auto x = oracle::random_scaled_features(rng);
        const double d = svm_decision(model, x);
        const auto p = svm_predict(model, x);
        CHECK(p.label == (d > 0.0 ? Label::crackle : Label::normal));
        CHECK(p.confidence >= 0.5);
        CHECK(p.confidence <= 1.0);
        // Any strictly monotone transform of the decision keeps the label.
        CHECK((std::tanh(3.0 * d) > 0.0) == (p.label == Label::crackle));
    }
}

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crackle/audio.hpp"
#include "crackle/classifiers.hpp"
#include "crackle/features.hpp"
#include "crackle/version.hpp"

namespace crackle {

struct ModelMetadata {
    std::string version_tag = kVersionTag;
    ClassifierKind kind = ClassifierKind::svm_rbf;
    HyperParams hyperparams;
    WindowParams window;
    FeatureParams feature_params;
};

// Persisted classifier: the fitted variant, the scaler fitted on the same
// training rows, and enough metadata to reproduce the windowing.
struct TrainedModel {
    ModelVariant variant;
    ScalerStats scaler;
    ModelMetadata meta;
};

// Versioned binary container (.cklm): magic, format version, length-prefixed
// sections, FNV-1a trailer. All reals are 64-bit IEEE little-endian, so a
// round trip reproduces decision values bit-identically.
std::vector<std::uint8_t> save_model(const TrainedModel& model);
TrainedModel load_model(std::span<const std::uint8_t> bytes);

void save_model_file(const TrainedModel& model, const std::string& path);
TrainedModel load_model_file(const std::string& path);

}  // namespace crackle

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stylespace/sampler.hpp"
#include "stylespace/vec.hpp"

namespace stylespace::embed {

struct AffineLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    Vec weights;  // row-major, out x in
    Vec bias;     // out
};

// The learned map from feature space into the style space: a stack of affine
// layers with a rectifier between consecutive layers and none after the last.
// Both members of a training pair pass through the same instance, so weight
// sharing holds by construction.
struct ProjectionModel {
    std::string version = "1";
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    std::vector<std::size_t> hidden_dims;
    std::vector<AffineLayer> layers;
};

struct TrainConfig {
    double margin = 1.0;
    double learning_rate = 0.05;
    double momentum = 0.9;
    int epochs = 30;
    int batch_size = 64;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden_dims;  // empty = single affine layer
};

struct LossTrace {
    std::vector<double> per_epoch_mean_loss;
    double final_train_loss = 0.0;
    double final_val_loss = 0.0;
};

struct LossGrad {
    double loss = 0.0;
    Vec grad_a;
    Vec grad_b;
};

ProjectionModel init_model(std::size_t input_dim, std::size_t output_dim,
                           const std::vector<std::size_t>& hidden_dims, std::uint64_t seed);

Vec embed(const ProjectionModel& model, const Vec& features);

// Squared-distance / squared-hinge contrastive objective:
//   positive: d^2, negative: max(0, margin - d)^2 with d = ||s_a - s_b||.
// Gradients use the zero subgradient at d = 0 and at the hinge boundary.
LossGrad contrastive_loss(const Vec& s_a, const Vec& s_b, sampler::PairLabel label,
                          double margin);

// Mini-batch gradient descent with momentum over the dataset's train pairs.
// Deterministic for a given seed. Throws NumericError naming the epoch if the
// loss stops being finite.
std::pair<ProjectionModel, LossTrace> train(ProjectionModel model,
                                            const FeatureMap& features,
                                            const sampler::PairDataset& dataset,
                                            const TrainConfig& config);

// Max relative error between analytic parameter gradients and central finite
// differences for one pair; denominator max(|analytic|, |numeric|, 1e-8).
double gradient_check(const ProjectionModel& model, const Vec& features_a,
                      const Vec& features_b, sampler::PairLabel label, double margin,
                      double epsilon);

struct SavedModel {
    ProjectionModel model;
    double margin = 1.0;
    std::uint64_t seed = 0;
};

void save_model(const ProjectionModel& model, double margin, std::uint64_t seed,
                const std::string& path);
SavedModel load_model(const std::string& path);

}  // namespace stylespace::embed

#include "stylespace/embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "stylespace/errors.hpp"
#include "stylespace/io_util.hpp"
#include "stylespace/rng.hpp"

namespace stylespace::embed {

namespace {

using sampler::PairLabel;

// Activations per layer: act[0] is the input, act[L] the style vector.
struct ForwardPass {
    std::vector<Vec> act;
    std::vector<Vec> pre;  // pre-activation of each layer
};

ForwardPass forward(const ProjectionModel& model, const Vec& x) {
    ForwardPass f;
    f.act.reserve(model.layers.size() + 1);
    f.pre.reserve(model.layers.size());
    f.act.push_back(x);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const AffineLayer& layer = model.layers[l];
        Vec z(layer.out);
        const Vec& in = f.act.back();
        for (std::size_t r = 0; r < layer.out; ++r) {
            double s = layer.bias[r];
            const double* wrow = layer.weights.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) s += wrow[c] * in[c];
            z[r] = s;
        }
        f.pre.push_back(z);
        if (l + 1 < model.layers.size()) {
            for (double& v : z) v = v > 0.0 ? v : 0.0;  // rectifier
        }
        f.act.push_back(std::move(z));
    }
    return f;
}

struct Gradients {
    std::vector<Vec> weights;
    std::vector<Vec> bias;

    explicit Gradients(const ProjectionModel& model) {
        for (const AffineLayer& l : model.layers) {
            weights.emplace_back(l.weights.size(), 0.0);
            bias.emplace_back(l.bias.size(), 0.0);
        }
    }

    void scale(double s) {
        for (auto& w : weights)
            for (double& v : w) v *= s;
        for (auto& b : bias)
            for (double& v : b) v *= s;
    }
};

// Accumulates d(loss)/d(params) for one branch given d(loss)/d(output).
void backward(const ProjectionModel& model, const ForwardPass& f, Vec delta,
              Gradients& grads) {
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const AffineLayer& layer = model.layers[l];
        if (l + 1 < model.layers.size()) {
            // through the rectifier; zero subgradient at 0
            for (std::size_t r = 0; r < layer.out; ++r) {
                if (f.pre[l][r] <= 0.0) delta[r] = 0.0;
            }
        }
        const Vec& in = f.act[l];
        for (std::size_t r = 0; r < layer.out; ++r) {
            grads.bias[l][r] += delta[r];
            double* grow = grads.weights[l].data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) grow[c] += delta[r] * in[c];
        }
        if (l == 0) break;
        Vec prev(layer.in, 0.0);
        for (std::size_t r = 0; r < layer.out; ++r) {
            const double* wrow = layer.weights.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) prev[c] += wrow[c] * delta[r];
        }
        delta = std::move(prev);
    }
}

double pair_loss(const ProjectionModel& model, const Vec& fa, const Vec& fb,
                 PairLabel label, double margin) {
    return contrastive_loss(embed(model, fa), embed(model, fb), label, margin).loss;
}

// Extended-precision loss for the finite-difference probe. The loss is
// translation invariant, so some parameters (output biases) have an exactly
// zero gradient; double-precision round-off in the loss difference would
// otherwise masquerade as gradient error once divided by 2*epsilon.
std::vector<long double> forward_ld(const ProjectionModel& model, const Vec& x) {
    std::vector<long double> act(x.begin(), x.end());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const AffineLayer& layer = model.layers[l];
        std::vector<long double> next(layer.out);
        for (std::size_t r = 0; r < layer.out; ++r) {
            long double s = layer.bias[r];
            const double* wrow = layer.weights.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) s += static_cast<long double>(wrow[c]) * act[c];
            if (l + 1 < model.layers.size() && s < 0.0L) s = 0.0L;
            next[r] = s;
        }
        act = std::move(next);
    }
    return act;
}

long double pair_loss_ld(const ProjectionModel& model, const Vec& fa, const Vec& fb,
                         PairLabel label, double margin) {
    const auto sa = forward_ld(model, fa);
    const auto sb = forward_ld(model, fb);
    long double d2 = 0.0L;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        const long double d = sa[i] - sb[i];
        d2 += d * d;
    }
    if (label == PairLabel::positive) return d2;
    const long double gap = static_cast<long double>(margin) - std::sqrt(d2);
    return gap > 0.0L ? gap * gap : 0.0L;
}

double mean_loss(const ProjectionModel& model, const FeatureMap& features,
                 const std::vector<sampler::Pair>& pairs, double margin) {
    if (pairs.empty()) return 0.0;
    double total = 0.0;
    for (const auto& p : pairs) {
        total += pair_loss(model, features.at(p.a), features.at(p.b), p.label, margin);
    }
    return total / static_cast<double>(pairs.size());
}

void check_pair_features(const FeatureMap& features, const std::vector<sampler::Pair>& pairs) {
    for (const auto& p : pairs) {
        if (!features.count(p.a)) throw LookupError("no feature vector for item '" + p.a + "'");
        if (!features.count(p.b)) throw LookupError("no feature vector for item '" + p.b + "'");
    }
}

}  // namespace

ProjectionModel init_model(std::size_t input_dim, std::size_t output_dim,
                           const std::vector<std::size_t>& hidden_dims, std::uint64_t seed) {
    if (input_dim == 0 || output_dim == 0) {
        throw ConfigError("model dimensions must be positive");
    }
    for (std::size_t h : hidden_dims) {
        if (h == 0) throw ConfigError("hidden dimensions must be positive");
    }
    ProjectionModel model;
    model.input_dim = input_dim;
    model.output_dim = output_dim;
    model.hidden_dims = hidden_dims;

    std::vector<std::size_t> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(output_dim);

    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        AffineLayer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.weights.resize(layer.in * layer.out);
        layer.bias.assign(layer.out, 0.0);
        Rng rng(mix_seed(seed, "init/layer" + std::to_string(l)));
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
        for (double& w : layer.weights) w = rng.uniform(-bound, bound);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

Vec embed(const ProjectionModel& model, const Vec& features) {
    if (features.size() != model.input_dim) {
        throw DimensionError("embed: expected " + std::to_string(model.input_dim) +
                             " features, got " + std::to_string(features.size()));
    }
    return forward(model, features).act.back();
}

LossGrad contrastive_loss(const Vec& s_a, const Vec& s_b, PairLabel label, double margin) {
    if (s_a.size() != s_b.size()) {
        throw DimensionError("contrastive_loss: embedding lengths differ");
    }
    if (!(margin > 0.0)) throw ConfigError("margin must be positive");
    if (!all_finite(s_a) || !all_finite(s_b)) {
        throw NumericError("contrastive_loss: non-finite embedding");
    }

    LossGrad out;
    out.grad_a.assign(s_a.size(), 0.0);
    out.grad_b.assign(s_b.size(), 0.0);
    const double d2 = squared_distance(s_a, s_b);
    const double d = std::sqrt(d2);

    if (label == PairLabel::positive) {
        out.loss = d2;
        for (std::size_t i = 0; i < s_a.size(); ++i) {
            const double g = 2.0 * (s_a[i] - s_b[i]);
            out.grad_a[i] = g;
            out.grad_b[i] = -g;
        }
        return out;
    }
    const double gap = margin - d;
    if (gap <= 0.0 || d == 0.0) {
        // hinge inactive, or the declared zero subgradient at d = 0
        out.loss = gap > 0.0 ? gap * gap : 0.0;
        return out;
    }
    out.loss = gap * gap;
    const double coeff = -2.0 * gap / d;
    for (std::size_t i = 0; i < s_a.size(); ++i) {
        const double g = coeff * (s_a[i] - s_b[i]);
        out.grad_a[i] = g;
        out.grad_b[i] = -g;
    }
    return out;
}

std::pair<ProjectionModel, LossTrace> train(ProjectionModel model,
                                            const FeatureMap& features,
                                            const sampler::PairDataset& dataset,
                                            const TrainConfig& config) {
    if (!(config.margin > 0.0)) throw ConfigError("margin must be positive");
    if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (config.momentum < 0.0 || config.momentum >= 1.0) {
        throw ConfigError("momentum must lie in [0, 1)");
    }
    if (config.epochs < 0) throw ConfigError("epochs must be nonnegative");
    if (config.batch_size < 1) throw ConfigError("batch_size must be positive");
    if (dataset.train.empty()) throw EmptyInputError("train: empty training pair set");
    check_pair_features(features, dataset.train);
    check_pair_features(features, dataset.validation);

    LossTrace trace;
    if (config.epochs == 0) {
        trace.final_train_loss = mean_loss(model, features, dataset.train, config.margin);
        trace.final_val_loss = mean_loss(model, features, dataset.validation, config.margin);
        return {std::move(model), std::move(trace)};
    }

    Gradients velocity(model);
    Gradients grads(model);
    std::vector<std::size_t> order(dataset.train.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(mix_seed(config.seed, "train/shuffle"));

    const std::size_t n = dataset.train.size();
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_total = 0.0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t end = std::min(n, start + config.batch_size);
            const double batch_n = static_cast<double>(end - start);
            for (auto& w : grads.weights) std::fill(w.begin(), w.end(), 0.0);
            for (auto& b : grads.bias) std::fill(b.begin(), b.end(), 0.0);

            for (std::size_t i = start; i < end; ++i) {
                const sampler::Pair& p = dataset.train[order[i]];
                ForwardPass fa = forward(model, features.at(p.a));
                ForwardPass fb = forward(model, features.at(p.b));
                LossGrad lg = contrastive_loss(fa.act.back(), fb.act.back(), p.label,
                                               config.margin);
                epoch_total += lg.loss;
                backward(model, fa, std::move(lg.grad_a), grads);
                backward(model, fb, std::move(lg.grad_b), grads);
            }
            grads.scale(1.0 / batch_n);
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                AffineLayer& layer = model.layers[l];
                for (std::size_t i = 0; i < layer.weights.size(); ++i) {
                    double& v = velocity.weights[l][i];
                    v = config.momentum * v - config.learning_rate * grads.weights[l][i];
                    layer.weights[i] += v;
                }
                for (std::size_t i = 0; i < layer.bias.size(); ++i) {
                    double& v = velocity.bias[l][i];
                    v = config.momentum * v - config.learning_rate * grads.bias[l][i];
                    layer.bias[i] += v;
                }
            }
        }
        const double epoch_mean = epoch_total / static_cast<double>(n);
        if (!std::isfinite(epoch_mean)) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch));
        }
        trace.per_epoch_mean_loss.push_back(epoch_mean);
    }
    trace.final_train_loss = mean_loss(model, features, dataset.train, config.margin);
    trace.final_val_loss = mean_loss(model, features, dataset.validation, config.margin);
    if (!std::isfinite(trace.final_train_loss) || !std::isfinite(trace.final_val_loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(config.epochs - 1));
    }
    return {std::move(model), std::move(trace)};
}

double gradient_check(const ProjectionModel& model, const Vec& features_a,
                      const Vec& features_b, sampler::PairLabel label, double margin,
                      double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1e-3) {
        throw ConfigError("epsilon must lie in (0, 1e-3]");
    }

    ForwardPass fa = forward(model, features_a);
    ForwardPass fb = forward(model, features_b);
    LossGrad lg = contrastive_loss(fa.act.back(), fb.act.back(), label, margin);
    Gradients analytic(model);
    backward(model, fa, std::move(lg.grad_a), analytic);
    backward(model, fb, std::move(lg.grad_b), analytic);

    ProjectionModel probe = model;
    double max_rel = 0.0;
    auto compare = [&](double* param, double analytic_g) {
        const double saved = *param;
        *param = saved + epsilon;
        const long double up = pair_loss_ld(probe, features_a, features_b, label, margin);
        *param = saved - epsilon;
        const long double down = pair_loss_ld(probe, features_a, features_b, label, margin);
        *param = saved;
        const double numeric =
            static_cast<double>((up - down) / (2.0L * static_cast<long double>(epsilon)));
        const double denom = std::max({std::abs(analytic_g), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(analytic_g - numeric) / denom);
    };
    for (std::size_t l = 0; l < probe.layers.size(); ++l) {
        AffineLayer& layer = probe.layers[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            compare(&layer.weights[i], analytic.weights[l][i]);
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            compare(&layer.bias[i], analytic.bias[l][i]);
        }
    }
    return max_rel;
}

void save_model(const ProjectionModel& model, double margin, std::uint64_t seed,
                const std::string& path) {
    for (const AffineLayer& l : model.layers) {
        if (!all_finite(l.weights) || !all_finite(l.bias)) {
            throw NumericError("save_model: non-finite weights");
        }
    }
    nlohmann::json j;
    j["version"] = model.version;
    j["input_dim"] = model.input_dim;
    j["output_dim"] = model.output_dim;
    j["hidden_dims"] = model.hidden_dims;
    j["margin"] = margin;
    j["seed"] = seed;
    nlohmann::json layers = nlohmann::json::array();
    for (const AffineLayer& l : model.layers) {
        layers.push_back({{"w", l.weights}, {"b", l.bias}});
    }
    j["layers"] = std::move(layers);
    atomic_write(path, j.dump(2) + "\n");
}

SavedModel load_model(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        SavedModel out;
        out.model.version = j.value("version", std::string("1"));
        out.model.input_dim = j.at("input_dim").get<std::size_t>();
        out.model.output_dim = j.at("output_dim").get<std::size_t>();
        out.model.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
        out.margin = j.value("margin", 1.0);
        out.seed = j.value("seed", 0ull);
        std::vector<std::size_t> dims;
        dims.push_back(out.model.input_dim);
        for (std::size_t h : out.model.hidden_dims) dims.push_back(h);
        dims.push_back(out.model.output_dim);
        const auto& layers = j.at("layers");
        if (layers.size() + 1 != dims.size()) {
            throw DimensionError(path + ": layer count does not match dimensions");
        }
        for (std::size_t l = 0; l < layers.size(); ++l) {
            AffineLayer layer;
            layer.in = dims[l];
            layer.out = dims[l + 1];
            layer.weights = layers[l].at("w").get<Vec>();
            layer.bias = layers[l].at("b").get<Vec>();
            if (layer.weights.size() != layer.in * layer.out ||
                layer.bias.size() != layer.out) {
                throw DimensionError(path + ": layer " + std::to_string(l) +
                                     " has inconsistent shape");
            }
            if (!all_finite(layer.weights) || !all_finite(layer.bias)) {
                throw NumericError(path + ": non-finite weights in layer " + std::to_string(l));
            }
            out.model.layers.push_back(std::move(layer));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace stylespace::embed

#include "stylespace/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "stylespace/errors.hpp"
#include "stylespace/rng.hpp"

namespace stylespace::synth {

namespace {

void validate(const SynthConfig& c) {
    if (c.num_categories < 2) throw ConfigError("num_categories must be >= 2");
    if (c.items_per_category < 2) throw ConfigError("items_per_category must be >= 2");
    if (c.latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
    if (c.feature_dim < c.latent_dim) throw ConfigError("feature_dim must be >= latent_dim");
    if (c.feature_noise < 0.0) throw ConfigError("feature_noise must be nonnegative");
    if (!(c.edge_bandwidth > 0.0)) throw ConfigError("edge_bandwidth must be positive");
    if (c.edges_per_item < 0.0) throw ConfigError("edges_per_item must be nonnegative");
    if (c.label_noise_rate < 0.0 || c.label_noise_rate > 1.0) {
        throw ConfigError("label_noise_rate must lie in [0, 1]");
    }
    if (c.identity_lift && c.feature_dim != c.latent_dim + c.num_categories) {
        throw ConfigError("identity_lift requires feature_dim == latent_dim + num_categories");
    }
}

// Water-filling for the scale factor c in p = min(1, c * w): exact solution
// of sum(min(1, c * w_i)) = target over the sorted weights.
double calibrate_scale(std::vector<double> weights, double target) {
    const double n = static_cast<double>(weights.size());
    if (target > n) {
        throw NumericError("infeasible degree target: wants " + std::to_string(target) +
                           " expected edges but only " + std::to_string(weights.size()) +
                           " cross-category pairs exist");
    }
    if (target <= 0.0) return 0.0;
    std::sort(weights.begin(), weights.end(), std::greater<double>());
    double tail_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::size_t capped = 0;
    while (capped < weights.size()) {
        if (tail_sum <= 0.0) break;
        const double c = (target - static_cast<double>(capped)) / tail_sum;
        if (c * weights[capped] <= 1.0) return c;
        tail_sum -= weights[capped];
        ++capped;
    }
    // every pair capped at probability 1
    return std::numeric_limits<double>::infinity();
}

}  // namespace

std::string category_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "cat%02d", index);
    return buf;
}

GeneratedCatalog generate_catalog(const SynthConfig& config) {
    validate(config);

    const int n_items = config.num_categories * config.items_per_category;
    const int lift_in = config.latent_dim + config.num_categories;

    std::vector<std::string> ids(n_items);
    std::vector<int> category_of(n_items);
    std::vector<Vec> styles(n_items);
    {
        Rng rng(mix_seed(config.seed, "synth/style"));
        int idx = 0;
        for (int c = 0; c < config.num_categories; ++c) {
            for (int i = 0; i < config.items_per_category; ++i, ++idx) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "c%02d_%05d", c, i);
                ids[idx] = buf;
                category_of[idx] = c;
                Vec s(config.latent_dim);
                for (double& v : s) v = rng.uniform();
                styles[idx] = std::move(s);
            }
        }
    }

    // Fixed random affine lift (or the identity hook for tests).
    std::vector<Vec> lift(config.feature_dim, Vec(lift_in, 0.0));
    Vec lift_bias(config.feature_dim, 0.0);
    if (config.identity_lift) {
        for (int r = 0; r < config.feature_dim; ++r) lift[r][r] = 1.0;
    } else {
        Rng rng(mix_seed(config.seed, "synth/lift"));
        const double scale = 1.0 / std::sqrt(static_cast<double>(lift_in));
        for (auto& row : lift) {
            for (double& v : row) v = rng.normal() * scale;
        }
        for (double& v : lift_bias) v = rng.normal() * scale;
    }

    std::vector<graph::Item> items(n_items);
    {
        Rng noise_rng(mix_seed(config.seed, "synth/feature-noise"));
        for (int i = 0; i < n_items; ++i) {
            Vec input(lift_in, 0.0);
            std::copy(styles[i].begin(), styles[i].end(), input.begin());
            input[config.latent_dim + category_of[i]] = 1.0;
            Vec f(config.feature_dim);
            for (int r = 0; r < config.feature_dim; ++r) {
                double s = lift_bias[r];
                for (int c = 0; c < lift_in; ++c) s += lift[r][c] * input[c];
                f[r] = s;
            }
            if (config.feature_noise > 0.0) {
                for (double& v : f) v += noise_rng.normal() * config.feature_noise;
            }
            items[i].id = ids[i];
            items[i].category = category_name(category_of[i]);
            items[i].features = std::move(f);
            items[i].planted_style = styles[i];
        }
    }

    // Cross-category edges, style-affine probabilities calibrated to the
    // target mean degree.
    std::vector<graph::Edge> edges;
    {
        const double inv_sigma2 = 1.0 / (config.edge_bandwidth * config.edge_bandwidth);
        std::vector<double> weights;
        weights.reserve(static_cast<std::size_t>(n_items) * (n_items - 1) / 2);
        for (int i = 0; i < n_items; ++i) {
            for (int j = i + 1; j < n_items; ++j) {
                if (category_of[i] == category_of[j]) continue;
                weights.push_back(
                    std::exp(-squared_distance(styles[i], styles[j]) * inv_sigma2));
            }
        }
        const double target_edges =
            static_cast<double>(n_items) * config.edges_per_item / 2.0;
        const double scale = calibrate_scale(weights, target_edges);

        Rng rng(mix_seed(config.seed, "synth/edges"));
        std::size_t w = 0;
        for (int i = 0; i < n_items; ++i) {
            for (int j = i + 1; j < n_items; ++j) {
                if (category_of[i] == category_of[j]) continue;
                const double p = std::min(1.0, scale * weights[w++]);
                if (rng.uniform() < p) edges.emplace_back(ids[i], ids[j]);
            }
        }
    }

    GeneratedCatalog out;
    for (int i = 0; i < n_items; ++i) {
        out.generated_category.emplace(ids[i], items[i].category);
    }

    // Label noise: relabel a fixed fraction of items to a uniformly chosen
    // *different* category; features and styles stay put.
    const auto flips = static_cast<std::size_t>(
        std::llround(config.label_noise_rate * static_cast<double>(n_items)));
    if (flips > 0) {
        Rng rng(mix_seed(config.seed, "synth/label-noise"));
        std::vector<std::size_t> order(n_items);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        for (std::size_t f = 0; f < flips; ++f) {
            const std::size_t i = order[f];
            int new_cat = static_cast<int>(rng.index(config.num_categories - 1));
            if (new_cat >= category_of[i]) ++new_cat;
            items[i].category = category_name(new_cat);
            out.relabeled_ids.push_back(ids[i]);
        }
        std::sort(out.relabeled_ids.begin(), out.relabeled_ids.end());
    }

    out.catalog = graph::Catalog::build(std::move(items), std::move(edges));
    return out;
}

}  // namespace stylespace::synth

// stylespace: learn a cross-category style space from co-occurrence data and
// retrieve compatible items from it. One subcommand per pipeline stage; all
// state flows through files, every stage is re-runnable and seed-stable.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stylespace/embed.hpp"
#include "stylespace/errors.hpp"
#include "stylespace/eval.hpp"
#include "stylespace/graph.hpp"
#include "stylespace/io_util.hpp"
#include "stylespace/retrieve.hpp"
#include "stylespace/rng.hpp"
#include "stylespace/sampler.hpp"
#include "stylespace/synth.hpp"
#include "stylespace/vec.hpp"

namespace {

using namespace stylespace;

std::array<double, 3> parse_ratios(const std::string& text) {
    std::array<double, 3> ratios{};
    int part = 0;
    std::string cur;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ':') {
            if (part >= 3) throw ConfigError("--ratios expects three values, e.g. 80:1:19");
            try {
                ratios[part++] = std::stod(cur);
            } catch (const std::exception&) {
                throw ConfigError("--ratios: cannot parse '" + cur + "'");
            }
            cur.clear();
        } else {
            cur += text[i];
        }
    }
    if (part != 3) throw ConfigError("--ratios expects three values, e.g. 80:1:19");
    return ratios;
}

std::vector<std::size_t> parse_hidden(const std::string& text) {
    std::vector<std::size_t> dims;
    if (text.empty()) return dims;
    std::string cur;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            if (cur.empty()) continue;
            try {
                dims.push_back(static_cast<std::size_t>(std::stoull(cur)));
            } catch (const std::exception&) {
                throw ConfigError("--hidden: cannot parse '" + cur + "'");
            }
            cur.clear();
        } else {
            cur += text[i];
        }
    }
    return dims;
}

void print_notes(const std::vector<std::string>& notes) {
    for (const auto& n : notes) std::cerr << "note: " << n << "\n";
}

struct Options {
    std::string items, edges, splits, pairs, model, index, report;
    std::string out_items, out_edges, outfit_spec;
    std::string strategy = "strategic";
    std::string holdout_category;
    std::string ratios = "80:1:19";
    std::string hidden;
    std::string query, target, cat_a, cat_b, eval_split = "test";
    int neg_ratio = 16;
    double test_neg_ratio = 1.0;
    int positives = 1000;
    double margin = 1.0;
    double lr = 0.05;
    double momentum = 0.9;
    int epochs = 30;
    int batch = 64;
    int dim = 256;
    int k = 20;
    int n = 5;
    int bins = 50;
    int trials = 100;
    double tol = 1e-4;
    double eps = 1e-5;
    std::uint64_t seed = 0;
    // synth parameters
    int categories = 5;
    int items_per_category = 100;
    int latent_dim = 2;
    int feature_dim = 16;
    double feature_noise = 0.05;
    double bandwidth = 0.25;
    double degree = 4.0;
    double label_noise = 0.0;
};

int cmd_synth(const Options& o) {
    synth::SynthConfig cfg;
    cfg.num_categories = o.categories;
    cfg.items_per_category = o.items_per_category;
    cfg.latent_dim = o.latent_dim;
    cfg.feature_dim = o.feature_dim;
    cfg.feature_noise = o.feature_noise;
    cfg.edge_bandwidth = o.bandwidth;
    cfg.edges_per_item = o.degree;
    cfg.label_noise_rate = o.label_noise;
    cfg.seed = mix_seed(o.seed, "synth");
    auto generated = synth::generate_catalog(cfg);
    graph::save_items_jsonl(generated.catalog, o.items);
    graph::save_edges_csv(generated.catalog, o.edges);
    std::cout << "synth items=" << generated.catalog.items().size()
              << " edges=" << generated.catalog.edges().size()
              << " relabeled=" << generated.relabeled_ids.size()
              << " items_file=" << o.items << " edges_file=" << o.edges << "\n";
    return 0;
}

int cmd_clean(const Options& o) {
    auto catalog = graph::load_catalog(o.items, o.edges);
    auto cleaned = graph::clean(catalog);
    graph::save_items_jsonl(cleaned, o.out_items);
    graph::save_edges_csv(cleaned, o.out_edges);
    std::cout << "clean items_in=" << catalog.items().size()
              << " items_out=" << cleaned.items().size()
              << " edges_in=" << catalog.edges().size()
              << " edges_out=" << cleaned.edges().size() << "\n";
    return 0;
}

int cmd_split(const Options& o) {
    auto catalog = graph::load_catalog(o.items, o.edges);
    std::vector<std::string> warnings;
    auto split = graph::split_items(catalog, parse_ratios(o.ratios),
                                    mix_seed(o.seed, "split"), &warnings);
    print_notes(warnings);
    graph::save_split(split, o.splits);
    std::cout << "split train=" << split.train.size()
              << " val=" << split.validation.size()
              << " test=" << split.test.size() << " out=" << o.splits << "\n";
    return 0;
}

int cmd_sample(const Options& o) {
    auto catalog = graph::load_catalog(o.items, o.edges);
    auto split = graph::load_split(o.splits);
    sampler::SamplerConfig cfg;
    if (o.strategy == "naive") cfg.strategy = sampler::Strategy::naive;
    else if (o.strategy == "strategic") cfg.strategy = sampler::Strategy::strategic;
    else if (o.strategy == "holdout") cfg.strategy = sampler::Strategy::holdout;
    else throw ConfigError("--strategy must be naive, strategic or holdout");
    cfg.holdout_category = o.holdout_category;
    cfg.negatives_per_positive_train = o.neg_ratio;
    cfg.test_negative_ratio = o.test_neg_ratio;
    cfg.target_positive_count = o.positives;
    cfg.seed = mix_seed(o.seed, "sample");
    auto dataset = sampler::build_pair_dataset(catalog, split, cfg);
    print_notes(dataset.notes);
    sampler::save_pairs_csv(dataset, o.pairs);
    std::cout << "sample train=" << dataset.train.size()
              << " val=" << dataset.validation.size()
              << " test=" << dataset.test.size() << " out=" << o.pairs << "\n";
    return 0;
}

int cmd_train(const Options& o) {
    auto catalog = graph::load_catalog(o.items, "");
    auto dataset = sampler::load_pairs_csv(o.pairs);
    embed::TrainConfig cfg;
    cfg.margin = o.margin;
    cfg.learning_rate = o.lr;
    cfg.momentum = o.momentum;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch;
    cfg.seed = mix_seed(o.seed, "train");
    cfg.hidden_dims = parse_hidden(o.hidden);
    auto model = embed::init_model(catalog.feature_dim(), o.dim, cfg.hidden_dims,
                                   mix_seed(cfg.seed, "init"));
    auto features = graph::feature_map(catalog);
    auto [trained, trace] = embed::train(std::move(model), features, dataset, cfg);
    embed::save_model(trained, cfg.margin, cfg.seed, o.model);
    std::cout << "train epochs=" << trace.per_epoch_mean_loss.size()
              << " final_train_loss=" << format_double(trace.final_train_loss)
              << " final_val_loss=" << format_double(trace.final_val_loss)
              << " out=" << o.model << "\n";
    return 0;
}

int cmd_eval(const Options& o) {
    auto catalog = graph::load_catalog(o.items, "");
    auto dataset = sampler::load_pairs_csv(o.pairs);
    auto saved = embed::load_model(o.model);
    const std::vector<sampler::Pair>* pairs = &dataset.test;
    if (o.eval_split == "train") pairs = &dataset.train;
    else if (o.eval_split == "val") pairs = &dataset.validation;
    else if (o.eval_split != "test") throw ConfigError("--split must be train, val or test");
    auto features = graph::feature_map(catalog);
    auto report = eval::evaluate(saved.model, features, *pairs, o.bins);
    eval::save_report(report, o.report);
    std::cout << "eval split=" << o.eval_split << " auc=" << format_double(report.auc)
              << " positives=" << report.positives << " negatives=" << report.negatives
              << " out=" << o.report << "\n";
    return 0;
}

int cmd_index(const Options& o) {
    auto catalog = graph::load_catalog(o.items, "");
    auto saved = embed::load_model(o.model);
    std::vector<std::string> notes;
    auto index = retrieve::build_style_index(catalog, saved.model, o.k,
                                             mix_seed(o.seed, "index"), 100, &notes);
    print_notes(notes);
    retrieve::save_index(index, o.index);
    std::cout << "index categories=" << index.categories.size() << " k=" << o.k
              << " out=" << o.index << "\n";
    return 0;
}

int cmd_retrieve(const Options& o) {
    auto index = retrieve::load_index(o.index);
    const Vec* style = index.style_of(o.query);
    Vec embedded;
    if (!style) {
        if (o.items.empty() || o.model.empty()) {
            throw LookupError("query '" + o.query +
                              "' is not indexed; pass --items and --model to embed it");
        }
        auto catalog = graph::load_catalog(o.items, "");
        auto saved = embed::load_model(o.model);
        embedded = embed::embed(saved.model, catalog.at(o.query).features);
        style = &embedded;
    }
    const std::string result = retrieve::robust_retrieve(*style, index, o.target, o.n);
    std::cout << "retrieve query=" << o.query << " target=" << o.target
              << " n=" << o.n << " item=" << result << "\n";
    return 0;
}

int cmd_outfit(const Options& o) {
    auto catalog = graph::load_catalog(o.items, "");
    auto saved = embed::load_model(o.model);
    auto index = retrieve::load_index(o.index);
    auto specs = retrieve::load_outfit_specs(o.outfit_spec);
    const std::string query_category = catalog.at(o.query).category;
    const retrieve::OutfitSpec* matching = nullptr;
    for (const auto& spec : specs) {
        if (std::find(spec.categories.begin(), spec.categories.end(), query_category) !=
            spec.categories.end()) {
            matching = &spec;
            break;
        }
    }
    if (!matching) {
        throw ConfigError("no outfit spec contains the query category '" + query_category + "'");
    }
    auto outfit = retrieve::generate_outfit(o.query, *matching, index, saved.model, catalog, o.n);
    std::cout << "outfit query=" << outfit.query;
    for (const auto& [cat, id] : outfit.members) std::cout << " " << cat << "=" << id;
    std::cout << "\n";
    return 0;
}

int cmd_affinity(const Options& o) {
    auto index = retrieve::load_index(o.index);
    auto affinity = retrieve::cluster_pair_affinity(index, o.cat_a, o.cat_b);
    std::cout << "affinity cat_a=" << o.cat_a << " cat_b=" << o.cat_b
              << " closest=" << affinity.closest.cluster_a << ":" << affinity.closest.cluster_b
              << " closest_dist=" << format_double(affinity.closest.distance)
              << " farthest=" << affinity.farthest.cluster_a << ":"
              << affinity.farthest.cluster_b
              << " farthest_dist=" << format_double(affinity.farthest.distance) << "\n";
    return 0;
}

int cmd_gradcheck(const Options& o) {
    Rng rng(mix_seed(o.seed, "gradcheck"));
    double worst = 0.0;
    int done = 0;
    long budget = 200L * o.trials + 1000;
    while (done < o.trials && budget-- > 0) {
        const std::size_t d = 2 + rng.index(6);
        const std::size_t k = 1 + rng.index(4);
        std::vector<std::size_t> hidden;
        if (rng.uniform() < 0.5) hidden.push_back(2 + rng.index(4));
        auto model = embed::init_model(d, k, hidden, rng.next_u64());
        Vec fa(d), fb(d);
        for (double& v : fa) v = rng.uniform(-1.0, 1.0);
        for (double& v : fb) v = rng.uniform(-1.0, 1.0);
        const auto label = rng.uniform() < 0.5 ? sampler::PairLabel::positive
                                               : sampler::PairLabel::negative;
        const double margin = rng.uniform(0.5, 2.0);
        // central differences are undefined at the hinge boundary and at
        // d = 0 for negatives; sample away from those points
        const double dist = distance(embed::embed(model, fa), embed::embed(model, fb));
        if (label == sampler::PairLabel::negative &&
            (std::abs(dist - margin) < 50 * o.eps || dist < 50 * o.eps)) {
            continue;
        }
        worst = std::max(worst, embed::gradient_check(model, fa, fb, label, margin, o.eps));
        ++done;
    }
    std::cout << "gradcheck trials=" << done << " max_rel_err=" << format_double(worst)
              << " tol=" << format_double(o.tol) << "\n";
    return done == o.trials && worst < o.tol ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stylespace: cross-category style embeddings from co-occurrence data"};
    app.require_subcommand(1);
    Options o;

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic catalog");
    synth_cmd->add_option("--items", o.items, "output items.jsonl")->required();
    synth_cmd->add_option("--edges", o.edges, "output edges.csv")->required();
    synth_cmd->add_option("--categories", o.categories, "number of categories");
    synth_cmd->add_option("--items-per-category", o.items_per_category, "items per category");
    synth_cmd->add_option("--latent-dim", o.latent_dim, "planted style dimension");
    synth_cmd->add_option("--feature-dim", o.feature_dim, "feature dimension");
    synth_cmd->add_option("--feature-noise", o.feature_noise, "feature noise std");
    synth_cmd->add_option("--bandwidth", o.bandwidth, "edge probability bandwidth");
    synth_cmd->add_option("--degree", o.degree, "target average degree");
    synth_cmd->add_option("--label-noise", o.label_noise, "label noise rate");
    synth_cmd->add_option("--seed", o.seed, "global seed");

    auto* clean_cmd = app.add_subcommand("clean", "drop unlabeled and duplicate items");
    clean_cmd->add_option("--items", o.items, "input items.jsonl")->required();
    clean_cmd->add_option("--edges", o.edges, "input edges.csv")->required();
    clean_cmd->add_option("--out-items", o.out_items, "output items.jsonl")->required();
    clean_cmd->add_option("--out-edges", o.out_edges, "output edges.csv")->required();

    auto* split_cmd = app.add_subcommand("split", "stratified train/validation/test item split");
    split_cmd->add_option("--items", o.items, "input items.jsonl")->required();
    split_cmd->add_option("--edges", o.edges, "input edges.csv (optional)");
    split_cmd->add_option("--splits", o.splits, "output splits.json")->required();
    split_cmd->add_option("--ratios", o.ratios, "train:val:test ratios (default 80:1:19)");
    split_cmd->add_option("--seed", o.seed, "global seed");

    auto* sample_cmd = app.add_subcommand("sample", "build labeled pair datasets");
    sample_cmd->add_option("--items", o.items, "input items.jsonl")->required();
    sample_cmd->add_option("--edges", o.edges, "input edges.csv")->required();
    sample_cmd->add_option("--splits", o.splits, "input splits.json")->required();
    sample_cmd->add_option("--pairs", o.pairs, "output pairs.csv")->required();
    sample_cmd->add_option("--strategy", o.strategy, "naive|strategic|holdout");
    sample_cmd->add_option("--holdout-category", o.holdout_category, "holdout category name");
    sample_cmd->add_option("--neg-ratio", o.neg_ratio, "train negatives per positive");
    sample_cmd->add_option("--test-neg-ratio", o.test_neg_ratio,
                           "validation/test negatives per positive");
    sample_cmd->add_option("--positives", o.positives, "train positive target count");
    sample_cmd->add_option("--seed", o.seed, "global seed");

    auto* train_cmd = app.add_subcommand("train", "train the style projection");
    train_cmd->add_option("--items", o.items, "input items.jsonl")->required();
    train_cmd->add_option("--pairs", o.pairs, "input pairs.csv")->required();
    train_cmd->add_option("--model", o.model, "output model.json")->required();
    train_cmd->add_option("--margin", o.margin, "contrastive margin");
    train_cmd->add_option("--lr", o.lr, "learning rate");
    train_cmd->add_option("--momentum", o.momentum, "momentum");
    train_cmd->add_option("--epochs", o.epochs, "training epochs");
    train_cmd->add_option("--batch", o.batch, "batch size");
    train_cmd->add_option("--dim", o.dim, "style space dimension");
    train_cmd->add_option("--hidden", o.hidden, "hidden layer sizes, comma separated");
    train_cmd->add_option("--seed", o.seed, "global seed");

    auto* eval_cmd = app.add_subcommand("eval", "link-prediction report for a model");
    eval_cmd->add_option("--items", o.items, "input items.jsonl")->required();
    eval_cmd->add_option("--pairs", o.pairs, "input pairs.csv")->required();
    eval_cmd->add_option("--model", o.model, "input model.json")->required();
    eval_cmd->add_option("--report", o.report, "output report.json")->required();
    eval_cmd->add_option("--split", o.eval_split, "train|val|test (default test)");
    eval_cmd->add_option("--bins", o.bins, "histogram bins");

    auto* index_cmd = app.add_subcommand("index", "build per-category style indices");
    index_cmd->add_option("--items", o.items, "input items.jsonl")->required();
    index_cmd->add_option("--model", o.model, "input model.json")->required();
    index_cmd->add_option("--index", o.index, "output index.json")->required();
    index_cmd->add_option("--k", o.k, "clusters per category");
    index_cmd->add_option("--seed", o.seed, "global seed");

    auto* retrieve_cmd = app.add_subcommand("retrieve", "robust nearest-neighbor lookup");
    retrieve_cmd->add_option("--index", o.index, "input index.json")->required();
    retrieve_cmd->add_option("--query", o.query, "query item id")->required();
    retrieve_cmd->add_option("--target", o.target, "target category")->required();
    retrieve_cmd->add_option("--n", o.n, "candidate set size");
    retrieve_cmd->add_option("--items", o.items, "items.jsonl (to embed unindexed queries)");
    retrieve_cmd->add_option("--model", o.model, "model.json (to embed unindexed queries)");

    auto* outfit_cmd = app.add_subcommand("outfit", "assemble a cross-category outfit");
    outfit_cmd->add_option("--index", o.index, "input index.json")->required();
    outfit_cmd->add_option("--items", o.items, "input items.jsonl")->required();
    outfit_cmd->add_option("--model", o.model, "input model.json")->required();
    outfit_cmd->add_option("--outfit-spec", o.outfit_spec, "outfit spec json")->required();
    outfit_cmd->add_option("--query", o.query, "query item id")->required();
    outfit_cmd->add_option("--n", o.n, "candidate set size");

    auto* affinity_cmd = app.add_subcommand("affinity", "closest and farthest cluster pairs");
    affinity_cmd->add_option("--index", o.index, "input index.json")->required();
    affinity_cmd->add_option("--cat-a", o.cat_a, "first category")->required();
    affinity_cmd->add_option("--cat-b", o.cat_b, "second category")->required();

    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "verify analytic gradients");
    gradcheck_cmd->add_option("--trials", o.trials, "random configurations");
    gradcheck_cmd->add_option("--tol", o.tol, "max relative error tolerance");
    gradcheck_cmd->add_option("--eps", o.eps, "finite difference step");
    gradcheck_cmd->add_option("--seed", o.seed, "global seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (synth_cmd->parsed()) return cmd_synth(o);
        if (clean_cmd->parsed()) return cmd_clean(o);
        if (split_cmd->parsed()) return cmd_split(o);
        if (sample_cmd->parsed()) return cmd_sample(o);
        if (train_cmd->parsed()) return cmd_train(o);
        if (eval_cmd->parsed()) return cmd_eval(o);
        if (index_cmd->parsed()) return cmd_index(o);
        if (retrieve_cmd->parsed()) return cmd_retrieve(o);
        if (outfit_cmd->parsed()) return cmd_outfit(o);
        if (affinity_cmd->parsed()) return cmd_affinity(o);
        if (gradcheck_cmd->parsed()) return cmd_gradcheck(o);
    } catch (const Error& e) {
        std::cerr << "error stage=" << stage << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error stage=" << stage << ": " << e.what() << "\n";
        return 1;
    }
    return 2;
}

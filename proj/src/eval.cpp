#include "stylespace/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "stylespace/errors.hpp"
#include "stylespace/io_util.hpp"

namespace stylespace::eval {

namespace {

using sampler::PairLabel;

std::string companion_path(const std::string& report_path, const std::string& suffix) {
    const std::size_t dot = report_path.find_last_of('.');
    const std::size_t slash = report_path.find_last_of("/\\");
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
        return report_path.substr(0, dot) + suffix;
    }
    return report_path + suffix;
}

}  // namespace

std::vector<LabeledDistance> pair_distances(const embed::ProjectionModel& model,
                                            const FeatureMap& features,
                                            const std::vector<sampler::Pair>& pairs) {
    std::vector<LabeledDistance> out;
    out.reserve(pairs.size());
    for (const sampler::Pair& p : pairs) {
        auto a = features.find(p.a);
        if (a == features.end()) throw LookupError("no feature vector for item '" + p.a + "'");
        auto b = features.find(p.b);
        if (b == features.end()) throw LookupError("no feature vector for item '" + p.b + "'");
        out.push_back({distance(embed::embed(model, a->second), embed::embed(model, b->second)),
                       p.label});
    }
    return out;
}

std::vector<RocPoint> roc_curve(const std::vector<LabeledDistance>& distances) {
    std::size_t positives = 0;
    std::size_t negatives = 0;
    // distinct distance -> (pos count, neg count)
    std::map<double, std::pair<std::size_t, std::size_t>> at;
    for (const LabeledDistance& d : distances) {
        if (!(d.distance >= 0.0) || !std::isfinite(d.distance)) {
            throw NumericError("roc_curve: distances must be finite and nonnegative");
        }
        auto& slot = at[d.distance];
        if (d.label == PairLabel::positive) {
            ++slot.first;
            ++positives;
        } else {
            ++slot.second;
            ++negatives;
        }
    }
    if (positives == 0 || negatives == 0) {
        throw EmptyInputError("roc_curve: need at least one positive and one negative");
    }

    std::vector<RocPoint> roc;
    roc.reserve(at.size() + 2);
    roc.push_back({-std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (const auto& [threshold, counts] : at) {
        tp += counts.first;
        fp += counts.second;
        roc.push_back({threshold, static_cast<double>(tp) / static_cast<double>(positives),
                       static_cast<double>(fp) / static_cast<double>(negatives)});
    }
    roc.push_back({std::numeric_limits<double>::infinity(), 1.0, 1.0});
    return roc;
}

double auc(const std::vector<RocPoint>& roc) {
    if (roc.size() < 2) throw EmptyInputError("auc: curve needs at least two points");
    double area = 0.0;
    for (std::size_t i = 1; i < roc.size(); ++i) {
        area += (roc[i].fpr - roc[i - 1].fpr) * 0.5 * (roc[i].tpr + roc[i - 1].tpr);
    }
    return area;
}

double transfer_ratio(double auc_holdout, double auc_full, double auc_baseline) {
    const double denom = auc_full - auc_baseline;
    if (denom == 0.0) {
        throw EmptyInputError("transfer_ratio: full and baseline AUC coincide");
    }
    return (auc_holdout - auc_baseline) / denom;
}

std::pair<Histogram, Histogram> histogram(const std::vector<LabeledDistance>& distances,
                                          int bins) {
    if (bins < 1) throw ConfigError("histogram: bins must be >= 1");
    if (distances.empty()) throw EmptyInputError("histogram: no distances");

    double max_d = 0.0;
    for (const LabeledDistance& d : distances) {
        if (!(d.distance >= 0.0) || !std::isfinite(d.distance)) {
            throw NumericError("histogram: distances must be finite and nonnegative");
        }
        max_d = std::max(max_d, d.distance);
    }

    Histogram pos, neg;
    pos.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) {
        pos.edges[i] = max_d * static_cast<double>(i) / static_cast<double>(bins);
    }
    neg.edges = pos.edges;
    pos.counts.assign(bins, 0);
    neg.counts.assign(bins, 0);

    for (const LabeledDistance& d : distances) {
        // count of interior edges <= d gives the bin; the last bin is
        // right-closed since no interior edge exceeds max_d
        const std::size_t bin = static_cast<std::size_t>(
            std::upper_bound(pos.edges.begin() + 1, pos.edges.end() - 1, d.distance) -
            (pos.edges.begin() + 1));
        if (d.label == PairLabel::positive) ++pos.counts[bin];
        else ++neg.counts[bin];
    }
    return {std::move(pos), std::move(neg)};
}

EvalReport evaluate(const embed::ProjectionModel& model, const FeatureMap& features,
                    const std::vector<sampler::Pair>& pairs, int bins) {
    EvalReport report;
    const auto dists = pair_distances(model, features, pairs);
    for (const LabeledDistance& d : dists) {
        if (d.label == PairLabel::positive) ++report.positives;
        else ++report.negatives;
    }
    report.roc = roc_curve(dists);
    report.auc = auc(report.roc);
    auto hists = histogram(dists, bins);
    report.pos_hist = std::move(hists.first);
    report.neg_hist = std::move(hists.second);
    return report;
}

void save_report(const EvalReport& report, const std::string& report_path) {
    nlohmann::json j;
    j["auc"] = report.auc;
    j["counts"] = {{"positives", report.positives}, {"negatives", report.negatives}};
    nlohmann::json roc = nlohmann::json::array();
    for (const RocPoint& p : report.roc) {
        roc.push_back({{"t", p.threshold}, {"tpr", p.tpr}, {"fpr", p.fpr}});
    }
    j["roc"] = std::move(roc);
    j["pos_hist"] = {{"edges", report.pos_hist.edges}, {"counts", report.pos_hist.counts}};
    j["neg_hist"] = {{"edges", report.neg_hist.edges}, {"counts", report.neg_hist.counts}};
    atomic_write(report_path, j.dump(2) + "\n");

    std::string roc_csv = "t,tpr,fpr\n";
    for (const RocPoint& p : report.roc) {
        roc_csv += format_double(p.threshold);
        roc_csv += ',';
        roc_csv += format_double(p.tpr);
        roc_csv += ',';
        roc_csv += format_double(p.fpr);
        roc_csv += '\n';
    }
    atomic_write(companion_path(report_path, ".roc.csv"), roc_csv);

    std::string hist_csv = "bin_lo,bin_hi,pos_count,neg_count\n";
    for (std::size_t i = 0; i < report.pos_hist.counts.size(); ++i) {
        hist_csv += format_double(report.pos_hist.edges[i]);
        hist_csv += ',';
        hist_csv += format_double(report.pos_hist.edges[i + 1]);
        hist_csv += ',';
        hist_csv += std::to_string(report.pos_hist.counts[i]);
        hist_csv += ',';
        hist_csv += std::to_string(report.neg_hist.counts[i]);
        hist_csv += '\n';
    }
    atomic_write(companion_path(report_path, ".hist.csv"), hist_csv);
}

}  // namespace stylespace::eval

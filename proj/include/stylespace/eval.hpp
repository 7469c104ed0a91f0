#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "stylespace/embed.hpp"
#include "stylespace/sampler.hpp"
#include "stylespace/vec.hpp"

namespace stylespace::eval {

struct LabeledDistance {
    double distance = 0.0;
    sampler::PairLabel label = sampler::PairLabel::positive;
};

struct RocPoint {
    double threshold = 0.0;  // predict compatible when distance <= threshold
    double tpr = 0.0;
    double fpr = 0.0;
};

struct Histogram {
    std::vector<double> edges;        // bins + 1 values, spanning [0, max distance]
    std::vector<std::size_t> counts;  // last bin right-closed
};

struct EvalReport {
    double auc = 0.0;
    std::vector<RocPoint> roc;
    Histogram pos_hist;
    Histogram neg_hist;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

// Style-space distance for each pair, order preserved.
std::vector<LabeledDistance> pair_distances(const embed::ProjectionModel& model,
                                            const FeatureMap& features,
                                            const std::vector<sampler::Pair>& pairs);

// Exact stepwise curve: one threshold per distinct distance plus -inf/+inf
// sentinels, sorted by ascending threshold.
std::vector<RocPoint> roc_curve(const std::vector<LabeledDistance>& distances);

// Trapezoidal area over FPR; equals P(d+ < d-) + 0.5 P(d+ = d-).
double auc(const std::vector<RocPoint>& roc);

// (auc_holdout - auc_baseline) / (auc_full - auc_baseline); reported as-is,
// may fall outside [0, 1].
double transfer_ratio(double auc_holdout, double auc_full, double auc_baseline);

// Shared bin edges over [0, max distance]; returns (positive, negative) counts.
std::pair<Histogram, Histogram> histogram(const std::vector<LabeledDistance>& distances,
                                          int bins);

EvalReport evaluate(const embed::ProjectionModel& model, const FeatureMap& features,
                    const std::vector<sampler::Pair>& pairs, int bins = 50);

// Writes report_path plus <stem>.roc.csv and <stem>.hist.csv companions.
void save_report(const EvalReport& report, const std::string& report_path);

}  // namespace stylespace::eval

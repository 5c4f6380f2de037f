#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ogpred/dataset.hpp"
#include "ogpred/metrics.hpp"
#include "ogpred/train.hpp"

namespace ogpred {

/// One model + training configuration under evaluation.
struct CandidateConfig {
    ModelConfig model;
    TrainConfig train;

    /// Canonical identity string; also the lexicographic ranking tie-break.
    std::string id() const;
};

/// Hyperparameter grid. The Cartesian product of all lists is evaluated,
/// minus combinations rejected by `prune` ("semi-grid search": pruning
/// stands in for combinations skipped as clearly inferior a priori).
struct GridSpec {
    std::vector<std::vector<int>> lstm_sizes = {{600, 75}};
    std::vector<int> mlp_sizes = {0};
    std::vector<double> learning_rates = {1e-3};
    std::vector<double> weight_decays = {0.0};
    std::vector<int> batch_sizes = {128};
    std::vector<int> windows = {20};
    std::vector<LossSpec> losses = {LossSpec::weighted_ce(1.0)};
    int epochs = 70;
    std::uint64_t seed = 0;
    std::function<bool(const CandidateConfig&)> prune; // true = drop

    std::vector<CandidateConfig> expand() const;
};

struct CVResult {
    std::string config_id;
    CandidateConfig config;
    std::array<MetricPoint, 5> fold_best{};
    double mean_f1 = 0.0;
    double std_f1 = 0.0;
    double mean_mcc = 0.0;
    double std_mcc = 0.0;
    bool failed = false;
    std::string diagnostic;
};

/// Five-fold cross-validation: per fold, train on the other four folds and
/// record the best-F1 threshold point on the held-out fold. Each fold
/// trains from seed mix(run seed, fold index).
CVResult run_cv(const CandidateConfig& config, const EncodedDataset& data,
                const DatasetSplit& split, IndexAudit* audit = nullptr);

/// Evaluates every unpruned grid combination and ranks by mean CV F1
/// (descending), breaking ties by higher mean MCC then lexicographic id.
std::vector<CVResult> grid_search(const GridSpec& grid, const EncodedDataset& data,
                                  const DatasetSplit& split, int jobs = 1,
                                  IndexAudit* audit = nullptr);

struct TestEvaluation {
    PRCurve curve;
    ModelParams params;

    const MetricPoint& best() const { return curve.best_point(); }
};

/// Retrains on the full training portion of the split and sweeps thresholds
/// on the held-out test set.
TestEvaluation evaluate_test(const CandidateConfig& config, const EncodedDataset& data,
                             const DatasetSplit& split, IndexAudit* audit = nullptr);

struct NestedSummary {
    MetricPoint mean;  // threshold field unused
    MetricPoint sigma; // population standard deviation over the 5 folds
};

struct NestedResult {
    std::array<DatasetSplit, 5> splits;
    std::array<PRCurve, 5> curves;
    NestedSummary summary;

    const MetricPoint& fold_best(std::size_t i) const { return curves[i].best_point(); }
};

/// Five outer rounds of evaluate_test over make_nested_splits.
NestedResult nested_validation(const CandidateConfig& config, const EncodedDataset& data,
                               std::uint64_t seed, IndexAudit* audit = nullptr);

/// `config_id,fold,threshold,recall,precision,f1,mcc` rows for every
/// (config, fold) pair, then a ranked `config_id,mean_f1,std_f1,...` summary.
void write_cv_results_csv(std::ostream& os, const std::vector<CVResult>& results);
void write_cv_summary_csv(std::ostream& os, const std::vector<CVResult>& results);

std::string format_nested_table(const NestedResult& result);

} // namespace ogpred

#include "ogpred/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "ogpred/rng.hpp"

namespace ogpred {

std::string CandidateConfig::id() const {
    std::ostringstream os;
    os << model.to_string() << ' ' << train.to_string() << " seed=" << train.seed;
    return os.str();
}

std::vector<CandidateConfig> GridSpec::expand() const {
    std::vector<CandidateConfig> out;
    for (const auto& sizes : lstm_sizes)
        for (int mlp : mlp_sizes)
            for (double lr : learning_rates)
                for (double wd : weight_decays)
                    for (int bs : batch_sizes)
                        for (int win : windows)
                            for (const LossSpec& loss : losses) {
                                CandidateConfig c;
                                c.model.window = win;
                                c.model.lstm_sizes = sizes;
                                c.model.mlp_size = mlp;
                                c.train.epochs = epochs;
                                c.train.lr = lr;
                                c.train.weight_decay = wd;
                                c.train.batch_size = bs;
                                c.train.loss = loss;
                                c.train.seed = seed;
                                c.model.validate();
                                c.train.validate();
                                if (prune && prune(c)) continue;
                                out.push_back(std::move(c));
                            }
    return out;
}

namespace {

MetricPoint best_point_on(const ModelParams& params, const EncodedDataset& data,
                          std::span<const std::size_t> eval_indices, PRCurve* curve_out,
                          IndexAudit* audit) {
    if (audit) audit->record_eval(eval_indices);
    const std::vector<double> probs = predict_probabilities(params, data, eval_indices);
    std::vector<int> labels(eval_indices.size());
    for (std::size_t i = 0; i < eval_indices.size(); ++i)
        labels[i] = data.label(eval_indices[i]);
    const std::vector<double> grid = default_thresholds();
    PRCurve curve = sweep(probs, labels, grid);
    const MetricPoint best = curve.best_point();
    if (curve_out) *curve_out = std::move(curve);
    return best;
}

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0; // population (n divisor)
};

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std_dev = std::sqrt(sq / static_cast<double>(values.size()));
    return out;
}

} // namespace

CVResult run_cv(const CandidateConfig& config, const EncodedDataset& data,
                const DatasetSplit& split, IndexAudit* audit) {
    CVResult result;
    result.config = config;
    result.config_id = config.id();

    std::array<double, 5> f1s{}, mccs{};
    for (std::size_t fold = 0; fold < 5; ++fold) {
        try {
            const std::vector<std::size_t> fold_train = split.train_without_fold(fold);
            TrainConfig fold_config = config.train;
            fold_config.seed = Rng::mix(config.train.seed, fold);

            const TrainResult trained =
                train(config.model, fold_config, data, fold_train, {}, nullptr, audit);
            const MetricPoint best =
                best_point_on(trained.params, data, split.folds[fold], nullptr, audit);
            result.fold_best[fold] = best;
            f1s[fold] = best.f1;
            mccs[fold] = best.mcc;
        } catch (const std::exception& e) {
            result.failed = true;
            result.diagnostic = "fold " + std::to_string(fold) + ": " + e.what();
            return result;
        }
    }

    const MeanStd f1 = mean_std(f1s);
    const MeanStd mcc = mean_std(mccs);
    result.mean_f1 = f1.mean;
    result.std_f1 = f1.std_dev;
    result.mean_mcc = mcc.mean;
    result.std_mcc = mcc.std_dev;
    return result;
}

std::vector<CVResult> grid_search(const GridSpec& grid, const EncodedDataset& data,
                                  const DatasetSplit& split, int jobs, IndexAudit* audit) {
    const std::vector<CandidateConfig> candidates = grid.expand();
    if (candidates.empty())
        throw ContractError("grid_search: every combination was pruned (or the grid is empty)");

    std::vector<CVResult> results(candidates.size());
    if (jobs < 1) jobs = 1;
    const int workers = std::min<int>(jobs, static_cast<int>(candidates.size()));

    if (workers == 1) {
        for (std::size_t i = 0; i < candidates.size(); ++i)
            results[i] = run_cv(candidates[i], data, split, audit);
    } else {
        // Each worker owns its jobs end to end; the coordinator merges audits
        // after joining, so `results` slots and per-worker audits never race.
        std::atomic<std::size_t> next{0};
        std::vector<IndexAudit> worker_audits(static_cast<std::size_t>(workers));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= candidates.size()) return;
                    results[i] = run_cv(candidates[i], data, split,
                                        audit ? &worker_audits[static_cast<std::size_t>(w)]
                                              : nullptr);
                }
            });
        }
        for (std::thread& t : pool) t.join();
        if (audit)
            for (const IndexAudit& a : worker_audits) audit->merge(a);
    }

    std::stable_sort(results.begin(), results.end(), [](const CVResult& a, const CVResult& b) {
        if (a.failed != b.failed) return !a.failed; // failures sink to the bottom
        if (a.mean_f1 != b.mean_f1) return a.mean_f1 > b.mean_f1;
        if (a.mean_mcc != b.mean_mcc) return a.mean_mcc > b.mean_mcc;
        return a.config_id < b.config_id;
    });
    return results;
}

TestEvaluation evaluate_test(const CandidateConfig& config, const EncodedDataset& data,
                             const DatasetSplit& split, IndexAudit* audit) {
    const TrainResult trained =
        train(config.model, config.train, data, split.train_indices, {}, nullptr, audit);

    TestEvaluation eval;
    const MetricPoint best =
        best_point_on(trained.params, data, split.test_indices, &eval.curve, audit);
    eval.params = trained.params;
    eval.params.best_threshold = best.threshold;
    return eval;
}

NestedResult nested_validation(const CandidateConfig& config, const EncodedDataset& data,
                               std::uint64_t seed, IndexAudit* audit) {
    NestedResult result;
    result.splits = make_nested_splits(data.labels(), seed);

    std::array<double, 5> recalls{}, precisions{}, f1s{}, mccs{};
    for (std::size_t round = 0; round < 5; ++round) {
        CandidateConfig round_config = config;
        round_config.train.seed = Rng::mix(seed, round);
        const TestEvaluation eval =
            evaluate_test(round_config, data, result.splits[round], audit);
        result.curves[round] = eval.curve;
        const MetricPoint& best = result.curves[round].best_point();
        recalls[round] = best.recall;
        precisions[round] = best.precision;
        f1s[round] = best.f1;
        mccs[round] = best.mcc;
    }

    const MeanStd recall = mean_std(recalls), precision = mean_std(precisions);
    const MeanStd f1 = mean_std(f1s), mcc = mean_std(mccs);
    result.summary.mean.recall = recall.mean;
    result.summary.mean.precision = precision.mean;
    result.summary.mean.f1 = f1.mean;
    result.summary.mean.mcc = mcc.mean;
    result.summary.sigma.recall = recall.std_dev;
    result.summary.sigma.precision = precision.std_dev;
    result.summary.sigma.f1 = f1.std_dev;
    result.summary.sigma.mcc = mcc.std_dev;
    return result;
}

void write_cv_results_csv(std::ostream& os, const std::vector<CVResult>& results) {
    os << "config_id,fold,threshold,recall_pct,precision_pct,f1_pct,mcc_pct,failed\n";
    os << std::setprecision(17);
    for (const CVResult& r : results) {
        for (std::size_t fold = 0; fold < r.fold_best.size(); ++fold) {
            const MetricPoint& p = r.fold_best[fold];
            os << '"' << r.config_id << "\"," << fold << ',' << p.threshold << ',' << p.recall
               << ',' << p.precision << ',' << p.f1 << ',' << p.mcc << ','
               << (r.failed ? 1 : 0) << '\n';
        }
    }
}

void write_cv_summary_csv(std::ostream& os, const std::vector<CVResult>& results) {
    os << "rank,config_id,mean_f1,std_f1,mean_mcc,std_mcc,failed,diagnostic\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < results.size(); ++i) {
        const CVResult& r = results[i];
        os << i + 1 << ",\"" << r.config_id << "\"," << r.mean_f1 << ',' << r.std_f1 << ','
           << r.mean_mcc << ',' << r.std_mcc << ',' << (r.failed ? 1 : 0) << ",\""
           << r.diagnostic << "\"\n";
    }
}

std::string format_nested_table(const NestedResult& result) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "Metric            Fold 1   Fold 2   Fold 3   Fold 4   Fold 5   Mean (+/- sigma)\n";

    auto row = [&](const std::string& name, auto get, double mean, double sigma) {
        os << std::left << std::setw(17) << name << std::right;
        for (std::size_t i = 0; i < 5; ++i) os << std::setw(9) << get(result.fold_best(i));
        os << "   " << mean << " +/- " << sigma << '\n';
    };

    os << std::left << std::setw(17) << "Best Threshold" << std::right;
    for (std::size_t i = 0; i < 5; ++i) os << std::setw(9) << result.fold_best(i).threshold;
    os << "   N/A\n";
    row("Recall (%)", [](const MetricPoint& p) { return p.recall; }, result.summary.mean.recall,
        result.summary.sigma.recall);
    row("Precision (%)", [](const MetricPoint& p) { return p.precision; },
        result.summary.mean.precision, result.summary.sigma.precision);
    row("F1 Score (%)", [](const MetricPoint& p) { return p.f1; }, result.summary.mean.f1,
        result.summary.sigma.f1);
    row("MCC (%)", [](const MetricPoint& p) { return p.mcc; }, result.summary.mean.mcc,
        result.summary.sigma.mcc);
    return os.str();
}

} // namespace ogpred

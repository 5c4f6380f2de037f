#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ogpred/dataset.hpp"
#include "ogpred/losses.hpp"
#include "ogpred/model.hpp"

namespace ogpred {

struct TrainConfig {
    int epochs = 70;
    double lr = 1e-3;
    double weight_decay = 0.0;
    int batch_size = 128;
    LossSpec loss;
    std::uint64_t seed = 0;
    bool shuffle = true;
    double clip_norm = 0.0; // 0 disables gradient clipping

    void validate() const;
    std::string to_string() const;
};

/// AdamW moment accumulators, one pair per parameter array.
struct OptimizerState {
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsOpt = 1e-8;

    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };
    std::vector<Moments> moments;
    long step = 0;

    static OptimizerState for_leaves(std::span<const Tensor> leaves);
};

/// Per-epoch cosine annealing without restarts:
/// lr_e = 0.5 * lr * (1 + cos(pi * epoch / epochs)).
double cosine_lr(int epoch, const TrainConfig& config);

/// One decoupled-weight-decay Adam step over graph leaves. Decay is applied
/// to the parameters separately from the bias-corrected moment update.
/// Throws on non-finite gradients.
void adamw_step(std::span<Tensor> params, OptimizerState& state, double lr_e,
                double weight_decay, double clip_norm = 0.0);

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    std::optional<double> val_f1;  // percent, best threshold
    std::optional<double> val_mcc; // percent, at that threshold
};

void write_epoch_log_header(std::ostream& os);
void write_epoch_log_row(std::ostream& os, const EpochLog& row);

struct TrainResult {
    ModelParams params;
    std::vector<EpochLog> log;
};

/// Records which dataset indices each phase touched; used to prove the test
/// set never feeds a training decision.
class IndexAudit {
public:
    void record_train(std::span<const std::size_t> indices);
    void record_eval(std::span<const std::size_t> indices);
    void merge(const IndexAudit& other);

    std::uint64_t train_reads() const { return train_reads_; }
    std::uint64_t eval_reads() const { return eval_reads_; }
    /// Count of training-phase reads that hit any of `forbidden`.
    std::uint64_t train_overlap(std::span<const std::size_t> forbidden) const;

private:
    std::vector<std::size_t> train_indices_;
    std::uint64_t train_reads_ = 0;
    std::uint64_t eval_reads_ = 0;
};

/// Trains a freshly initialized model on `train_indices`. When
/// `val_indices` is non-empty a threshold sweep on it is logged per epoch.
/// `live_log`, when given, receives the epoch log as a CSV stream.
TrainResult train(const ModelConfig& model_config, const TrainConfig& train_config,
                  const EncodedDataset& data, std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> val_indices = {},
                  std::ostream* live_log = nullptr, IndexAudit* audit = nullptr);

/// Continues optimization of an already trained model with a new loss,
/// learning rate, and epoch budget; optimizer state starts fresh.
TrainResult fine_tune(const ModelParams& params, const LossSpec& new_loss, double new_lr,
                      int epochs, const EncodedDataset& data,
                      std::span<const std::size_t> train_indices,
                      std::span<const std::size_t> val_indices = {},
                      std::ostream* live_log = nullptr, IndexAudit* audit = nullptr,
                      int batch_size = 128, std::uint64_t seed = 0);

} // namespace ogpred

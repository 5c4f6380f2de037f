#include "ogpred/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "ogpred/metrics.hpp"
#include "ogpred/rng.hpp"

namespace ogpred {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("train: lr must be > 0");
    if (weight_decay < 0.0) throw ConfigError("train: weight_decay must be >= 0");
    if (batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
    if (clip_norm < 0.0) throw ConfigError("train: clip_norm must be >= 0");
}

std::string TrainConfig::to_string() const {
    std::ostringstream os;
    os << "lr=" << lr << " wd=" << weight_decay << " bs=" << batch_size
       << " epochs=" << epochs << " loss=" << loss.to_string();
    return os.str();
}

OptimizerState OptimizerState::for_leaves(std::span<const Tensor> leaves) {
    OptimizerState state;
    state.moments.reserve(leaves.size());
    for (const Tensor& t : leaves) {
        Moments m;
        m.m.assign(t.numel(), 0.0);
        m.v.assign(t.numel(), 0.0);
        state.moments.push_back(std::move(m));
    }
    return state;
}

double cosine_lr(int epoch, const TrainConfig& config) {
    if (epoch < 0 || epoch >= config.epochs)
        throw ContractError("cosine_lr: epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(config.epochs) + ")");
    const double phase = std::numbers::pi * static_cast<double>(epoch) /
                         static_cast<double>(config.epochs);
    return 0.5 * config.lr * (1.0 + std::cos(phase));
}

void adamw_step(std::span<Tensor> params, OptimizerState& state, double lr_e,
                double weight_decay, double clip_norm) {
    if (params.size() != state.moments.size())
        throw ContractError("adamw_step: state does not match parameter list");

    double scale = 1.0;
    if (clip_norm > 0.0) {
        double sq = 0.0;
        for (Tensor& p : params)
            for (double gv : p.grad()) sq += gv * gv;
        const double norm = std::sqrt(sq);
        if (norm > clip_norm) scale = clip_norm / norm;
    }

    state.step += 1;
    const double bc1 = 1.0 - std::pow(OptimizerState::kBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(OptimizerState::kBeta2, static_cast<double>(state.step));

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto values = params[i].data_mut();
        auto grads = params[i].grad();
        auto& m = state.moments[i].m;
        auto& v = state.moments[i].v;
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double gv = grads[j] * scale;
            if (!std::isfinite(gv))
                throw NumericDomainError("adamw_step: non-finite gradient in parameter " +
                                         std::to_string(i) + " at element " +
                                         std::to_string(j));
            // Decoupled decay, separate from the moment update.
            values[j] -= lr_e * weight_decay * values[j];
            m[j] = OptimizerState::kBeta1 * m[j] + (1.0 - OptimizerState::kBeta1) * gv;
            v[j] = OptimizerState::kBeta2 * v[j] + (1.0 - OptimizerState::kBeta2) * gv * gv;
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            values[j] -= lr_e * m_hat / (std::sqrt(v_hat) + OptimizerState::kEpsOpt);
        }
    }
}

void write_epoch_log_header(std::ostream& os) {
    os << "epoch,lr,train_loss,val_f1,val_mcc\n";
}

void write_epoch_log_row(std::ostream& os, const EpochLog& row) {
    os << row.epoch << ',' << std::setprecision(17) << row.lr << ',' << row.train_loss << ',';
    if (row.val_f1) os << *row.val_f1;
    os << ',';
    if (row.val_mcc) os << *row.val_mcc;
    os << '\n';
}

void IndexAudit::record_train(std::span<const std::size_t> indices) {
    train_reads_ += indices.size();
    train_indices_.insert(train_indices_.end(), indices.begin(), indices.end());
    std::sort(train_indices_.begin(), train_indices_.end());
    train_indices_.erase(std::unique(train_indices_.begin(), train_indices_.end()),
                         train_indices_.end());
}

void IndexAudit::record_eval(std::span<const std::size_t> indices) {
    eval_reads_ += indices.size();
}

void IndexAudit::merge(const IndexAudit& other) {
    train_indices_.insert(train_indices_.end(), other.train_indices_.begin(),
                          other.train_indices_.end());
    std::sort(train_indices_.begin(), train_indices_.end());
    train_indices_.erase(std::unique(train_indices_.begin(), train_indices_.end()),
                         train_indices_.end());
    train_reads_ += other.train_reads_;
    eval_reads_ += other.eval_reads_;
}

std::uint64_t IndexAudit::train_overlap(std::span<const std::size_t> forbidden) const {
    std::uint64_t hits = 0;
    for (std::size_t idx : forbidden)
        if (std::binary_search(train_indices_.begin(), train_indices_.end(), idx)) ++hits;
    return hits;
}

namespace {

/// Shared loop for train() and fine_tune().
TrainResult run_optimization(ModelParams initial, const TrainConfig& config,
                             const EncodedDataset& data,
                             std::span<const std::size_t> train_indices,
                             std::span<const std::size_t> val_indices, std::ostream* live_log,
                             IndexAudit* audit) {
    config.validate();
    initial.config.validate();
    if (train_indices.empty()) throw ContractError("train: empty training set");

    std::size_t positives = 0;
    for (std::size_t idx : train_indices) positives += data.label(idx) == 1 ? 1u : 0u;
    if (positives == 0 || positives == train_indices.size())
        throw ContractError("train: training set is single-class (" + std::to_string(positives) +
                            " positives of " + std::to_string(train_indices.size()) + ")");

    if (audit) audit->record_train(train_indices);

    Graph graph;
    BoundModel model(graph, initial, /*differentiable=*/true);
    OptimizerState opt = OptimizerState::for_leaves(model.leaves());
    const std::size_t tape_mark = graph.mark();

    std::vector<std::size_t> order(train_indices.begin(), train_indices.end());
    std::vector<double> label_buf;
    TrainResult result;
    if (live_log) write_epoch_log_header(*live_log);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) {
            Rng rng(Rng::mix(config.seed, static_cast<std::uint64_t>(epoch)));
            rng.shuffle(std::span<std::size_t>(order));
        }
        const double lr_e = cosine_lr(epoch, config);

        double loss_sum = 0.0;
        std::size_t batches = 0;
        const std::size_t bs = static_cast<std::size_t>(config.batch_size);
        for (std::size_t begin = 0; begin < order.size(); begin += bs) {
            const std::size_t end = std::min(begin + bs, order.size());
            std::span<const std::size_t> batch(order.data() + begin, end - begin);

            label_buf.resize(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i)
                label_buf[i] = static_cast<double>(data.label(batch[i]));

            Tensor pred = model.forward(data, batch);
            Tensor y = graph.constant({batch.size()}, label_buf);
            Tensor loss = loss_value(graph, config.loss, pred, y);

            const double loss_scalar = loss.value();
            if (!std::isfinite(loss_scalar))
                throw NumericDomainError("train: non-finite loss at epoch " +
                                         std::to_string(epoch));
            loss_sum += loss_scalar;
            ++batches;

            graph.backward(loss);
            adamw_step(model.leaves(), opt, lr_e, config.weight_decay, config.clip_norm);
            graph.reset(tape_mark);
        }

        EpochLog row;
        row.epoch = epoch;
        row.lr = lr_e;
        row.train_loss = loss_sum / static_cast<double>(batches);

        if (!val_indices.empty()) {
            if (audit) audit->record_eval(val_indices);
            const ModelParams current = model.snapshot();
            const std::vector<double> probs = predict_probabilities(current, data, val_indices);
            std::vector<int> val_labels(val_indices.size());
            for (std::size_t i = 0; i < val_indices.size(); ++i)
                val_labels[i] = data.label(val_indices[i]);
            const std::vector<double> grid = default_thresholds();
            const PRCurve curve = sweep(probs, val_labels, grid);
            row.val_f1 = curve.best_point().f1;
            row.val_mcc = curve.best_point().mcc;
        }

        if (live_log) write_epoch_log_row(*live_log, row);
        result.log.push_back(row);
    }

    result.params = model.snapshot(initial.best_threshold);
    return result;
}

} // namespace

TrainResult train(const ModelConfig& model_config, const TrainConfig& train_config,
                  const EncodedDataset& data, std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> val_indices, std::ostream* live_log,
                  IndexAudit* audit) {
    ModelParams initial = init_model(model_config, train_config.seed);
    return run_optimization(std::move(initial), train_config, data, train_indices, val_indices,
                            live_log, audit);
}

TrainResult fine_tune(const ModelParams& params, const LossSpec& new_loss, double new_lr,
                      int epochs, const EncodedDataset& data,
                      std::span<const std::size_t> train_indices,
                      std::span<const std::size_t> val_indices, std::ostream* live_log,
                      IndexAudit* audit, int batch_size, std::uint64_t seed) {
    if (epochs == 0) {
        TrainResult unchanged;
        unchanged.params = params;
        return unchanged;
    }
    TrainConfig config;
    config.epochs = epochs;
    config.lr = new_lr;
    config.batch_size = batch_size;
    config.loss = new_loss;
    config.seed = seed;
    return run_optimization(params, config, data, train_indices, val_indices, live_log, audit);
}

} // namespace ogpred

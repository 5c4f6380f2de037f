#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ogpred/dataset.hpp"
#include "ogpred/tensor.hpp"

namespace ogpred {

struct ModelConfig {
    int window = 20;
    std::vector<int> lstm_sizes = {600, 75};
    int mlp_size = 0; // 0 = direct linear readout
    int input_width = static_cast<int>(kAlphabetSize);

    void validate() const;
    std::size_t sequence_length() const { return static_cast<std::size_t>(2 * window + 1); }
    std::string to_string() const;
};

/// A named parameter array (weights stored row-major).
struct ParamArray {
    std::string name;
    Shape shape;
    std::vector<double> values;
};

/// All learnable parameters plus the config they belong to. Layout per LSTM
/// layer l: `lstm<l>.wx` [in x 4H] and `lstm<l>.wh` [H x 4H] with gate
/// column order input/forget/cell/output, `lstm<l>.b` [4H]; then the
/// optional `mlp.w`/`mlp.b` and the `head.w`/`head.b` readout.
struct ModelParams {
    ModelConfig config;
    std::vector<ParamArray> arrays;
    double best_threshold = 0.5; // chosen on validation data, carried with the model

    std::size_t parameter_count() const;
};

/// Kaiming-uniform initialization with a = sqrt(5), which reduces to bound
/// 1/sqrt(fan_in) per weight matrix; biases use the same bound as the
/// recurrent (LSTM) or input (dense) weight they pair with. Deterministic
/// per seed.
ModelParams init_model(const ModelConfig& config, std::uint64_t seed);

/// One LSTM cell update for a batch. `x` is [B x in], `h`/`c` are [B x H],
/// `wx` [in x 4H], `wh` [H x 4H], `b` [4H]. Returns the new (h, c).
std::pair<Tensor, Tensor> lstm_cell_step(Graph& g, Tensor x, Tensor h, Tensor c, Tensor wx,
                                         Tensor wh, Tensor b);

/// Model parameters pushed onto a Graph as leaves, ready for forward passes
/// (and, when differentiable, backward/optimizer steps).
class BoundModel {
public:
    BoundModel(Graph& g, const ModelParams& params, bool differentiable);

    /// Probability in (0,1) per batch sample; result shape [B].
    Tensor forward(const EncodedDataset& data, std::span<const std::size_t> batch);

    /// Same forward pass over an explicit one-hot sequence batch
    /// (batch.size() windows, each sequence_length x input_width).
    Tensor forward_windows(std::span<const EncodedWindow> windows);

    std::span<Tensor> leaves() { return leaves_; }
    const ModelConfig& config() const { return config_; }

    /// Copies current leaf values back into a ModelParams.
    ModelParams snapshot(double best_threshold = 0.5) const;

private:
    Tensor forward_steps(std::size_t batch_size,
                         const std::function<Tensor(std::size_t)>& step_input);

    Graph* graph_;
    ModelConfig config_;
    std::vector<std::string> names_;
    std::vector<Tensor> leaves_;
};

/// Convenience inference: runs `forward` over index batches and returns all
/// probabilities in dataset order of `batch`.
std::vector<double> predict_probabilities(const ModelParams& params, const EncodedDataset& data,
                                          std::span<const std::size_t> batch,
                                          std::size_t batch_size = 256);

/// Binary container with magic bytes, format version, embedded config text,
/// raw little-endian f64 parameters, and a trailing CRC-32 of everything
/// before it.
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path,
                       std::optional<int> expect_window = std::nullopt);

} // namespace ogpred

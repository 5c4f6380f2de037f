#pragma once

#include <cstdint>
#include <string>

#include "ogpred/config_file.hpp"
#include "ogpred/tensor.hpp"

namespace ogpred {

enum class LossKind { WeightedCE, Focal, DiffF1, DiffMCC };

std::string loss_kind_name(LossKind kind);

/// Selected loss plus its hyperparameters. Construct through the factories;
/// they validate the ranges relevant to each kind.
struct LossSpec {
    LossKind kind = LossKind::WeightedCE;
    double w_pos = 1.0;  // WeightedCE positive-class weight
    double alpha = 0.5;  // Focal class balance, in (0,1)
    double gamma = 0.0;  // Focal exponent (>= 0; >= 1 for the diff losses)
    double weight = 1.0; // DiffF1/DiffMCC class weight W > 0

    static LossSpec weighted_ce(double w_pos);
    static LossSpec focal(double alpha, double gamma);
    static LossSpec diff_f1(double weight, double gamma);
    static LossSpec diff_mcc(double weight, double gamma);

    std::string to_string() const;
    /// Writes `loss`, `loss_*` keys into a run config.
    void to_config(ConfigMap& cfg) const;
    static LossSpec from_config(const ConfigMap& cfg);
};

/// Differentiable confusion counts built from probabilities: each sample
/// contributes (p_t)^gamma to its true cell and (1-p_t)^gamma to its false
/// cell, with the class weight W applied to the positive-class cells (tp,
/// fn) only.
struct SoftConfusion {
    Tensor tp;
    Tensor fn;
    Tensor fp;
    Tensor tn;
};

/// -mean(w_pos * y * log p + (1-y) * log(1-p)); probabilities are clamped to
/// [1e-7, 1-1e-7] before the logs.
Tensor weighted_ce(Graph& g, Tensor pred, Tensor y, double w_pos);

/// -mean(alpha_t * (1-p_t)^gamma * log p_t) with p_t the probability of the
/// correct class and alpha_t = alpha for positives, 1-alpha for negatives.
Tensor focal(Graph& g, Tensor pred, Tensor y, double alpha, double gamma);

SoftConfusion soft_confusion(Graph& g, Tensor pred, Tensor y, double weight, double gamma);

/// Negative differentiable MCC over soft confusion counts.
Tensor diff_mcc_loss(Graph& g, Tensor pred, Tensor y, double weight, double gamma);

/// Negative differentiable F1 (2tp / (2tp + fp + fn)) over soft counts.
Tensor diff_f1_loss(Graph& g, Tensor pred, Tensor y, double weight, double gamma);

/// Dispatch on a LossSpec.
Tensor loss_value(Graph& g, const LossSpec& spec, Tensor pred, Tensor y);

/// Number of single-class batches seen by the diff losses on this thread
/// since the last reset. Such batches have a degenerate MCC denominator;
/// the epsilon guard keeps them finite but they carry no class contrast.
std::uint64_t single_class_batch_count();
void reset_single_class_batch_count();

} // namespace ogpred

#include "ogpred/losses.hpp"

#include <cmath>
#include <sstream>

namespace ogpred {

namespace {

constexpr double kClampLo = 1e-7;
constexpr double kClampHi = 1.0 - 1e-7;

thread_local std::uint64_t t_single_class_batches = 0;

void check_batch(Tensor pred, Tensor y) {
    if (pred.numel() == 0) throw ContractError("loss: empty batch");
    if (pred.shape() != y.shape())
        throw DimensionError("loss: prediction shape " + shape_to_string(pred.shape()) +
                             " does not match target shape " + shape_to_string(y.shape()));
    for (double v : y.data())
        if (v != 0.0 && v != 1.0)
            throw ContractError("loss: targets must be binary, got " + std::to_string(v));
}

bool single_class(Tensor y) {
    bool has_pos = false, has_neg = false;
    for (double v : y.data()) (v == 1.0 ? has_pos : has_neg) = true;
    return !(has_pos && has_neg);
}

/// p_t = pred*y + (1-pred)*(1-y): probability assigned to the correct class.
Tensor correct_class_prob(Graph& g, Tensor pred, Tensor y) {
    Tensor pos_part = g.mul(pred, y);
    Tensor neg_part = g.mul(g.rsub_scalar(1.0, pred), g.rsub_scalar(1.0, y));
    return g.add(pos_part, neg_part);
}

} // namespace

std::string loss_kind_name(LossKind kind) {
    switch (kind) {
    case LossKind::WeightedCE: return "weighted_ce";
    case LossKind::Focal: return "focal";
    case LossKind::DiffF1: return "diff_f1";
    case LossKind::DiffMCC: return "diff_mcc";
    }
    return "?";
}

LossSpec LossSpec::weighted_ce(double w_pos) {
    if (!(w_pos > 0.0)) throw ConfigError("weighted_ce: w_pos must be > 0");
    LossSpec s;
    s.kind = LossKind::WeightedCE;
    s.w_pos = w_pos;
    return s;
}

LossSpec LossSpec::focal(double alpha, double gamma) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("focal: alpha must be in (0,1)");
    if (!(gamma >= 0.0)) throw ConfigError("focal: gamma must be >= 0");
    LossSpec s;
    s.kind = LossKind::Focal;
    s.alpha = alpha;
    s.gamma = gamma;
    return s;
}

LossSpec LossSpec::diff_f1(double weight, double gamma) {
    if (!(weight > 0.0)) throw ConfigError("diff_f1: W must be > 0");
    if (!(gamma >= 1.0)) throw ConfigError("diff_f1: gamma must be >= 1");
    LossSpec s;
    s.kind = LossKind::DiffF1;
    s.weight = weight;
    s.gamma = gamma;
    return s;
}

LossSpec LossSpec::diff_mcc(double weight, double gamma) {
    if (!(weight > 0.0)) throw ConfigError("diff_mcc: W must be > 0");
    if (!(gamma >= 1.0)) throw ConfigError("diff_mcc: gamma must be >= 1");
    LossSpec s;
    s.kind = LossKind::DiffMCC;
    s.weight = weight;
    s.gamma = gamma;
    return s;
}

std::string LossSpec::to_string() const {
    std::ostringstream os;
    switch (kind) {
    case LossKind::WeightedCE: os << "weighted_ce(w_pos=" << w_pos << ")"; break;
    case LossKind::Focal: os << "focal(alpha=" << alpha << ",gamma=" << gamma << ")"; break;
    case LossKind::DiffF1: os << "diff_f1(W=" << weight << ",gamma=" << gamma << ")"; break;
    case LossKind::DiffMCC: os << "diff_mcc(W=" << weight << ",gamma=" << gamma << ")"; break;
    }
    return os.str();
}

void LossSpec::to_config(ConfigMap& cfg) const {
    cfg.set("loss", loss_kind_name(kind));
    switch (kind) {
    case LossKind::WeightedCE:
        cfg.set("loss_w_pos", std::to_string(w_pos));
        break;
    case LossKind::Focal:
        cfg.set("loss_alpha", std::to_string(alpha));
        cfg.set("loss_gamma", std::to_string(gamma));
        break;
    case LossKind::DiffF1:
    case LossKind::DiffMCC:
        cfg.set("loss_weight", std::to_string(weight));
        cfg.set("loss_gamma", std::to_string(gamma));
        break;
    }
}

LossSpec LossSpec::from_config(const ConfigMap& cfg) {
    const std::string name = cfg.get_string("loss");
    if (name == "weighted_ce") return weighted_ce(cfg.get_double("loss_w_pos", 1.0));
    if (name == "focal")
        return focal(cfg.get_double("loss_alpha", 0.95), cfg.get_double("loss_gamma", 2.0));
    if (name == "diff_f1")
        return diff_f1(cfg.get_double("loss_weight", 1.0), cfg.get_double("loss_gamma", 1.0));
    if (name == "diff_mcc")
        return diff_mcc(cfg.get_double("loss_weight", 1.0), cfg.get_double("loss_gamma", 1.0));
    throw ConfigError("unknown loss: '" + name + "'");
}

std::uint64_t single_class_batch_count() { return t_single_class_batches; }
void reset_single_class_batch_count() { t_single_class_batches = 0; }

Tensor weighted_ce(Graph& g, Tensor pred, Tensor y, double w_pos) {
    check_batch(pred, y);
    Tensor p = g.clamp(pred, kClampLo, kClampHi);
    Tensor pos_term = g.mul_scalar(g.mul(y, g.log(p)), w_pos);
    Tensor neg_term = g.mul(g.rsub_scalar(1.0, y), g.log(g.rsub_scalar(1.0, p)));
    return g.neg(g.mean(g.add(pos_term, neg_term)));
}

Tensor focal(Graph& g, Tensor pred, Tensor y, double alpha, double gamma) {
    check_batch(pred, y);
    Tensor p = g.clamp(pred, kClampLo, kClampHi);
    Tensor p_t = correct_class_prob(g, p, y);

    // alpha_t depends only on the (constant) targets.
    std::vector<double> alpha_t(y.numel());
    auto yd = y.data();
    for (std::size_t i = 0; i < alpha_t.size(); ++i)
        alpha_t[i] = yd[i] == 1.0 ? alpha : 1.0 - alpha;
    Tensor alpha_tensor = g.constant(y.shape(), std::move(alpha_t));

    Tensor modulation = g.pow(g.rsub_scalar(1.0, p_t), gamma);
    Tensor per_sample = g.mul(alpha_tensor, g.mul(modulation, g.log(p_t)));
    return g.neg(g.mean(per_sample));
}

SoftConfusion soft_confusion(Graph& g, Tensor pred, Tensor y, double weight, double gamma) {
    check_batch(pred, y);
    if (!(weight > 0.0)) throw ContractError("soft_confusion: W must be > 0");
    if (!(gamma >= 1.0)) throw ContractError("soft_confusion: gamma must be >= 1");

    Tensor p_t = correct_class_prob(g, pred, y);
    Tensor not_y = g.rsub_scalar(1.0, y);
    Tensor hit = g.pow(p_t, gamma);                    // (p_t)^gamma
    Tensor miss = g.pow(g.rsub_scalar(1.0, p_t), gamma); // (1-p_t)^gamma

    SoftConfusion c;
    c.tp = g.mul_scalar(g.sum(g.mul(hit, y)), weight);
    c.fn = g.mul_scalar(g.sum(g.mul(miss, y)), weight);
    c.fp = g.sum(g.mul(miss, not_y));
    c.tn = g.sum(g.mul(hit, not_y));
    return c;
}

Tensor diff_mcc_loss(Graph& g, Tensor pred, Tensor y, double weight, double gamma) {
    if (single_class(y)) ++t_single_class_batches;
    SoftConfusion c = soft_confusion(g, pred, y, weight, gamma);

    Tensor numerator = g.sub(g.mul(c.tp, c.tn), g.mul(c.fp, c.fn));
    Tensor denominator = g.sqrt(g.mul(g.mul(g.add(c.tp, c.fp), g.add(c.tp, c.fn)),
                                      g.mul(g.add(c.tn, c.fp), g.add(c.tn, c.fn))));
    return g.neg(g.div(numerator, denominator));
}

Tensor diff_f1_loss(Graph& g, Tensor pred, Tensor y, double weight, double gamma) {
    if (single_class(y)) ++t_single_class_batches;
    SoftConfusion c = soft_confusion(g, pred, y, weight, gamma);

    Tensor twice_tp = g.mul_scalar(c.tp, 2.0);
    Tensor denominator = g.add_scalar(g.add(twice_tp, g.add(c.fp, c.fn)), Graph::kEps);
    return g.neg(g.div(twice_tp, denominator));
}

Tensor loss_value(Graph& g, const LossSpec& spec, Tensor pred, Tensor y) {
    switch (spec.kind) {
    case LossKind::WeightedCE: return weighted_ce(g, pred, y, spec.w_pos);
    case LossKind::Focal: return focal(g, pred, y, spec.alpha, spec.gamma);
    case LossKind::DiffF1: return diff_f1_loss(g, pred, y, spec.weight, spec.gamma);
    case LossKind::DiffMCC: return diff_mcc_loss(g, pred, y, spec.weight, spec.gamma);
    }
    throw ContractError("loss_value: bad kind");
}

} // namespace ogpred

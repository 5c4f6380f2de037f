#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ogpred/errors.hpp"

namespace ogpred {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

class Graph;

/// Handle to a node on a Graph's tape. Cheap to copy; only valid while the
/// owning Graph is alive and the node has not been truncated by reset().
class Tensor {
public:
    Tensor() = default;

    const Shape& shape() const;
    std::size_t numel() const;
    std::size_t rows() const;
    std::size_t cols() const;
    bool requires_grad() const;

    std::span<const double> data() const;
    /// Mutable access to a leaf's values (parameter updates). Non-leaf nodes
    /// are products of the tape and may not be edited.
    std::span<double> data_mut();
    /// Accumulated gradient; only populated after Graph::backward.
    std::span<const double> grad() const;

    /// Value of a single-element tensor.
    double value() const;
    /// Gradient of a single-element tensor.
    double grad_value() const;

    std::size_t id() const { return id_; }
    Graph* graph() const { return graph_; }
    bool valid() const { return graph_ != nullptr; }

private:
    friend class Graph;
    Tensor(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

    Graph* graph_ = nullptr;
    std::size_t id_ = 0;
};

/// Reverse-mode autodiff over an append-only tape of dense f64 tensors.
///
/// A Graph and its Tensors are confined to a single thread; independent
/// Graphs may run concurrently. Rank is at most 2; elementwise binary ops
/// require exactly equal shapes (scalars broadcast only through the *_scalar
/// variants), so every backward rule stays directly auditable.
class Graph {
public:
    /// Guard added inside log and sqrt so denominators stay differentiable
    /// near zero.
    static constexpr double kEps = 1e-12;

    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // --- node creation ---------------------------------------------------
    Tensor leaf(Shape shape, std::vector<double> values, bool requires_grad = true);
    Tensor constant(Shape shape, std::vector<double> values);
    Tensor scalar(double value);
    Tensor zeros(Shape shape, bool requires_grad = false);

    // --- linear algebra ---------------------------------------------------
    Tensor matmul(Tensor a, Tensor b);

    // --- elementwise, tensor (X) tensor (equal shapes) ---------------------
    Tensor add(Tensor a, Tensor b);
    Tensor sub(Tensor a, Tensor b);
    Tensor mul(Tensor a, Tensor b);
    Tensor div(Tensor a, Tensor b);

    // --- elementwise, tensor (X) scalar ------------------------------------
    Tensor add_scalar(Tensor a, double s);
    Tensor mul_scalar(Tensor a, double s);
    /// s - a, elementwise.
    Tensor rsub_scalar(double s, Tensor a);
    /// a^c with fixed exponent; differentiates as c * a^(c-1).
    Tensor pow(Tensor a, double c);

    // --- elementwise, unary -------------------------------------------------
    Tensor neg(Tensor a);
    Tensor exp(Tensor a);
    /// log(a + kEps); a + kEps <= 0 is a numeric-domain error.
    Tensor log(Tensor a);
    /// sqrt(a + kEps).
    Tensor sqrt(Tensor a);
    Tensor sigmoid(Tensor a);
    Tensor tanh(Tensor a);
    Tensor relu(Tensor a);
    /// Clamp to [lo, hi]; gradient passes through inside the interval.
    Tensor clamp(Tensor a, double lo, double hi);

    // --- reductions ---------------------------------------------------------
    Tensor sum(Tensor a);
    Tensor mean(Tensor a);

    // --- structure ----------------------------------------------------------
    /// Concatenation along axis 0. All inputs must be the same rank, and for
    /// matrices the column counts must agree.
    Tensor concat_rows(std::span<const Tensor> parts);
    Tensor slice_rows(Tensor a, std::size_t begin, std::size_t end);
    Tensor slice_cols(Tensor a, std::size_t begin, std::size_t end);
    /// Tile a length-C vector into an [n x C] matrix; gradient sums over rows.
    Tensor repeat_rows(Tensor v, std::size_t n);
    Tensor reshape(Tensor a, Shape shape);

    // --- differentiation ----------------------------------------------------
    /// Reverse sweep from a scalar root. Each tape node is visited exactly
    /// once, in reverse recording order. Calling backward a second time
    /// without reset() is an error.
    void backward(Tensor root);

    /// Current tape length; pass to reset() to keep a prefix (typically the
    /// model parameters) across training iterations.
    std::size_t mark() const { return nodes_.size(); }

    /// Truncates the tape to `keep` nodes, zeroes surviving gradients and
    /// re-arms backward().
    void reset(std::size_t keep = 0);

    std::size_t size() const { return nodes_.size(); }

private:
    enum class Op : std::uint8_t {
        Leaf,
        MatMul,
        Add,
        Sub,
        Mul,
        Div,
        AddScalar,
        MulScalar,
        RSubScalar,
        Pow,
        Neg,
        Exp,
        Log,
        Sqrt,
        Sigmoid,
        Tanh,
        Relu,
        Clamp,
        Sum,
        Mean,
        ConcatRows,
        SliceRows,
        SliceCols,
        RepeatRows,
        Reshape,
    };

    struct Node {
        Op op = Op::Leaf;
        Shape shape;
        std::vector<double> data;
        std::vector<double> grad; // allocated iff requires_grad
        bool requires_grad = false;
        std::uint32_t a = 0; // first operand id
        std::uint32_t b = 0; // second operand id
        double s0 = 0.0;     // scalar operand / exponent / clamp lo / slice begin
        double s1 = 0.0;     // clamp hi / slice end
        std::vector<std::uint32_t> parts; // concat operands
    };

    friend class Tensor;

    Tensor push(Node node);
    const Node& node(std::size_t id) const;
    Node& node(std::size_t id);
    Tensor binary_elementwise(Op op, Tensor a, Tensor b);
    Tensor unary_elementwise(Op op, Tensor a, double s0 = 0.0, double s1 = 0.0);
    void check_same_graph(Tensor t) const;
    void backward_node(std::size_t id);

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

} // namespace ogpred

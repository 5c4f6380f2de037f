#include "ogpred/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ogpred {

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

// ---------------------------------------------------------------------------
// Tensor handle

const Shape& Tensor::shape() const { return graph_->node(id_).shape; }
std::size_t Tensor::numel() const { return graph_->node(id_).data.size(); }

std::size_t Tensor::rows() const {
    const Shape& s = shape();
    return s.empty() ? 1 : s[0];
}

std::size_t Tensor::cols() const {
    const Shape& s = shape();
    return s.size() < 2 ? 1 : s[1];
}

bool Tensor::requires_grad() const { return graph_->node(id_).requires_grad; }

std::span<const double> Tensor::data() const { return graph_->node(id_).data; }

std::span<double> Tensor::data_mut() {
    auto& n = graph_->node(id_);
    if (n.op != Graph::Op::Leaf)
        throw ContractError("data_mut: only leaf tensors are mutable");
    return n.data;
}

std::span<const double> Tensor::grad() const {
    const auto& n = graph_->node(id_);
    if (!n.requires_grad)
        throw ContractError("grad: tensor does not participate in differentiation");
    return n.grad;
}

double Tensor::value() const {
    const auto& n = graph_->node(id_);
    if (n.data.size() != 1)
        throw ContractError("value: tensor is not scalar, shape " + shape_to_string(n.shape));
    return n.data[0];
}

double Tensor::grad_value() const {
    auto g = grad();
    if (g.size() != 1)
        throw ContractError("grad_value: tensor is not scalar");
    return g[0];
}

// ---------------------------------------------------------------------------
// Node bookkeeping

Tensor Graph::push(Node node) {
    if (node.requires_grad) node.grad.assign(node.data.size(), 0.0);
    nodes_.push_back(std::move(node));
    return Tensor(this, nodes_.size() - 1);
}

const Graph::Node& Graph::node(std::size_t id) const {
    if (id >= nodes_.size())
        throw ContractError("tensor refers past the current tape (reset?)");
    return nodes_[id];
}

Graph::Node& Graph::node(std::size_t id) {
    if (id >= nodes_.size())
        throw ContractError("tensor refers past the current tape (reset?)");
    return nodes_[id];
}

void Graph::check_same_graph(Tensor t) const {
    if (t.graph() != this)
        throw ContractError("tensor belongs to a different graph");
    node(t.id()); // bounds check
}

Tensor Graph::leaf(Shape shape, std::vector<double> values, bool requires_grad) {
    if (shape_numel(shape) != values.size())
        throw DimensionError("leaf: shape " + shape_to_string(shape) + " does not hold " +
                             std::to_string(values.size()) + " values");
    if (shape.size() > 2)
        throw DimensionError("leaf: rank > 2 not supported, got " + shape_to_string(shape));
    Node n;
    n.op = Op::Leaf;
    n.shape = std::move(shape);
    n.data = std::move(values);
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

Tensor Graph::constant(Shape shape, std::vector<double> values) {
    return leaf(std::move(shape), std::move(values), false);
}

Tensor Graph::scalar(double value) { return constant({1}, {value}); }

Tensor Graph::zeros(Shape shape, bool requires_grad) {
    std::vector<double> values(shape_numel(shape), 0.0);
    return leaf(std::move(shape), std::move(values), requires_grad);
}

// ---------------------------------------------------------------------------
// Forward ops

Tensor Graph::matmul(Tensor a, Tensor b) {
    check_same_graph(a);
    check_same_graph(b);
    const Node& na = node(a.id());
    const Node& nb = node(b.id());
    if (na.shape.size() != 2 || nb.shape.size() != 2 || na.shape[1] != nb.shape[0])
        throw DimensionError("matmul: incompatible shapes " + shape_to_string(na.shape) +
                             " and " + shape_to_string(nb.shape));
    const std::size_t m = na.shape[0], k = na.shape[1], n = nb.shape[1];

    Node out;
    out.op = Op::MatMul;
    out.shape = {m, n};
    out.data.assign(m * n, 0.0);
    out.requires_grad = na.requires_grad || nb.requires_grad;
    out.a = static_cast<std::uint32_t>(a.id());
    out.b = static_cast<std::uint32_t>(b.id());

    const double* A = na.data.data();
    const double* B = nb.data.data();
    double* C = out.data.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* Ai = A + i * k;
        double* Ci = C + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = Ai[p];
            const double* Bp = B + p * n;
            for (std::size_t j = 0; j < n; ++j) Ci[j] += aip * Bp[j];
        }
    }
    return push(std::move(out));
}

Tensor Graph::binary_elementwise(Op op, Tensor a, Tensor b) {
    check_same_graph(a);
    check_same_graph(b);
    const Node& na = node(a.id());
    const Node& nb = node(b.id());
    if (na.shape != nb.shape)
        throw DimensionError("elementwise: shape mismatch " + shape_to_string(na.shape) +
                             " vs " + shape_to_string(nb.shape));

    Node out;
    out.op = op;
    out.shape = na.shape;
    out.data.resize(na.data.size());
    out.requires_grad = na.requires_grad || nb.requires_grad;
    out.a = static_cast<std::uint32_t>(a.id());
    out.b = static_cast<std::uint32_t>(b.id());

    const std::size_t n = na.data.size();
    switch (op) {
    case Op::Add:
        for (std::size_t i = 0; i < n; ++i) out.data[i] = na.data[i] + nb.data[i];
        break;
    case Op::Sub:
        for (std::size_t i = 0; i < n; ++i) out.data[i] = na.data[i] - nb.data[i];
        break;
    case Op::Mul:
        for (std::size_t i = 0; i < n; ++i) out.data[i] = na.data[i] * nb.data[i];
        break;
    case Op::Div:
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(nb.data[i]) < kEps)
                throw NumericDomainError("div: divisor inside the numeric guard band");
            out.data[i] = na.data[i] / nb.data[i];
        }
        break;
    default:
        throw ContractError("binary_elementwise: bad op");
    }
    return push(std::move(out));
}

Tensor Graph::add(Tensor a, Tensor b) { return binary_elementwise(Op::Add, a, b); }
Tensor Graph::sub(Tensor a, Tensor b) { return binary_elementwise(Op::Sub, a, b); }
Tensor Graph::mul(Tensor a, Tensor b) { return binary_elementwise(Op::Mul, a, b); }
Tensor Graph::div(Tensor a, Tensor b) { return binary_elementwise(Op::Div, a, b); }

Tensor Graph::unary_elementwise(Op op, Tensor a, double s0, double s1) {
    check_same_graph(a);
    const Node& na = node(a.id());

    Node out;
    out.op = op;
    out.shape = na.shape;
    out.data.resize(na.data.size());
    out.requires_grad = na.requires_grad;
    out.a = static_cast<std::uint32_t>(a.id());
    out.s0 = s0;
    out.s1 = s1;

    const std::size_t n = na.data.size();
    const double* x = na.data.data();
    double* y = out.data.data();
    switch (op) {
    case Op::AddScalar:
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + s0;
        break;
    case Op::MulScalar:
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * s0;
        break;
    case Op::RSubScalar:
        for (std::size_t i = 0; i < n; ++i) y[i] = s0 - x[i];
        break;
    case Op::Pow:
        for (std::size_t i = 0; i < n; ++i) y[i] = std::pow(x[i], s0);
        break;
    case Op::Neg:
        for (std::size_t i = 0; i < n; ++i) y[i] = -x[i];
        break;
    case Op::Exp:
        for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
        break;
    case Op::Log:
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x[i] + kEps;
            if (v <= 0.0)
                throw NumericDomainError("log: operand " + std::to_string(x[i]) +
                                         " not positive after guarding");
            y[i] = std::log(v);
        }
        break;
    case Op::Sqrt:
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x[i] + kEps;
            if (v < 0.0)
                throw NumericDomainError("sqrt: operand " + std::to_string(x[i]) +
                                         " negative after guarding");
            y[i] = std::sqrt(v);
        }
        break;
    case Op::Sigmoid:
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] >= 0.0) {
                y[i] = 1.0 / (1.0 + std::exp(-x[i]));
            } else {
                const double e = std::exp(x[i]);
                y[i] = e / (1.0 + e);
            }
        }
        break;
    case Op::Tanh:
        for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
        break;
    case Op::Relu:
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
        break;
    case Op::Clamp:
        for (std::size_t i = 0; i < n; ++i) y[i] = std::min(std::max(x[i], s0), s1);
        break;
    default:
        throw ContractError("unary_elementwise: bad op");
    }
    return push(std::move(out));
}

Tensor Graph::add_scalar(Tensor a, double s) { return unary_elementwise(Op::AddScalar, a, s); }
Tensor Graph::mul_scalar(Tensor a, double s) { return unary_elementwise(Op::MulScalar, a, s); }
Tensor Graph::rsub_scalar(double s, Tensor a) { return unary_elementwise(Op::RSubScalar, a, s); }
Tensor Graph::pow(Tensor a, double c) { return unary_elementwise(Op::Pow, a, c); }
Tensor Graph::neg(Tensor a) { return unary_elementwise(Op::Neg, a); }
Tensor Graph::exp(Tensor a) { return unary_elementwise(Op::Exp, a); }
Tensor Graph::log(Tensor a) { return unary_elementwise(Op::Log, a); }
Tensor Graph::sqrt(Tensor a) { return unary_elementwise(Op::Sqrt, a); }
Tensor Graph::sigmoid(Tensor a) { return unary_elementwise(Op::Sigmoid, a); }
Tensor Graph::tanh(Tensor a) { return unary_elementwise(Op::Tanh, a); }
Tensor Graph::relu(Tensor a) { return unary_elementwise(Op::Relu, a); }

Tensor Graph::clamp(Tensor a, double lo, double hi) {
    if (!(lo <= hi)) throw ContractError("clamp: lo > hi");
    return unary_elementwise(Op::Clamp, a, lo, hi);
}

Tensor Graph::sum(Tensor a) {
    check_same_graph(a);
    const Node& na = node(a.id());
    double acc = 0.0;
    for (double v : na.data) acc += v;

    Node out;
    out.op = Op::Sum;
    out.shape = {1};
    out.data = {acc};
    out.requires_grad = na.requires_grad;
    out.a = static_cast<std::uint32_t>(a.id());
    return push(std::move(out));
}

Tensor Graph::mean(Tensor a) {
    check_same_graph(a);
    const Node& na = node(a.id());
    if (na.data.empty()) throw ContractError("mean: empty tensor");
    double acc = 0.0;
    for (double v : na.data) acc += v;

    Node out;
    out.op = Op::Mean;
    out.shape = {1};
    out.data = {acc / static_cast<double>(na.data.size())};
    out.requires_grad = na.requires_grad;
    out.a = static_cast<std::uint32_t>(a.id());
    return push(std::move(out));
}

Tensor Graph::concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw ContractError("concat_rows: no inputs");
    for (Tensor t : parts) check_same_graph(t);

    const Shape& first = node(parts[0].id()).shape;
    const std::size_t rank = first.size();
    const std::size_t cols = rank == 2 ? first[1] : 1;

    std::size_t rows = 0;
    bool needs_grad = false;
    for (Tensor t : parts) {
        const Node& nt = node(t.id());
        if (nt.shape.size() != rank)
            throw DimensionError("concat_rows: mixed ranks " + shape_to_string(first) +
                                 " vs " + shape_to_string(nt.shape));
        if (rank == 2 && nt.shape[1] != cols)
            throw DimensionError("concat_rows: column mismatch " + shape_to_string(first) +
                                 " vs " + shape_to_string(nt.shape));
        rows += nt.shape[0];
        needs_grad = needs_grad || nt.requires_grad;
    }

    Node out;
    out.op = Op::ConcatRows;
    out.shape = rank == 2 ? Shape{rows, cols} : Shape{rows};
    out.data.reserve(rows * cols);
    out.requires_grad = needs_grad;
    out.parts.reserve(parts.size());
    for (Tensor t : parts) {
        const Node& nt = node(t.id());
        out.data.insert(out.data.end(), nt.data.begin(), nt.data.end());
        out.parts.push_back(static_cast<std::uint32_t>(t.id()));
    }
    return push(std::move(out));
}

Tensor Graph::slice_rows(Tensor a, std::size_t begin, std::size_t end) {
    check_same_graph(a);
    const Node& na = node(a.id());
    const std::size_t rank = na.shape.size();
    const std::size_t rows = na.shape.empty() ? 0 : na.shape[0];
    const std::size_t cols = rank == 2 ? na.shape[1] : 1;
    if (begin > end || end > rows)
        throw BoundsError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                          ") out of range for " + shape_to_string(na.shape));

    Node out;
    out.op = Op::SliceRows;
    out.shape = rank == 2 ? Shape{end - begin, cols} : Shape{end - begin};
    out.data.assign(na.data.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                    na.data.begin() + static_cast<std::ptrdiff_t>(end * cols));
    out.requires_grad = na.requires_grad;
    out.a = static_cast<std::uint32_t>(a.id());
    out.s0 = static_cast<double>(begin);
    out.s1 = static_cast<double>(end);
    return push(std::move(out));
}

Tensor Graph::slice_cols(Tensor a, std::size_t begin, std::size_t end) {
    check_same_graph(a);
    const Node& na = node(a.id());
    if (na.shape.size() != 2)
        throw DimensionError("slice_cols: expects a matrix, got " + shape_to_string(na.shape));
    const std::size_t rows = na.shape[0], cols = na.shape[1];
    if (begin > end || end > cols)
        throw BoundsError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                          ") out of range for " + shape_to_string(na.shape));

    Node out;
    out.op = Op::SliceCols;
    out.shape = {rows, end - begin};
    out.data.resize(rows * (end - begin));
    out.requires_grad = na.requires_grad;
    out.a = static_cast<std::uint32_t>(a.id());
    out.s0 = static_cast<double>(begin);
    out.s1 = static_cast<double>(end);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = begin; c < end; ++c)
            out.data[r * (end - begin) + (c - begin)] = na.data[r * cols + c];
    return push(std::move(out));
}

Tensor Graph::repeat_rows(Tensor v, std::size_t n) {
    check_same_graph(v);
    const Node& nv = node(v.id());
    if (nv.shape.size() != 1)
        throw DimensionError("repeat_rows: expects a vector, got " + shape_to_string(nv.shape));
    if (n == 0) throw ContractError("repeat_rows: zero rows");
    const std::size_t cols = nv.shape[0];

    Node out;
    out.op = Op::RepeatRows;
    out.shape = {n, cols};
    out.data.resize(n * cols);
    out.requires_grad = nv.requires_grad;
    out.a = static_cast<std::uint32_t>(v.id());
    for (std::size_t r = 0; r < n; ++r)
        std::copy(nv.data.begin(), nv.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(r * cols));
    return push(std::move(out));
}

Tensor Graph::reshape(Tensor a, Shape shape) {
    check_same_graph(a);
    const Node& na = node(a.id());
    if (shape_numel(shape) != na.data.size())
        throw DimensionError("reshape: " + shape_to_string(na.shape) + " to " +
                             shape_to_string(shape) + " changes element count");
    if (shape.size() > 2)
        throw DimensionError("reshape: rank > 2 not supported");

    Node out;
    out.op = Op::Reshape;
    out.shape = std::move(shape);
    out.data = na.data;
    out.requires_grad = na.requires_grad;
    out.a = static_cast<std::uint32_t>(a.id());
    return push(std::move(out));
}

// ---------------------------------------------------------------------------
// Backward

void Graph::backward(Tensor root) {
    check_same_graph(root);
    if (backward_done_)
        throw ContractError("backward called twice without reset");
    Node& r = node(root.id());
    if (r.data.size() != 1)
        throw ContractError("backward: root is not scalar, shape " + shape_to_string(r.shape));
    if (!r.requires_grad)
        throw ContractError("backward: root does not depend on any differentiable tensor");

    backward_done_ = true;
    r.grad[0] = 1.0;
    for (std::size_t id = root.id() + 1; id-- > 0;) backward_node(id);
}

void Graph::backward_node(std::size_t id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.op == Op::Leaf) return;

    const std::vector<double>& g = n.grad;
    auto grad_of = [this](std::uint32_t operand) -> std::vector<double>* {
        Node& src = nodes_[operand];
        return src.requires_grad ? &src.grad : nullptr;
    };

    switch (n.op) {
    case Op::MatMul: {
        const Node& na = nodes_[n.a];
        const Node& nb = nodes_[n.b];
        const std::size_t m = na.shape[0], k = na.shape[1], c = nb.shape[1];
        if (auto* ga = grad_of(n.a)) {
            // A.grad += G * B^T
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    const double* Gi = g.data() + i * c;
                    const double* Bp = nb.data.data() + p * c;
                    for (std::size_t j = 0; j < c; ++j) acc += Gi[j] * Bp[j];
                    (*ga)[i * k + p] += acc;
                }
        }
        if (auto* gb = grad_of(n.b)) {
            // B.grad += A^T * G
            for (std::size_t i = 0; i < m; ++i) {
                const double* Ai = na.data.data() + i * k;
                const double* Gi = g.data() + i * c;
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = Ai[p];
                    double* row = gb->data() + p * c;
                    for (std::size_t j = 0; j < c; ++j) row[j] += aip * Gi[j];
                }
            }
        }
        break;
    }
    case Op::Add: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        if (auto* gb = grad_of(n.b))
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i];
        break;
    }
    case Op::Sub: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        if (auto* gb = grad_of(n.b))
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
        break;
    }
    case Op::Mul: {
        const Node& na = nodes_[n.a];
        const Node& nb = nodes_[n.b];
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * nb.data[i];
        if (auto* gb = grad_of(n.b))
            for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * na.data[i];
        break;
    }
    case Op::Div: {
        const Node& na = nodes_[n.a];
        const Node& nb = nodes_[n.b];
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] / nb.data[i];
        if (auto* gb = grad_of(n.b))
            for (std::size_t i = 0; i < g.size(); ++i)
                (*gb)[i] -= g[i] * na.data[i] / (nb.data[i] * nb.data[i]);
        break;
    }
    case Op::AddScalar: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        break;
    }
    case Op::MulScalar: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * n.s0;
        break;
    }
    case Op::RSubScalar: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] -= g[i];
        break;
    }
    case Op::Pow: {
        const Node& na = nodes_[n.a];
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i)
                (*ga)[i] += g[i] * n.s0 * std::pow(na.data[i], n.s0 - 1.0);
        break;
    }
    case Op::Neg: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] -= g[i];
        break;
    }
    case Op::Exp: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * n.data[i];
        break;
    }
    case Op::Log: {
        const Node& na = nodes_[n.a];
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] / (na.data[i] + kEps);
        break;
    }
    case Op::Sqrt: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * 0.5 / n.data[i];
        break;
    }
    case Op::Sigmoid: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i)
                (*ga)[i] += g[i] * n.data[i] * (1.0 - n.data[i]);
        break;
    }
    case Op::Tanh: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i)
                (*ga)[i] += g[i] * (1.0 - n.data[i] * n.data[i]);
        break;
    }
    case Op::Relu: {
        const Node& na = nodes_[n.a];
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i)
                if (na.data[i] > 0.0) (*ga)[i] += g[i];
        break;
    }
    case Op::Clamp: {
        const Node& na = nodes_[n.a];
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i)
                if (na.data[i] >= n.s0 && na.data[i] <= n.s1) (*ga)[i] += g[i];
        break;
    }
    case Op::Sum: {
        if (auto* ga = grad_of(n.a))
            for (double& v : *ga) v += g[0];
        break;
    }
    case Op::Mean: {
        if (auto* ga = grad_of(n.a)) {
            const double scale = g[0] / static_cast<double>(ga->size());
            for (double& v : *ga) v += scale;
        }
        break;
    }
    case Op::ConcatRows: {
        std::size_t offset = 0;
        for (std::uint32_t part : n.parts) {
            Node& src = nodes_[part];
            const std::size_t len = src.data.size();
            if (src.requires_grad)
                for (std::size_t i = 0; i < len; ++i) src.grad[i] += g[offset + i];
            offset += len;
        }
        break;
    }
    case Op::SliceRows: {
        const Node& na = nodes_[n.a];
        const std::size_t cols = na.shape.size() == 2 ? na.shape[1] : 1;
        const std::size_t begin = static_cast<std::size_t>(n.s0);
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[begin * cols + i] += g[i];
        break;
    }
    case Op::SliceCols: {
        const Node& na = nodes_[n.a];
        const std::size_t cols = na.shape[1];
        const std::size_t begin = static_cast<std::size_t>(n.s0);
        const std::size_t width = n.shape[1];
        if (auto* ga = grad_of(n.a))
            for (std::size_t r = 0; r < n.shape[0]; ++r)
                for (std::size_t c = 0; c < width; ++c)
                    (*ga)[r * cols + begin + c] += g[r * width + c];
        break;
    }
    case Op::RepeatRows: {
        const std::size_t cols = n.shape[1];
        if (auto* ga = grad_of(n.a))
            for (std::size_t r = 0; r < n.shape[0]; ++r)
                for (std::size_t c = 0; c < cols; ++c) (*ga)[c] += g[r * cols + c];
        break;
    }
    case Op::Reshape: {
        if (auto* ga = grad_of(n.a))
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        break;
    }
    case Op::Leaf:
        break;
    }
}

void Graph::reset(std::size_t keep) {
    if (keep > nodes_.size())
        throw ContractError("reset: keep mark past the current tape");
    nodes_.resize(keep);
    for (Node& n : nodes_)
        std::fill(n.grad.begin(), n.grad.end(), 0.0);
    backward_done_ = false;
}

} // namespace ogpred

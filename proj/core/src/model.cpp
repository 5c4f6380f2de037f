#include "ogpred/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ogpred/config_file.hpp"
#include "ogpred/rng.hpp"

namespace ogpred {

namespace {

constexpr char kMagic[4] = {'O', 'G', 'P', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint32_t crc32_update(std::uint32_t crc, const void* data, std::size_t len) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    const auto* bytes = static_cast<const std::uint8_t*>(data);
    crc = ~crc;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ bytes[i]) & 0xff] ^ (crc >> 8);
    return ~crc;
}

/// Uniform [-bound, bound] fill.
void fill_uniform(std::vector<double>& values, double bound, Rng& rng) {
    for (double& v : values) v = rng.uniform(-bound, bound);
}

std::string join_ints(std::span<const int> values) {
    std::ostringstream os;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ',';
        os << values[i];
    }
    return os.str();
}

} // namespace

void ModelConfig::validate() const {
    if (window != 5 && window != 10 && window != 15 && window != 20)
        throw ConfigError("model: window must be one of {5,10,15,20}, got " +
                          std::to_string(window));
    if (lstm_sizes.empty() || lstm_sizes.size() > 4)
        throw ConfigError("model: 1 to 4 LSTM layers required, got " +
                          std::to_string(lstm_sizes.size()));
    for (int h : lstm_sizes)
        if (h < 1) throw ConfigError("model: LSTM size must be >= 1, got " + std::to_string(h));
    if (mlp_size < 0) throw ConfigError("model: mlp_size must be >= 0");
    if (input_width < 1) throw ConfigError("model: input_width must be >= 1");
}

std::string ModelConfig::to_string() const {
    std::ostringstream os;
    os << "lstm=[" << join_ints(lstm_sizes) << "] mlp=" << mlp_size << " win=" << window;
    return os.str();
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const ParamArray& a : arrays) n += a.values.size();
    return n;
}

ModelParams init_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    ModelParams params;
    params.config = config;

    auto add = [&](const std::string& name, Shape shape, double bound) {
        ParamArray a;
        a.name = name;
        a.shape = std::move(shape);
        a.values.resize(shape_numel(a.shape));
        fill_uniform(a.values, bound, rng);
        params.arrays.push_back(std::move(a));
    };

    std::size_t in = static_cast<std::size_t>(config.input_width);
    for (std::size_t l = 0; l < config.lstm_sizes.size(); ++l) {
        const std::size_t hidden = static_cast<std::size_t>(config.lstm_sizes[l]);
        const std::string prefix = "lstm" + std::to_string(l);
        add(prefix + ".wx", {in, 4 * hidden}, 1.0 / std::sqrt(static_cast<double>(in)));
        add(prefix + ".wh", {hidden, 4 * hidden}, 1.0 / std::sqrt(static_cast<double>(hidden)));
        add(prefix + ".b", {4 * hidden}, 1.0 / std::sqrt(static_cast<double>(hidden)));
        in = hidden;
    }

    if (config.mlp_size > 0) {
        const std::size_t m = static_cast<std::size_t>(config.mlp_size);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        add("mlp.w", {in, m}, bound);
        add("mlp.b", {m}, bound);
        in = m;
    }

    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    add("head.w", {in, 1}, bound);
    add("head.b", {1}, bound);
    return params;
}

std::pair<Tensor, Tensor> lstm_cell_step(Graph& g, Tensor x, Tensor h, Tensor c, Tensor wx,
                                         Tensor wh, Tensor b) {
    const std::size_t batch = x.rows();
    const std::size_t hidden = h.cols();

    Tensor gates = g.add(g.add(g.matmul(x, wx), g.matmul(h, wh)), g.repeat_rows(b, batch));
    Tensor i = g.sigmoid(g.slice_cols(gates, 0, hidden));
    Tensor f = g.sigmoid(g.slice_cols(gates, hidden, 2 * hidden));
    Tensor cand = g.tanh(g.slice_cols(gates, 2 * hidden, 3 * hidden));
    Tensor o = g.sigmoid(g.slice_cols(gates, 3 * hidden, 4 * hidden));

    Tensor c_next = g.add(g.mul(f, c), g.mul(i, cand));
    Tensor h_next = g.mul(o, g.tanh(c_next));
    return {h_next, c_next};
}

BoundModel::BoundModel(Graph& g, const ModelParams& params, bool differentiable)
    : graph_(&g), config_(params.config) {
    config_.validate();
    leaves_.reserve(params.arrays.size());
    for (const ParamArray& a : params.arrays) {
        names_.push_back(a.name);
        leaves_.push_back(g.leaf(a.shape, a.values, differentiable));
    }
}

Tensor BoundModel::forward_steps(std::size_t batch_size,
                                 const std::function<Tensor(std::size_t)>& step_input) {
    Graph& g = *graph_;
    const std::size_t layers = config_.lstm_sizes.size();
    const std::size_t steps = config_.sequence_length();

    std::vector<Tensor> h(layers), c(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t hidden = static_cast<std::size_t>(config_.lstm_sizes[l]);
        h[l] = g.zeros({batch_size, hidden});
        c[l] = g.zeros({batch_size, hidden});
    }

    std::size_t leaf = 0;
    std::vector<Tensor> wx(layers), wh(layers), b(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        wx[l] = leaves_[leaf++];
        wh[l] = leaves_[leaf++];
        b[l] = leaves_[leaf++];
    }

    for (std::size_t t = 0; t < steps; ++t) {
        Tensor input = step_input(t);
        for (std::size_t l = 0; l < layers; ++l) {
            auto [h_next, c_next] = lstm_cell_step(g, input, h[l], c[l], wx[l], wh[l], b[l]);
            h[l] = h_next;
            c[l] = c_next;
            input = h[l];
        }
    }

    Tensor features = h[layers - 1];
    if (config_.mlp_size > 0) {
        Tensor mw = leaves_[leaf++];
        Tensor mb = leaves_[leaf++];
        features = g.relu(g.add(g.matmul(features, mw), g.repeat_rows(mb, batch_size)));
    }
    Tensor hw = leaves_[leaf++];
    Tensor hb = leaves_[leaf++];
    Tensor logits = g.add(g.matmul(features, hw), g.repeat_rows(hb, batch_size));
    return g.reshape(g.sigmoid(logits), {batch_size});
}

Tensor BoundModel::forward(const EncodedDataset& data, std::span<const std::size_t> batch) {
    if (batch.empty()) throw ContractError("forward: empty batch");
    if (data.window() != config_.window)
        throw DimensionError("forward: dataset window " + std::to_string(data.window()) +
                             " != model window " + std::to_string(config_.window));
    Graph& g = *graph_;
    const std::size_t width = static_cast<std::size_t>(config_.input_width);
    return forward_steps(batch.size(), [&](std::size_t t) {
        std::vector<double> step(batch.size() * width, 0.0);
        data.fill_step(batch, t, step);
        return g.constant({batch.size(), width}, std::move(step));
    });
}

Tensor BoundModel::forward_windows(std::span<const EncodedWindow> windows) {
    if (windows.empty()) throw ContractError("forward_windows: empty batch");
    const std::size_t steps = config_.sequence_length();
    const std::size_t width = static_cast<std::size_t>(config_.input_width);
    for (const EncodedWindow& w : windows)
        if (w.rows != steps || w.cols != width)
            throw DimensionError("forward_windows: window is " + std::to_string(w.rows) + "x" +
                                 std::to_string(w.cols) + ", model expects " +
                                 std::to_string(steps) + "x" + std::to_string(width));
    Graph& g = *graph_;
    return forward_steps(windows.size(), [&](std::size_t t) {
        std::vector<double> step(windows.size() * width, 0.0);
        for (std::size_t b = 0; b < windows.size(); ++b)
            for (std::size_t col = 0; col < width; ++col)
                step[b * width + col] = windows[b].at(t, col);
        return g.constant({windows.size(), width}, std::move(step));
    });
}

ModelParams BoundModel::snapshot(double best_threshold) const {
    ModelParams params;
    params.config = config_;
    params.best_threshold = best_threshold;
    params.arrays.reserve(leaves_.size());
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
        ParamArray a;
        a.name = names_[i];
        a.shape = leaves_[i].shape();
        auto d = leaves_[i].data();
        a.values.assign(d.begin(), d.end());
        params.arrays.push_back(std::move(a));
    }
    return params;
}

std::vector<double> predict_probabilities(const ModelParams& params, const EncodedDataset& data,
                                          std::span<const std::size_t> batch,
                                          std::size_t batch_size) {
    std::vector<double> probs;
    probs.reserve(batch.size());
    for (std::size_t begin = 0; begin < batch.size(); begin += batch_size) {
        const std::size_t end = std::min(begin + batch_size, batch.size());
        Graph g;
        BoundModel model(g, params, /*differentiable=*/false);
        Tensor out = model.forward(data, batch.subspan(begin, end - begin));
        auto d = out.data();
        probs.insert(probs.end(), d.begin(), d.end());
    }
    return probs;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

void write_bytes(std::ostream& os, std::uint32_t& crc, const void* data, std::size_t len) {
    os.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    crc = crc32_update(crc, data, len);
}

template <typename T>
void write_pod(std::ostream& os, std::uint32_t& crc, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    write_bytes(os, crc, &value, sizeof(value));
}

void read_bytes(std::istream& is, std::uint32_t& crc, void* data, std::size_t len) {
    is.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(is.gcount()) != len)
        throw IoError("model file truncated");
    crc = crc32_update(crc, data, len);
}

template <typename T>
T read_pod(std::istream& is, std::uint32_t& crc) {
    static_assert(std::is_trivially_copyable_v<T>);
    T value;
    read_bytes(is, crc, &value, sizeof(value));
    return value;
}

} // namespace

void save_model(const ModelParams& params, const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little,
                  "model files are little-endian");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write model file: " + path.string());

    std::uint32_t crc = 0;
    write_bytes(os, crc, kMagic, sizeof(kMagic));
    write_pod(os, crc, kFormatVersion);

    ConfigMap cfg;
    cfg.set("window", std::to_string(params.config.window));
    cfg.set("lstm_sizes", join_ints(params.config.lstm_sizes));
    cfg.set("mlp_size", std::to_string(params.config.mlp_size));
    cfg.set("input_width", std::to_string(params.config.input_width));
    {
        std::ostringstream t;
        t.precision(17);
        t << params.best_threshold;
        cfg.set("best_threshold", t.str());
    }
    std::string config_text;
    for (const auto& [k, v] : cfg.values()) config_text += k + " = " + v + "\n";

    write_pod(os, crc, static_cast<std::uint32_t>(config_text.size()));
    write_bytes(os, crc, config_text.data(), config_text.size());

    write_pod(os, crc, static_cast<std::uint32_t>(params.arrays.size()));
    for (const ParamArray& a : params.arrays) {
        write_pod(os, crc, static_cast<std::uint16_t>(a.name.size()));
        write_bytes(os, crc, a.name.data(), a.name.size());
        write_pod(os, crc, static_cast<std::uint8_t>(a.shape.size()));
        for (std::size_t d : a.shape) write_pod(os, crc, static_cast<std::uint64_t>(d));
        write_bytes(os, crc, a.values.data(), a.values.size() * sizeof(double));
    }

    os.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
    if (!os) throw IoError("failed writing model file: " + path.string());
}

ModelParams load_model(const std::filesystem::path& path, std::optional<int> expect_window) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("model file not found: " + path.string());

    std::uint32_t crc = 0;
    char magic[4];
    read_bytes(is, crc, magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ParseError("not a model file: " + path.string());
    const auto version = read_pod<std::uint32_t>(is, crc);
    if (version != kFormatVersion)
        throw ConfigError("model format version " + std::to_string(version) +
                          " unsupported (expected " + std::to_string(kFormatVersion) + ")");

    const auto config_len = read_pod<std::uint32_t>(is, crc);
    std::string config_text(config_len, '\0');
    read_bytes(is, crc, config_text.data(), config_len);
    const ConfigMap cfg = parse_config_text(config_text, path.string() + "#config");

    ModelParams params;
    params.config.window = static_cast<int>(cfg.get_int("window"));
    params.config.lstm_sizes = cfg.get_int_list("lstm_sizes");
    params.config.mlp_size = static_cast<int>(cfg.get_int("mlp_size"));
    params.config.input_width = static_cast<int>(cfg.get_int("input_width"));
    params.best_threshold = cfg.get_double("best_threshold", 0.5);
    params.config.validate();

    const auto n_arrays = read_pod<std::uint32_t>(is, crc);
    params.arrays.reserve(n_arrays);
    for (std::uint32_t i = 0; i < n_arrays; ++i) {
        ParamArray a;
        const auto name_len = read_pod<std::uint16_t>(is, crc);
        a.name.resize(name_len);
        read_bytes(is, crc, a.name.data(), name_len);
        const auto ndim = read_pod<std::uint8_t>(is, crc);
        for (std::uint8_t d = 0; d < ndim; ++d)
            a.shape.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(is, crc)));
        a.values.resize(shape_numel(a.shape));
        read_bytes(is, crc, a.values.data(), a.values.size() * sizeof(double));
        params.arrays.push_back(std::move(a));
    }

    std::uint32_t stored_crc;
    is.read(reinterpret_cast<char*>(&stored_crc), sizeof(stored_crc));
    if (static_cast<std::size_t>(is.gcount()) != sizeof(stored_crc))
        throw IoError("model file truncated");
    if (stored_crc != crc)
        throw ParseError("model file checksum mismatch: " + path.string());

    for (const ParamArray& a : params.arrays)
        for (double v : a.values)
            if (!std::isfinite(v))
                throw ParseError("model file contains non-finite parameter in " + a.name);

    if (expect_window && params.config.window != *expect_window)
        throw ConfigError("model window " + std::to_string(params.config.window) +
                          " does not match expected window " + std::to_string(*expect_window));
    return params;
}

} // namespace ogpred

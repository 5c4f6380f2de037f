#include "ogpred/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ogpred/config_file.hpp"
#include "ogpred/rng.hpp"
#include "ogpred/sha256.hpp"

namespace ogpred {

namespace {

thread_local std::uint64_t t_unknown_count = 0;

std::array<std::int8_t, 256> build_index_table() {
    std::array<std::int8_t, 256> table;
    table.fill(-1);
    for (std::size_t i = 0; i < kAlphabet.size(); ++i)
        table[static_cast<unsigned char>(kAlphabet[i])] = static_cast<std::int8_t>(i);
    return table;
}

const std::array<std::int8_t, 256> kIndexTable = build_index_table();

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(strip(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

/// Center-crop or pad a centered odd-length sequence to width 2w+1.
std::string fit_to_width(const std::string& seq, int window) {
    const std::size_t target = static_cast<std::size_t>(2 * window + 1);
    if (seq.size() == target) return seq;
    const std::size_t center = seq.size() / 2;
    if (seq.size() > target) {
        return seq.substr(center - static_cast<std::size_t>(window), target);
    }
    const std::size_t pad_each = (target - seq.size()) / 2;
    std::string out(pad_each, kPaddingChar);
    out += seq;
    out.append(pad_each, kPaddingChar);
    return out;
}

bool is_site_residue(char c) { return c == 'S' || c == 'T'; }

/// Stratified assignment of indices to k groups: shuffles each class
/// separately, then deals the positive block followed by the negative block
/// round-robin. Group sizes differ by at most one overall and per class.
std::vector<std::vector<std::size_t>> deal_stratified(std::span<const int> labels,
                                                      std::span<const std::size_t> universe,
                                                      std::size_t k, Rng& rng) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t idx : universe)
        (labels[idx] == 1 ? pos : neg).push_back(idx);
    rng.shuffle(std::span<std::size_t>(pos));
    rng.shuffle(std::span<std::size_t>(neg));

    std::vector<std::vector<std::size_t>> groups(k);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < pos.size(); ++i, ++cursor) groups[cursor % k].push_back(pos[i]);
    for (std::size_t i = 0; i < neg.size(); ++i, ++cursor) groups[cursor % k].push_back(neg[i]);
    for (auto& g : groups) std::sort(g.begin(), g.end());
    return groups;
}

} // namespace

std::size_t alphabet_index(char residue, std::uint64_t* unknown_count) {
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(residue)));
    const std::int8_t idx = kIndexTable[static_cast<unsigned char>(upper)];
    if (idx >= 0) return static_cast<std::size_t>(idx);
    if (unknown_count) ++*unknown_count;
    return kUnknownIndex;
}

std::uint64_t encode_unknown_count() { return t_unknown_count; }
void reset_encode_unknown_count() { t_unknown_count = 0; }

std::vector<SiteRecord> load_dataset(const std::filesystem::path& path, int window,
                                     LoadStats* stats) {
    if (window <= 0) throw ContractError("load_dataset: window must be positive");
    std::ifstream in(path);
    if (!in) throw IoError("dataset not found: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw ParseError("dataset is empty (no header): " + path.string());

    const std::vector<std::string> header = split_csv_line(line);
    std::ptrdiff_t seq_col = -1, label_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = to_lower(header[i]);
        if (seq_col < 0 && name.find("sequence") != std::string::npos)
            seq_col = static_cast<std::ptrdiff_t>(i);
        else if (label_col < 0 && name.find("label") != std::string::npos)
            label_col = static_cast<std::ptrdiff_t>(i);
    }
    if (seq_col < 0 || label_col < 0) {
        if (header.size() == 2) {
            seq_col = 0;
            label_col = 1;
        } else {
            throw ParseError("header of " + path.string() +
                             " has no sequence/label columns: " + line);
        }
    }

    LoadStats local;
    std::vector<SiteRecord> records;
    std::size_t row = 1; // header was row 1
    while (std::getline(in, line)) {
        ++row;
        if (strip(line).empty()) continue;
        ++local.data_rows;
        const std::vector<std::string> fields = split_csv_line(line);
        const std::size_t need = static_cast<std::size_t>(std::max(seq_col, label_col)) + 1;
        if (fields.size() < need)
            throw ParseError("row " + std::to_string(row) + ": expected at least " +
                             std::to_string(need) + " fields, got " +
                             std::to_string(fields.size()));

        std::string seq = fields[static_cast<std::size_t>(seq_col)];
        const std::string& label_str = fields[static_cast<std::size_t>(label_col)];
        if (label_str != "0" && label_str != "1")
            throw ParseError("row " + std::to_string(row) + ": label must be 0 or 1, got '" +
                             label_str + "'");
        if (seq.empty() || seq.size() % 2 == 0)
            throw ParseError("row " + std::to_string(row) +
                             ": sequence must have odd length, got " +
                             std::to_string(seq.size()));
        for (char& c : seq) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));

        if (!is_site_residue(seq[seq.size() / 2])) {
            ++local.rejected_center;
            continue;
        }

        SiteRecord rec;
        rec.sequence = fit_to_width(seq, window);
        rec.label = label_str == "1" ? 1 : 0;
        rec.source_row = local.data_rows - 1; // 0-based position among data rows
        ++local.accepted;
        if (rec.label) ++local.positives;
        else ++local.negatives;
        records.push_back(std::move(rec));
    }
    local.unknown_chars = 0;
    if (stats) *stats = local;
    return records;
}

EncodedWindow encode(const SiteRecord& record) {
    EncodedWindow out;
    out.rows = record.sequence.size();
    out.cols = kAlphabetSize;
    out.values.assign(out.rows * out.cols, 0.0);
    out.label = record.label;
    for (std::size_t r = 0; r < out.rows; ++r) {
        const std::size_t c = alphabet_index(record.sequence[r], &t_unknown_count);
        out.values[r * out.cols + c] = 1.0;
    }
    return out;
}

std::string decode(const EncodedWindow& window) {
    std::string seq(window.rows, '?');
    for (std::size_t r = 0; r < window.rows; ++r) {
        std::size_t hot = kAlphabetSize;
        for (std::size_t c = 0; c < window.cols; ++c) {
            if (window.values[r * window.cols + c] == 1.0) {
                if (hot != kAlphabetSize)
                    throw ContractError("decode: row " + std::to_string(r) + " not one-hot");
                hot = c;
            }
        }
        if (hot == kAlphabetSize)
            throw ContractError("decode: row " + std::to_string(r) + " has no hot column");
        seq[r] = kAlphabet[hot];
    }
    return seq;
}

std::string cut_window(std::string_view sequence, std::size_t center, int window) {
    if (center >= sequence.size())
        throw BoundsError("cut_window: center " + std::to_string(center) +
                          " outside sequence of length " + std::to_string(sequence.size()));
    const std::size_t width = static_cast<std::size_t>(2 * window + 1);
    std::string out(width, kPaddingChar);
    for (std::size_t i = 0; i < width; ++i) {
        const std::ptrdiff_t src =
            static_cast<std::ptrdiff_t>(center) - window + static_cast<std::ptrdiff_t>(i);
        if (src >= 0 && src < static_cast<std::ptrdiff_t>(sequence.size()))
            out[i] = static_cast<char>(
                std::toupper(static_cast<unsigned char>(sequence[static_cast<std::size_t>(src)])));
    }
    return out;
}

// ---------------------------------------------------------------------------
// EncodedDataset

EncodedDataset EncodedDataset::from_records(std::span<const SiteRecord> records, int window) {
    EncodedDataset ds;
    ds.window_ = window;
    const std::size_t width = ds.width();
    ds.codes_.reserve(records.size() * width);
    ds.labels_.reserve(records.size());
    for (const SiteRecord& rec : records) {
        if (rec.sequence.size() != width)
            throw DimensionError("EncodedDataset: record width " +
                                 std::to_string(rec.sequence.size()) + " != " +
                                 std::to_string(width));
        for (char c : rec.sequence)
            ds.codes_.push_back(static_cast<std::uint8_t>(alphabet_index(c, &t_unknown_count)));
        ds.labels_.push_back(rec.label);
    }
    return ds;
}

std::span<const std::uint8_t> EncodedDataset::indices(std::size_t i) const {
    return std::span<const std::uint8_t>(codes_.data() + i * width(), width());
}

void EncodedDataset::fill_step(std::span<const std::size_t> batch, std::size_t t,
                               std::span<double> out) const {
    if (out.size() != batch.size() * kAlphabetSize)
        throw DimensionError("fill_step: output buffer size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t width = this->width();
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const std::uint8_t code = codes_[batch[b] * width + t];
        out[b * kAlphabetSize + code] = 1.0;
    }
}

std::size_t EncodedDataset::positives() const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
}

// ---------------------------------------------------------------------------
// Splits

std::vector<std::size_t> DatasetSplit::train_without_fold(std::size_t held_out) const {
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        if (f == held_out) continue;
        out.insert(out.end(), folds[f].begin(), folds[f].end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

DatasetSplit make_split(std::span<const int> labels, std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (n < 10) throw ContractError("make_split: need at least 10 records, got " +
                                    std::to_string(n));
    const std::size_t n_pos = static_cast<std::size_t>(
        std::count(labels.begin(), labels.end(), 1));
    if (n_pos == 0 || n_pos == n)
        throw ContractError("make_split: cannot stratify a single-class dataset");

    Rng rng(seed);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);

    // Five stratified groups; group 0 becomes the ~20% test set.
    auto groups = deal_stratified(labels, all, 5, rng);

    DatasetSplit split;
    split.seed = seed;
    split.test_indices = std::move(groups[0]);
    for (std::size_t g = 1; g < 5; ++g)
        split.train_indices.insert(split.train_indices.end(), groups[g].begin(), groups[g].end());
    std::sort(split.train_indices.begin(), split.train_indices.end());

    auto folds = deal_stratified(labels, split.train_indices, 5, rng);
    for (std::size_t f = 0; f < 5; ++f) split.folds[f] = std::move(folds[f]);
    return split;
}

std::array<DatasetSplit, 5> make_nested_splits(std::span<const int> labels, std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (n < 10)
        throw ContractError("make_nested_splits: need at least 10 records, got " +
                            std::to_string(n));

    Rng rng(seed);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    auto outer = deal_stratified(labels, all, 5, rng);

    std::array<DatasetSplit, 5> rounds;
    for (std::size_t r = 0; r < 5; ++r) {
        DatasetSplit& split = rounds[r];
        split.seed = Rng::mix(seed, r);
        split.test_indices = outer[r];
        for (std::size_t g = 0; g < 5; ++g) {
            if (g == r) continue;
            split.train_indices.insert(split.train_indices.end(), outer[g].begin(),
                                       outer[g].end());
        }
        std::sort(split.train_indices.begin(), split.train_indices.end());

        Rng fold_rng(split.seed);
        auto folds = deal_stratified(labels, split.train_indices, 5, fold_rng);
        for (std::size_t f = 0; f < 5; ++f) split.folds[f] = std::move(folds[f]);
    }
    return rounds;
}

// ---------------------------------------------------------------------------
// Manifest

DatasetManifest load_manifest(const std::filesystem::path& path) {
    const ConfigMap cfg = load_config_file(path);
    DatasetManifest m;
    m.file = cfg.get_string("file");
    m.source_url = cfg.get_string("source_url", "");
    m.sha256 = cfg.get_string("sha256", "");
    m.rows = static_cast<std::size_t>(cfg.get_int("rows"));
    m.positives = static_cast<std::size_t>(cfg.get_int("positives"));
    return m;
}

std::optional<std::string> verify_manifest(const DatasetManifest& manifest,
                                           const std::filesystem::path& base_dir) {
    const std::filesystem::path file = base_dir / manifest.file;
    if (!std::filesystem::exists(file)) return "missing file: " + file.string();

    if (!manifest.sha256.empty()) {
        const std::string digest = sha256_file(file);
        if (digest != manifest.sha256)
            return "sha256 mismatch for " + file.string() + ": " + digest;
    }

    std::ifstream in(file);
    std::string line;
    std::getline(in, line); // header
    std::size_t rows = 0, positives = 0;
    while (std::getline(in, line)) {
        if (strip(line).empty()) continue;
        ++rows;
        const auto comma = line.find_last_of(',');
        if (comma != std::string::npos && strip(line.substr(comma + 1)) == "1") ++positives;
    }
    if (rows != manifest.rows)
        return "row count " + std::to_string(rows) + " != manifest " +
               std::to_string(manifest.rows);
    if (positives != manifest.positives)
        return "positive count " + std::to_string(positives) + " != manifest " +
               std::to_string(manifest.positives);
    return std::nullopt;
}

} // namespace ogpred

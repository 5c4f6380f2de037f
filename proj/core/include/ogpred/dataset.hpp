#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ogpred/errors.hpp"

namespace ogpred {

// One-hot alphabet: the 20 standard amino acids in alphabetical one-letter
// order, then 'X' (unknown residue) and '-' (terminus padding).
inline constexpr std::string_view kAlphabet = "ACDEFGHIKLMNPQRSTVWYX-";
inline constexpr std::size_t kAlphabetSize = 22;
inline constexpr std::size_t kUnknownIndex = 20;
inline constexpr std::size_t kPaddingIndex = 21;
inline constexpr char kPaddingChar = '-';

/// Column index for a residue character; unknown characters map to 'X' and
/// bump *unknown_count when provided.
std::size_t alphabet_index(char residue, std::uint64_t* unknown_count = nullptr);

/// A window of 2w+1 residues centered on an S/T site.
struct SiteRecord {
    std::string sequence;
    int label = 0;          // 1 = O-GlcNAcylated
    std::size_t source_row = 0;
};

/// One-hot encoding of a SiteRecord: (2w+1) x kAlphabetSize, each row sums
/// to exactly 1.
struct EncodedWindow {
    std::size_t rows = 0;
    std::size_t cols = kAlphabetSize;
    std::vector<double> values; // row-major
    int label = 0;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct LoadStats {
    std::size_t data_rows = 0;       // rows after the header
    std::size_t accepted = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::size_t rejected_center = 0; // central residue not S/T
    std::uint64_t unknown_chars = 0;
};

/// Reads a `sequence,label` CSV and returns site windows of width 2w+1.
/// Stored sequences are center-cropped or '-'-padded to the requested width.
/// Rows whose central residue is not S/T are rejected (counted, not fatal);
/// malformed rows raise ParseError naming the row.
std::vector<SiteRecord> load_dataset(const std::filesystem::path& path, int window,
                                     LoadStats* stats = nullptr);

EncodedWindow encode(const SiteRecord& record);
std::string decode(const EncodedWindow& window);

/// Total unknown-residue substitutions performed by encode()/EncodedDataset
/// on this thread since the last reset.
std::uint64_t encode_unknown_count();
void reset_encode_unknown_count();

/// Cuts the width-(2w+1) window around `center` in a raw protein sequence,
/// padding with '-' where the window runs past either terminus.
std::string cut_window(std::string_view sequence, std::size_t center, int window);

/// Compact dataset representation: one alphabet index per residue. Feeds
/// batched model input assembly without materializing one-hot matrices.
class EncodedDataset {
public:
    static EncodedDataset from_records(std::span<const SiteRecord> records, int window);

    std::size_t size() const { return labels_.size(); }
    int window() const { return window_; }
    std::size_t width() const { return static_cast<std::size_t>(2 * window_ + 1); }
    int label(std::size_t i) const { return labels_[i]; }
    std::span<const int> labels() const { return labels_; }
    std::span<const std::uint8_t> indices(std::size_t i) const;

    /// Writes the one-hot input matrix for time step `t` of the given batch
    /// into `out` (size batch.size() * kAlphabetSize, row-major).
    void fill_step(std::span<const std::size_t> batch, std::size_t t,
                   std::span<double> out) const;

    std::size_t positives() const;

private:
    int window_ = 0;
    std::vector<std::uint8_t> codes_; // size() * width()
    std::vector<int> labels_;
};

/// 80/20 train/test indices plus 5 validation folds partitioning the
/// training set. All selections are stratified by label.
struct DatasetSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::array<std::vector<std::size_t>, 5> folds;
    std::uint64_t seed = 0;

    /// Training indices with fold `held_out` removed.
    std::vector<std::size_t> train_without_fold(std::size_t held_out) const;
};

DatasetSplit make_split(std::span<const int> labels, std::uint64_t seed);

/// Five outer rounds: each uses one fifth of the data as test set and a
/// fresh 5-fold CV split of the remainder. The five test sets partition the
/// dataset.
std::array<DatasetSplit, 5> make_nested_splits(std::span<const int> labels, std::uint64_t seed);

/// Sidecar manifest recording where a dataset comes from and what it must
/// contain (key = value text; see data/manifest.txt).
struct DatasetManifest {
    std::string file;
    std::string source_url;
    std::string sha256;
    std::size_t rows = 0;
    std::size_t positives = 0;
};

DatasetManifest load_manifest(const std::filesystem::path& path);

/// Checks the referenced file's SHA-256 and row/positive census against the
/// manifest. Returns an explanation on mismatch, nullopt when clean.
std::optional<std::string> verify_manifest(const DatasetManifest& manifest,
                                           const std::filesystem::path& base_dir);

} // namespace ogpred

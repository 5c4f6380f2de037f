#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ogpred/model.hpp"

namespace ogpred {

/// Prediction for one S/T site inside a longer sequence.
struct SitePrediction {
    std::size_t position = 0; // 0-based index of the S/T residue
    std::string window;
    double probability = 0.0;
    int label = 0; // probability >= threshold
};

/// Prediction for one input row of the CSV batch interface. Rows without a
/// usable site carry `error` and empty probability/label fields.
struct PredictionRow {
    std::string sequence;
    double probability = 0.0;
    int label = 0;
    std::string error;

    bool ok() const { return error.empty(); }
};

/// Scores every S/T residue in `sequence`. A window of width 2w+1 is cut
/// around each site, padded with '-' past the termini. If the sequence is
/// already an exact window centered on S/T, only that center is scored.
std::vector<SitePrediction> predict_sites(const ModelParams& params,
                                          const std::string& sequence, double threshold,
                                          std::size_t batch_size = 256);

/// One output row per input sequence: the probability of its single window
/// when the input is an exact window, otherwise the maximum over all S/T
/// sites. Sequences without any S/T produce error rows; processing
/// continues.
std::vector<PredictionRow> predict_rows(const ModelParams& params,
                                        const std::vector<std::string>& sequences,
                                        double threshold, std::size_t batch_size = 256);

/// Reads the (N+1)x1 batch input: one header row, then one sequence per row.
std::vector<std::string> read_sequence_csv(const std::filesystem::path& path);

/// `sequence,probability,label,error` with a header and trailing newline.
void write_prediction_csv(std::ostream& os, const std::vector<PredictionRow>& rows);

} // namespace ogpred

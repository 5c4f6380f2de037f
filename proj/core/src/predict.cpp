#include "ogpred/predict.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ogpred {

namespace {

bool is_site_residue(char c) { return c == 'S' || c == 'T'; }

std::string upper_copy(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::vector<double> score_windows(const ModelParams& params,
                                  const std::vector<std::string>& windows,
                                  std::size_t batch_size) {
    std::vector<double> probs;
    probs.reserve(windows.size());
    for (std::size_t begin = 0; begin < windows.size(); begin += batch_size) {
        const std::size_t end = std::min(begin + batch_size, windows.size());
        std::vector<EncodedWindow> encoded;
        encoded.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            SiteRecord rec;
            rec.sequence = windows[i];
            encoded.push_back(encode(rec));
        }
        Graph g;
        BoundModel model(g, params, /*differentiable=*/false);
        Tensor out = model.forward_windows(encoded);
        auto d = out.data();
        probs.insert(probs.end(), d.begin(), d.end());
    }
    return probs;
}

} // namespace

std::vector<SitePrediction> predict_sites(const ModelParams& params,
                                          const std::string& sequence, double threshold,
                                          std::size_t batch_size) {
    const std::string seq = upper_copy(sequence);
    const std::size_t width = params.config.sequence_length();
    const int window = params.config.window;

    std::vector<std::size_t> positions;
    if (seq.size() == width && is_site_residue(seq[width / 2])) {
        positions.push_back(width / 2); // pre-cut window: score only its center
    } else {
        for (std::size_t i = 0; i < seq.size(); ++i)
            if (is_site_residue(seq[i])) positions.push_back(i);
    }

    std::vector<SitePrediction> sites;
    if (positions.empty()) return sites;

    std::vector<std::string> windows;
    windows.reserve(positions.size());
    for (std::size_t pos : positions) windows.push_back(cut_window(seq, pos, window));
    const std::vector<double> probs = score_windows(params, windows, batch_size);

    sites.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        SitePrediction s;
        s.position = positions[i];
        s.window = windows[i];
        s.probability = probs[i];
        s.label = probs[i] >= threshold ? 1 : 0;
        sites.push_back(std::move(s));
    }
    return sites;
}

std::vector<PredictionRow> predict_rows(const ModelParams& params,
                                        const std::vector<std::string>& sequences,
                                        double threshold, std::size_t batch_size) {
    std::vector<PredictionRow> rows;
    rows.reserve(sequences.size());
    for (const std::string& raw : sequences) {
        PredictionRow row;
        row.sequence = upper_copy(raw);
        const std::vector<SitePrediction> sites =
            predict_sites(params, row.sequence, threshold, batch_size);
        if (sites.empty()) {
            row.error = "no S/T site in sequence";
        } else {
            const auto best = std::max_element(
                sites.begin(), sites.end(), [](const SitePrediction& a, const SitePrediction& b) {
                    return a.probability < b.probability;
                });
            row.probability = best->probability;
            row.label = best->label;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> read_sequence_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("input CSV not found: " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("input CSV is empty (expected a header row): " + path.string());

    std::vector<std::string> sequences;
    while (std::getline(in, line)) {
        // One column; tolerate trailing commas/whitespace from spreadsheet exports.
        while (!line.empty() && (line.back() == '\r' || line.back() == ',' ||
                                 line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        if (line.empty()) continue;
        sequences.push_back(line);
    }
    return sequences;
}

void write_prediction_csv(std::ostream& os, const std::vector<PredictionRow>& rows) {
    os << "sequence,probability,label,error\n";
    os << std::setprecision(17);
    for (const PredictionRow& row : rows) {
        os << row.sequence << ',';
        if (row.ok()) os << row.probability << ',' << row.label << ",";
        else os << ",," << row.error;
        os << '\n';
    }
}

} // namespace ogpred

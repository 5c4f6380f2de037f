#include "ogpred/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ogpred/errors.hpp"

namespace ogpred {

ConfusionCounts confusion(std::span<const double> pred, std::span<const int> y,
                          double threshold) {
    if (pred.empty()) throw ContractError("confusion: empty batch");
    if (pred.size() != y.size())
        throw ContractError("confusion: " + std::to_string(pred.size()) + " predictions vs " +
                            std::to_string(y.size()) + " targets");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool predicted = pred[i] >= threshold;
        const bool actual = y[i] == 1;
        if (predicted && actual) ++c.tp;
        else if (predicted && !actual) ++c.fp;
        else if (!predicted && actual) ++c.fn;
        else ++c.tn;
    }
    return c;
}

MetricPoint point_metrics(const ConfusionCounts& c, double threshold) {
    if (c.total() == 0) throw ContractError("point_metrics: empty counts");
    MetricPoint p;
    p.threshold = threshold;

    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn);
    const double tn = static_cast<double>(c.tn);

    p.recall = (tp + fn) > 0.0 ? 100.0 * tp / (tp + fn) : 0.0;
    p.precision = (tp + fp) > 0.0 ? 100.0 * tp / (tp + fp) : 0.0;
    p.f1 = (p.precision + p.recall) > 0.0
               ? 2.0 * p.precision * p.recall / (p.precision + p.recall)
               : 0.0;

    const double d1 = tp + fp, d2 = tp + fn, d3 = tn + fp, d4 = tn + fn;
    if (d1 == 0.0 || d2 == 0.0 || d3 == 0.0 || d4 == 0.0) {
        p.mcc = 0.0;
    } else {
        // Factor the denominator through pairwise square roots so counts in
        // the hundreds of thousands stay inside double range.
        p.mcc = 100.0 * (tp * tn - fp * fn) / (std::sqrt(d1 * d2) * std::sqrt(d3 * d4));
    }
    return p;
}

std::vector<double> default_thresholds() {
    std::vector<double> t;
    for (int i = 1; i <= 19; ++i) t.push_back(0.05 * i);
    return t;
}

PRCurve sweep(std::span<const double> pred, std::span<const int> y,
              std::span<const double> thresholds) {
    if (thresholds.empty()) throw ContractError("sweep: no thresholds");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] < 0.0 || thresholds[i] > 1.0)
            throw ContractError("sweep: threshold outside [0,1]: " +
                                std::to_string(thresholds[i]));
        if (i > 0 && thresholds[i] <= thresholds[i - 1])
            throw ContractError("sweep: thresholds must be strictly increasing");
    }

    PRCurve curve;
    curve.points.reserve(thresholds.size());
    for (double t : thresholds) curve.points.push_back(point_metrics(confusion(pred, y, t), t));

    curve.best = 0;
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        if (curve.points[i].f1 > curve.points[curve.best].f1) curve.best = i;
    return curve;
}

void write_pr_csv(std::ostream& os, const PRCurve& curve) {
    os << "threshold,recall_pct,precision_pct,f1_pct,mcc_pct\n";
    os << std::setprecision(17);
    for (const MetricPoint& p : curve.points)
        os << p.threshold << ',' << p.recall << ',' << p.precision << ',' << p.f1 << ','
           << p.mcc << '\n';
}

std::string format_metric_table(const MetricPoint& point, const std::string& title) {
    std::ostringstream os;
    os << title << '\n';
    os << std::fixed << std::setprecision(2);
    os << "  Best Threshold  " << std::setw(8) << point.threshold << '\n';
    os << "  Recall (%)      " << std::setw(8) << point.recall << '\n';
    os << "  Precision (%)   " << std::setw(8) << point.precision << '\n';
    os << "  F1 Score (%)    " << std::setw(8) << point.f1 << '\n';
    os << "  MCC (%)         " << std::setw(8) << point.mcc << '\n';
    return os.str();
}

std::string pr_curve_svg(const PRCurve& curve, const std::string& title) {
    // A 640x480 plot area with 10% margins; recall on x, precision on y.
    constexpr double W = 640, H = 480, ML = 64, MB = 48, MT = 32, MR = 16;
    const double pw = W - ML - MR, ph = H - MT - MB;
    auto px = [&](double recall_pct) { return ML + pw * recall_pct / 100.0; };
    auto py = [&](double precision_pct) { return MT + ph * (1.0 - precision_pct / 100.0); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       << title << "</text>\n";

    for (int pct = 0; pct <= 100; pct += 20) {
        os << "<line x1=\"" << px(pct) << "\" y1=\"" << py(0) << "\" x2=\"" << px(pct)
           << "\" y2=\"" << py(100) << "\" stroke=\"#dddddd\"/>\n";
        os << "<line x1=\"" << px(0) << "\" y1=\"" << py(pct) << "\" x2=\"" << px(100)
           << "\" y2=\"" << py(pct) << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << px(pct) << "\" y=\"" << H - MB + 20
           << "\" text-anchor=\"middle\" font-size=\"11\">" << pct << "</text>\n";
        os << "<text x=\"" << ML - 8 << "\" y=\"" << py(pct) + 4
           << "\" text-anchor=\"end\" font-size=\"11\">" << pct << "</text>\n";
    }
    os << "<text x=\"" << ML + pw / 2 << "\" y=\"" << H - 8
       << "\" text-anchor=\"middle\" font-size=\"12\">Recall (%)</text>\n";
    os << "<text x=\"14\" y=\"" << MT + ph / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
       << MT + ph / 2 << ")\">Precision (%)</text>\n";

    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const MetricPoint& p : curve.points) os << px(p.recall) << ',' << py(p.precision) << ' ';
    os << "\"/>\n";

    for (const MetricPoint& p : curve.points)
        os << "<circle cx=\"" << px(p.recall) << "\" cy=\"" << py(p.precision)
           << "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";

    if (!curve.points.empty()) {
        const MetricPoint& b = curve.best_point();
        os << "<circle cx=\"" << px(b.recall) << "\" cy=\"" << py(b.precision)
           << "\" r=\"5\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << px(b.recall) + 8 << "\" y=\"" << py(b.precision) - 8
           << "\" font-size=\"11\" fill=\"#d62728\">t=" << b.threshold << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace ogpred

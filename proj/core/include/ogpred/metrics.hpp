#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ogpred {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
};

/// Threshold-level metrics, all in percent.
struct MetricPoint {
    double threshold = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    double mcc = 0.0;
};

/// Threshold sweep with the best point selected by F1 (ties broken toward
/// the lowest threshold).
struct PRCurve {
    std::vector<MetricPoint> points;
    std::size_t best = 0;

    const MetricPoint& best_point() const { return points[best]; }
};

/// Hard confusion counts; a sample is predicted positive iff pred >= threshold.
ConfusionCounts confusion(std::span<const double> pred, std::span<const int> y,
                          double threshold);

/// Recall/precision/F1/MCC in percent. Zero denominators follow the
/// conventions precision = 0 and MCC = 0.
MetricPoint point_metrics(const ConfusionCounts& c, double threshold = 0.0);

/// Thresholds 0.05, 0.10, ..., 0.95.
std::vector<double> default_thresholds();

PRCurve sweep(std::span<const double> pred, std::span<const int> y,
              std::span<const double> thresholds);

/// `threshold,recall_pct,precision_pct,f1_pct,mcc_pct` rows.
void write_pr_csv(std::ostream& os, const PRCurve& curve);

/// Five-row table in the layout of the published metric tables
/// (Best Threshold / Recall / Precision / F1 Score / MCC).
std::string format_metric_table(const MetricPoint& point, const std::string& title);

/// Minimal static SVG rendering of a precision-recall curve.
std::string pr_curve_svg(const PRCurve& curve, const std::string& title);

} // namespace ogpred

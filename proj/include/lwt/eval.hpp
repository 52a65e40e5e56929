#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lwt/data.hpp"

namespace lwt {

using LabelPair = std::pair<WordLabel, WordLabel>;  // (true, predicted)

/// Rows are true labels, columns predictions, both in kAllWords order.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kWordCount>, kWordCount> counts{};

  std::size_t total() const;
  std::size_t correct() const;
  /// Fraction in [0, 1]; zero for an empty matrix.
  double accuracy() const;
  /// Each row divided by its sum; rows without trials stay zero.
  std::array<std::array<double, kWordCount>, kWordCount> normalized() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

ConfusionMatrix confusion_matrix(std::span<const LabelPair> predictions);

/// Accuracy aggregates in percent. std is the population deviation.
struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;
  double median = 0.0;
  double max = 0.0;
  double min = 0.0;
};

SummaryStats summarize_folds(std::span<const double> accuracies);

struct ReportEntry {
  std::string model_name;
  SummaryStats stats;
  ConfusionMatrix confusion;
};

/// Two-decimal rendering with trailing zeros removed: 62.00 -> "62".
std::string format_number(double value);

/// "Model,Mean,Std,Median,Max,Min" header plus one row per entry.
std::string format_summary_csv(std::span<const ReportEntry> entries);
/// Labelled row-normalized matrix; the last column is the row's trial count.
std::string format_confusion_csv(const ConfusionMatrix& matrix);

/// Writes summary.csv and confusion_<model>.csv into `directory`.
std::vector<std::filesystem::path> emit_report(
    std::span<const ReportEntry> entries,
    const std::filesystem::path& directory);

}  // namespace lwt

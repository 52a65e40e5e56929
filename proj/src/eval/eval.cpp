#include "lwt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lwt/errors.hpp"

namespace lwt {

namespace fs = std::filesystem;

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) {
    for (std::size_t v : row) n += v;
  }
  return n;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < kWordCount; ++i) n += counts[i][i];
  return n;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(n);
}

std::array<std::array<double, kWordCount>, kWordCount>
ConfusionMatrix::normalized() const {
  std::array<std::array<double, kWordCount>, kWordCount> out{};
  for (std::size_t i = 0; i < kWordCount; ++i) {
    std::size_t row_total = 0;
    for (std::size_t v : counts[i]) row_total += v;
    if (row_total == 0) continue;
    for (std::size_t j = 0; j < kWordCount; ++j) {
      out[i][j] =
          static_cast<double>(counts[i][j]) / static_cast<double>(row_total);
    }
  }
  return out;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < kWordCount; ++i) {
    for (std::size_t j = 0; j < kWordCount; ++j) {
      counts[i][j] += other.counts[i][j];
    }
  }
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const LabelPair> predictions) {
  ConfusionMatrix m;
  for (const auto& [truth, predicted] : predictions) {
    ++m.counts[ordinal(truth)][ordinal(predicted)];
  }
  return m;
}

SummaryStats summarize_folds(std::span<const double> accuracies) {
  if (accuracies.empty()) {
    throw ArgumentError("summarize_folds needs at least one accuracy");
  }
  std::vector<double> sorted(accuracies.begin(), accuracies.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  SummaryStats s;
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid]
                                    : (sorted[mid - 1] + sorted[mid]) / 2.0;
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  std::string out = buf;
  if (out.find('.') != std::string::npos) {
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  if (out == "-0") out = "0";
  return out;
}

std::string format_summary_csv(std::span<const ReportEntry> entries) {
  std::string out = "Model,Mean,Std,Median,Max,Min\n";
  for (const auto& e : entries) {
    out += e.model_name + "," + format_number(e.stats.mean) + "," +
           format_number(e.stats.std) + "," + format_number(e.stats.median) +
           "," + format_number(e.stats.max) + "," +
           format_number(e.stats.min) + "\n";
  }
  return out;
}

std::string format_confusion_csv(const ConfusionMatrix& matrix) {
  std::string out = "true\\predicted";
  for (WordLabel w : kAllWords) out += "," + std::string(to_string(w));
  out += ",n\n";
  const auto norm = matrix.normalized();
  char buf[32];
  for (std::size_t i = 0; i < kWordCount; ++i) {
    out += to_string(kAllWords[i]);
    std::size_t row_total = 0;
    for (std::size_t j = 0; j < kWordCount; ++j) {
      std::snprintf(buf, sizeof(buf), ",%.4f", norm[i][j]);
      out += buf;
      row_total += matrix.counts[i][j];
    }
    out += "," + std::to_string(row_total) + "\n";
  }
  return out;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::vector<fs::path> emit_report(std::span<const ReportEntry> entries,
                                  const fs::path& directory) {
  if (entries.empty()) {
    throw ArgumentError("emit_report needs at least one result");
  }
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) {
    throw IoError("cannot create " + directory.string() + ": " + ec.message());
  }
  std::vector<fs::path> written;
  written.push_back(directory / "summary.csv");
  write_text(written.back(), format_summary_csv(entries));
  for (const auto& e : entries) {
    written.push_back(directory / ("confusion_" + e.model_name + ".csv"));
    write_text(written.back(), format_confusion_csv(e.confusion));
  }
  return written;
}

}  // namespace lwt

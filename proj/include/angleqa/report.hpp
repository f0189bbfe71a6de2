#pragma once

// Manual score sheets (one score in [0, 1] per question and model, plus an
// incoherence flag) and per-category aggregation.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace angleqa {

struct ScoreEntry {
  std::string id;
  std::string model;
  double score = 0.0;
  bool incoherent = false;
  std::string category;
};

class ScoreSheet {
 public:
  /// Throws InvalidScore (score outside [0, 1]) or ParseError (duplicate
  /// id/model pair).
  void record(ScoreEntry entry);

  const std::vector<ScoreEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  static ScoreSheet read(std::istream& in);
  static ScoreSheet load(const std::filesystem::path& path);
  void write(std::ostream& os) const;

 private:
  std::vector<ScoreEntry> entries_;
};

struct CategoryRow {
  std::string category;
  std::size_t questions = 0;
  std::vector<std::optional<double>> model_means;  // aligned with models
  double average_of_averages = 0.0;
};

struct CategoryReport {
  std::vector<std::string> models;  // first-appearance order
  std::vector<CategoryRow> categories;  // descending average-of-averages
  std::vector<double> all;              // per-model mean over all entries
  double all_average = 0.0;
  std::vector<std::size_t> incoherent;  // per model
  std::size_t total_questions = 0;
};

/// Categories with fewer than `min_questions` questions are left out of the
/// category rows; the ALL row always covers every entry.
CategoryReport aggregate_categories(const ScoreSheet& sheet, std::size_t min_questions = 0);

std::string render_category_report(const CategoryReport& report);

}  // namespace angleqa

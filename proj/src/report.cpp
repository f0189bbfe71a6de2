#include "angleqa/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "angleqa/errors.hpp"
#include "angleqa/text.hpp"
#include "json.hpp"

namespace angleqa {

void ScoreSheet::record(ScoreEntry entry) {
  if (!(entry.score >= 0.0 && entry.score <= 1.0)) {
    throw Error(Errc::InvalidScore, "score for '" + entry.id + "' / '" + entry.model +
                                        "' must lie in [0, 1]");
  }
  for (const auto& e : entries_) {
    if (e.id == entry.id && e.model == entry.model) {
      throw Error(Errc::ParseError,
                  "duplicate score for '" + entry.id + "' / '" + entry.model + "'");
    }
  }
  entries_.push_back(std::move(entry));
}

ScoreSheet ScoreSheet::read(std::istream& in) {
  ScoreSheet sheet;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto rec = nlohmann::json::parse(line);
      ScoreEntry e;
      e.id = rec.at("id").is_string() ? rec["id"].get<std::string>()
                                      : std::to_string(rec["id"].get<long long>());
      e.model = rec.at("model").get<std::string>();
      e.score = rec.at("score").get<double>();
      e.incoherent = rec.value("incoherent", false);
      e.category = rec.value("category", std::string{});
      sheet.record(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error(ex.code(), "line " + std::to_string(lineno) + ": " + ex.detail());
    }
  }
  return sheet;
}

ScoreSheet ScoreSheet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  return read(in);
}

void ScoreSheet::write(std::ostream& os) const {
  for (const auto& e : entries_) {
    nlohmann::ordered_json rec;
    rec["id"] = e.id;
    rec["model"] = e.model;
    rec["score"] = e.score;
    rec["incoherent"] = e.incoherent;
    rec["category"] = e.category;
    os << rec.dump() << '\n';
  }
}

CategoryReport aggregate_categories(const ScoreSheet& sheet, std::size_t min_questions) {
  CategoryReport report;
  std::map<std::string, std::size_t> model_index;
  for (const auto& e : sheet.entries()) {
    if (model_index.emplace(e.model, report.models.size()).second) {
      report.models.push_back(e.model);
    }
  }
  const std::size_t m = report.models.size();

  struct Sums {
    std::vector<double> sum;
    std::vector<std::size_t> count;
    std::set<std::string> questions;
  };
  std::map<std::string, Sums> by_category;
  std::vector<double> all_sum(m, 0.0);
  std::vector<std::size_t> all_count(m, 0);
  report.incoherent.assign(m, 0);
  std::set<std::string> all_questions;

  for (const auto& e : sheet.entries()) {
    const std::size_t k = model_index[e.model];
    auto& s = by_category[e.category];
    if (s.sum.empty()) {
      s.sum.assign(m, 0.0);
      s.count.assign(m, 0);
    }
    s.sum[k] += e.score;
    ++s.count[k];
    s.questions.insert(e.id);
    all_sum[k] += e.score;
    ++all_count[k];
    if (e.incoherent) ++report.incoherent[k];
    all_questions.insert(e.id);
  }
  report.total_questions = all_questions.size();

  for (auto& [category, s] : by_category) {
    if (s.questions.size() < min_questions) continue;
    CategoryRow row;
    row.category = category;
    row.questions = s.questions.size();
    double total = 0.0;
    std::size_t present = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (s.count[k] == 0) {
        row.model_means.push_back(std::nullopt);
        continue;
      }
      double mean = s.sum[k] / static_cast<double>(s.count[k]);
      row.model_means.push_back(mean);
      total += mean;
      ++present;
    }
    row.average_of_averages = present ? total / static_cast<double>(present) : 0.0;
    report.categories.push_back(std::move(row));
  }
  std::stable_sort(report.categories.begin(), report.categories.end(),
                   [](const CategoryRow& a, const CategoryRow& b) {
                     return a.average_of_averages > b.average_of_averages;
                   });

  double all_total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double mean = all_count[k] ? all_sum[k] / static_cast<double>(all_count[k]) : 0.0;
    report.all.push_back(mean);
    all_total += mean;
  }
  report.all_average = m ? all_total / static_cast<double>(m) : 0.0;
  return report;
}

std::string render_category_report(const CategoryReport& report) {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"category", "# qns"};
  for (const auto& m : report.models) header.push_back(m);
  header.emplace_back("avg of avgs");
  table.push_back(header);

  auto fmt = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
  };
  for (const auto& row : report.categories) {
    std::vector<std::string> line{row.category.empty() ? "(none)" : row.category,
                                  std::to_string(row.questions)};
    for (const auto& mean : row.model_means) line.push_back(mean ? fmt(*mean) : "-");
    line.push_back(fmt(row.average_of_averages));
    table.push_back(line);
  }
  std::vector<std::string> all{"ALL", std::to_string(report.total_questions)};
  for (double v : report.all) all.push_back(fmt(v));
  all.push_back(fmt(report.all_average));
  table.push_back(all);
  std::vector<std::string> inc{"# incoherent", ""};
  for (auto c : report.incoherent) inc.push_back(std::to_string(c));
  inc.emplace_back("");
  table.push_back(inc);

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream os;
  for (std::size_t l = 0; l < table.size(); ++l) {
    if (l + 2 == table.size()) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
    for (std::size_t c = 0; c < table[l].size(); ++c) {
      if (c) os << "  ";
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << table[l][c];
      } else {
        os << std::right << std::setw(static_cast<int>(width[c])) << table[l][c];
      }
    }
    os << '\n';
    if (l == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  return os.str();
}

}  // namespace angleqa

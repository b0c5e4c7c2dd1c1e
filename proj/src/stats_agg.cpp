#include "inkpark/stats_agg.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "inkpark/parallel.hpp"
#include "json.hpp"

namespace inkpark {

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> idx) const {
  FeatureMatrix out;
  out.registry_version = registry_version;
  out.task_id = task_id;
  out.names = names;
  out.values = values.select_rows(idx);
  for (std::size_t i : idx) {
    out.labels.push_back(labels[i]);
    out.subjects.push_back(subjects[i]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> idx) const {
  FeatureMatrix out;
  out.registry_version = registry_version;
  out.task_id = task_id;
  for (std::size_t c : idx) out.names.push_back(names[c]);
  out.values = values.select_columns(idx);
  out.labels = labels;
  out.subjects = subjects;
  return out;
}

FeatureMatrix build_feature_matrix(std::span<const Trial> trials, const FeatureRegistry& registry,
                                   unsigned jobs) {
  if (trials.empty()) throw std::invalid_argument("build_feature_matrix: empty cohort");
  const int task = trials.front().task_id;
  for (const Trial& t : trials)
    if (t.task_id != task) throw std::invalid_argument("build_feature_matrix: trials mix task ids");

  std::vector<FeatureRow> rows(trials.size());
  parallel_for(trials.size(), jobs, [&](std::size_t i) { rows[i] = extract_features(trials[i], registry); });

  const std::size_t k = registry.size();
  FeatureMatrix m;
  m.registry_version = registry.version;
  m.task_id = task;
  m.names = registry.names();
  m.values = Matrix(trials.size(), k);
  for (std::size_t r = 0; r < trials.size(); ++r) {
    std::copy(rows[r].values.begin(), rows[r].values.end(), m.values.row(r).begin());
    m.labels.push_back(label_value(trials[r].label));
    m.subjects.push_back(trials[r].subject_id);
  }

  // Median imputation, column by column, without labels.
  std::vector<double> present;
  for (std::size_t c = 0; c < k; ++c) {
    present.clear();
    bool any_missing = false;
    const auto& sentinel = registry.features[c].sentinel;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].present[c]) {
        any_missing = true;
        continue;
      }
      const double v = m.values(r, c);
      if (sentinel && v == *sentinel) continue;
      present.push_back(v);
    }
    if (!any_missing) continue;
    const double fill = present.empty() ? 0.0 : percentile(present, 0.5);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].present[c]) continue;
      m.values(r, c) = fill;
      m.imputed.push_back({r, c, fill});
    }
  }
  return m;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw std::runtime_error("csv line " + std::to_string(line_no) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& tok, std::size_t line_no, const std::string& col) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
    throw std::runtime_error("csv line " + std::to_string(line_no) + ", column " + col +
                             ": not a number '" + tok + "'");
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string format_feature_csv(const FeatureMatrix& m) {
  std::string out;
  for (const auto& n : m.names) out += csv_escape(n) + ',';
  out += "label,subject_id\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (double v : m.values.row(r)) out += format_double(v) + ',';
    out += std::to_string(m.labels[r]) + ',' + csv_escape(m.subjects[r]) + '\n';
  }
  return out;
}

FeatureMatrix parse_feature_csv(std::string_view text) {
  FeatureMatrix m;
  std::size_t pos = 0, line_no = 0;
  std::size_t width = 0;
  std::vector<double> row;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = csv_split(line, line_no);
    if (line_no == 1) {
      if (cells.size() < 2 || cells[cells.size() - 2] != "label" || cells.back() != "subject_id")
        throw std::runtime_error("csv header must end with label,subject_id");
      m.names.assign(cells.begin(), cells.end() - 2);
      width = cells.size();
      m.values = Matrix(0, m.names.size());
      continue;
    }
    if (cells.size() != width)
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(width) + " cells, got " + std::to_string(cells.size()));
    row.resize(m.names.size());
    for (std::size_t c = 0; c < m.names.size(); ++c) row[c] = parse_double(cells[c], line_no, m.names[c]);
    m.values.append_row(row);
    const double lab = parse_double(cells[width - 2], line_no, "label");
    if (lab != 1.0 && lab != -1.0)
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": label must be 1 or -1");
    m.labels.push_back(static_cast<int>(lab));
    m.subjects.push_back(cells.back());
  }
  if (line_no == 0) throw std::runtime_error("csv: empty input");
  m.registry_version = std::string(kRegistryVersion);
  return m;
}

void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_feature_csv(m);
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  FeatureMatrix m = parse_feature_csv(read_text(path));
  // taskN.csv carries its task id in the file name.
  const std::string stem = path.stem().string();
  if (stem.rfind("task", 0) == 0) {
    int id = 0;
    auto [p, ec] = std::from_chars(stem.data() + 4, stem.data() + stem.size(), id);
    if (ec == std::errc() && p == stem.data() + stem.size()) m.task_id = id;
  }
  return m;
}

std::string format_provenance_json(const FeatureMatrix& m) {
  nlohmann::json doc;
  doc["registry_version"] = m.registry_version;
  doc["task_id"] = m.task_id;
  doc["rows"] = m.rows();
  doc["features"] = m.cols();
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : m.imputed)
    cells.push_back({{"subject_id", m.subjects[c.row]}, {"feature", m.names[c.col]}, {"value", c.value}});
  doc["imputed"] = std::move(cells);
  return doc.dump(2) + "\n";
}

}  // namespace inkpark

#include "inkpark/signal_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace inkpark {

namespace fs = std::filesystem;
using nlohmann::json;

Label label_from_int(int v) {
  if (v == 1) return Label::PD;
  if (v == -1) return Label::HC;
  throw SignalError("label must be +1 (PD) or -1 (HC), got " + std::to_string(v));
}

std::string_view label_name(Label l) { return l == Label::PD ? "PD" : "HC"; }

Label parse_label(std::string_view s) {
  if (s == "PD" || s == "pd" || s == "+1" || s == "1") return Label::PD;
  if (s == "HC" || s == "hc" || s == "-1") return Label::HC;
  throw SignalError("unknown label '" + std::string(s) + "'");
}

ParseError::ParseError(std::string path, std::size_t line, std::string field,
                       const std::string& what)
    : SignalError(path + ":" + std::to_string(line) + ": " + field + ": " + what),
      line_(line),
      field_(std::move(field)) {}

std::string_view field_name(Field f) {
  switch (f) {
    case Field::T: return "t";
    case Field::X: return "x";
    case Field::Y: return "y";
    case Field::Button: return "button";
    case Field::Azimuth: return "azimuth";
    case Field::Altitude: return "altitude";
    case Field::Pressure: return "pressure";
  }
  return "?";
}

ColumnOrder parse_column_order(std::string_view spec) {
  static constexpr std::array<Field, 7> all = kDefaultColumnOrder;
  ColumnOrder order{};
  std::size_t n = 0;
  std::set<Field> seen;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    std::string_view tok = spec.substr(pos, comma - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    auto it = std::find_if(all.begin(), all.end(), [&](Field f) { return field_name(f) == tok; });
    if (it == all.end()) throw SignalError("column order: unknown field '" + std::string(tok) + "'");
    if (!seen.insert(*it).second)
      throw SignalError("column order: duplicate field '" + std::string(tok) + "'");
    if (n == order.size()) throw SignalError("column order: more than 7 fields");
    order[n++] = *it;
    pos = comma + 1;
  }
  if (n != order.size()) throw SignalError("column order: expected 7 fields, got " + std::to_string(n));
  return order;
}

void validate_trial(const Trial& trial) {
  if (trial.samples.empty()) throw SignalError("trial has no samples");
  if (trial.task_id < 1 || trial.task_id > 8)
    throw SignalError("task_id must be in [1, 8], got " + std::to_string(trial.task_id));
  if (!(trial.sampling_rate_hz > 0.0)) throw SignalError("sampling rate must be positive");
  for (std::size_t i = 0; i < trial.samples.size(); ++i) {
    const Sample& s = trial.samples[i];
    if (s.button != 0 && s.button != 1)
      throw SignalError("sample " + std::to_string(i) + ": invalid button state");
    if (s.pressure < 0) throw SignalError("sample " + std::to_string(i) + ": negative pressure");
    if (s.t < 0) throw SignalError("sample " + std::to_string(i) + ": negative timestamp");
    if (i > 0 && s.t <= trial.samples[i - 1].t)
      throw SignalError("sample " + std::to_string(i) + ": timestamps not strictly increasing");
  }
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_int(std::string_view tok, std::int64_t& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

void set_field(Sample& s, Field f, std::int64_t v) {
  switch (f) {
    case Field::T: s.t = v; break;
    case Field::X: s.x = v; break;
    case Field::Y: s.y = v; break;
    case Field::Button: s.button = static_cast<int>(v); break;
    case Field::Azimuth: s.azimuth = v; break;
    case Field::Altitude: s.altitude = v; break;
    case Field::Pressure: s.pressure = v; break;
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SignalError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Trial parse_trial_text(std::string_view text, const ColumnOrder& order, const TrialMeta& meta,
                       std::string_view source) {
  const std::string src(source);
  Trial trial;
  trial.subject_id = meta.subject_id;
  trial.task_id = meta.task_id;
  trial.label = meta.label;
  trial.sampling_rate_hz = meta.sampling_rate_hz;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  std::int64_t declared = 0;
  std::size_t header_line = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (!have_header) {
      if (tokens.size() != 1 || !parse_int(tokens[0], declared) || declared < 0)
        throw ParseError(src, line_no, "count", "header must be a single non-negative integer");
      have_header = true;
      header_line = line_no;
      trial.samples.reserve(static_cast<std::size_t>(std::min<std::int64_t>(declared, 1 << 20)));
      continue;
    }
    if (static_cast<std::int64_t>(trial.samples.size()) >= declared)
      throw ParseError(src, line_no, "count",
                       "count mismatch: header declares " + std::to_string(declared) +
                           " samples but more data lines follow");
    if (tokens.size() != order.size()) {
      const std::string field = tokens.size() < order.size()
                                    ? std::string(field_name(order[tokens.size()]))
                                    : std::string("line");
      throw ParseError(src, line_no, field,
                       "expected 7 values, got " + std::to_string(tokens.size()));
    }
    Sample s;
    for (std::size_t c = 0; c < order.size(); ++c) {
      std::int64_t v = 0;
      if (!parse_int(tokens[c], v))
        throw ParseError(src, line_no, std::string(field_name(order[c])),
                         "non-numeric token '" + std::string(tokens[c]) + "'");
      if (order[c] == Field::Button && v != 0 && v != 1)
        throw ParseError(src, line_no, "button", "invalid button state " + std::to_string(v));
      if (order[c] == Field::Pressure && v < 0)
        throw ParseError(src, line_no, "pressure", "negative pressure");
      if (order[c] == Field::T && v < 0)
        throw ParseError(src, line_no, "t", "negative timestamp");
      set_field(s, order[c], v);
    }
    if (!trial.samples.empty() && s.t <= trial.samples.back().t)
      throw ParseError(src, line_no, "t", "timestamps not strictly increasing");
    trial.samples.push_back(s);
  }
  if (!have_header) throw ParseError(src, line_no == 0 ? 1 : line_no, "count", "missing header");
  if (static_cast<std::int64_t>(trial.samples.size()) != declared)
    throw ParseError(src, header_line, "count",
                     "count mismatch: header declares " + std::to_string(declared) + " samples, found " +
                         std::to_string(trial.samples.size()));
  if (trial.samples.empty()) throw ParseError(src, header_line, "count", "trial has no samples");
  validate_trial(trial);
  return trial;
}

Trial parse_trial_file(const fs::path& path, const ColumnOrder& order, const TrialMeta& meta) {
  return parse_trial_text(read_file(path), order, meta, path.string());
}

std::string format_trial_text(const Trial& trial) {
  validate_trial(trial);
  std::string out = std::to_string(trial.samples.size());
  out += '\n';
  for (const Sample& s : trial.samples) {
    out += std::to_string(s.t) + ' ' + std::to_string(s.x) + ' ' + std::to_string(s.y) + ' ' +
           std::to_string(s.button) + ' ' + std::to_string(s.azimuth) + ' ' +
           std::to_string(s.altitude) + ' ' + std::to_string(s.pressure) + '\n';
  }
  return out;
}

void write_trial_file(const Trial& trial, const fs::path& path) {
  const std::string text = format_trial_text(trial);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SignalError("cannot write " + path.string());
  out << text;
  if (!out) throw SignalError("write failed: " + path.string());
}

std::size_t CohortManifest::count(Label l) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const auto& r) { return r.label == l; }));
}

CohortManifest parse_manifest_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SignalError(std::string("manifest: invalid JSON: ") + e.what());
  }
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("trials")) throw SignalError("manifest: missing 'trials' array");
    list = &doc.at("trials");
  }
  if (!list->is_array()) throw SignalError("manifest: 'trials' must be an array");

  CohortManifest m;
  std::set<std::pair<std::string, int>> keys;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& r = (*list)[i];
    const std::string where = "manifest record " + std::to_string(i) + ": ";
    try {
      ManifestRecord rec;
      rec.subject_id = r.at("subject_id").get<std::string>();
      rec.task_id = r.at("task_id").get<int>();
      const json& lab = r.at("label");
      rec.label = lab.is_string() ? parse_label(lab.get<std::string>()) : label_from_int(lab.get<int>());
      rec.path = r.at("path").get<std::string>();
      if (r.contains("sampling_rate_hz")) rec.sampling_rate_hz = r.at("sampling_rate_hz").get<double>();
      if (rec.task_id < 1 || rec.task_id > 8) throw SignalError("task_id must be in [1, 8]");
      if (!keys.emplace(rec.subject_id, rec.task_id).second)
        throw SignalError("duplicate (subject, task) key (" + rec.subject_id + ", " +
                          std::to_string(rec.task_id) + ")");
      m.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw SignalError(where + e.what());
    } catch (const SignalError& e) {
      throw SignalError(where + e.what());
    }
  }
  return m;
}

std::string format_manifest_json(const CohortManifest& manifest) {
  json list = json::array();
  for (const auto& r : manifest.records) {
    json o;
    o["subject_id"] = r.subject_id;
    o["task_id"] = r.task_id;
    o["label"] = std::string(label_name(r.label));
    o["path"] = r.path;
    o["sampling_rate_hz"] = r.sampling_rate_hz;
    list.push_back(std::move(o));
  }
  json doc;
  doc["trials"] = std::move(list);
  doc["counts"] = {{"PD", manifest.count(Label::PD)}, {"HC", manifest.count(Label::HC)}};
  return doc.dump(2) + "\n";
}

CohortManifest read_manifest(const fs::path& path) { return parse_manifest_json(read_file(path)); }

void write_manifest(const CohortManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SignalError("cannot write " + path.string());
  out << format_manifest_json(manifest);
}

std::vector<Trial> Cohort::task(int task_id) const {
  std::vector<Trial> out;
  for (const auto& t : trials)
    if (t.task_id == task_id) out.push_back(t);
  return out;
}

std::vector<int> Cohort::task_ids() const {
  std::set<int> ids;
  for (const auto& t : trials) ids.insert(t.task_id);
  return {ids.begin(), ids.end()};
}

Cohort load_cohort(const fs::path& manifest_path, const ColumnOrder& order) {
  const CohortManifest m = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  Cohort c;
  c.trials.reserve(m.records.size());
  for (const auto& r : m.records) {
    fs::path p(r.path);
    if (p.is_relative()) p = base / p;
    if (!fs::exists(p)) throw SignalError("manifest references missing file " + p.string());
    c.trials.push_back(
        parse_trial_file(p, order, TrialMeta{r.subject_id, r.task_id, r.label, r.sampling_rate_hz}));
  }
  return c;
}

}  // namespace inkpark

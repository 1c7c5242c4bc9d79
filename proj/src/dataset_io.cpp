#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>

#include "logsynth/error.hpp"
#include "logsynth/generation.hpp"
#include "logsynth/text.hpp"

namespace logsynth {

namespace {

std::string csv_quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// RFC 4180 records; quoted fields may contain commas, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  std::size_t line = 1;
  std::size_t i = 0;
  bool row_open = false;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '"' && field.empty()) {
      const std::size_t start_line = line;
      ++i;
      for (;;) {
        if (i >= text.size()) throw FormatError(path, start_line, "unterminated quoted field");
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (text[i] == '\n') ++line;
        field += text[i++];
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw FormatError(path, line, "unexpected character after quoted field");
      }
      row_open = true;
      continue;
    }
    if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_open = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (row_open || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      field.clear();
      row.clear();
      row_open = false;
      ++line;
    } else {
      field += c;
      row_open = true;
    }
    ++i;
  }
  if (row_open || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
T parse_number(std::string_view tok, const std::string& path, std::size_t line, const char* what) {
  T v{};
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw FormatError(path, line, std::string("malformed ") + what + " '" + std::string(tok) + "'");
  }
  return v;
}

// Shortest decimal form that parses back to the same double.
std::string format_rate(double rate) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, rate);
    if (std::strtod(buf, nullptr) == rate) break;
  }
  return buf;
}

}  // namespace

void write_dataset(const LogDataset& dataset, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);

  std::string seqs = "seq_id,label,entry,events\n";
  for (const auto& s : dataset.sequences) {
    seqs += std::to_string(s.seq_id);
    seqs += s.label == Label::kAnomaly ? ",1," : ",0,";
    seqs += std::to_string(s.entry);
    seqs += ',';
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      if (i) seqs += ' ';
      seqs += std::to_string(s.events[i]);
    }
    seqs += '\n';
  }
  write_file((base / "sequences.csv").string(), seqs);

  std::string tmpl = "event_id,level,template\n";
  for (const auto& t : dataset.templates) {
    tmpl += std::to_string(t.id) + "," + std::string(to_string(t.level)) + "," + csv_quote(t.text) + "\n";
  }
  write_file((base / "templates.csv").string(), tmpl);

  const auto& p = dataset.params;
  std::string entries;
  for (std::size_t i = 0; i < p.entries.size(); ++i) {
    if (i) entries += ',';
    entries += std::to_string(p.entries[i]);
  }
  std::string manifest;
  auto kv = [&](const char* k, const std::string& v) { manifest += std::string(k) + "=" + v + "\n"; };
  kv("tool_version", dataset.tool_version);
  kv("model_hash", dataset.model_hash);
  kv("annotation_hash", dataset.annotation_hash);
  kv("size", std::to_string(p.size));
  kv("anomaly_rate", format_rate(p.anomaly_rate));
  if (p.component) kv("component", escape_field(*p.component));
  kv("entries", entries);
  kv("seed", std::to_string(p.seed));
  kv("max_loop_reps", std::to_string(p.max_loop_reps));
  kv("max_recursion_depth", std::to_string(p.max_recursion_depth));
  kv("exact_rate", p.exact_rate ? "true" : "false");
  kv("max_events", std::to_string(p.max_events));
  kv("sequences", std::to_string(dataset.sequences.size()));
  kv("anomalies", std::to_string(dataset.anomaly_count()));
  write_file((base / "manifest.txt").string(), manifest);
}

LogDataset read_dataset(const std::string& dir) {
  const std::filesystem::path base(dir);
  LogDataset ds;

  const std::string mpath = (base / "manifest.txt").string();
  std::map<std::string, std::string, std::less<>> kv;
  {
    const std::string text = read_file(mpath);
    std::size_t line = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      const std::string_view l(text.data() + pos, end - pos);
      pos = end + 1;
      ++line;
      if (trim(l).empty()) continue;
      const auto eq = l.find('=');
      if (eq == std::string_view::npos) throw FormatError(mpath, line, "expected key=value");
      if (!kv.emplace(std::string(l.substr(0, eq)), std::string(l.substr(eq + 1))).second) {
        throw FormatError(mpath, line, "duplicate key '" + std::string(l.substr(0, eq)) + "'");
      }
    }
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(mpath, 0, std::string("missing key '") + key + "'");
    return it->second;
  };
  ds.tool_version = get("tool_version");
  ds.model_hash = get("model_hash");
  ds.annotation_hash = get("annotation_hash");
  auto& p = ds.params;
  p.size = parse_number<std::size_t>(get("size"), mpath, 0, "size");
  try {
    std::size_t used = 0;
    p.anomaly_rate = std::stod(get("anomaly_rate"), &used);
    if (used != get("anomaly_rate").size()) throw std::invalid_argument("trailing");
  } catch (const std::logic_error&) {
    throw FormatError(mpath, 0, "malformed anomaly_rate");
  }
  if (auto it = kv.find("component"); it != kv.end()) {
    auto c = unescape_field(it->second);
    if (!c) throw FormatError(mpath, 0, "bad escape in component");
    p.component = std::move(*c);
  }
  for (auto tok : split_escaped(get("entries"), ',')) {
    if (!tok.empty()) p.entries.push_back(parse_number<MethodId>(tok, mpath, 0, "entry id"));
  }
  p.seed = parse_number<std::uint64_t>(get("seed"), mpath, 0, "seed");
  p.max_loop_reps = parse_number<std::uint32_t>(get("max_loop_reps"), mpath, 0, "max_loop_reps");
  p.max_recursion_depth = parse_number<std::uint32_t>(get("max_recursion_depth"), mpath, 0, "max_recursion_depth");
  const auto& exact = get("exact_rate");
  if (exact != "true" && exact != "false") throw FormatError(mpath, 0, "malformed exact_rate");
  p.exact_rate = exact == "true";
  p.max_events = parse_number<std::size_t>(get("max_events"), mpath, 0, "max_events");

  const std::string spath = (base / "sequences.csv").string();
  const auto srows = parse_csv(read_file(spath), spath);
  if (srows.empty() || srows[0] != std::vector<std::string>{"seq_id", "label", "entry", "events"}) {
    throw FormatError(spath, 1, "expected header 'seq_id,label,entry,events'");
  }
  for (std::size_t r = 1; r < srows.size(); ++r) {
    const auto& row = srows[r];
    if (row.size() != 4) throw FormatError(spath, r + 1, "expected 4 fields");
    LogSequence s;
    s.seq_id = parse_number<std::uint32_t>(row[0], spath, r + 1, "seq_id");
    if (row[1] != "0" && row[1] != "1") throw FormatError(spath, r + 1, "label must be 0 or 1");
    s.label = row[1] == "1" ? Label::kAnomaly : Label::kNormal;
    s.entry = parse_number<MethodId>(row[2], spath, r + 1, "entry");
    for (auto tok : split_ws(row[3])) s.events.push_back(parse_number<EventId>(tok, spath, r + 1, "event id"));
    ds.sequences.push_back(std::move(s));
  }

  const std::string tpath = (base / "templates.csv").string();
  const auto trows = parse_csv(read_file(tpath), tpath);
  if (trows.empty() || trows[0] != std::vector<std::string>{"event_id", "level", "template"}) {
    throw FormatError(tpath, 1, "expected header 'event_id,level,template'");
  }
  for (std::size_t r = 1; r < trows.size(); ++r) {
    const auto& row = trows[r];
    if (row.size() != 3) throw FormatError(tpath, r + 1, "expected 3 fields");
    TemplateRow t;
    t.id = parse_number<EventId>(row[0], tpath, r + 1, "event id");
    const auto level = parse_level(row[1]);
    if (!level) throw FormatError(tpath, r + 1, "malformed level '" + row[1] + "'");
    t.level = *level;
    t.text = row[2];
    ds.templates.push_back(std::move(t));
  }

  if (ds.sequences.size() != parse_number<std::size_t>(get("sequences"), mpath, 0, "sequences")) {
    throw FormatError(mpath, 0, "sequence count does not match sequences.csv");
  }
  if (ds.anomaly_count() != parse_number<std::size_t>(get("anomalies"), mpath, 0, "anomalies")) {
    throw FormatError(mpath, 0, "anomaly count does not match sequences.csv");
  }
  return ds;
}

}  // namespace logsynth

#include "logsynth/labeling.hpp"

#include <charconv>

#include "logsynth/error.hpp"
#include "logsynth/text.hpp"

namespace logsynth {

std::string_view to_string(Infection status) {
  switch (status) {
    case Infection::kClean:
      return "CLEAN";
    case Infection::kInfected:
      return "INFECTED";
    case Infection::kSeed:
      return "SEED";
  }
  return "CLEAN";
}

namespace {

std::string evt_line(const LogEvent& ev, const ProgramModel& model) {
  return "EVT " + std::to_string(ev.id) + " " + std::string(to_string(ev.level)) + " " +
         model.methods[ev.method].name + " " + escape_field(ev.text, false);
}

bool candidate_alerting(const LogEvent& ev) { return ev.level != LogLevel::kInfo; }

}  // namespace

std::string render_worksheet(const LogEpStore& store, const ProgramModel& model,
                             std::span<const StatementOrigin> origins) {
  std::string out =
      "# logsynth annotation worksheet\n"
      "# Append \" ALERT\" to an EVT line to mark an alerting statement.\n"
      "# Add \"SEED <logep-id>\" lines for LogEPs that must produce an anomaly.\n";
  for (const auto& ev : store.events) {
    if (ev.origin < origins.size()) {
      const auto& o = origins[ev.origin];
      out += "# " + o.path + ":" + std::to_string(o.line) + ": " + o.snippet + "\n";
    }
    out += evt_line(ev, model) + "\n";
  }
  for (const auto& ep : store.logeps) {
    const bool candidate = std::any_of(ep.steps.begin(), ep.steps.end(), [&](const Step& s) {
      return s.kind == Step::Kind::kLog && candidate_alerting(store.events[s.target]);
    });
    if (!candidate) continue;
    out += "EP " + std::to_string(ep.id) + " " + model.methods[ep.method].name;
    for (const auto& s : ep.steps) out += " " + step_token(s, model);
    out += '\n';
  }
  return out;
}

void export_worksheet(const LogEpStore& store, const ProgramModel& model, const std::string& path,
                      std::span<const StatementOrigin> origins) {
  write_file(path, render_worksheet(store, model, origins));
}

AnnotationSet parse_annotations(std::string_view text, const LogEpStore& store, const ProgramModel& model,
                                const std::string& path) {
  AnnotationSet out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto parse_id = [&](std::string_view tok, std::size_t limit, const char* what) {
    std::uint32_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw FormatError(path, line_no, std::string("malformed ") + what + " '" + std::string(tok) + "'");
    }
    if (v >= limit) throw FormatError(path, line_no, std::string("unknown ") + what + " " + std::to_string(v));
    return v;
  };
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    const auto words = split_ws(line);
    if (words[0] == "EVT") {
      if (words.size() < 2) throw FormatError(path, line_no, "EVT record without event id");
      const EventId id = parse_id(words[1], store.events.size(), "event id");
      const std::string expected = evt_line(store.events[id], model);
      if (line == expected) continue;
      if (line == expected + " ALERT") {
        out.alerting.insert(id);
        continue;
      }
      throw FormatError(path, line_no, "EVT " + std::to_string(id) + " does not match the analyzed program");
    } else if (words[0] == "SEED") {
      if (words.size() != 2) throw FormatError(path, line_no, "expected SEED <logep-id>");
      out.seed_anomaly.insert(parse_id(words[1], store.logeps.size(), "LogEP id"));
    } else if (words[0] != "EP") {
      throw FormatError(path, line_no, "unknown record '" + std::string(words[0]) + "'");
    }
  }
  try {
    validate_annotations(out, store);
  } catch (const ValidationError& e) {
    throw FormatError(path, 0, e.what());
  }
  return out;
}

AnnotationSet import_annotations(const std::string& path, const LogEpStore& store, const ProgramModel& model) {
  return parse_annotations(read_file(path), store, model, path);
}

void validate_annotations(const AnnotationSet& annotations, const LogEpStore& store) {
  for (EventId e : annotations.alerting) {
    if (e >= store.events.size()) throw ValidationError("unknown alerting event " + std::to_string(e));
  }
  for (LogEpId id : annotations.seed_anomaly) {
    if (id >= store.logeps.size()) throw ValidationError("unknown seed LogEP " + std::to_string(id));
    const auto& steps = store.logeps[id].steps;
    const bool alerting = std::any_of(steps.begin(), steps.end(), [&](const Step& s) {
      return s.kind == Step::Kind::kLog && annotations.alerting.count(s.target);
    });
    if (!alerting) {
      throw ValidationError("seed LogEP " + std::to_string(id) + " contains no alerting event");
    }
  }
}

std::string serialize_annotations(const AnnotationSet& annotations) {
  std::string out;
  for (EventId e : annotations.alerting) out += "ALERT " + std::to_string(e) + "\n";
  for (LogEpId id : annotations.seed_anomaly) out += "SEED " + std::to_string(id) + "\n";
  return out;
}

InfectionMap propagate(const LogEpStore& store, const AnnotationSet& annotations) {
  InfectionMap map;
  map.status.assign(store.logeps.size(), Infection::kClean);
  map.tainted.assign(store.by_method.size(), false);

  // callers_of[m]: LogEPs with a CallStep into m.
  std::vector<std::vector<LogEpId>> callers_of(store.by_method.size());
  for (const auto& ep : store.logeps) {
    for (const auto& s : ep.steps) {
      if (s.kind == Step::Kind::kCall) callers_of[s.target].push_back(ep.id);
    }
  }

  std::vector<MethodId> work;
  auto taint = [&](MethodId m) {
    if (!map.tainted[m]) {
      map.tainted[m] = true;
      work.push_back(m);
    }
  };
  for (LogEpId id : annotations.seed_anomaly) {
    map.status[id] = Infection::kSeed;
    taint(store.logeps[id].method);
  }
  while (!work.empty()) {
    const MethodId m = work.back();
    work.pop_back();
    for (LogEpId caller : callers_of[m]) {
      if (map.status[caller] != Infection::kClean) continue;
      map.status[caller] = Infection::kInfected;
      taint(store.logeps[caller].method);
    }
  }
  return map;
}

}  // namespace logsynth

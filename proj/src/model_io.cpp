#include "logsynth/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "logsynth/error.hpp"
#include "logsynth/text.hpp"

namespace logsynth {

namespace {

std::string cond_payload(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::kTrue:
      return "true";
    case Condition::Kind::kFalse:
      return "false";
    case Condition::Kind::kVar:
      return c.var;
    case Condition::Kind::kNotVar:
      return "!" + c.var;
  }
  return "true";
}

std::string guard_text(const Guard& g) {
  switch (g.kind) {
    case Guard::Kind::kTrue:
      return "TRUE";
    case Guard::Kind::kFalse:
      return "FALSE";
    case Guard::Kind::kVarTrue:
      return "T:" + g.var;
    case Guard::Kind::kVarFalse:
      return "F:" + g.var;
  }
  return "TRUE";
}

}  // namespace

std::string serialize_model(const ProgramModel& model) {
  std::string out = "# logsynth model v1\n";
  for (const auto& m : model.methods) {
    out += "M " + std::to_string(m.id) + " " + m.name;
    if (m.component) out += " " + escape_field(*m.component);
    out += '\n';
  }
  for (const auto& m : model.methods) {
    const auto& nodes = m.cfg.nodes();
    for (ActivityId a = 0; a < nodes.size(); ++a) {
      out += "A " + std::to_string(m.id) + " " + std::to_string(a) + " ";
      std::visit(
          [&](const auto& act) {
            using T = std::decay_t<decltype(act)>;
            if constexpr (std::is_same_v<T, EntryActivity>) {
              out += "ENTRY";
            } else if constexpr (std::is_same_v<T, ExitActivity>) {
              out += "EXIT";
            } else if constexpr (std::is_same_v<T, LogActivity>) {
              out += "LOG ";
              out += to_string(act.stmt.level);
              for (const auto& p : act.stmt.parts) {
                out += p.kind == LogPart::Kind::kLiteral ? "|L:" : "|V:";
                out += escape_field(p.text);
              }
            } else if constexpr (std::is_same_v<T, CallActivity>) {
              out += "CALL " + act.target;
            } else if constexpr (std::is_same_v<T, AssignActivity>) {
              out += "ASSIGN " + act.var + "|" + escape_field(act.literal);
            } else {
              out += "BRANCH " + cond_payload(act.cond);
            }
          },
          nodes[a]);
      out += '\n';
    }
  }
  for (const auto& m : model.methods) {
    for (const auto& e : m.cfg.edges()) {
      out += "E " + std::to_string(m.id) + " " + std::to_string(e.from) + " " + std::to_string(e.to);
      if (e.guard) out += " " + guard_text(*e.guard);
      out += '\n';
    }
  }
  for (const auto& c : model.call_edges) {
    out += "C " + std::to_string(c.caller) + " " + std::to_string(c.site) + " " + std::to_string(c.callee) + "\n";
  }
  return out;
}

namespace {

class ModelParser {
 public:
  ModelParser(std::string_view text, const std::string& path) : text_(text), path_(path) {}

  ProgramModel run() {
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      std::size_t end = text_.find('\n', pos);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos, end - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++line_no_;
      if (!trim(line).empty() && line.front() != '#') record(line);
      if (end == text_.size()) break;
      pos = end + 1;
    }
    return finish();
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw FormatError(path_, line_no_, msg); }

  std::uint32_t number(std::string_view tok, const char* what) const {
    std::uint32_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      fail(std::string("malformed ") + what + " '" + std::string(tok) + "'");
    }
    return v;
  }

  // Splits off the first `n` space-separated fields; the remainder (possibly
  // empty) is returned unmodified as the last element.
  std::vector<std::string_view> fields(std::string_view line, std::size_t n) const {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pos > line.size()) fail("truncated record");
      std::size_t sp = line.find(' ', pos);
      if (sp == std::string_view::npos) sp = line.size();
      if (sp == pos) fail("empty field in record");
      out.push_back(line.substr(pos, sp - pos));
      pos = sp + 1;
    }
    out.push_back(pos <= line.size() ? line.substr(pos) : std::string_view());
    return out;
  }

  void order(int section) {
    if (section < section_) fail("record out of order (expected M, then A, then E, then C)");
    section_ = section;
  }

  MethodNode& method(std::string_view tok) {
    const auto id = number(tok, "method id");
    if (id >= model_.methods.size()) fail("reference to missing method id " + std::to_string(id));
    return model_.methods[id];
  }

  void record(std::string_view line) {
    const char kind = line[0];
    if (line.size() < 2 || line[1] != ' ') fail("unknown record '" + std::string(line.substr(0, 8)) + "'");
    switch (kind) {
      case 'M':
        return method_record(line);
      case 'A':
        return activity_record(line);
      case 'E':
        return edge_record(line);
      case 'C':
        return call_record(line);
      default:
        fail("unknown record type '" + std::string(1, kind) + "'");
    }
  }

  void method_record(std::string_view line) {
    order(0);
    auto f = fields(line, 3);
    const auto id = number(f[1], "method id");
    if (id != model_.methods.size()) {
      fail(id < model_.methods.size() ? "duplicate method id " + std::to_string(id)
                                      : "method id " + std::to_string(id) + " breaks dense numbering");
    }
    MethodNode m;
    m.id = id;
    m.name = std::string(f[2]);
    if (!f[3].empty()) {
      auto comp = unescape_field(f[3]);
      if (!comp) fail("bad escape in component name");
      m.component = std::move(*comp);
    }
    model_.methods.push_back(std::move(m));
    activities_.emplace_back();
  }

  void activity_record(std::string_view line) {
    order(1);
    auto f = fields(line, 4);
    MethodNode& m = method(f[1]);
    const auto aid = number(f[2], "activity id");
    auto& acts = activities_[m.id];
    if (acts.count(aid)) fail("duplicate activity id " + std::to_string(aid) + " in method " + std::to_string(m.id));
    const std::string_view kind = f[3];
    const std::string_view payload = f[4];
    Activity act;
    if (kind == "ENTRY") {
      act = EntryActivity{};
    } else if (kind == "EXIT") {
      act = ExitActivity{};
    } else if (kind == "LOG") {
      auto pieces = split_escaped(payload, '|');
      const auto level = parse_level(pieces[0]);
      if (!level) fail("malformed log level '" + std::string(pieces[0]) + "'");
      LogActivity log;
      log.stmt.level = *level;
      for (std::size_t i = 1; i < pieces.size(); ++i) {
        const auto piece = pieces[i];
        if (piece.size() < 2 || piece[1] != ':' || (piece[0] != 'L' && piece[0] != 'V')) {
          fail("malformed log part '" + std::string(piece) + "'");
        }
        auto text = unescape_field(piece.substr(2));
        if (!text) fail("bad escape in log part");
        log.stmt.parts.push_back(piece[0] == 'L' ? LogPart::literal(std::move(*text)) : LogPart::var(std::move(*text)));
      }
      if (log.stmt.parts.empty()) fail("logging statement without parts");
      act = std::move(log);
    } else if (kind == "CALL") {
      if (payload.empty()) fail("CALL without target");
      act = CallActivity{std::string(payload)};
    } else if (kind == "ASSIGN") {
      auto pieces = split_escaped(payload, '|');
      if (pieces.size() != 2 || pieces[0].empty()) fail("malformed ASSIGN payload");
      auto literal = unescape_field(pieces[1]);
      if (!literal) fail("bad escape in ASSIGN literal");
      act = AssignActivity{std::string(pieces[0]), std::move(*literal)};
    } else if (kind == "BRANCH") {
      Condition c;
      if (payload == "true") {
        c.kind = Condition::Kind::kTrue;
      } else if (payload == "false") {
        c.kind = Condition::Kind::kFalse;
      } else if (!payload.empty() && payload[0] == '!' && payload.size() > 1) {
        c.kind = Condition::Kind::kNotVar;
        c.var = std::string(payload.substr(1));
      } else if (!payload.empty() && payload[0] != '!') {
        c.kind = Condition::Kind::kVar;
        c.var = std::string(payload);
      } else {
        fail("malformed branch condition '" + std::string(payload) + "'");
      }
      act = BranchActivity{std::move(c)};
    } else {
      fail("unknown activity kind '" + std::string(kind) + "'");
    }
    acts.emplace(aid, std::move(act));
  }

  void seal_activities() {
    if (sealed_) return;
    sealed_ = true;
    StatementId next_statement = 0;
    for (auto& m : model_.methods) {
      auto& acts = activities_[m.id];
      ActivityId expected = 0;
      for (auto& [aid, act] : acts) {
        if (aid != expected) {
          throw FormatError(path_, 0, "method " + std::to_string(m.id) + ": activity ids not dense, missing " +
                                          std::to_string(expected));
        }
        ++expected;
        if (auto* log = std::get_if<LogActivity>(&act)) log->stmt.id = next_statement++;
        m.cfg.add_node(std::move(act));
      }
    }
  }

  void edge_record(std::string_view line) {
    order(2);
    seal_activities();
    auto f = fields(line, 4);
    MethodNode& m = method(f[1]);
    const auto from = number(f[2], "activity id");
    const auto to = number(f[3], "activity id");
    if (from >= m.cfg.size()) fail("edge from missing activity " + std::to_string(from));
    if (to >= m.cfg.size()) fail("edge to missing activity " + std::to_string(to));
    std::optional<Guard> guard;
    const std::string_view g = f[4];
    if (g == "TRUE") {
      guard = Guard::literal(true);
    } else if (g == "FALSE") {
      guard = Guard::literal(false);
    } else if (g.size() > 2 && (g.substr(0, 2) == "T:" || g.substr(0, 2) == "F:")) {
      guard = Guard::on_var(std::string(g.substr(2)), g[0] == 'T');
    } else if (!g.empty()) {
      fail("malformed guard '" + std::string(g) + "'");
    }
    m.cfg.add_edge(from, to, std::move(guard));
  }

  void call_record(std::string_view line) {
    order(3);
    seal_activities();
    auto f = fields(line, 4);
    if (!f[4].empty()) fail("trailing data in call record");
    const MethodNode& caller = method(f[1]);
    const auto site = number(f[2], "site activity id");
    const MethodNode& callee = method(f[3]);
    model_.call_edges.push_back({caller.id, site, callee.id});
  }

  ProgramModel finish() {
    seal_activities();
    std::sort(model_.call_edges.begin(), model_.call_edges.end());
    if (std::adjacent_find(model_.call_edges.begin(), model_.call_edges.end()) != model_.call_edges.end()) {
      throw FormatError(path_, 0, "duplicate call record");
    }
    try {
      validate(model_);
    } catch (const ValidationError& e) {
      throw FormatError(path_, 0, e.what());
    }
    return std::move(model_);
  }

  std::string_view text_;
  const std::string& path_;
  std::size_t line_no_ = 0;
  int section_ = 0;
  bool sealed_ = false;
  ProgramModel model_;
  std::vector<std::map<ActivityId, Activity>> activities_;
};

}  // namespace

ProgramModel parse_model(std::string_view text, const std::string& path) {
  return ModelParser(text, path).run();
}

void save_model(const ProgramModel& model, const std::string& path) {
  write_file(path, serialize_model(model));
}

ProgramModel load_model(const std::string& path) { return parse_model(read_file(path), path); }

}  // namespace logsynth

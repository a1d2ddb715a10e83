#include "textlevel/templates.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace textlevel {

namespace {

std::vector<std::string> normalized(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool contains(const std::vector<std::string>& sorted, const std::string& s) {
  return std::binary_search(sorted.begin(), sorted.end(), s);
}

// The pattern is embedded verbatim; capture-group backreferences would
// change meaning under composition, so they are rejected up front.
bool has_backreference(const std::string& pattern) {
  bool escaped = false;
  for (char ch : pattern) {
    if (escaped) {
      if (ch >= '1' && ch <= '9') return true;
      escaped = false;
    } else if (ch == '\\') {
      escaped = true;
    }
  }
  return false;
}

}  // namespace

Element Element::literal(std::string s) {
  Element e;
  e.kind = ElementKind::kLiteral;
  e.surface = std::move(s);
  return e;
}

Element Element::lemma(std::string b) {
  Element e;
  e.kind = ElementKind::kLemma;
  e.base = std::move(b);
  return e;
}

Element Element::slot(std::vector<std::string> pos,
                      std::vector<std::string> pos_detail,
                      std::vector<std::string> inflection,
                      std::optional<std::string> pattern) {
  Element e;
  e.kind = ElementKind::kSlot;
  e.pos_any = normalized(std::move(pos));
  e.pos_detail_any = normalized(std::move(pos_detail));
  e.inflection_any = normalized(std::move(inflection));
  e.surface_pattern = std::move(pattern);
  return e;
}

Element Element::gap(int min_tokens, int max_tokens) {
  Element e;
  e.kind = ElementKind::kGap;
  e.gap_min = min_tokens;
  e.gap_max = max_tokens;
  return e;
}

bool CompiledTemplate::TokenStep::matches(const Token& t) const {
  if (surface_eq && t.surface != *surface_eq) return false;
  if (base_eq && t.base != *base_eq) return false;
  if (!pos_any.empty() && !contains(pos_any, t.pos)) return false;
  if (!pos_detail_any.empty() && !contains(pos_detail_any, t.pos_detail))
    return false;
  if (!inflection_any.empty() && !contains(inflection_any, t.inflection_form))
    return false;
  if (surface_re && !std::regex_match(t.surface, *surface_re)) return false;
  return true;
}

CompiledTemplate compile(const TemplateSpec& spec) {
  const std::string where = "template \"" + spec.template_id + "\": ";
  if (spec.template_id.empty())
    throw TemplateError("template with empty id");
  if (spec.elements.empty()) throw TemplateError(where + "no elements");

  CompiledTemplate out;
  out.id_ = spec.template_id;
  out.level_ = spec.level;

  bool any_non_gap = false;
  ElementKind prev = ElementKind::kLiteral;
  for (size_t i = 0; i < spec.elements.size(); ++i) {
    const Element& e = spec.elements[i];
    if (i > 0 && prev == ElementKind::kGap && e.kind == ElementKind::kGap)
      throw TemplateError(where + "adjacent gap elements");
    prev = e.kind;
    switch (e.kind) {
      case ElementKind::kLiteral: {
        any_non_gap = true;
        CompiledTemplate::TokenStep step;
        step.surface_eq = e.surface;
        out.steps_.emplace_back(std::move(step));
        break;
      }
      case ElementKind::kLemma: {
        any_non_gap = true;
        CompiledTemplate::TokenStep step;
        step.base_eq = e.base;
        out.steps_.emplace_back(std::move(step));
        break;
      }
      case ElementKind::kSlot: {
        any_non_gap = true;
        if (e.pos_any.empty() && e.pos_detail_any.empty() &&
            e.inflection_any.empty() && !e.surface_pattern)
          throw TemplateError(where + "unconstrained slot");
        CompiledTemplate::TokenStep step;
        step.pos_any = normalized(e.pos_any);
        step.pos_detail_any = normalized(e.pos_detail_any);
        step.inflection_any = normalized(e.inflection_any);
        if (e.surface_pattern) {
          if (has_backreference(*e.surface_pattern))
            throw TemplateError(where +
                                "surface pattern uses a backreference");
          try {
            step.surface_re = std::make_shared<const std::regex>(
                *e.surface_pattern, std::regex::ECMAScript);
          } catch (const std::regex_error& err) {
            throw TemplateError(where + "invalid surface pattern: " +
                                err.what());
          }
        }
        out.steps_.emplace_back(std::move(step));
        break;
      }
      case ElementKind::kGap: {
        if (e.gap_min < 0 || e.gap_max < e.gap_min)
          throw TemplateError(where + "bad gap range");
        out.steps_.emplace_back(CompiledTemplate::GapStep{e.gap_min, e.gap_max});
        break;
      }
    }
  }
  if (!any_non_gap) throw TemplateError(where + "only gap elements");
  return out;
}

std::vector<MatchSpan> CompiledTemplate::match(
    std::span<const Token> phrase) const {
  const int n = static_cast<int>(phrase.size());
  const int k = static_cast<int>(steps_.size());

  // min_end[s][pos]: smallest end index such that steps s.. consume
  // exactly tokens [pos, end), or -1. Computed lazily per start.
  std::vector<std::vector<int>> memo(k + 1, std::vector<int>(n + 1, -2));
  auto min_end = [&](auto&& self, int step, int pos) -> int {
    int& slot = memo[step][pos];
    if (slot != -2) return slot;
    if (step == k) return slot = pos;
    int best = -1;
    if (const auto* ts = std::get_if<TokenStep>(&steps_[step])) {
      if (pos < n && ts->matches(phrase[pos]))
        best = self(self, step + 1, pos + 1);
    } else {
      const auto& gs = std::get<GapStep>(steps_[step]);
      const int hi = std::min(gs.max, n - pos);
      for (int w = gs.min; w <= hi; ++w) {
        const int e = self(self, step + 1, pos + w);
        if (e >= 0 && (best < 0 || e < best)) best = e;
      }
    }
    return slot = best;
  };

  std::vector<MatchSpan> spans;
  for (int s = 0; s < n; ++s) {
    const int e = min_end(min_end, 0, s);
    if (e > s) spans.push_back({s, e});
  }
  return spans;
}

std::vector<MatchSpan> match_phrase(const CompiledTemplate& t,
                                    std::span<const Token> phrase) {
  return t.match(phrase);
}

void TemplateLibrary::add(const TemplateSpec& spec) {
  if (by_id_.count(spec.template_id))
    throw TemplateError("duplicate template id \"" + spec.template_id + "\"");
  CompiledTemplate compiled = compile(spec);
  by_id_.emplace(spec.template_id, static_cast<int>(entries_.size()));
  entries_.push_back(LibraryEntry{spec, std::move(compiled)});
}

const LibraryEntry* TemplateLibrary::find(const std::string& template_id) const {
  auto it = by_id_.find(template_id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::vector<const LibraryEntry*> TemplateLibrary::at_level(Level l) const {
  std::vector<const LibraryEntry*> out;
  for (const LibraryEntry& e : entries_)
    if (e.spec.level == l) out.push_back(&e);
  return out;
}

namespace {

std::string join_set(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += "|";
    out += v[i];
  }
  return out;
}

std::vector<std::string> split_set(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == '|') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

TemplateLibrary load_library(std::istream& in) {
  TemplateLibrary lib;
  std::string line;
  int line_no = 0;

  bool in_template = false;
  TemplateSpec spec;
  auto fail = [&line_no](const std::string& msg) -> void {
    throw FormatError("line " + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = strip(line);
    if (text.empty() || text[0] == '#') continue;

    std::istringstream words(text);
    std::string keyword;
    words >> keyword;

    if (!in_template) {
      if (keyword != "template") fail("expected a `template` block");
      std::string id, level_tag;
      if (!(words >> id >> level_tag)) fail("template line needs `<id> <level>`");
      auto lvl = level_from_string(level_tag);
      if (!lvl) fail("unknown level tag \"" + level_tag + "\"");
      spec = TemplateSpec{};
      spec.template_id = id;
      spec.level = *lvl;
      in_template = true;
      continue;
    }

    if (keyword == "end") {
      try {
        lib.add(spec);
      } catch (const TemplateError& e) {
        fail(e.what());
      }
      in_template = false;
    } else if (keyword == "gloss") {
      std::string rest;
      std::getline(words, rest);
      spec.gloss = strip(rest);
    } else if (keyword == "lit") {
      std::string rest;
      std::getline(words, rest);
      const std::string value = strip(rest);
      if (value.empty()) fail("lit needs a surface form");
      spec.elements.push_back(Element::literal(value));
    } else if (keyword == "lemma") {
      std::string rest;
      std::getline(words, rest);
      const std::string value = strip(rest);
      if (value.empty()) fail("lemma needs a base form");
      spec.elements.push_back(Element::lemma(value));
    } else if (keyword == "slot") {
      std::string rest;
      std::getline(words, rest);
      rest = strip(rest);
      Element e;
      e.kind = ElementKind::kSlot;
      // `re=` consumes the remainder of the line so patterns may contain
      // spaces; it must therefore come last.
      std::string args = rest;
      const size_t re_pos = args.find("re=");
      if (re_pos != std::string::npos &&
          (re_pos == 0 || args[re_pos - 1] == ' ')) {
        e.surface_pattern = args.substr(re_pos + 3);
        args = strip(args.substr(0, re_pos));
      }
      std::istringstream arg_words(args);
      std::string arg;
      while (arg_words >> arg) {
        const size_t eq = arg.find('=');
        if (eq == std::string::npos) fail("bad slot argument \"" + arg + "\"");
        const std::string key = arg.substr(0, eq);
        const auto values = split_set(arg.substr(eq + 1));
        if (key == "pos")
          e.pos_any = normalized(values);
        else if (key == "detail")
          e.pos_detail_any = normalized(values);
        else if (key == "infl")
          e.inflection_any = normalized(values);
        else
          fail("unknown slot key \"" + key + "\"");
      }
      spec.elements.push_back(std::move(e));
    } else if (keyword == "gap") {
      int lo = 0, hi = 0;
      if (!(words >> lo >> hi)) fail("gap needs `<min> <max>`");
      spec.elements.push_back(Element::gap(lo, hi));
    } else {
      fail("unknown element keyword \"" + keyword + "\"");
    }
  }
  if (in_template)
    throw FormatError("unterminated template block at end of input");
  return lib;
}

void save_library(std::ostream& out, const TemplateLibrary& lib) {
  bool first = true;
  for (const LibraryEntry& entry : lib.entries()) {
    if (!first) out << "\n";
    first = false;
    const TemplateSpec& spec = entry.spec;
    out << "template " << spec.template_id << " " << to_string(spec.level)
        << "\n";
    if (!spec.gloss.empty()) out << "  gloss " << spec.gloss << "\n";
    for (const Element& e : spec.elements) {
      switch (e.kind) {
        case ElementKind::kLiteral:
          out << "  lit " << e.surface << "\n";
          break;
        case ElementKind::kLemma:
          out << "  lemma " << e.base << "\n";
          break;
        case ElementKind::kSlot: {
          out << "  slot";
          if (!e.pos_any.empty()) out << " pos=" << join_set(e.pos_any);
          if (!e.pos_detail_any.empty())
            out << " detail=" << join_set(e.pos_detail_any);
          if (!e.inflection_any.empty())
            out << " infl=" << join_set(e.inflection_any);
          if (e.surface_pattern) out << " re=" << *e.surface_pattern;
          out << "\n";
          break;
        }
        case ElementKind::kGap:
          out << "  gap " << e.gap_min << " " << e.gap_max << "\n";
          break;
      }
    }
    out << "end\n";
  }
}

ConsensusResult consensus_merge(
    const std::vector<std::map<std::string, TemplateSpec>>& sources) {
  if (sources.size() < 2)
    throw TemplateError("consensus merge needs at least two sources");

  std::set<std::string> all_ids;
  for (const auto& source : sources)
    for (const auto& [id, spec] : source) all_ids.insert(id);

  ConsensusResult result;
  for (const std::string& id : all_ids) {
    const TemplateSpec* reference = nullptr;
    std::map<Level, int> votes;
    std::string gloss;
    for (const auto& source : sources) {
      auto it = source.find(id);
      if (it == source.end()) continue;
      const TemplateSpec& spec = it->second;
      if (reference && spec.elements != reference->elements)
        throw TemplateError("conflicting spec for template \"" + id + "\"");
      if (!reference) reference = &spec;
      ++votes[spec.level];
      // Gloss choice must not depend on source order.
      if (!spec.gloss.empty() && (gloss.empty() || spec.gloss < gloss))
        gloss = spec.gloss;
    }
    std::optional<Level> agreed;
    for (Level l : kLevelsEasyFirst) {
      auto it = votes.find(l);
      if (it != votes.end() && it->second >= 2) {
        agreed = l;
        break;  // easiest qualifying level wins on the (rare) tie
      }
    }
    if (!agreed) {
      result.excluded.push_back(id);
      continue;
    }
    TemplateSpec merged = *reference;
    merged.level = *agreed;
    merged.gloss = gloss;
    result.library.add(merged);
  }
  return result;
}

}  // namespace textlevel

#include "textlevel/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace textlevel {

namespace {

bool has_reserved(const std::string& s) {
  return s.find(kFieldSeparator) != std::string::npos ||
         s.find(kRecordSeparator) != std::string::npos;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

int SentenceTree::root() const {
  for (const Chunk& c : chunks)
    if (c.head_chunk == -1) return c.id;
  return -1;
}

std::vector<std::vector<int>> SentenceTree::children() const {
  std::vector<std::vector<int>> out(chunks.size());
  for (const Chunk& c : chunks) {
    if (c.head_chunk >= 0 && c.head_chunk < static_cast<int>(chunks.size()))
      out[c.head_chunk].push_back(c.id);
  }
  return out;
}

int SentenceTree::token_count() const {
  int n = 0;
  for (const Chunk& c : chunks) n += static_cast<int>(c.tokens.size());
  return n;
}

std::vector<std::string> validate(const SentenceTree& tree) {
  std::vector<std::string> violations;
  const int n = static_cast<int>(tree.chunks.size());
  if (n == 0) {
    violations.push_back("no root chunk (sentence has no chunks)");
    return violations;
  }

  std::vector<int> roots;
  for (int i = 0; i < n; ++i) {
    const Chunk& c = tree.chunks[i];
    if (c.id != i)
      violations.push_back("chunk id " + std::to_string(c.id) +
                           " does not match position " + std::to_string(i));
    if (c.tokens.empty())
      violations.push_back("empty token list at chunk " + std::to_string(i));
    for (size_t t = 0; t < c.tokens.size(); ++t) {
      const Token& tok = c.tokens[t];
      if (tok.surface.empty())
        violations.push_back("empty surface at chunk " + std::to_string(i) +
                             " token " + std::to_string(t));
      for (const std::string* field :
           {&tok.surface, &tok.base, &tok.pos, &tok.pos_detail,
            &tok.inflection_form, &tok.reading}) {
        if (has_reserved(*field)) {
          violations.push_back("reserved code point in a field at chunk " +
                               std::to_string(i) + " token " +
                               std::to_string(t));
          break;
        }
      }
    }
    if (c.head_chunk == -1) {
      roots.push_back(i);
    } else if (c.head_chunk == c.id) {
      violations.push_back("self-loop at chunk " + std::to_string(i));
    } else if (c.head_chunk < 0 || c.head_chunk >= n) {
      violations.push_back("head index out of range at chunk " +
                           std::to_string(i));
    }
  }
  if (roots.empty())
    violations.push_back("no root chunk");
  else if (roots.size() > 1)
    violations.push_back("multiple roots: chunks " + join_ints(roots));

  // Cycle detection by following the head relation from every chunk.
  // 0 = unseen, 1 = on current path, 2 = done.
  std::vector<int> state(n, 0);
  std::set<std::vector<int>> cycles;
  for (int start = 0; start < n; ++start) {
    if (state[start] != 0) continue;
    std::vector<int> path;
    int cur = start;
    while (cur >= 0 && cur < n && state[cur] == 0 &&
           tree.chunks[cur].head_chunk != cur) {
      state[cur] = 1;
      path.push_back(cur);
      cur = tree.chunks[cur].head_chunk;
    }
    if (cur >= 0 && cur < n && state[cur] == 1) {
      // Found a new cycle: collect its members from the path tail.
      std::vector<int> cycle;
      bool in_cycle = false;
      for (int id : path) {
        if (id == cur) in_cycle = true;
        if (in_cycle) cycle.push_back(id);
      }
      std::sort(cycle.begin(), cycle.end());
      cycles.insert(cycle);
    }
    for (int id : path) state[id] = 2;
  }
  for (const auto& cycle : cycles)
    violations.push_back("cycle involving chunks " + join_ints(cycle));

  return violations;
}

namespace {

using nlohmann::ordered_json;

Token token_from_json(const ordered_json& j) {
  Token t;
  t.surface = j.at("surface").get<std::string>();
  t.base = j.value("base", std::string());
  t.pos = j.value("pos", std::string());
  t.pos_detail = j.value("pos_detail", std::string());
  t.inflection_form = j.value("inflection_form", std::string());
  t.reading = j.value("reading", std::string());
  return t;
}

ordered_json token_to_json(const Token& t) {
  return ordered_json{{"surface", t.surface},
                      {"base", t.base},
                      {"pos", t.pos},
                      {"pos_detail", t.pos_detail},
                      {"inflection_form", t.inflection_form},
                      {"reading", t.reading}};
}

}  // namespace

Corpus load_corpus_permissive(std::istream& in,
                              std::vector<std::string>* violations) {
  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  auto report = [violations, &line_no](const std::string& msg) {
    const std::string full = "line " + std::to_string(line_no) + ": " + msg;
    if (violations)
      violations->push_back(full);
    else
      throw InvariantError(full);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": malformed record: " + e.what());
    }
    Document doc;
    try {
      doc.doc_id = j.at("doc_id").get<std::string>();
      if (j.contains("level")) {
        const std::string tag = j.at("level").get<std::string>();
        auto lvl = level_from_string(tag);
        if (!lvl)
          throw FormatError("line " + std::to_string(line_no) +
                            ": unknown level tag \"" + tag + "\"");
        doc.level = *lvl;
      }
      doc.source = j.value("source", std::string());
      for (const auto& js : j.at("sentences")) {
        SentenceTree tree;
        for (const auto& jc : js.at("chunks")) {
          Chunk c;
          c.id = jc.at("id").get<int>();
          c.head_chunk = jc.at("head").get<int>();
          for (const auto& jt : jc.at("tokens"))
            c.tokens.push_back(token_from_json(jt));
          tree.chunks.push_back(std::move(c));
        }
        doc.sentences.push_back(std::move(tree));
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": malformed record: " + e.what());
    }
    if (doc.sentences.empty())
      report("document \"" + doc.doc_id + "\" has no sentences");
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      for (const std::string& v : validate(doc.sentences[s]))
        report("document \"" + doc.doc_id + "\" sentence " +
               std::to_string(s) + ": " + v);
    }
    if (!seen_ids.insert(doc.doc_id).second)
      report("duplicate doc_id \"" + doc.doc_id + "\"");
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_corpus(std::istream& in) {
  return load_corpus_permissive(in, nullptr);
}

void save_corpus(std::ostream& out, const Corpus& corpus) {
  for (const Document& doc : corpus.documents) {
    ordered_json j;
    j["doc_id"] = doc.doc_id;
    if (doc.level) j["level"] = to_string(*doc.level);
    j["source"] = doc.source;
    ordered_json sentences = ordered_json::array();
    for (const SentenceTree& tree : doc.sentences) {
      ordered_json chunks = ordered_json::array();
      for (const Chunk& c : tree.chunks) {
        ordered_json tokens = ordered_json::array();
        for (const Token& t : c.tokens) tokens.push_back(token_to_json(t));
        chunks.push_back(ordered_json{
            {"id", c.id}, {"head", c.head_chunk}, {"tokens", tokens}});
      }
      sentences.push_back(ordered_json{{"chunks", chunks}});
    }
    j["sentences"] = sentences;
    out << j.dump() << "\n";
  }
}

namespace {

// Splits "f0,f1,..." keeping empty cells; MeCab writes "*" for absent
// feature slots, which maps to an empty field.
std::vector<std::string> split_features(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (std::string& f : out)
    if (f == "*") f.clear();
  return out;
}

int parse_head_field(const std::string& field, int line_no) {
  // Head annotations look like "2D", "-1D" (the trailing letter is the
  // dependency type). Strip trailing non-digits and parse the rest.
  size_t end = field.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(field[end - 1])))
    --end;
  if (end == 0)
    throw FormatError("line " + std::to_string(line_no) +
                      ": missing head annotation");
  try {
    return std::stoi(field.substr(0, end));
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line_no) +
                      ": missing head annotation");
  }
}

}  // namespace

std::vector<SentenceTree> convert_external(std::istream& in,
                                           ParserDialect dialect) {
  if (dialect != ParserDialect::kCabochaLattice)
    throw FormatError("unknown dialect");

  std::vector<SentenceTree> sentences;
  SentenceTree current;
  bool in_sentence = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "EOS") {
      if (!in_sentence)
        throw FormatError("line " + std::to_string(line_no) +
                          ": EOS outside a sentence block");
      const auto violations = validate(current);
      if (!violations.empty())
        throw InvariantError("sentence ending at line " +
                             std::to_string(line_no) + ": " +
                             violations.front());
      sentences.push_back(std::move(current));
      current = SentenceTree{};
      in_sentence = false;
      continue;
    }
    if (line.rfind("* ", 0) == 0) {
      std::istringstream fields(line.substr(2));
      std::string idx_s, head_s;
      if (!(fields >> idx_s >> head_s))
        throw FormatError("line " + std::to_string(line_no) +
                          ": missing head annotation");
      Chunk c;
      try {
        c.id = std::stoi(idx_s);
      } catch (const std::exception&) {
        throw FormatError("line " + std::to_string(line_no) +
                          ": bad chunk index \"" + idx_s + "\"");
      }
      c.head_chunk = parse_head_field(head_s, line_no);
      current.chunks.push_back(std::move(c));
      in_sentence = true;
      continue;
    }
    // Token line: surface <TAB> comma-separated features.
    const size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError("line " + std::to_string(line_no) +
                        ": expected chunk header, token line or EOS");
    if (current.chunks.empty())
      throw FormatError("line " + std::to_string(line_no) +
                        ": token before any chunk header");
    Token t;
    t.surface = line.substr(0, tab);
    const auto f = split_features(line.substr(tab + 1));
    auto field = [&f](size_t i) {
      return i < f.size() ? f[i] : std::string();
    };
    t.pos = field(0);
    t.pos_detail = field(1);
    t.inflection_form = field(5);
    t.base = field(6).empty() ? t.surface : field(6);
    t.reading = field(7);
    current.chunks.back().tokens.push_back(std::move(t));
    in_sentence = true;
  }
  if (in_sentence)
    throw FormatError("truncated sentence block at end of input");
  return sentences;
}

}  // namespace textlevel

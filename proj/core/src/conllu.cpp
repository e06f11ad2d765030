#include "sap/conllu.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "sap/errors.hpp"

namespace sap {

void validate_sentence(const ParsedSentence& sentence) {
  const auto fail = [&](const std::string& msg) {
    throw ParseError(0, "sentence '" + sentence.sentence_id + "': " + msg);
  };
  const int n = static_cast<int>(sentence.tokens.size());
  for (int i = 0; i < n; ++i) {
    const Token& tok = sentence.tokens[static_cast<std::size_t>(i)];
    if (tok.index != i + 1) fail("token indices must be contiguous from 1");
    if (tok.surface.empty()) fail("empty token surface");
  }
  int roots = 0;
  for (const DepArc& arc : sentence.arcs) {
    if (arc.dep_index < 1 || arc.dep_index > n) fail("arc dependent out of range");
    if (arc.head_index < 0 || arc.head_index > n) fail("arc head out of range");
    if (arc.head_index == arc.dep_index) fail("self-referencing arc");
    if (arc.label.empty()) fail("empty dependency label");
    if (std::any_of(arc.label.begin(), arc.label.end(),
                    [](unsigned char c) { return std::isupper(c) != 0; })) {
      fail("dependency label '" + arc.label + "' is not lowercase");
    }
    if (arc.is_root()) ++roots;
  }
  if (n > 0 && roots != 1) fail("expected exactly one root arc, found " + std::to_string(roots));
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string normalize_label(std::string_view deprel) {
  const std::size_t colon = deprel.find(':');
  std::string label(deprel.substr(0, colon));
  std::transform(label.begin(), label.end(), label.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return label;
}

struct PendingSentence {
  std::optional<std::string> sent_id;
  std::size_t first_line = 0;
  ParsedSentence sentence;
  std::vector<std::size_t> arc_lines;
};

class Reader {
 public:
  std::vector<ParsedSentence> run(std::istream& in) {
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view line(raw);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (trim(line).empty()) {
        flush();
        continue;
      }
      if (!pending_) pending_.emplace().first_line = line_no;
      if (line.front() == '#') {
        comment(line);
        continue;
      }
      token_line(line, line_no);
    }
    flush();
    return std::move(out_);
  }

 private:
  void comment(std::string_view line) {
    line.remove_prefix(1);
    line = trim(line);
    constexpr std::string_view kKey = "sent_id";
    if (line.substr(0, kKey.size()) != kKey) return;
    std::string_view rest = trim(line.substr(kKey.size()));
    if (rest.empty() || rest.front() != '=') return;
    pending_->sent_id = std::string(trim(rest.substr(1)));
  }

  void token_line(std::string_view line, std::size_t line_no) {
    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw ParseError(line_no, "expected 10 tab-separated columns, found " +
                                    std::to_string(cols.size()));
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) {
      return;  // multiword range or empty node
    }
    const auto index = parse_int(id);
    if (!index || *index < 1) throw ParseError(line_no, "invalid token ID '" + std::string(id) + "'");
    ParsedSentence& s = pending_->sentence;
    for (const Token& t : s.tokens) {
      if (t.index == *index) throw ParseError(line_no, "duplicate token ID " + std::to_string(*index));
    }
    if (*index != static_cast<int>(s.tokens.size()) + 1) {
      throw ParseError(line_no, "token ID " + std::to_string(*index) + " out of sequence");
    }
    if (cols[1].empty()) throw ParseError(line_no, "empty FORM");
    const auto head = parse_int(cols[6]);
    if (!head || *head < 0) throw ParseError(line_no, "non-numeric HEAD '" + std::string(cols[6]) + "'");
    if (*head == *index) throw ParseError(line_no, "token is its own head");
    std::string label = normalize_label(cols[7]);
    if (label.empty() || label == "_") throw ParseError(line_no, "missing DEPREL");

    s.tokens.push_back(Token{*index, std::string(cols[1])});
    s.arcs.push_back(DepArc{*head, *index, std::move(label)});
    pending_->arc_lines.push_back(line_no);
  }

  void flush() {
    if (!pending_) return;
    PendingSentence p = std::move(*pending_);
    pending_.reset();
    ++block_count_;
    if (p.sentence.tokens.empty()) return;  // comment-only block
    const int n = static_cast<int>(p.sentence.tokens.size());
    int roots = 0;
    for (std::size_t i = 0; i < p.sentence.arcs.size(); ++i) {
      const DepArc& arc = p.sentence.arcs[i];
      if (arc.head_index > n) {
        throw ParseError(p.arc_lines[i], "HEAD " + std::to_string(arc.head_index) +
                                             " refers to a missing token");
      }
      if (arc.is_root()) ++roots;
    }
    if (roots != 1) {
      throw ParseError(p.first_line, "sentence must have exactly one root, found " +
                                         std::to_string(roots));
    }
    p.sentence.sentence_id = p.sent_id ? *p.sent_id : std::to_string(block_count_);
    out_.push_back(std::move(p.sentence));
  }

  std::optional<PendingSentence> pending_;
  std::size_t block_count_ = 0;
  std::vector<ParsedSentence> out_;
};

}  // namespace

std::vector<ParsedSentence> read_conllu(std::istream& in) { return Reader{}.run(in); }

std::vector<ParsedSentence> read_conllu(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_conllu(in);
}

std::vector<ParsedSentence> read_conllu_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_conllu(in);
}

void write_conllu(const std::vector<ParsedSentence>& sentences, std::ostream& out) {
  for (const ParsedSentence& s : sentences) {
    validate_sentence(s);
    std::map<int, const DepArc*> by_dep;
    for (const DepArc& arc : s.arcs) by_dep[arc.dep_index] = &arc;
    out << "# sent_id = " << s.sentence_id << '\n';
    out << "# text =";
    for (const Token& t : s.tokens) out << ' ' << t.surface;
    out << '\n';
    for (const Token& t : s.tokens) {
      const auto it = by_dep.find(t.index);
      if (it == by_dep.end()) {
        throw ParseError(0, "sentence '" + s.sentence_id + "': token " +
                                std::to_string(t.index) + " has no head arc");
      }
      out << t.index << '\t' << t.surface << "\t_\t_\t_\t_\t" << it->second->head_index << '\t'
          << it->second->label << "\t_\t_\n";
    }
    out << '\n';
  }
}

std::string write_conllu(const std::vector<ParsedSentence>& sentences) {
  std::ostringstream out;
  write_conllu(sentences, out);
  return out.str();
}

}  // namespace sap

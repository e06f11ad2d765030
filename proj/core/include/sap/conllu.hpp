#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sap/sentence.hpp"

namespace sap {

/// Reads CoNLL-U text. Only ID, FORM, HEAD and DEPREL are used. Multiword
/// ranges ("3-4") and empty nodes ("5.1") are skipped, DEPREL subtypes are
/// stripped ("nsubj:pass" -> "nsubj") and labels are lowercased.
///
/// The sentence id comes from a "# sent_id = ..." comment; blocks without one
/// are numbered by their 1-based position in the stream.
///
/// Throws ParseError carrying the offending line number.
std::vector<ParsedSentence> read_conllu(std::istream& in);
std::vector<ParsedSentence> read_conllu(std::string_view text);
std::vector<ParsedSentence> read_conllu_file(const std::filesystem::path& path);

/// Emits one block per sentence with a sent_id comment and the text line.
/// Unused columns are written as "_".
void write_conllu(const std::vector<ParsedSentence>& sentences, std::ostream& out);
std::string write_conllu(const std::vector<ParsedSentence>& sentences);

}  // namespace sap

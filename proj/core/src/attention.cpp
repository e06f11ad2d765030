#include "sap/attention.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sap/errors.hpp"

namespace sap {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'A', 'P', 'A', 'T', 'T', 'N', '1'};
// Upper bound on a single dimension; guards allocations on corrupt input.
constexpr std::uint32_t kMaxDim = 1u << 16;

[[noreturn]] void fail(AttentionErrorKind kind, const std::string& msg) {
  throw AttentionFormatError(kind, msg);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

void read_exact(std::istream& in, char* dst, std::size_t count, const char* what) {
  in.read(dst, static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count) {
    fail(AttentionErrorKind::kTruncated, std::string("unexpected end of data in ") + what);
  }
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  read_exact(in, reinterpret_cast<char*>(b), 4, what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

const Span& WordAlignment::span_of(int word) const {
  if (word < 1 || word > static_cast<int>(spans.size())) {
    fail(AttentionErrorKind::kSpanMismatch, "no alignment span for word " + std::to_string(word));
  }
  return spans[static_cast<std::size_t>(word - 1)];
}

void WordAlignment::validate(int token_count) const {
  int prev_end = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const Span& s = spans[i];
    const std::string where = "span " + std::to_string(i) + " [" + std::to_string(s.begin) +
                              "," + std::to_string(s.end) + ")";
    if (s.begin < 0 || s.end > token_count) fail(AttentionErrorKind::kSpanInvalid, where + " outside tokens");
    if (s.end <= s.begin) fail(AttentionErrorKind::kSpanInvalid, where + " is empty");
    if (s.begin < prev_end) fail(AttentionErrorKind::kSpanInvalid, where + " overlaps or is out of order");
    prev_end = s.end;
  }
}

WordAlignment WordAlignment::identity(int words, int offset) {
  WordAlignment a;
  a.spans.reserve(static_cast<std::size_t>(words));
  for (int w = 0; w < words; ++w) a.spans.push_back(Span{offset + w, offset + w + 1});
  return a;
}

AttentionRecord::AttentionRecord(std::string sentence_id, int layers, int heads, int tokens,
                                 std::vector<float> values, WordAlignment alignment,
                                 std::vector<HeadId> masked_heads)
    : sentence_id_(std::move(sentence_id)),
      layers_(layers),
      heads_(heads),
      tokens_(tokens),
      values_(std::move(values)),
      alignment_(std::move(alignment)) {
  if (layers_ < 1 || heads_ < 1 || tokens_ < 1) {
    fail(AttentionErrorKind::kBadShape, "layers, heads and tokens must all be >= 1");
  }
  masked_.assign(static_cast<std::size_t>(layers_) * heads_, 0);
  for (const HeadId& h : masked_heads) {
    if (h.layer < 0 || h.layer >= layers_ || h.head < 0 || h.head >= heads_) {
      fail(AttentionErrorKind::kBadShape, "masked head " + to_string(h) + " out of range");
    }
    masked_[static_cast<std::size_t>(h.layer) * heads_ + h.head] = 1;
  }
  validate();
}

std::vector<HeadId> AttentionRecord::masked_heads() const {
  std::vector<HeadId> out;
  for (int l = 0; l < layers_; ++l)
    for (int h = 0; h < heads_; ++h)
      if (is_masked(l, h)) out.push_back({l, h});
  return out;
}

void AttentionRecord::validate() const {
  const std::size_t n = static_cast<std::size_t>(tokens_);
  if (values_.size() != static_cast<std::size_t>(layers_) * heads_ * n * n) {
    fail(AttentionErrorKind::kBadShape, "value count does not match L*H*n*n");
  }
  alignment_.validate(tokens_);
  for (int l = 0; l < layers_; ++l) {
    for (int h = 0; h < heads_; ++h) {
      const auto m = map(l, h);
      const bool masked = is_masked(l, h);
      for (std::size_t q = 0; q < n; ++q) {
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const float v = m[q * n + k];
          if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
            fail(AttentionErrorKind::kValueRange, "value outside [0,1] at head " + to_string({l, h}));
          }
          sum += v;
        }
        if (masked) {
          if (sum != 0.0) fail(AttentionErrorKind::kMaskedRowNotZero, "masked head " + to_string({l, h}));
        } else if (std::abs(sum - 1.0) > kRowSumTolerance) {
          std::ostringstream msg;
          msg << "row " << q << " of head " << to_string({l, h}) << " sums to " << sum;
          fail(AttentionErrorKind::kRowSum, msg.str());
        }
      }
    }
  }
}

void check_alignment(const AttentionRecord& record, const ParsedSentence& sentence) {
  if (record.sentence_id() != sentence.sentence_id) {
    fail(AttentionErrorKind::kSpanMismatch, "attention for '" + record.sentence_id() +
                                                "' paired with sentence '" + sentence.sentence_id + "'");
  }
  if (record.alignment().word_count() != sentence.word_count()) {
    fail(AttentionErrorKind::kSpanMismatch,
         "sentence '" + sentence.sentence_id + "' has " + std::to_string(sentence.word_count()) +
             " words but the alignment has " + std::to_string(record.alignment().word_count()) + " spans");
  }
}

void write_attention(const AttentionRecord& record, std::ostream& out) {
  nlohmann::json header;
  header["sentence_id"] = record.sentence_id();
  nlohmann::json spans = nlohmann::json::array();
  for (const Span& s : record.alignment().spans) spans.push_back({s.begin, s.end});
  header["alignment"] = std::move(spans);
  const auto masked = record.masked_heads();
  if (!masked.empty()) {
    nlohmann::json m = nlohmann::json::array();
    for (const HeadId& h : masked) m.push_back({h.layer, h.head});
    header["masked_heads"] = std::move(m);
  }
  const std::string text = header.dump();

  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(record.layers()));
  put_u32(out, static_cast<std::uint32_t>(record.heads()));
  put_u32(out, static_cast<std::uint32_t>(record.tokens()));
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const float v : record.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  if (!out) throw Error(ErrorCode::kIo, "failed writing attention record");
}

std::string write_attention(const AttentionRecord& record) {
  std::ostringstream out(std::ios::binary);
  write_attention(record, out);
  return out.str();
}

AttentionRecord read_attention(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (static_cast<std::size_t>(in.gcount()) != magic.size() || magic != kMagic) {
    fail(AttentionErrorKind::kBadMagic, "missing SAPATTN1 magic");
  }
  const std::uint32_t layers = get_u32(in, "shape");
  const std::uint32_t heads = get_u32(in, "shape");
  const std::uint32_t tokens = get_u32(in, "shape");
  if (layers == 0 || heads == 0 || tokens == 0 || layers > kMaxDim || heads > kMaxDim ||
      tokens > kMaxDim) {
    fail(AttentionErrorKind::kBadShape, "invalid shape");
  }
  const std::uint32_t header_len = get_u32(in, "header length");
  if (header_len > (1u << 26)) fail(AttentionErrorKind::kBadHeader, "header too large");
  std::string text(header_len, '\0');
  read_exact(in, text.data(), header_len, "header");

  std::string sentence_id;
  WordAlignment alignment;
  std::vector<HeadId> masked;
  try {
    const auto header = nlohmann::json::parse(text);
    sentence_id = header.at("sentence_id").get<std::string>();
    for (const auto& s : header.at("alignment")) {
      if (!s.is_array() || s.size() != 2) fail(AttentionErrorKind::kBadHeader, "alignment entries must be pairs");
      alignment.spans.push_back(Span{s[0].get<int>(), s[1].get<int>()});
    }
    if (header.contains("masked_heads")) {
      for (const auto& m : header.at("masked_heads")) {
        if (!m.is_array() || m.size() != 2) fail(AttentionErrorKind::kBadHeader, "masked_heads entries must be pairs");
        masked.push_back(HeadId{m[0].get<int>(), m[1].get<int>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(AttentionErrorKind::kBadHeader, e.what());
  }

  const std::size_t count = static_cast<std::size_t>(layers) * heads * tokens * tokens;
  std::vector<float> values(count);
  std::vector<unsigned char> raw(count * 4);
  read_exact(in, reinterpret_cast<char*>(raw.data()), raw.size(), "attention values");
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* b = raw.data() + i * 4;
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                               (static_cast<std::uint32_t>(b[2]) << 16) |
                               (static_cast<std::uint32_t>(b[3]) << 24);
    values[i] = std::bit_cast<float>(bits);
  }
  return AttentionRecord(std::move(sentence_id), static_cast<int>(layers), static_cast<int>(heads),
                         static_cast<int>(tokens), std::move(values), std::move(alignment),
                         std::move(masked));
}

AttentionRecord read_attention_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return read_attention(in);
  } catch (const AttentionFormatError& e) {
    throw AttentionFormatError(e.kind(), path.string() + ": " + e.what());
  }
}

void write_attention_file(const AttentionRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  write_attention(record, out);
}

std::vector<AttentionRecord> read_attention_path(const std::filesystem::path& path) {
  std::vector<AttentionRecord> records;
  if (!std::filesystem::is_directory(path)) {
    records.push_back(read_attention_file(path));
    return records;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == kAttentionExtension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  records.reserve(files.size());
  for (const auto& f : files) records.push_back(read_attention_file(f));
  return records;
}

}  // namespace sap

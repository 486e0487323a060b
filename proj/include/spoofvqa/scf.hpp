#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spoofvqa/rng.hpp"

namespace spoofvqa {

enum class SpoofType { print, replay, mask, mannequin };
enum class RecordLabel { real, fake };
enum class CaptionSource { general, spoof_aware };

std::string to_string(SpoofType t);
SpoofType spoof_type_from_string(std::string_view s);

struct CaptionRecord {
  std::string image_id;
  RecordLabel label = RecordLabel::real;
  std::optional<SpoofType> spoof_type;  // fakes only
  std::string caption;
  CaptionSource caption_source = CaptionSource::general;

  void validate() const;  // fakes carry a spoof type, reals none
};

// keyword -> spoof type; keywords stored lowercase, unique, non-empty
class KeywordDictionary {
 public:
  KeywordDictionary() = default;
  void add(std::string keyword, SpoofType type);
  static KeywordDictionary defaults();

  const std::map<std::string, SpoofType>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::string to_json() const;
  static KeywordDictionary from_json(const std::string& text);

 private:
  std::map<std::string, SpoofType> entries_;
};

enum class MatchMode { substring, word_boundary };

// Case-insensitive occurrence test after whitespace normalization;
// word_boundary requires non-alphanumeric (or edge) on both sides.
bool caption_contains(std::string_view caption, std::string_view keyword,
                      MatchMode mode = MatchMode::substring);

struct KeywordCount {
  SpoofType keyword_type;  // the keyword's mapped spoof type
  std::string keyword;
  std::size_t before = 0;  // matches in the incoming fake records
  std::size_t after = 0;   // matches among retained records
};

struct ScfStats {
  std::map<SpoofType, std::size_t> before_counts, after_counts;
  std::vector<KeywordCount> keyword_counts;

  std::string to_csv() const;  // spoof_type,keyword,before,after
};

// Algorithm-1 filter: a fake record is retained iff some keyword occurs in
// its caption and that keyword's type equals the record's spoof type.
// Order preserved. All records must be fakes with a spoof type.
std::vector<CaptionRecord> filter_spoof_aware(
    std::span<const CaptionRecord> records, const KeywordDictionary& dict,
    MatchMode mode = MatchMode::substring, ScfStats* stats = nullptr);

struct CaptionedDataset {
  std::vector<CaptionRecord> entries;
  std::map<SpoofType, std::size_t> fake_counts;
  std::size_t real_count = 0;
};

// Union of real records (general captions) and fake records (spoof-aware
// captions), with duplicate-id and missing-caption checks.
CaptionedDataset assemble_dcap(std::span<const CaptionRecord> reals,
                               std::span<const CaptionRecord> fakes);

// Template captioner standing in for both the general and the spoof-aware
// captioner. In spoof-aware mode a fake record's caption mentions a
// type-correct keyword with probability hit_rate.
class CaptionerStub {
 public:
  explicit CaptionerStub(double hit_rate = 1.0);
  std::string caption(RecordLabel label, std::optional<SpoofType> type,
                      CaptionSource mode, Rng& rng) const;
  double hit_rate() const { return hit_rate_; }

 private:
  double hit_rate_;
};

// newline-delimited JSON corpus I/O; parse errors carry the line number
std::vector<CaptionRecord> read_corpus(const std::string& path);
std::vector<CaptionRecord> parse_corpus(std::string_view text);
void write_corpus(const std::string& path, std::span<const CaptionRecord> records);
std::string record_to_json(const CaptionRecord& r);

}  // namespace spoofvqa

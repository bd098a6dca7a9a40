#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evscore::corpus {

enum class GradeBand { lower, higher };  // grades 4-6 and 6-8

std::string_view to_string(GradeBand band);
GradeBand parse_grade_band(std::string_view s);

/// One student response. Scores are on the 1..4 evidence rubric; an essay
/// without a first-rater score is ungraded.
struct Essay {
  std::string id;
  std::string text;
  GradeBand grade_band = GradeBand::lower;
  std::optional<int> score_rater1;
  std::optional<int> score_rater2;

  bool graded() const { return score_rater1.has_value(); }
  int label() const;  // score_rater1; throws InputError when ungraded

  bool operator==(const Essay&) const = default;
};

/// Throws InputError naming the essay id if scores are off-scale or the
/// text is blank.
void validate(const Essay& e);

class EssayCollection {
 public:
  EssayCollection() = default;
  /// Validates every essay and id uniqueness.
  EssayCollection(std::string name, std::vector<Essay> essays);

  const std::string& name() const { return name_; }
  const std::vector<Essay>& essays() const { return essays_; }
  std::size_t size() const { return essays_.size(); }
  bool empty() const { return essays_.empty(); }
  const Essay& operator[](std::size_t i) const { return essays_[i]; }
  auto begin() const { return essays_.begin(); }
  auto end() const { return essays_.end(); }

  EssayCollection graded() const;
  EssayCollection ungraded() const;

  /// Essays with score_rater1 == k, for k in 1..4.
  std::array<std::size_t, 4> class_counts() const;

  bool operator==(const EssayCollection&) const = default;

 private:
  std::string name_;
  std::vector<Essay> essays_;
};

enum class Format { delimited, record_per_line };

Format parse_format(std::string_view s);
std::string_view to_string(Format f);

/// Delimited: header `id,grade_band,score1,score2,text`, RFC 4180 quoting.
/// Record-per-line: one JSON object per line with the same five keys.
/// Empty score fields (or null) mean ungraded.
EssayCollection read_corpus(std::istream& in, Format format, std::string name = {});
EssayCollection load_corpus(const std::filesystem::path& path, Format format);

void write_corpus(std::ostream& out, const EssayCollection& c, Format format);
void save_corpus(const std::filesystem::path& path, const EssayCollection& c, Format format);

struct SplitSpec {
  std::array<double, 3> ratios{0.40, 0.20, 0.40};
  std::uint64_t seed = 0;
};

/// Throws InputError unless ratios lie in [0,1] and sum to 1 within 1e-9.
void validate(const SplitSpec& spec);

struct Split {
  EssayCollection embed_train;
  EssayCollection dev;
  EssayCollection test;
};

/// Per-class allocation of `count` essays over the parts: floor of each
/// quota, then the leftover essays go to the largest fractional remainders,
/// ties to the earlier part.
std::array<std::size_t, 3> allocate(std::size_t count, const std::array<double, 3>& ratios);

/// Stratifies on score_rater1. Every essay must be graded, and every score
/// class needs at least one essay for each part with a positive ratio.
Split stratified_split(const EssayCollection& c, const SplitSpec& spec);

/// Token-norm sequences of every essay in both collections, labels dropped.
std::vector<std::vector<std::string>> embedding_corpus(const EssayCollection& embed_train,
                                                       const EssayCollection& ungraded);

}  // namespace evscore::corpus

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace recex {

// trim + collapse internal whitespace + ASCII casefold; the equivalence used
// by the unique-sentence ratio.
std::string normalize_text(const std::string& text);

// |unique normalized texts| / |texts|. Throws DataError on an empty list.
// granularity: by default one generated explanation counts as one sentence;
// per_sentence splits on '.', '!' and '?' first.
enum class UsrGranularity { whole_explanation, per_sentence };
double usr(const std::vector<std::string>& explanations,
           UsrGranularity granularity = UsrGranularity::whole_explanation);

enum class ScoreDirection { higher_better, lower_better };

class ScorerPlugin {
 public:
  virtual ~ScorerPlugin() = default;
  virtual std::string name() const = 0;
  virtual ScoreDirection direction() const = 0;
  // Throws on failure; score_set turns that into a failed row.
  virtual double score(const std::string& reference, const std::string& candidate) = 0;
};

// Deterministic offline demo scorer: Jaccard overlap of casefolded word sets.
class TokenOverlapScorer : public ScorerPlugin {
 public:
  std::string name() const override { return "token_overlap"; }
  ScoreDirection direction() const override { return ScoreDirection::higher_better; }
  double score(const std::string& reference, const std::string& candidate) override;
};

// External scorer protocol: the child process reads line-delimited JSON
// {"reference": ..., "candidate": ...} pairs on stdin and writes one scalar
// per line on stdout. A non-zero exit status fails every row of the batch.
class ExternalProcessScorer : public ScorerPlugin {
 public:
  ExternalProcessScorer(std::string name, std::string command,
                        ScoreDirection direction = ScoreDirection::higher_better)
      : name_(std::move(name)), command_(std::move(command)), direction_(direction) {}
  std::string name() const override { return name_; }
  ScoreDirection direction() const override { return direction_; }
  double score(const std::string& reference, const std::string& candidate) override;

  // Batch entry point used by score_set when available (one process per batch).
  std::vector<double> score_batch(const std::vector<std::pair<std::string, std::string>>& pairs);

 private:
  std::string name_;
  std::string command_;
  ScoreDirection direction_;
};

struct ScoreRow {
  std::string user_id;
  std::string item_id;
  std::string scorer;
  double score = 0.0;
  bool failed = false;
};

struct ScoredPair {
  std::string user_id;
  std::string item_id;
  std::string reference;
  std::string candidate;
};

// One row per pair, input order preserved; failures marked and counted.
std::vector<ScoreRow> score_set(ScorerPlugin& plugin,
                                const std::vector<ScoredPair>& pairs);

struct ScoreStats {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;
  std::size_t failures = 0;
};

// Per-scorer aggregates over successful rows; a scorer with zero successful
// rows raises DataError.
std::map<std::string, ScoreStats> aggregate(const std::vector<ScoreRow>& rows);

struct SplitReport {
  std::string split_name;
  std::size_t pairs = 0;
  double usr_value = 0.0;
  std::map<std::string, ScoreStats> stats;
};

struct Report {
  std::vector<SplitReport> splits;  // "overall" first

  std::string human_readable() const;
  std::string machine_readable() const;  // line-delimited JSON
  static Report from_machine_readable(const std::string& jsonl);
};

}  // namespace recex

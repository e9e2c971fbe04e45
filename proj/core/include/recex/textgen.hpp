#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recex/corpus.hpp"

namespace recex {

enum class Provenance : uint8_t { template_backend = 0, external = 1 };

struct Profile {
  enum class Subject : uint8_t { user = 0, item = 1 };
  Subject subject = Subject::item;
  std::string subject_id;
  std::string text;
  Provenance provenance = Provenance::template_backend;
};

// Text-generation backend behind profile generation and review distillation.
// The template backend is a pure function of (prompt, seed) so the whole
// pipeline can run offline; the external backend posts to an HTTP endpoint.
class TextGenBackend {
 public:
  virtual ~TextGenBackend() = default;
  virtual std::string generate(const std::string& prompt, int max_words,
                               uint64_t seed) = 0;
  virtual Provenance provenance() const = 0;
};

// Deterministic summarizer. Understands the structured prompts built by the
// profile/distillation helpers ("Task: ..." header plus "Field: value"
// lines) and composes its output from the salient content words.
class TemplateBackend : public TextGenBackend {
 public:
  std::string generate(const std::string& prompt, int max_words,
                       uint64_t seed) override;
  Provenance provenance() const override { return Provenance::template_backend; }
};

struct ExternalBackendConfig {
  std::string base_url = "http://127.0.0.1:8080";
  std::string path = "/generate";
  std::string model = "external-llm";
  std::string auth_token_env = "RECEX_API_TOKEN";
  int timeout_seconds = 30;
  int max_retries = 3;
  int backoff_initial_ms = 100;
};

// POSTs {model, prompt, max_words} and expects {"text": ...}. Retries with
// exponential backoff; failures raise DataError carrying the HTTP status.
class ExternalBackend : public TextGenBackend {
 public:
  explicit ExternalBackend(ExternalBackendConfig cfg) : cfg_(std::move(cfg)) {}
  std::string generate(const std::string& prompt, int max_words,
                       uint64_t seed) override;
  Provenance provenance() const override { return Provenance::external; }

 private:
  ExternalBackendConfig cfg_;
};

// Aggregated per-item view used for profile generation.
struct ItemView {
  std::string item_id;
  std::map<std::string, std::string> meta;
  std::vector<std::string> reviews;
};

// Prompt assets (the placeholders are filled by the helpers below).
const std::string& item_profile_prompt();
const std::string& user_profile_prompt();
const std::string& distill_prompt();

Profile generate_item_profile(TextGenBackend& backend, const ItemView& item,
                              const std::string& prompt_template, uint64_t seed);

// Builds the user profile from a seeded sample (without replacement) of the
// profiles of the user's interacted items. sample_size is clamped to the
// available profiles; the sampled profiles are ordered by item id.
Profile generate_user_profile(TextGenBackend& backend, const std::string& user_id,
                              const std::vector<Profile>& item_profiles,
                              const std::string& prompt_template,
                              std::size_t sample_size, uint64_t seed);

// Distills a ground-truth explanation from the raw review alone; output is
// capped at max_words (truncated at a word boundary if the backend overruns).
std::string distill_explanation(TextGenBackend& backend, const std::string& review,
                                const std::string& prompt_template,
                                int max_words = 50);

struct DistillBatchResult {
  std::vector<std::optional<std::string>> explanations;  // input order
  std::size_t failures = 0;
  std::vector<std::string> failure_log;
};

// Batch distillation; backend failures skip the record and are logged.
// max_in_flight > 1 runs requests concurrently (bounded) while preserving
// input order in the result.
DistillBatchResult distill_batch(TextGenBackend& backend,
                                 const std::vector<DatasetRecord>& records,
                                 const std::string& prompt_template,
                                 int max_words = 50, int max_in_flight = 4);

// Groups records by item into ItemViews (sorted by item id).
std::vector<ItemView> collect_item_views(const Dataset& ds);

}  // namespace recex

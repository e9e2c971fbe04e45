#include "recex/textgen.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "recex/errors.hpp"
#include "recex/generate.hpp"
#include "recex/rng.hpp"

namespace recex {

using nlohmann::json;

// ---------------------------------------------------------------------------
// prompt assets

const std::string& item_profile_prompt() {
  static const std::string p =
      "Task: item profile\n"
      "Summarize what kind of user would enjoy this item.\n"
      "Title: {title}\n"
      "Category: {category}\n"
      "{reviews}";
  return p;
}

const std::string& user_profile_prompt() {
  static const std::string p =
      "Task: user profile\n"
      "Summarize this user's preferences from the items they enjoyed.\n"
      "{profiles}";
  return p;
}

const std::string& distill_prompt() {
  static const std::string p =
      "Task: distill\n"
      "Express the user's intention behind this interaction in at most "
      "{max_words} words, based only on the review.\n"
      "Review: {review}";
  return p;
}

// ---------------------------------------------------------------------------
// template backend

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "and",  "are",  "as",    "at",    "be",    "but",
      "by",   "for",  "from", "had",  "has",   "have",  "i",     "in",
      "is",   "it",   "its",  "my",   "of",    "on",    "or",    "so",
      "that", "the",  "this", "to",   "was",   "were",  "with",  "you",
      "very", "really", "loved", "liked", "enjoyed", "great", "good",
      "nice", "perfect", "item", "items", "user", "users", "would",
      "enjoy", "who", "kind", "what", "they", "their", "summarize",
      "task", "review", "most", "based", "only", "words", "your",
      "here", "exactly", "style", "thing", "things", "taste", "tastes"};
  return words;
}

std::string casefold(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Content words in order of first appearance, stopwords and duplicates removed.
std::vector<std::string> keywords(const std::string& text, std::size_t cap) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    const std::string folded = casefold(word);
    if (folded.size() > 1 && !stopwords().count(folded) && !seen.count(folded)) {
      seen.insert(folded);
      out.push_back(folded);
    }
    word.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c))
      word.push_back(static_cast<char>(c));
    else
      flush();
    if (out.size() >= cap) break;
  }
  flush();
  if (out.size() > cap) out.resize(cap);
  return out;
}

std::string field_after(const std::string& prompt, const std::string& label) {
  const std::size_t at = prompt.find(label);
  if (at == std::string::npos) return "";
  const std::size_t begin = at + label.size();
  const std::size_t end = prompt.find('\n', begin);
  std::string value = prompt.substr(begin, end == std::string::npos ? end : end - begin);
  while (!value.empty() && value.front() == ' ') value.erase(value.begin());
  return value;
}

// Like field_after but takes everything to the end of the prompt; used for
// the review field, which may span lines.
std::string field_tail(const std::string& prompt, const std::string& label) {
  const std::size_t at = prompt.find(label);
  if (at == std::string::npos) return "";
  std::string value = prompt.substr(at + label.size());
  while (!value.empty() && value.front() == ' ') value.erase(value.begin());
  return value;
}

std::string join(const std::vector<std::string>& words, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

std::string body_after_header(const std::string& prompt) {
  // Everything past the instruction lines; fields are handled separately.
  const std::size_t at = prompt.find('\n');
  return at == std::string::npos ? std::string() : prompt.substr(at + 1);
}

}  // namespace

std::string TemplateBackend::generate(const std::string& prompt, int max_words,
                                      uint64_t seed) {
  (void)seed;  // pure function of the prompt
  const std::string task = field_after(prompt, "Task:");
  std::string text;
  if (task == "item profile") {
    const std::string title = field_after(prompt, "Title:");
    const std::string category = field_after(prompt, "Category:");
    std::string reviews;
    std::istringstream lines(prompt);
    std::string line;
    while (std::getline(lines, line))
      if (line.rfind("Review:", 0) == 0) reviews += line.substr(7) + " ";
    const auto kw = keywords(reviews, 8);
    text = "'" + title + "' (" + category + ")";
    if (!kw.empty()) text += ", noted for " + join(kw, ", ");
    text += ".";
  } else if (task == "user profile") {
    std::string profiles;
    std::istringstream lines(prompt);
    std::string line;
    while (std::getline(lines, line))
      if (line.rfind("Item profile:", 0) == 0) profiles += line.substr(13) + " ";
    const auto kw = keywords(profiles, 10);
    text = kw.empty() ? "No clear preferences." : "Drawn to " + join(kw, ", ") + ".";
  } else if (task == "distill") {
    const std::string review = field_tail(prompt, "Review:");
    const auto kw = keywords(review, 10);
    text = kw.empty() ? "The user found it satisfying."
                      : "The user appreciated the " + join(kw, " ") + ".";
  } else {
    // Unknown structure: summarize whatever content words appear.
    const auto kw = keywords(body_after_header(prompt), 12);
    text = join(kw, " ");
  }
  return truncate_words(text, static_cast<std::size_t>(max_words));
}

// ---------------------------------------------------------------------------
// external backend

std::string ExternalBackend::generate(const std::string& prompt, int max_words,
                                      uint64_t seed) {
  (void)seed;
  json req;
  req["model"] = cfg_.model;
  req["prompt"] = prompt;
  req["max_words"] = max_words;
  const std::string body = req.dump();

  std::string last_error = "no attempt made";
  int backoff = cfg_.backoff_initial_ms;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(cfg_.timeout_seconds, 0);
    client.set_read_timeout(cfg_.timeout_seconds, 0);
    if (const char* token = std::getenv(cfg_.auth_token_env.c_str()))
      client.set_bearer_token_auth(token);

    auto res = client.Post(cfg_.path, body, "application/json");
    if (!res) {
      last_error = "connection failed (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;  // server errors are retryable
    }
    if (res->status != 200)
      throw DataError("external backend: HTTP " + std::to_string(res->status));
    try {
      const json parsed = json::parse(res->body);
      return parsed.at("text").get<std::string>();
    } catch (const json::exception&) {
      throw DataError("external backend: malformed response body");
    }
  }
  throw DataError("external backend: " + last_error + " after " +
                  std::to_string(cfg_.max_retries + 1) + " attempts");
}

// ---------------------------------------------------------------------------
// profile and distillation helpers

namespace {

void substitute(std::string& text, const std::string& slot, const std::string& value) {
  const std::size_t at = text.find(slot);
  if (at != std::string::npos) text.replace(at, slot.size(), value);
}

std::string meta_or(const std::map<std::string, std::string>& meta,
                    const std::string& key, const std::string& fallback) {
  const auto it = meta.find(key);
  return it == meta.end() ? fallback : it->second;
}

}  // namespace

Profile generate_item_profile(TextGenBackend& backend, const ItemView& item,
                              const std::string& prompt_template, uint64_t seed) {
  std::string prompt = prompt_template;
  substitute(prompt, "{title}", meta_or(item.meta, "title", item.item_id));
  substitute(prompt, "{category}", meta_or(item.meta, "category", "unknown"));
  std::string reviews;
  for (const auto& r : item.reviews) reviews += "Review: " + r + "\n";
  substitute(prompt, "{reviews}", reviews);

  Profile p;
  p.subject = Profile::Subject::item;
  p.subject_id = item.item_id;
  p.text = backend.generate(prompt, 50, seed);
  p.provenance = backend.provenance();
  if (p.text.empty()) throw DataError("item profile: backend produced empty text");
  return p;
}

Profile generate_user_profile(TextGenBackend& backend, const std::string& user_id,
                              const std::vector<Profile>& item_profiles,
                              const std::string& prompt_template,
                              std::size_t sample_size, uint64_t seed) {
  if (item_profiles.empty())
    throw DataError("user profile: user " + user_id + " has no item profiles");

  std::vector<std::size_t> idx(item_profiles.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return item_profiles[a].subject_id < item_profiles[b].subject_id;
  });

  const std::size_t take = std::min(sample_size, idx.size());
  Rng rng(seed);
  // partial Fisher-Yates over the id-ordered list, then restore id order
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.uniform_int(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return item_profiles[a].subject_id < item_profiles[b].subject_id;
  });

  std::string profiles;
  for (std::size_t i : idx)
    profiles += "Item profile: " + item_profiles[i].text + "\n";
  std::string prompt = prompt_template;
  substitute(prompt, "{profiles}", profiles);

  Profile p;
  p.subject = Profile::Subject::user;
  p.subject_id = user_id;
  p.text = backend.generate(prompt, 50, seed);
  p.provenance = backend.provenance();
  if (p.text.empty()) throw DataError("user profile: backend produced empty text");
  return p;
}

std::string distill_explanation(TextGenBackend& backend, const std::string& review,
                                const std::string& prompt_template, int max_words) {
  if (review.empty()) throw DataError("distill: empty review");
  std::string prompt = prompt_template;
  substitute(prompt, "{max_words}", std::to_string(max_words));
  substitute(prompt, "{review}", review);
  const std::string text = backend.generate(prompt, max_words, 0);
  return truncate_words(text, static_cast<std::size_t>(max_words));
}

DistillBatchResult distill_batch(TextGenBackend& backend,
                                 const std::vector<DatasetRecord>& records,
                                 const std::string& prompt_template, int max_words,
                                 int max_in_flight) {
  DistillBatchResult result;
  result.explanations.resize(records.size());

  auto one = [&](std::size_t i) -> std::optional<std::string> {
    try {
      return distill_explanation(backend, records[i].review, prompt_template, max_words);
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  if (max_in_flight <= 1) {
    for (std::size_t i = 0; i < records.size(); ++i) result.explanations[i] = one(i);
  } else {
    // bounded concurrency in windows; result slots keep input order
    const std::size_t window = static_cast<std::size_t>(max_in_flight);
    for (std::size_t start = 0; start < records.size(); start += window) {
      const std::size_t stop = std::min(start + window, records.size());
      std::vector<std::future<std::optional<std::string>>> futures;
      for (std::size_t i = start; i < stop; ++i)
        futures.push_back(std::async(std::launch::async, one, i));
      for (std::size_t i = start; i < stop; ++i)
        result.explanations[i] = futures[i - start].get();
    }
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!result.explanations[i]) {
      ++result.failures;
      result.failure_log.push_back("skipped (" + records[i].user_id + ", " +
                                   records[i].item_id + "): backend failure");
    }
  }
  return result;
}

std::vector<ItemView> collect_item_views(const Dataset& ds) {
  std::vector<ItemView> views;
  views.reserve(ds.items.size());
  for (const auto& id : ds.items) {
    ItemView v;
    v.item_id = id;
    views.push_back(std::move(v));
  }
  for (const auto& r : ds.records) {
    ItemView& v = views[ds.item_index(r.item_id)];
    if (v.meta.empty()) v.meta = r.meta;
    if (!r.review.empty()) v.reviews.push_back(r.review);
  }
  return views;
}

}  // namespace recex

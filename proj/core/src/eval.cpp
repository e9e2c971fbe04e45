#include "recex/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "recex/errors.hpp"
#include "recex/numerics.hpp"

namespace recex {

using nlohmann::json;

std::string normalize_text(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

double usr(const std::vector<std::string>& explanations, UsrGranularity granularity) {
  if (explanations.empty()) throw DataError("usr: empty list");

  std::vector<std::string> units;
  if (granularity == UsrGranularity::whole_explanation) {
    units = explanations;
  } else {
    for (const auto& text : explanations) {
      std::string cur;
      for (char c : text) {
        cur.push_back(c);
        if (c == '.' || c == '!' || c == '?') {
          units.push_back(cur);
          cur.clear();
        }
      }
      if (!normalize_text(cur).empty()) units.push_back(cur);
    }
    if (units.empty()) units = explanations;
  }

  std::set<std::string> unique;
  for (const auto& u : units) unique.insert(normalize_text(u));
  return static_cast<double>(unique.size()) / static_cast<double>(units.size());
}

double TokenOverlapScorer::score(const std::string& reference,
                                 const std::string& candidate) {
  auto words = [](const std::string& text) {
    std::set<std::string> out;
    std::string word;
    for (unsigned char c : text) {
      if (std::isalnum(c)) {
        word.push_back(static_cast<char>(std::tolower(c)));
      } else if (!word.empty()) {
        out.insert(word);
        word.clear();
      }
    }
    if (!word.empty()) out.insert(word);
    return out;
  };
  const auto a = words(reference);
  const auto b = words(candidate);
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& w : a) inter += b.count(w);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// external process scorer

namespace {

// Runs `command` with the given stdin content; returns stdout. Throws
// DataError on spawn failure or non-zero exit.
std::string run_with_stdin(const std::string& command, const std::string& input) {
  char in_path[] = "/tmp/recex_scorer_in_XXXXXX";
  const int in_fd = mkstemp(in_path);
  if (in_fd < 0) throw DataError("external scorer: cannot create temp file");
  const ssize_t wrote = write(in_fd, input.data(), input.size());
  close(in_fd);
  if (wrote != static_cast<ssize_t>(input.size())) {
    unlink(in_path);
    throw DataError("external scorer: temp write failed");
  }

  const std::string full = command + " < " + in_path;
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) {
    unlink(in_path);
    throw DataError("external scorer: failed to launch: " + command);
  }
  std::string output;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
  const int status = pclose(pipe);
  unlink(in_path);
  if (status != 0)
    throw DataError("external scorer exited with non-zero status: " + command);
  return output;
}

}  // namespace

std::vector<double> ExternalProcessScorer::score_batch(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::string input;
  for (const auto& [ref, cand] : pairs) {
    json j;
    j["reference"] = ref;
    j["candidate"] = cand;
    input += j.dump() + "\n";
  }
  const std::string output = run_with_stdin(command_, input);

  std::vector<double> scores;
  std::istringstream lines(output);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    try {
      scores.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw DataError("external scorer: non-numeric output line: " + line);
    }
  }
  if (scores.size() != pairs.size())
    throw DataError("external scorer: expected " + std::to_string(pairs.size()) +
                    " scores, got " + std::to_string(scores.size()));
  return scores;
}

double ExternalProcessScorer::score(const std::string& reference,
                                    const std::string& candidate) {
  return score_batch({{reference, candidate}}).at(0);
}

// ---------------------------------------------------------------------------

std::vector<ScoreRow> score_set(ScorerPlugin& plugin,
                                const std::vector<ScoredPair>& pairs) {
  std::vector<ScoreRow> rows;
  rows.reserve(pairs.size());

  if (auto* external = dynamic_cast<ExternalProcessScorer*>(&plugin)) {
    std::vector<std::pair<std::string, std::string>> batch;
    batch.reserve(pairs.size());
    for (const auto& p : pairs) batch.emplace_back(p.reference, p.candidate);
    try {
      const std::vector<double> scores = external->score_batch(batch);
      for (std::size_t i = 0; i < pairs.size(); ++i)
        rows.push_back({pairs[i].user_id, pairs[i].item_id, plugin.name(),
                        scores[i], false});
      return rows;
    } catch (const Error&) {
      for (const auto& p : pairs)
        rows.push_back({p.user_id, p.item_id, plugin.name(), 0.0, true});
      return rows;
    }
  }

  for (const auto& p : pairs) {
    ScoreRow row{p.user_id, p.item_id, plugin.name(), 0.0, false};
    try {
      row.score = plugin.score(p.reference, p.candidate);
    } catch (const std::exception&) {
      row.failed = true;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::map<std::string, ScoreStats> aggregate(const std::vector<ScoreRow>& rows) {
  std::map<std::string, std::vector<double>> ok;
  std::map<std::string, std::size_t> failures;
  for (const auto& r : rows) {
    if (r.failed)
      ++failures[r.scorer];
    else
      ok[r.scorer].push_back(r.score);
  }
  std::map<std::string, ScoreStats> out;
  for (const auto& [scorer, _] : failures)
    if (!ok.count(scorer))
      throw DataError("aggregate: scorer '" + scorer + "' has zero successful rows");
  for (const auto& [scorer, scores] : ok) {
    const MeanStd ms = population_mean_std(scores);
    out[scorer] = {ms.mean, ms.std, scores.size(),
                   failures.count(scorer) ? failures[scorer] : 0};
  }
  return out;
}

std::string Report::human_readable() const {
  std::ostringstream os;
  for (const auto& s : splits) {
    os << "== split: " << s.split_name << " (" << s.pairs << " pairs) ==\n";
    os << "  USR: " << s.usr_value << "\n";
    for (const auto& [name, st] : s.stats)
      os << "  " << name << ": mean " << st.mean << ", std " << st.std
         << ", n " << st.count << ", failed " << st.failures << "\n";
  }
  return os.str();
}

std::string Report::machine_readable() const {
  std::string out;
  for (const auto& s : splits) {
    {
      json j;
      j["split"] = s.split_name;
      j["metric"] = "USR";
      j["value"] = s.usr_value;
      j["pairs"] = s.pairs;
      out += j.dump() + "\n";
    }
    for (const auto& [name, st] : s.stats) {
      json j;
      j["split"] = s.split_name;
      j["metric"] = name;
      j["mean"] = st.mean;
      j["std"] = st.std;
      j["count"] = st.count;
      j["failures"] = st.failures;
      out += j.dump() + "\n";
    }
  }
  return out;
}

Report Report::from_machine_readable(const std::string& jsonl) {
  Report report;
  std::map<std::string, std::size_t> index;
  std::istringstream lines(jsonl);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string split = j.at("split").get<std::string>();
    if (!index.count(split)) {
      index[split] = report.splits.size();
      report.splits.push_back({split, 0, 0.0, {}});
    }
    SplitReport& s = report.splits[index[split]];
    const std::string metric = j.at("metric").get<std::string>();
    if (metric == "USR") {
      s.usr_value = j.at("value").get<double>();
      s.pairs = j.at("pairs").get<std::size_t>();
    } else {
      ScoreStats st;
      st.mean = j.at("mean").get<double>();
      st.std = j.at("std").get<double>();
      st.count = j.at("count").get<std::size_t>();
      st.failures = j.at("failures").get<std::size_t>();
      s.stats[metric] = st;
    }
  }
  return report;
}

}  // namespace recex

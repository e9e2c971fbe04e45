#include "recex/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "recex/errors.hpp"

namespace recex {

using nlohmann::json;

uint32_t Dataset::user_index(const std::string& id) const {
  const auto it = std::lower_bound(users.begin(), users.end(), id);
  if (it == users.end() || *it != id) throw DataError("unknown user id: " + id);
  return static_cast<uint32_t>(it - users.begin());
}

uint32_t Dataset::item_index(const std::string& id) const {
  const auto it = std::lower_bound(items.begin(), items.end(), id);
  if (it == items.end() || *it != id) throw DataError("unknown item id: " + id);
  return static_cast<uint32_t>(it - items.begin());
}

std::vector<Interaction> Dataset::interactions() const {
  std::vector<Interaction> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back({user_index(r.user_id), item_index(r.item_id)});
  return out;
}

Dataset Dataset::from_records(std::vector<DatasetRecord> records) {
  Dataset ds;
  std::unordered_map<std::string, std::size_t> seen;
  for (auto& r : records) {
    const std::string key = r.user_id + "\x1f" + r.item_id;
    const auto it = seen.find(key);
    if (it != seen.end()) {
      ds.records[it->second] = std::move(r);  // last wins, position kept
      ++ds.duplicate_warnings;
    } else {
      seen.emplace(key, ds.records.size());
      ds.records.push_back(std::move(r));
    }
  }
  for (const auto& r : ds.records) {
    ds.users.push_back(r.user_id);
    ds.items.push_back(r.item_id);
  }
  std::sort(ds.users.begin(), ds.users.end());
  ds.users.erase(std::unique(ds.users.begin(), ds.users.end()), ds.users.end());
  std::sort(ds.items.begin(), ds.items.end());
  ds.items.erase(std::unique(ds.items.begin(), ds.items.end()), ds.items.end());
  return ds;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open dataset: " + path);

  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("dataset " + path + " line " + std::to_string(line_no) +
                      ": malformed JSON (" + e.what() + ")");
    }
    DatasetRecord r;
    try {
      r.user_id = j.at("user_id").get<std::string>();
      r.item_id = j.at("item_id").get<std::string>();
      r.review = j.at("review").get<std::string>();
    } catch (const json::exception&) {
      throw DataError("dataset " + path + " line " + std::to_string(line_no) +
                      ": missing required field (user_id, item_id, review)");
    }
    if (j.contains("rating")) r.rating = j.at("rating").get<double>();
    if (j.contains("meta"))
      for (const auto& [k, v] : j.at("meta").items())
        r.meta[k] = v.get<std::string>();
    records.push_back(std::move(r));
  }
  return Dataset::from_records(std::move(records));
}

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open for write: " + path);
  for (const auto& r : records) {
    json j;
    j["user_id"] = r.user_id;
    j["item_id"] = r.item_id;
    j["review"] = r.review;
    if (r.rating) j["rating"] = *r.rating;
    if (!r.meta.empty()) {
      json m = json::object();
      for (const auto& [k, v] : r.meta) m[k] = v;
      j["meta"] = m;
    }
    os << j.dump() << "\n";
  }
  if (!os) throw DataError("write failed: " + path);
}

}  // namespace recex

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recex/graph.hpp"

namespace recex {

// One user-item interaction with its review and free-form item metadata.
struct DatasetRecord {
  std::string user_id;
  std::string item_id;
  std::string review;
  std::optional<double> rating;
  std::map<std::string, std::string> meta;
};

// Validated record set with dense id maps. (user_id, item_id) is unique;
// duplicate inputs resolve last-wins and are counted.
struct Dataset {
  std::vector<DatasetRecord> records;
  std::size_t duplicate_warnings = 0;

  std::vector<std::string> users;  // sorted unique ids; index = dense id
  std::vector<std::string> items;

  uint32_t user_index(const std::string& id) const;
  uint32_t item_index(const std::string& id) const;

  std::vector<Interaction> interactions() const;

  static Dataset from_records(std::vector<DatasetRecord> records);
};

// Line-delimited JSON records {user_id, item_id, review, rating?, meta?}.
// Malformed lines raise DataError naming the line number.
Dataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records);

}  // namespace recex

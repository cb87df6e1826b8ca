#pragma once

#include <filesystem>

#include "json.hpp"
#include "tutorweb/content.hpp"
#include "tutorweb/item_bank.hpp"

namespace tutorweb {

// The content import/export file: {"tree": [...nodes], "items": [...records]}.
struct ContentDocument {
  ContentTree tree;
  ItemBank items;

  nlohmann::json to_json() const;
  static ContentDocument from_json(const nlohmann::json& doc);

  static ContentDocument load(const std::filesystem::path& path);
  // Write-then-rename so readers never observe a partial file.
  void save(const std::filesystem::path& path) const;
};

std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace tutorweb

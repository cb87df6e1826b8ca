#include "tutorweb/content_document.hpp"

#include <fstream>
#include <sstream>

#include "tutorweb/error.hpp"

namespace tutorweb {

nlohmann::json ContentDocument::to_json() const {
  return {{"tree", tree.to_json()}, {"items", items.to_json()}};
}

ContentDocument ContentDocument::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "content document must be an object");
  ContentDocument out;
  out.tree = ContentTree::from_json(doc.value("tree", nlohmann::json::array()));
  out.items = ItemBank::from_json(out.tree, doc.value("items", nlohmann::json::array()));
  return out;
}

ContentDocument ContentDocument::load(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return from_json(doc);
}

void ContentDocument::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json().dump(2) + "\n");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::StorageFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "rename to " + path.string() + ": " + ec.message());
}

}  // namespace tutorweb

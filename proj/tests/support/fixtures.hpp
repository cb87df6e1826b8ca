#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "json.hpp"
#include "tutorweb/content_document.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tutorweb-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
}

// dept > course > tutorial > lecture "lec" with `n_items` plain questions q001.. and
// an empty lecture "empty-lec".
inline tutorweb::ContentDocument quiz_document(int n_items, bool shuffle = true) {
  using namespace tutorweb;
  ContentDocument doc;
  const auto dept = doc.tree.add_node(std::nullopt, NodeKind::Department, "Math", "", "plain", "dept");
  const auto course = doc.tree.add_node(dept, NodeKind::Course, "Statistics", "", "plain", "course");
  const auto tut = doc.tree.add_node(course, NodeKind::Tutorial, "Regression", "", "plain", "tut");
  doc.tree.add_node(tut, NodeKind::Lecture, "Least squares", "", "plain", "lec");
  doc.tree.add_node(tut, NodeKind::Lecture, "Nothing yet", "", "plain", "empty-lec");
  for (int i = 1; i <= n_items; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "q%03d", i);
    doc.items.add_question(doc.tree, "lec", "Question " + std::to_string(i) + "?",
                           {{"right " + std::to_string(i), true}, {"wrong a", false}, {"wrong b", false}}, shuffle,
                           std::string(id));
  }
  return doc;
}

// roster.json with students s1..sN (token "tok-sI"), plus a non-consenting "nc".
inline nlohmann::json roster_json(int n_students) {
  auto students = nlohmann::json::array();
  for (int i = 1; i <= n_students; ++i) {
    students.push_back({{"student", "s" + std::to_string(i)}, {"token", "tok-s" + std::to_string(i)}, {"consent", true}});
  }
  students.push_back({{"student", "nc"}, {"token", "tok-nc"}, {"consent", false}});
  return {{"admin_key", "admin-secret"}, {"students", students}};
}

inline void seed_data_dir(const std::filesystem::path& dir, int n_items, int n_students) {
  quiz_document(n_items).save(dir / "content.json");
  write_text(dir / "roster.json", roster_json(n_students).dump(2));
}

// True if `j` contains an object key named `key` at any depth.
inline bool contains_key(const nlohmann::json& j, const std::string& key) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (k == key || contains_key(v, key)) return true;
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (contains_key(v, key)) return true;
    }
  }
  return false;
}

}  // namespace fixtures

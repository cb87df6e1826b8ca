#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"
#include "tutorweb/allocation.hpp"
#include "tutorweb/answer_log.hpp"
#include "tutorweb/content_document.hpp"

namespace httplib {
class Server;
}

namespace tutorweb {

struct RosterEntry {
  StudentId student;
  bool consent = true;
};

// roster.json: {"admin_key": "...", "students": [{"student", "token", "consent"}]}
struct Roster {
  std::map<std::string, RosterEntry> by_token;
  std::string admin_key;

  static Roster load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct ServiceConfig {
  std::filesystem::path data_dir;
  AllocationPolicy policy;
  std::uint64_t seed = 0;
  bool sync = true;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Quiz endpoints over one data directory holding content.json, roster.json and
// answers.log. Startup replays the log; every allocation and answer is logged
// before the engine applies it. All calls are serialized.
class QuizService {
 public:
  explicit QuizService(ServiceConfig config);

  ApiResponse next_question(const std::string& token, const NodeId& lecture);
  ApiResponse submit_answer(const std::string& token, const NodeId& lecture, const nlohmann::json& body);
  ApiResponse grade(const std::string& token, const NodeId& lecture) const;
  ApiResponse content_tree() const;
  ApiResponse import_content(const std::string& admin_key, const nlohmann::json& document);

  EngineState engine_state() const;
  std::vector<LogEntry> log_entries() const;

  static std::filesystem::path content_path(const std::filesystem::path& dir) { return dir / "content.json"; }
  static std::filesystem::path roster_path(const std::filesystem::path& dir) { return dir / "roster.json"; }
  static std::filesystem::path log_path(const std::filesystem::path& dir) { return dir / "answers.log"; }

 private:
  std::optional<ApiResponse> authenticate(const std::string& token, StudentId* student) const;
  std::uint64_t draw_seed(std::uint64_t seq) const;
  std::uint64_t presentation_seed(std::uint64_t allocation_seq) const;

  ServiceConfig config_;
  Roster roster_;
  std::unique_ptr<ContentDocument> content_;
  std::unique_ptr<AnswerLog> log_;
  std::unique_ptr<AllocationEngine> engine_;
  mutable std::mutex mutex_;
};

// Binds the HTTP routes of a QuizService onto a cpp-httplib server.
class HttpFrontend {
 public:
  explicit HttpFrontend(QuizService& service);
  ~HttpFrontend();

  int bind_any_port(const std::string& host);
  bool listen(const std::string& host, int port);
  bool listen_after_bind();
  void stop();

 private:
  QuizService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace tutorweb

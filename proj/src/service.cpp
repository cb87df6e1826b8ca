#include "tutorweb/service.hpp"

#include "httplib.h"
#include "tutorweb/error.hpp"
#include "tutorweb/seed.hpp"

namespace tutorweb {

namespace {

constexpr std::uint64_t kPresentationStream = 0x70726573656e74ULL;

ApiResponse error_response(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownQuestion:
    case ErrorCode::UnknownLecture:
    case ErrorCode::UnknownNode:
    case ErrorCode::QuestionNotInLecture:
      return 404;
    case ErrorCode::EmptyLecture:
    case ErrorCode::NoPriorAllocation:
    case ErrorCode::OrderingViolation:
    case ErrorCode::CorruptLog:
      return 409;
    case ErrorCode::AnswerIndexOutOfRange:
      return 422;
    case ErrorCode::StorageFailure:
      return 500;
    default:
      return 422;
  }
}

}  // namespace

Roster Roster::load(const std::filesystem::path& path) {
  Roster roster;
  if (!std::filesystem::exists(path)) return roster;
  try {
    const auto doc = nlohmann::json::parse(read_file(path));
    roster.admin_key = doc.value("admin_key", "");
    for (const auto& s : doc.value("students", nlohmann::json::array())) {
      roster.by_token[s.at("token").get<std::string>()] = {s.at("student").get<std::string>(),
                                                           s.value("consent", true)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return roster;
}

nlohmann::json Roster::to_json() const {
  auto students = nlohmann::json::array();
  for (const auto& [token, entry] : by_token) {
    students.push_back({{"student", entry.student}, {"token", token}, {"consent", entry.consent}});
  }
  return {{"admin_key", admin_key}, {"students", students}};
}

QuizService::QuizService(ServiceConfig config) : config_(std::move(config)) {
  const auto& dir = config_.data_dir;
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::StorageFailure, "data directory " + dir.string() + " does not exist");
  }
  roster_ = Roster::load(roster_path(dir));
  content_ = std::make_unique<ContentDocument>(std::filesystem::exists(content_path(dir))
                                                   ? ContentDocument::load(content_path(dir))
                                                   : ContentDocument{});
  log_ = std::make_unique<AnswerLog>(log_path(dir), config_.sync);
  engine_ = std::make_unique<AllocationEngine>(content_->items, config_.policy);
  engine_->restore(replay_log(log_->entries(), content_->items, config_.policy));
}

std::optional<ApiResponse> QuizService::authenticate(const std::string& token, StudentId* student) const {
  auto it = roster_.by_token.find(token);
  if (token.empty() || it == roster_.by_token.end()) return error_response(401, "missing or unknown student token");
  if (!it->second.consent) return error_response(403, "student has not consented to grade recording");
  *student = it->second.student;
  return std::nullopt;
}

std::uint64_t QuizService::draw_seed(std::uint64_t seq) const { return mix_seed(config_.seed, seq); }

std::uint64_t QuizService::presentation_seed(std::uint64_t allocation_seq) const {
  return mix_seed(config_.seed ^ kPresentationStream, allocation_seq);
}

ApiResponse QuizService::next_question(const std::string& token, const NodeId& lecture) {
  std::lock_guard lock(mutex_);
  StudentId student;
  if (auto denied = authenticate(token, &student)) return *denied;
  if (!content_->tree.is_lecture(lecture)) return error_response(404, "unknown lecture " + lecture);
  try {
    const std::uint64_t seq = log_->next_seq();
    const auto allocation = engine_->choose_question(student, lecture, draw_seed(seq));
    LogEntry entry;
    entry.student = student;
    entry.lecture = lecture;
    entry.question = allocation.question_id;
    entry.event = LogEvent::Allocated;
    log_->append(std::move(entry));
    engine_->apply_allocation(student, lecture, allocation.question_id);

    const auto question = content_->items.render(allocation.question_id, presentation_seed(seq));
    const auto order = presented_order(question, mix_seed(presentation_seed(seq), 1));
    auto answers = nlohmann::json::array();
    for (auto canonical : order) answers.push_back(question.answers[canonical].text);
    return {200,
            {{"question", question.id},
             {"lecture", lecture},
             {"stem", question.stem},
             {"format", question.format},
             {"answers", answers},
             {"m", allocation.item_count}}};
  } catch (const Error& e) {
    return error_response(status_for(e.code()), e.what());
  }
}

ApiResponse QuizService::submit_answer(const std::string& token, const NodeId& lecture,
                                       const nlohmann::json& body) {
  std::lock_guard lock(mutex_);
  StudentId student;
  if (auto denied = authenticate(token, &student)) return *denied;
  if (!content_->tree.is_lecture(lecture)) return error_response(404, "unknown lecture " + lecture);
  if (!body.is_object() || !body.contains("question") || !body["question"].is_string() ||
      !body.contains("answer_index") || !body["answer_index"].is_number_integer()) {
    return error_response(400, "body must be {question: string, answer_index: integer}");
  }
  const QuestionId question_id = body["question"].get<std::string>();
  const auto index = body["answer_index"].get<std::int64_t>();
  const auto& items = content_->items;
  if (!items.contains(question_id)) return error_response(404, "unknown question " + question_id);
  if (items.lecture_of(question_id) != lecture) {
    return error_response(404, question_id + " does not belong to " + lecture);
  }
  const auto state = engine_->student_state(student, lecture);
  const auto allocation_seq = log_->sequencer().pending_seq({student, lecture});
  if (state.pending != question_id || !allocation_seq) {
    return error_response(409, question_id + " has not been allocated to this student");
  }
  try {
    const auto question = items.render(question_id, presentation_seed(*allocation_seq));
    const auto order = presented_order(question, mix_seed(presentation_seed(*allocation_seq), 1));
    if (index < 0 || static_cast<std::size_t>(index) >= order.size()) {
      return error_response(422, "answer_index out of range");
    }
    const bool correct = engine_->judge_answer(student, lecture, question_id, order[static_cast<std::size_t>(index)]);

    auto history = state.history;
    history.push_back({question_id, correct, points_for(correct), 0});
    LogEntry entry;
    entry.student = student;
    entry.lecture = lecture;
    entry.question = question_id;
    entry.event = LogEvent::Answered;
    entry.correct = correct;
    entry.points = points_for(correct);
    entry.grade_after = tutorweb::grade(std::span<const AnswerRecord>(history));
    log_->append(std::move(entry));

    const auto outcome = engine_->apply_answer(student, lecture, question_id, correct);
    return {200,
            {{"correct", outcome.correct},
             {"points", outcome.points},
             {"grade", outcome.grade},
             {"bucket", outcome.bucket}}};
  } catch (const Error& e) {
    return error_response(status_for(e.code()), e.what());
  }
}

ApiResponse QuizService::grade(const std::string& token, const NodeId& lecture) const {
  std::lock_guard lock(mutex_);
  StudentId student;
  if (auto denied = authenticate(token, &student)) return *denied;
  if (!content_->tree.is_lecture(lecture)) return error_response(404, "unknown lecture " + lecture);
  const auto state = engine_->student_state(student, lecture);
  return {200,
          {{"grade", tutorweb::grade(state)},
           {"bucket", grade_bucket(state)},
           {"n_answered", state.history.size()}}};
}

ApiResponse QuizService::content_tree() const {
  std::lock_guard lock(mutex_);
  auto tree = content_->tree.tree_view_json();
  // Annotate lectures with their item counts for navigation.
  std::function<void(nlohmann::json&)> annotate = [&](nlohmann::json& node) {
    if (node["kind"] == "lecture") {
      node["n_questions"] = content_->items.items_in_lecture(node["id"].get<std::string>()).size();
    }
    for (auto& child : node["children"]) annotate(child);
  };
  for (auto& root : tree) annotate(root);
  return {200, {{"tree", tree}}};
}

ApiResponse QuizService::import_content(const std::string& admin_key, const nlohmann::json& document) {
  std::lock_guard lock(mutex_);
  if (roster_.admin_key.empty() || admin_key != roster_.admin_key) {
    return error_response(401, "missing or wrong admin key");
  }
  try {
    auto next = std::make_unique<ContentDocument>(ContentDocument::from_json(document));
    if (const auto violations = next->tree.validate(); !violations.empty()) {
      return error_response(422, "invalid tree: " + violations.front());
    }
    // The answer log must stay replayable against the new item bank.
    auto state = replay_log(log_->entries(), next->items, config_.policy);
    next->save(content_path(config_.data_dir));
    auto engine = std::make_unique<AllocationEngine>(next->items, config_.policy);
    engine->restore(std::move(state));
    content_ = std::move(next);
    engine_ = std::move(engine);
    return {200, {{"nodes", content_->tree.size()}, {"items", content_->items.size()}}};
  } catch (const Error& e) {
    return error_response(e.code() == ErrorCode::CorruptLog ? 409 : status_for(e.code()), e.what());
  }
}

EngineState QuizService::engine_state() const {
  std::lock_guard lock(mutex_);
  return engine_->state();
}

std::vector<LogEntry> QuizService::log_entries() const {
  std::lock_guard lock(mutex_);
  return log_->entries();
}

HttpFrontend::HttpFrontend(QuizService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto reply = [](httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req, nlohmann::json* out) {
    try {
      *out = nlohmann::json::parse(req.body);
      return true;
    } catch (const nlohmann::json::parse_error&) {
      return false;
    }
  };

  server_->Get(R"(/api/lecture/([^/]+)/question)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_.next_question(req.get_header_value("X-Student-Token"), req.matches[1]));
  });
  server_->Post(R"(/api/lecture/([^/]+)/answer)",
                [this, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
                  nlohmann::json body;
                  if (!parse_body(req, &body)) {
                    reply(res, error_response(400, "malformed JSON body"));
                    return;
                  }
                  reply(res, service_.submit_answer(req.get_header_value("X-Student-Token"), req.matches[1], body));
                });
  server_->Get(R"(/api/lecture/([^/]+)/grade)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_.grade(req.get_header_value("X-Student-Token"), req.matches[1]));
  });
  server_->Get("/api/content/tree", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service_.content_tree());
  });
  server_->Post("/api/content/import", [this, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    if (!parse_body(req, &body)) {
      reply(res, error_response(400, "malformed JSON body"));
      return;
    }
    reply(res, service_.import_content(req.get_header_value("X-Admin-Key"), body));
  });
}

HttpFrontend::~HttpFrontend() = default;

int HttpFrontend::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpFrontend::listen(const std::string& host, int port) { return server_->listen(host, port); }

bool HttpFrontend::listen_after_bind() { return server_->listen_after_bind(); }

void HttpFrontend::stop() { server_->stop(); }

}  // namespace tutorweb

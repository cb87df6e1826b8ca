#include "tutorweb/answer_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>

#include "tutorweb/content_document.hpp"

namespace tutorweb {

namespace {

std::string seq_label(const LogEntry& entry) { return "seq " + std::to_string(entry.seq); }

}  // namespace

nlohmann::json to_json(const LogEntry& entry) {
  nlohmann::json j = {{"seq", entry.seq},
                      {"time", entry.time},
                      {"student", entry.student},
                      {"lecture", entry.lecture},
                      {"question", entry.question},
                      {"event", entry.event == LogEvent::Allocated ? "allocated" : "answered"}};
  if (entry.correct) j["correct"] = *entry.correct;
  if (entry.points) j["points"] = *entry.points;
  if (entry.grade_after) j["grade_after"] = *entry.grade_after;
  return j;
}

LogEntry log_entry_from_json(const nlohmann::json& j) {
  LogEntry e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.time = j.value("time", "");
  e.student = j.at("student").get<std::string>();
  e.lecture = j.at("lecture").get<std::string>();
  e.question = j.at("question").get<std::string>();
  const auto event = j.at("event").get<std::string>();
  if (event == "allocated") {
    e.event = LogEvent::Allocated;
  } else if (event == "answered") {
    e.event = LogEvent::Answered;
  } else {
    throw Error(ErrorCode::CorruptLog, "unknown event '" + event + "'");
  }
  if (j.contains("correct")) e.correct = j.at("correct").get<bool>();
  if (j.contains("points")) e.points = j.at("points").get<double>();
  if (j.contains("grade_after")) e.grade_after = j.at("grade_after").get<double>();
  return e;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

void LogSequencer::check(const LogEntry& entry, ErrorCode code) const {
  if (entry.seq <= last_seq_) {
    throw Error(code, seq_label(entry) + " does not increase past " + std::to_string(last_seq_));
  }
  if (entry.event == LogEvent::Allocated) {
    if (entry.correct || entry.points || entry.grade_after) {
      throw Error(code, seq_label(entry) + ": allocated entry carries answer fields");
    }
    return;
  }
  if (!entry.correct || !entry.points) throw Error(code, seq_label(entry) + ": answered entry lacks correct/points");
  if (*entry.points != points_for(*entry.correct)) {
    throw Error(code, seq_label(entry) + ": points do not match correctness");
  }
  auto it = pending_.find({entry.student, entry.lecture});
  if (it == pending_.end() || it->second.first != entry.question) {
    throw Error(code, seq_label(entry) + ": answer without a prior allocation of " + entry.question);
  }
}

void LogSequencer::advance(const LogEntry& entry) {
  last_seq_ = entry.seq;
  const StateKey key{entry.student, entry.lecture};
  if (entry.event == LogEvent::Allocated) {
    pending_[key] = {entry.question, entry.seq};
  } else {
    pending_.erase(key);
  }
}

std::optional<std::uint64_t> LogSequencer::pending_seq(const StateKey& key) const {
  auto it = pending_.find(key);
  if (it == pending_.end()) return std::nullopt;
  return it->second.second;
}

std::vector<LogEntry> parse_log(std::string_view text, std::size_t* valid_bytes) {
  std::vector<LogEntry> entries;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    // A final line without its newline is a torn append, even if it parses.
    if (nl == std::string_view::npos) break;
    const auto line = text.substr(pos, nl - pos);
    ++line_no;
    try {
      if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
        entries.push_back(log_entry_from_json(nlohmann::json::parse(line)));
      }
    } catch (const std::exception& e) {
      const std::string after = entries.empty() ? "start of log" : seq_label(entries.back());
      throw Error(ErrorCode::CorruptLog, "line " + std::to_string(line_no) + " (after " + after + "): " + e.what());
    }
    pos = nl + 1;
  }
  if (valid_bytes != nullptr) *valid_bytes = pos;
  return entries;
}

std::string serialize_log(const std::vector<LogEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

EngineState replay_log(const std::vector<LogEntry>& entries, const ItemBank& bank,
                       const AllocationPolicy& policy) {
  AllocationEngine engine(bank, policy);
  LogSequencer sequencer;
  for (const auto& entry : entries) {
    sequencer.check(entry, ErrorCode::CorruptLog);
    try {
      if (entry.event == LogEvent::Allocated) {
        engine.apply_allocation(entry.student, entry.lecture, entry.question);
      } else {
        engine.apply_answer(entry.student, entry.lecture, entry.question, *entry.correct);
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::CorruptLog, seq_label(entry) + ": " + e.what());
    }
    sequencer.advance(entry);
  }
  return engine.state();
}

AnswerLog::AnswerLog(std::filesystem::path path, bool sync) : path_(std::move(path)), sync_(sync) {
  if (std::filesystem::exists(path_)) {
    const std::string text = read_file(path_);
    std::size_t valid = 0;
    entries_ = parse_log(text, &valid);
    for (const auto& e : entries_) {
      sequencer_.check(e, ErrorCode::CorruptLog);
      sequencer_.advance(e);
    }
    if (valid < text.size()) std::filesystem::resize_file(path_, valid);
  }
  fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::StorageFailure, path_.string() + ": " + std::strerror(errno));
}

AnswerLog::~AnswerLog() {
  if (fd_ >= 0) ::close(fd_);
}

std::uint64_t AnswerLog::append(LogEntry entry) {
  entry.seq = next_seq();
  if (entry.time.empty()) entry.time = utc_timestamp();
  sequencer_.check(entry, ErrorCode::OrderingViolation);
  const std::string line = to_json(entry).dump() + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::StorageFailure, path_.string() + ": " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (sync_ && ::fdatasync(fd_) != 0) {
    throw Error(ErrorCode::StorageFailure, path_.string() + ": " + std::strerror(errno));
  }
  sequencer_.advance(entry);
  entries_.push_back(std::move(entry));
  return entries_.back().seq;
}

}  // namespace tutorweb

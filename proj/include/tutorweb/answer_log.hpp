#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tutorweb/allocation.hpp"
#include "tutorweb/error.hpp"

namespace tutorweb {

enum class LogEvent { Allocated, Answered };

// One line of the answer log. correct/points/grade_after are present on
// answered entries only.
struct LogEntry {
  std::uint64_t seq = 0;
  std::string time;
  StudentId student;
  NodeId lecture;
  QuestionId question;
  LogEvent event = LogEvent::Allocated;
  std::optional<bool> correct;
  std::optional<double> points;
  std::optional<double> grade_after;

  bool operator==(const LogEntry&) const = default;
};

nlohmann::json to_json(const LogEntry& entry);
LogEntry log_entry_from_json(const nlohmann::json& j);
std::string utc_timestamp();

// Tracks the ordering rules an entry must satisfy against the log so far.
class LogSequencer {
 public:
  // Throws `code` (OrderingViolation on append, CorruptLog on replay) if `entry` may not follow.
  void check(const LogEntry& entry, ErrorCode code) const;
  void advance(const LogEntry& entry);

  std::uint64_t last_seq() const { return last_seq_; }
  // Seq of the open allocation for (student, lecture), if any.
  std::optional<std::uint64_t> pending_seq(const StateKey& key) const;

 private:
  std::uint64_t last_seq_ = 0;
  std::map<StateKey, std::pair<QuestionId, std::uint64_t>> pending_;
};

// Parses newline-delimited entries. A final line lacking its newline is a torn
// append and is dropped; any other malformed line raises CorruptLog.
// `valid_bytes` receives the length of the accepted prefix.
std::vector<LogEntry> parse_log(std::string_view text, std::size_t* valid_bytes = nullptr);
std::string serialize_log(const std::vector<LogEntry>& entries);

// Rebuilds stats and student windows by applying each entry in order.
// Raises CorruptLog naming the first offending seq.
EngineState replay_log(const std::vector<LogEntry>& entries, const ItemBank& bank,
                       const AllocationPolicy& policy = {});

// Append-only file log. Each append is written and synced before it returns.
class AnswerLog {
 public:
  explicit AnswerLog(std::filesystem::path path, bool sync = true);
  ~AnswerLog();
  AnswerLog(const AnswerLog&) = delete;
  AnswerLog& operator=(const AnswerLog&) = delete;

  // Assigns the next seq (and time, if empty) and persists the entry.
  std::uint64_t append(LogEntry entry);

  const std::vector<LogEntry>& entries() const { return entries_; }
  std::uint64_t next_seq() const { return sequencer_.last_seq() + 1; }
  const LogSequencer& sequencer() const { return sequencer_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool sync_;
  int fd_ = -1;
  std::vector<LogEntry> entries_;
  LogSequencer sequencer_;
};

}  // namespace tutorweb

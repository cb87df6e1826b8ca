#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tutorweb {

using NodeId = std::string;

// Kind chain: department -> course -> tutorial -> lecture -> slide.
enum class NodeKind { Department, Course, Tutorial, Lecture, Slide };

std::string_view to_string(NodeKind kind);
NodeKind parse_node_kind(std::string_view text);

// The kind a node of `kind` must hang under; nullopt for departments.
std::optional<NodeKind> parent_kind(NodeKind kind);

enum class AttachmentKind { Example, Detail, Reference, Figure };

std::string_view to_string(AttachmentKind kind);
AttachmentKind parse_attachment_kind(std::string_view text);

struct Attachment {
  AttachmentKind kind = AttachmentKind::Example;
  std::string body;

  bool operator==(const Attachment&) const = default;
};

struct ContentNode {
  NodeId id;
  NodeKind kind = NodeKind::Department;
  std::string title;
  std::string body;
  // Declared markup of `body` (plain, latex, stx, html). Stored, never interpreted.
  std::string format = "plain";
  std::vector<Attachment> attachments;
  std::int64_t order_index = 0;
  std::optional<NodeId> parent;
  // Contained children in order_index order. For courses this holds the
  // tutorials created under the course; linked tutorials live in `course_tutorials`.
  std::vector<NodeId> children;
};

struct ExportedSlide {
  NodeId id;
  std::string title;
  std::string body;
  std::string format;
  std::vector<Attachment> attachments;  // always empty in a lecture export
};

struct LectureDocument {
  NodeId id;
  std::string title;
  std::vector<ExportedSlide> slides;

  std::string render() const;
};

struct HandoutLecture {
  NodeId id;
  std::string title;
  std::vector<ExportedSlide> slides;
};

struct TutorialHandout {
  NodeId id;
  std::string title;
  std::vector<HandoutLecture> lectures;

  std::size_t slide_count() const;
  std::string render() const;
};

// The teaching-material tree. Lectures and slides are single-parent; a
// tutorial is created under one course and may be linked to more.
class ContentTree {
 public:
  NodeId add_node(const std::optional<NodeId>& parent, NodeKind kind, std::string title,
                  std::string body, std::string format = "plain",
                  std::optional<NodeId> id = std::nullopt);

  // Returns the tutorial's full course link set, in link order. Idempotent.
  std::vector<NodeId> link_tutorial(const NodeId& tutorial_id, const NodeId& course_id);

  void add_attachment(const NodeId& slide_id, Attachment attachment);

  bool contains(const NodeId& id) const { return nodes_.count(id) != 0; }
  const ContentNode& node(const NodeId& id) const;
  std::optional<NodeKind> kind_of(const NodeId& id) const;
  bool is_lecture(const NodeId& id) const;

  std::vector<NodeId> roots() const;
  // Tutorials reachable from a course (created or linked), in link order.
  const std::vector<NodeId>& course_tutorials(const NodeId& course_id) const;
  const std::vector<NodeId>& tutorial_courses(const NodeId& tutorial_id) const;
  std::size_t size() const { return nodes_.size(); }

  LectureDocument export_lecture(const NodeId& lecture_id) const;
  TutorialHandout export_tutorial(const NodeId& tutorial_id) const;

  // Depth-first walk; a tutorial linked to n courses is visited n times.
  // `path` lists ancestor ids from the root, the visited node last.
  void traverse(const std::function<void(const ContentNode&, const std::vector<NodeId>& path)>&
                    visit) const;

  // Full structural check. Empty on any tree built through add_node/link_tutorial.
  std::vector<std::string> validate() const;

  // Nested record form {id, kind, title, body, format, attachments, children, course_links}.
  // Tutorials nest under their creating course only.
  nlohmann::json to_json() const;
  static ContentTree from_json(const nlohmann::json& roots);

  // Navigation view: tutorials appear under every linked course.
  nlohmann::json tree_view_json() const;

 private:
  ContentNode& mutable_node(const NodeId& id);
  NodeId fresh_id(NodeKind kind);

  std::map<NodeId, ContentNode> nodes_;
  std::vector<NodeId> root_order_;
  std::map<NodeId, std::vector<NodeId>> course_tutorials_;
  std::map<NodeId, std::vector<NodeId>> tutorial_courses_;
  std::uint64_t next_id_ = 1;
};

}  // namespace tutorweb

#include "tutorweb/content.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "tutorweb/error.hpp"

namespace tutorweb {

namespace {

const std::vector<NodeId> kNoIds;

void render_attachment(std::ostringstream& out, const Attachment& attachment) {
  out << "#### " << to_string(attachment.kind) << "\n\n" << attachment.body << "\n\n";
}

nlohmann::json attachments_json(const std::vector<Attachment>& attachments) {
  auto list = nlohmann::json::array();
  for (const auto& a : attachments) {
    list.push_back({{"kind", std::string(to_string(a.kind))}, {"body", a.body}});
  }
  return list;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Department: return "department";
    case NodeKind::Course: return "course";
    case NodeKind::Tutorial: return "tutorial";
    case NodeKind::Lecture: return "lecture";
    case NodeKind::Slide: return "slide";
  }
  return "department";
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "department") return NodeKind::Department;
  if (text == "course") return NodeKind::Course;
  if (text == "tutorial") return NodeKind::Tutorial;
  if (text == "lecture") return NodeKind::Lecture;
  if (text == "slide") return NodeKind::Slide;
  throw Error(ErrorCode::ParseError, "unknown node kind '" + std::string(text) + "'");
}

std::optional<NodeKind> parent_kind(NodeKind kind) {
  switch (kind) {
    case NodeKind::Department: return std::nullopt;
    case NodeKind::Course: return NodeKind::Department;
    case NodeKind::Tutorial: return NodeKind::Course;
    case NodeKind::Lecture: return NodeKind::Tutorial;
    case NodeKind::Slide: return NodeKind::Lecture;
  }
  return std::nullopt;
}

std::string_view to_string(AttachmentKind kind) {
  switch (kind) {
    case AttachmentKind::Example: return "example";
    case AttachmentKind::Detail: return "detail";
    case AttachmentKind::Reference: return "reference";
    case AttachmentKind::Figure: return "figure";
  }
  return "example";
}

AttachmentKind parse_attachment_kind(std::string_view text) {
  if (text == "example") return AttachmentKind::Example;
  if (text == "detail") return AttachmentKind::Detail;
  if (text == "reference") return AttachmentKind::Reference;
  if (text == "figure") return AttachmentKind::Figure;
  throw Error(ErrorCode::ParseError, "unknown attachment kind '" + std::string(text) + "'");
}

std::string LectureDocument::render() const {
  std::ostringstream out;
  out << "# " << title << "\n\n";
  for (const auto& slide : slides) {
    out << "## " << slide.title << "\n\n" << slide.body << "\n\n";
  }
  return out.str();
}

std::size_t TutorialHandout::slide_count() const {
  std::size_t n = 0;
  for (const auto& lecture : lectures) n += lecture.slides.size();
  return n;
}

std::string TutorialHandout::render() const {
  std::ostringstream out;
  out << "# " << title << "\n\n";
  for (const auto& lecture : lectures) {
    out << "## " << lecture.title << "\n\n";
    for (const auto& slide : lecture.slides) {
      out << "### " << slide.title << "\n\n" << slide.body << "\n\n";
      for (const auto& attachment : slide.attachments) render_attachment(out, attachment);
    }
  }
  return out.str();
}

NodeId ContentTree::fresh_id(NodeKind kind) {
  for (;;) {
    NodeId id = std::string(to_string(kind)) + "-" + std::to_string(next_id_++);
    if (!contains(id)) return id;
  }
}

const ContentNode& ContentTree::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::UnknownNode, id);
  return it->second;
}

ContentNode& ContentTree::mutable_node(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::UnknownNode, id);
  return it->second;
}

std::optional<NodeKind> ContentTree::kind_of(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return std::nullopt;
  return it->second.kind;
}

bool ContentTree::is_lecture(const NodeId& id) const {
  return kind_of(id) == NodeKind::Lecture;
}

NodeId ContentTree::add_node(const std::optional<NodeId>& parent, NodeKind kind, std::string title,
                             std::string body, std::string format, std::optional<NodeId> id) {
  const auto expected_parent = parent_kind(kind);
  if (parent) {
    auto it = nodes_.find(*parent);
    if (it == nodes_.end()) throw Error(ErrorCode::UnknownParent, *parent);
    if (!expected_parent || it->second.kind != *expected_parent) {
      throw Error(ErrorCode::InvalidKindPairing, std::string(to_string(kind)) + " under " +
                                                     std::string(to_string(it->second.kind)));
    }
  } else if (expected_parent) {
    throw Error(ErrorCode::InvalidKindPairing,
                std::string(to_string(kind)) + " requires a " +
                    std::string(to_string(*expected_parent)) + " parent");
  }
  if (id && id->empty()) throw Error(ErrorCode::ParseError, "empty node id");
  if (id && contains(*id)) throw Error(ErrorCode::DuplicateId, *id);

  ContentNode node;
  node.id = id ? *id : fresh_id(kind);
  node.kind = kind;
  node.title = std::move(title);
  node.body = std::move(body);
  node.format = std::move(format);
  node.parent = parent;

  const std::vector<NodeId>& siblings = parent ? nodes_.at(*parent).children : root_order_;
  std::int64_t max_index = -1;
  for (const auto& sibling : siblings) max_index = std::max(max_index, nodes_.at(sibling).order_index);
  node.order_index = max_index + 1;

  const NodeId new_id = node.id;
  nodes_.emplace(new_id, std::move(node));
  if (parent) {
    nodes_.at(*parent).children.push_back(new_id);
  } else {
    root_order_.push_back(new_id);
  }
  if (kind == NodeKind::Tutorial) link_tutorial(new_id, *parent);
  return new_id;
}

std::vector<NodeId> ContentTree::link_tutorial(const NodeId& tutorial_id, const NodeId& course_id) {
  const auto& tutorial = node(tutorial_id);
  const auto& course = node(course_id);
  if (tutorial.kind != NodeKind::Tutorial) {
    throw Error(ErrorCode::KindMismatch, tutorial_id + " is a " + std::string(to_string(tutorial.kind)));
  }
  if (course.kind != NodeKind::Course) {
    throw Error(ErrorCode::KindMismatch, course_id + " is a " + std::string(to_string(course.kind)));
  }
  auto& links = tutorial_courses_[tutorial_id];
  if (std::find(links.begin(), links.end(), course_id) == links.end()) {
    links.push_back(course_id);
    course_tutorials_[course_id].push_back(tutorial_id);
  }
  return links;
}

void ContentTree::add_attachment(const NodeId& slide_id, Attachment attachment) {
  auto& slide = mutable_node(slide_id);
  if (slide.kind != NodeKind::Slide) throw Error(ErrorCode::AttachmentNotOnSlide, slide_id);
  slide.attachments.push_back(std::move(attachment));
}

std::vector<NodeId> ContentTree::roots() const { return root_order_; }

const std::vector<NodeId>& ContentTree::course_tutorials(const NodeId& course_id) const {
  auto it = course_tutorials_.find(course_id);
  return it == course_tutorials_.end() ? kNoIds : it->second;
}

const std::vector<NodeId>& ContentTree::tutorial_courses(const NodeId& tutorial_id) const {
  auto it = tutorial_courses_.find(tutorial_id);
  return it == tutorial_courses_.end() ? kNoIds : it->second;
}

LectureDocument ContentTree::export_lecture(const NodeId& lecture_id) const {
  const auto& lecture = node(lecture_id);
  if (lecture.kind != NodeKind::Lecture) throw Error(ErrorCode::KindMismatch, lecture_id);
  LectureDocument doc{lecture.id, lecture.title, {}};
  for (const auto& slide_id : lecture.children) {
    const auto& slide = node(slide_id);
    doc.slides.push_back({slide.id, slide.title, slide.body, slide.format, {}});
  }
  return doc;
}

TutorialHandout ContentTree::export_tutorial(const NodeId& tutorial_id) const {
  const auto& tutorial = node(tutorial_id);
  if (tutorial.kind != NodeKind::Tutorial) throw Error(ErrorCode::KindMismatch, tutorial_id);
  TutorialHandout handout{tutorial.id, tutorial.title, {}};
  for (const auto& lecture_id : tutorial.children) {
    const auto& lecture = node(lecture_id);
    HandoutLecture section{lecture.id, lecture.title, {}};
    for (const auto& slide_id : lecture.children) {
      const auto& slide = node(slide_id);
      section.slides.push_back({slide.id, slide.title, slide.body, slide.format, slide.attachments});
    }
    handout.lectures.push_back(std::move(section));
  }
  return handout;
}

void ContentTree::traverse(
    const std::function<void(const ContentNode&, const std::vector<NodeId>&)>& visit) const {
  std::vector<NodeId> path;
  std::function<void(const NodeId&)> walk = [&](const NodeId& id) {
    const auto& n = nodes_.at(id);
    path.push_back(id);
    visit(n, path);
    const auto& next = n.kind == NodeKind::Course ? course_tutorials(id) : n.children;
    for (const auto& child : next) walk(child);
    path.pop_back();
  };
  for (const auto& root : root_order_) walk(root);
}

std::vector<std::string> ContentTree::validate() const {
  std::vector<std::string> violations;
  for (const auto& [id, n] : nodes_) {
    const auto expected = parent_kind(n.kind);
    if (!expected) {
      if (n.parent) violations.push_back(id + ": department with a parent");
    } else if (!n.parent) {
      violations.push_back(id + ": missing parent");
    } else {
      auto it = nodes_.find(*n.parent);
      if (it == nodes_.end()) {
        violations.push_back(id + ": dangling parent " + *n.parent);
      } else {
        if (it->second.kind != *expected) violations.push_back(id + ": invalid parent kind");
        const auto& siblings = it->second.children;
        if (std::count(siblings.begin(), siblings.end(), id) != 1) {
          violations.push_back(id + ": not listed exactly once under its parent");
        }
      }
    }
    if (!n.attachments.empty() && n.kind != NodeKind::Slide) {
      violations.push_back(id + ": attachments on a non-slide");
    }
    std::set<std::int64_t> seen;
    for (const auto& child : n.children) {
      auto it = nodes_.find(child);
      if (it == nodes_.end()) {
        violations.push_back(id + ": dangling child " + child);
        continue;
      }
      if (it->second.order_index < 0 || !seen.insert(it->second.order_index).second) {
        violations.push_back(id + ": duplicate or negative order_index among children");
      }
    }
    if (n.kind == NodeKind::Tutorial) {
      const auto& links = tutorial_courses(id);
      if (n.parent && std::find(links.begin(), links.end(), *n.parent) == links.end()) {
        violations.push_back(id + ": creating course missing from link set");
      }
      for (const auto& course : links) {
        if (kind_of(course) != NodeKind::Course) violations.push_back(id + ": linked to non-course");
      }
    }
  }
  for (const auto& [course, tutorials] : course_tutorials_) {
    for (const auto& t : tutorials) {
      const auto& back = tutorial_courses(t);
      if (std::find(back.begin(), back.end(), course) == back.end()) {
        violations.push_back(course + ": asymmetric link to " + t);
      }
    }
  }
  return violations;
}

nlohmann::json ContentTree::to_json() const {
  std::function<nlohmann::json(const NodeId&)> emit = [&](const NodeId& id) {
    const auto& n = nodes_.at(id);
    nlohmann::json record = {{"id", n.id},
                             {"kind", std::string(to_string(n.kind))},
                             {"title", n.title},
                             {"body", n.body},
                             {"format", n.format},
                             {"attachments", attachments_json(n.attachments)},
                             {"children", nlohmann::json::array()},
                             {"course_links", tutorial_courses(id)}};
    for (const auto& child : n.children) record["children"].push_back(emit(child));
    return record;
  };
  auto roots = nlohmann::json::array();
  for (const auto& root : root_order_) roots.push_back(emit(root));
  return roots;
}

ContentTree ContentTree::from_json(const nlohmann::json& roots) {
  if (!roots.is_array()) throw Error(ErrorCode::ParseError, "content tree must be a list of nodes");
  ContentTree tree;
  std::vector<std::pair<NodeId, std::vector<NodeId>>> pending_links;
  std::function<void(const nlohmann::json&, const std::optional<NodeId>&)> load =
      [&](const nlohmann::json& record, const std::optional<NodeId>& parent) {
        try {
          const auto kind = parse_node_kind(record.at("kind").get<std::string>());
          const NodeId id = tree.add_node(parent, kind, record.value("title", ""),
                                          record.value("body", ""), record.value("format", "plain"),
                                          record.at("id").get<std::string>());
          for (const auto& a : record.value("attachments", nlohmann::json::array())) {
            tree.add_attachment(id, {parse_attachment_kind(a.at("kind").get<std::string>()),
                                     a.value("body", "")});
          }
          if (record.contains("course_links")) {
            pending_links.emplace_back(id, record.at("course_links").get<std::vector<NodeId>>());
          }
          for (const auto& child : record.value("children", nlohmann::json::array())) {
            load(child, id);
          }
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorCode::ParseError, std::string("content record: ") + e.what());
        }
      };
  for (const auto& root : roots) load(root, std::nullopt);
  for (const auto& [tutorial, courses] : pending_links) {
    for (const auto& course : courses) tree.link_tutorial(tutorial, course);
  }
  return tree;
}

nlohmann::json ContentTree::tree_view_json() const {
  std::function<nlohmann::json(const NodeId&)> emit = [&](const NodeId& id) {
    const auto& n = nodes_.at(id);
    nlohmann::json record = {{"id", n.id},
                             {"kind", std::string(to_string(n.kind))},
                             {"title", n.title},
                             {"order_index", n.order_index},
                             {"children", nlohmann::json::array()}};
    if (n.kind == NodeKind::Slide) {
      record["body"] = n.body;
      record["format"] = n.format;
      record["attachments"] = attachments_json(n.attachments);
    }
    if (n.kind == NodeKind::Tutorial) record["course_links"] = tutorial_courses(id);
    const auto& next = n.kind == NodeKind::Course ? course_tutorials(id) : n.children;
    for (const auto& child : next) record["children"].push_back(emit(child));
    return record;
  };
  auto roots = nlohmann::json::array();
  for (const auto& root : root_order_) roots.push_back(emit(root));
  return roots;
}

}  // namespace tutorweb

#include <algorithm>
#include <random>

#include "doctest.h"
#include "tutorweb/content.hpp"
#include "tutorweb/error.hpp"

using namespace tutorweb;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ParseError;
}

struct Sample {
  ContentTree tree;
  NodeId dept, c1, c2, tut, lec1, lec2;
  std::vector<NodeId> slides;
};

Sample sample() {
  Sample s;
  s.dept = s.tree.add_node(std::nullopt, NodeKind::Department, "Math", "");
  s.c1 = s.tree.add_node(s.dept, NodeKind::Course, "Regression", "");
  s.c2 = s.tree.add_node(s.dept, NodeKind::Course, "Intro statistics", "");
  s.tut = s.tree.add_node(s.c1, NodeKind::Tutorial, "Simple regression", "");
  s.lec1 = s.tree.add_node(s.tut, NodeKind::Lecture, "Least squares", "");
  s.lec2 = s.tree.add_node(s.tut, NodeKind::Lecture, "Inference", "");
  for (const auto& lec : {s.lec1, s.lec2}) {
    for (int i = 1; i <= 3; ++i) {
      s.slides.push_back(s.tree.add_node(lec, NodeKind::Slide, lec + " slide " + std::to_string(i),
                                         "body " + std::to_string(i), "latex"));
    }
  }
  return s;
}

}  // namespace

TEST_CASE("add_node builds the kind chain") {
  ContentTree tree;
  const auto dept = tree.add_node(std::nullopt, NodeKind::Department, "Math", "");
  CHECK(tree.roots() == std::vector<NodeId>{dept});
  CHECK(tree.size() == 1);
  const auto course = tree.add_node(dept, NodeKind::Course, "Stats", "");
  const auto tut = tree.add_node(course, NodeKind::Tutorial, "Regression", "");
  CHECK(tree.node(tut).parent == course);
  CHECK(tree.node(course).children == std::vector<NodeId>{tut});
  CHECK(tree.tutorial_courses(tut) == std::vector<NodeId>{course});
  CHECK(tree.validate().empty());
}

TEST_CASE("add_node rejects invalid pairings and unknown parents") {
  ContentTree tree;
  const auto dept = tree.add_node(std::nullopt, NodeKind::Department, "Math", "");
  const auto course = tree.add_node(dept, NodeKind::Course, "Stats", "");
  CHECK(code_of([&] { tree.add_node(course, NodeKind::Slide, "s", ""); }) == ErrorCode::InvalidKindPairing);
  CHECK(code_of([&] { tree.add_node(std::nullopt, NodeKind::Course, "c", ""); }) == ErrorCode::InvalidKindPairing);
  CHECK(code_of([&] { tree.add_node(dept, NodeKind::Department, "d", ""); }) == ErrorCode::InvalidKindPairing);
  CHECK(code_of([&] { tree.add_node(NodeId("nope"), NodeKind::Course, "c", ""); }) == ErrorCode::UnknownParent);
  CHECK(code_of([&] { tree.add_node(dept, NodeKind::Course, "c", "", "plain", course); }) == ErrorCode::DuplicateId);
  CHECK(tree.size() == 2);
}

TEST_CASE("every parent/child kind pairing outside the chain is rejected") {
  const NodeKind kinds[] = {NodeKind::Department, NodeKind::Course, NodeKind::Tutorial, NodeKind::Lecture,
                            NodeKind::Slide};
  auto s = sample();
  const std::map<NodeKind, NodeId> of_kind = {{NodeKind::Department, s.dept}, {NodeKind::Course, s.c1},
                                              {NodeKind::Tutorial, s.tut},    {NodeKind::Lecture, s.lec1},
                                              {NodeKind::Slide, s.slides[0]}};
  for (auto parent : kinds) {
    for (auto child : kinds) {
      const bool valid = parent_kind(child) == parent;
      if (valid) {
        CHECK_NOTHROW(s.tree.add_node(of_kind.at(parent), child, "x", ""));
      } else {
        CHECK(code_of([&] { s.tree.add_node(of_kind.at(parent), child, "x", ""); }) ==
              ErrorCode::InvalidKindPairing);
      }
    }
  }
  CHECK(s.tree.validate().empty());
}

TEST_CASE("order_index is one past the largest sibling") {
  auto s = sample();
  const auto& lec = s.tree.node(s.lec1);
  std::vector<std::int64_t> indices;
  for (const auto& c : lec.children) indices.push_back(s.tree.node(c).order_index);
  CHECK(indices == std::vector<std::int64_t>{0, 1, 2});
  const auto extra = s.tree.add_node(s.lec1, NodeKind::Slide, "extra", "");
  CHECK(s.tree.node(extra).order_index == 3);
}

TEST_CASE("link_tutorial") {
  auto s = sample();
  SUBCASE("tutorial listed under both courses") {
    const auto links = s.tree.link_tutorial(s.tut, s.c2);
    CHECK(links == std::vector<NodeId>{s.c1, s.c2});
    CHECK(s.tree.course_tutorials(s.c1) == std::vector<NodeId>{s.tut});
    CHECK(s.tree.course_tutorials(s.c2) == std::vector<NodeId>{s.tut});
    CHECK(s.tree.validate().empty());
  }
  SUBCASE("linking twice leaves the set unchanged") {
    const auto once = s.tree.link_tutorial(s.tut, s.c2);
    const auto twice = s.tree.link_tutorial(s.tut, s.c2);
    CHECK(once == twice);
    CHECK(s.tree.course_tutorials(s.c2).size() == 1);
  }
  SUBCASE("kind mismatch") {
    CHECK(code_of([&] { s.tree.link_tutorial(s.lec1, s.c2); }) == ErrorCode::KindMismatch);
    CHECK(code_of([&] { s.tree.link_tutorial(s.tut, s.dept); }) == ErrorCode::KindMismatch);
    CHECK(code_of([&] { s.tree.link_tutorial("ghost", s.c2); }) == ErrorCode::UnknownNode);
  }
}

TEST_CASE("traverse visits a linked tutorial under every course") {
  auto s = sample();
  s.tree.link_tutorial(s.tut, s.c2);
  int tutorial_visits = 0;
  std::vector<std::vector<NodeId>> lecture_paths;
  s.tree.traverse([&](const ContentNode& n, const std::vector<NodeId>& path) {
    CHECK(path.back() == n.id);
    if (n.kind == NodeKind::Tutorial) ++tutorial_visits;
    if (n.id == s.lec1) lecture_paths.push_back(path);
  });
  CHECK(tutorial_visits == 2);
  REQUIRE(lecture_paths.size() == 2);
  CHECK(lecture_paths[0] == std::vector<NodeId>{s.dept, s.c1, s.tut, s.lec1});
  CHECK(lecture_paths[1] == std::vector<NodeId>{s.dept, s.c2, s.tut, s.lec1});
}

TEST_CASE("export_lecture lists slides in order without attachments") {
  auto s = sample();
  s.tree.add_attachment(s.slides[1], {AttachmentKind::Example, "worked example"});
  const auto doc = s.tree.export_lecture(s.lec1);
  CHECK(doc.title == "Least squares");
  REQUIRE(doc.slides.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(doc.slides[i].id == s.slides[i]);
    CHECK(doc.slides[i].attachments.empty());
  }
  CHECK(doc.slides[0].format == "latex");
  CHECK(doc.render().find("worked example") == std::string::npos);
  CHECK(doc.render().find("body 2") != std::string::npos);
}

TEST_CASE("export_lecture of an empty lecture has a title and no slides") {
  auto s = sample();
  const auto empty = s.tree.add_node(s.tut, NodeKind::Lecture, "Empty", "");
  const auto doc = s.tree.export_lecture(empty);
  CHECK(doc.title == "Empty");
  CHECK(doc.slides.empty());
  CHECK(code_of([&] { s.tree.export_lecture(s.tut); }) == ErrorCode::KindMismatch);
}

TEST_CASE("export_tutorial includes every slide and attachment") {
  auto s = sample();
  s.tree.add_attachment(s.slides[4], {AttachmentKind::Reference, "Draper and Smith"});
  const auto handout = s.tree.export_tutorial(s.tut);
  CHECK(handout.lectures.size() == 2);
  CHECK(handout.slide_count() == 6);
  CHECK(handout.lectures[1].slides[1].attachments.size() == 1);
  CHECK(handout.render().find("Draper and Smith") != std::string::npos);

  const auto bare = s.tree.add_node(s.c2, NodeKind::Tutorial, "Bare", "");
  const auto header_only = s.tree.export_tutorial(bare);
  CHECK(header_only.title == "Bare");
  CHECK(header_only.lectures.empty());
  CHECK(header_only.render() == "# Bare\n\n");
  CHECK(code_of([&] { s.tree.export_tutorial(s.lec1); }) == ErrorCode::KindMismatch);
}

TEST_CASE("attachments only go on slides") {
  auto s = sample();
  CHECK(code_of([&] { s.tree.add_attachment(s.lec1, {AttachmentKind::Detail, "x"}); }) ==
        ErrorCode::AttachmentNotOnSlide);
}

TEST_CASE("json round-trip preserves structure, links and attachments") {
  auto s = sample();
  s.tree.link_tutorial(s.tut, s.c2);
  s.tree.add_attachment(s.slides[0], {AttachmentKind::Figure, "fig.png"});
  const auto j = s.tree.to_json();
  const auto back = ContentTree::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.validate().empty());
  CHECK(back.tutorial_courses(s.tut) == std::vector<NodeId>{s.c1, s.c2});
  CHECK(back.node(s.slides[0]).attachments.size() == 1);
  CHECK(back.node(s.slides[2]).order_index == 2);
}

TEST_CASE("from_json rejects malformed records") {
  CHECK(code_of([] { ContentTree::from_json(nlohmann::json::object()); }) == ErrorCode::ParseError);
  CHECK(code_of([] { ContentTree::from_json(nlohmann::json::parse(R"([{"kind":"wizard","id":"x"}])")); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([] { ContentTree::from_json(nlohmann::json::parse(R"([{"kind":"course","id":"x"}])")); }) ==
        ErrorCode::InvalidKindPairing);
}

TEST_CASE("tree view duplicates linked tutorials") {
  auto s = sample();
  s.tree.link_tutorial(s.tut, s.c2);
  const auto view = s.tree.tree_view_json();
  REQUIRE(view.size() == 1);
  const auto& courses = view[0]["children"];
  REQUIRE(courses.size() == 2);
  CHECK(courses[0]["children"][0]["id"] == s.tut);
  CHECK(courses[1]["children"][0]["id"] == s.tut);
  CHECK(courses[1]["children"][0]["children"].size() == 2);
}

TEST_CASE("random trees built through add_node always validate") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    ContentTree tree;
    std::vector<NodeId> by_kind[5];
    by_kind[0].push_back(tree.add_node(std::nullopt, NodeKind::Department, "d", ""));
    for (int step = 0; step < 60; ++step) {
      const int kind = 1 + static_cast<int>(rng() % 4);
      auto& parents = by_kind[kind - 1];
      if (parents.empty()) continue;
      const auto& parent = parents[rng() % parents.size()];
      by_kind[kind].push_back(tree.add_node(parent, static_cast<NodeKind>(kind), "n", ""));
      if (kind == 2 && by_kind[1].size() > 1) {
        tree.link_tutorial(by_kind[2].back(), by_kind[1][rng() % by_kind[1].size()]);
      }
    }
    CHECK(tree.validate().empty());
    CHECK(ContentTree::from_json(tree.to_json()).to_json() == tree.to_json());
  }
}

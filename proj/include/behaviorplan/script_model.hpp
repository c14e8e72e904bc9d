#pragma once

// BehaviorScript data model: a summary, a description and an ordered list of
// keyframe texts interleaved with the transitions between them.

#include "behaviorplan/errors.hpp"
#include "behaviorplan/posecode.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace behaviorplan {

struct Step {
  std::string keyframe_text;
  std::string transition_text;
  std::optional<PoseScriptAST> keyframe_ast;
  std::optional<MotionScriptAST> transition_ast;
  bool operator==(const Step&) const = default;
};

struct BehaviorScript {
  std::string summary;
  std::string description;
  std::vector<Step> steps;
  bool operator==(const BehaviorScript&) const = default;

  std::size_t keyframe_count() const { return steps.size(); }
  std::size_t transition_count() const { return steps.empty() ? 0 : steps.size() - 1; }
};

/// Throws StructuralError when the script breaks a BehaviorScript invariant.
inline void check_behavior_script(const BehaviorScript& s) {
  if (s.steps.empty()) throw StructuralError("empty steps");
  const long last = static_cast<long>(s.steps.size()) - 1;
  for (long i = 0; i <= last; ++i) {
    const Step& st = s.steps[static_cast<std::size_t>(i)];
    if (st.keyframe_text.empty())
      throw StructuralError("step " + std::to_string(i) + " has an empty keyframe", i);
    if (i == last && !st.transition_text.empty())
      throw StructuralError("final step " + std::to_string(i) + " must have an empty transition", i);
    if (i < last && st.transition_text.empty())
      throw StructuralError("step " + std::to_string(i) + " has an empty transition", i);
  }
}

/// Parses either a bare steps array or a {"summary","description","steps"}
/// object. Texts are kept verbatim; ASTs are left empty.
inline BehaviorScript parse_behavior_script(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed behavior script: ") + e.what(), json_error_offset(e.byte));
  }
  BehaviorScript s;
  const nlohmann::json* steps = &doc;
  if (doc.is_object()) {
    if (doc.contains("summary") && !doc["summary"].is_string())
      throw StructuralError("summary must be a string");
    if (doc.contains("description") && !doc["description"].is_string())
      throw StructuralError("description must be a string");
    s.summary = doc.value("summary", "");
    s.description = doc.value("description", "");
    if (!doc.contains("steps")) throw StructuralError("missing steps array");
    steps = &doc["steps"];
  }
  if (!steps->is_array()) throw StructuralError("steps must be an array");
  long i = 0;
  for (const auto& item : *steps) {
    if (!item.is_object() || !item.contains("keyframe") || !item["keyframe"].is_string())
      throw StructuralError("step " + std::to_string(i) + " needs a keyframe string", i);
    Step st;
    st.keyframe_text = item["keyframe"].get<std::string>();
    if (item.contains("transition")) {
      if (!item["transition"].is_string())
        throw StructuralError("step " + std::to_string(i) + " transition must be a string", i);
      st.transition_text = item["transition"].get<std::string>();
    }
    s.steps.push_back(std::move(st));
    ++i;
  }
  check_behavior_script(s);
  return s;
}

inline nlohmann::ordered_json to_json(const BehaviorScript& s) {
  nlohmann::ordered_json doc;
  doc["summary"] = s.summary;
  doc["description"] = s.description;
  doc["steps"] = nlohmann::ordered_json::array();
  for (const auto& st : s.steps)
    doc["steps"].push_back({{"keyframe", st.keyframe_text}, {"transition", st.transition_text}});
  return doc;
}

inline std::string serialize_behavior_script(const BehaviorScript& s) {
  return to_json(s).dump(2) + "\n";
}

/// Fills keyframe_ast/transition_ast by parsing every text; throws
/// GrammarError on the first unparseable text.
inline BehaviorScript with_asts(BehaviorScript s, const Grammar& g = default_grammar()) {
  for (auto& st : s.steps) {
    st.keyframe_ast = g.parse_pose_script(st.keyframe_text);
    if (!st.transition_text.empty()) st.transition_ast = g.parse_motion_script(st.transition_text);
  }
  return s;
}

struct Diagnostic {
  std::size_t step = 0;
  std::string field;  // "keyframe" or "transition"
  Span span;
  GrammarError::Kind kind = GrammarError::Kind::unknown_predicate;
  std::string message;

  std::string render() const {
    return "step[" + std::to_string(step) + "]." + field + "[" + std::to_string(span.begin) +
           ".." + std::to_string(span.end) + "]: " + message;
  }
};

/// One diagnostic per unparseable fragment; empty when every text conforms.
inline std::vector<Diagnostic> validate_behavior_script(const BehaviorScript& s,
                                                        const Grammar& g = default_grammar()) {
  std::vector<Diagnostic> out;
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    for (const auto& issue : g.diagnose_pose_script(s.steps[i].keyframe_text))
      out.push_back({i, "keyframe", issue.span, issue.kind, issue.message});
    if (s.steps[i].transition_text.empty()) continue;
    for (const auto& issue : g.diagnose_motion_script(s.steps[i].transition_text))
      out.push_back({i, "transition", issue.span, issue.kind, issue.message});
  }
  return out;
}

}  // namespace behaviorplan

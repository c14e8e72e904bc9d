#pragma once

// Controlled posecode vocabulary: keyframe texts parse to PoseScriptAST,
// transition texts parse to MotionScriptAST, and both render back to
// canonical text. All vocabulary lives in a JSON grammar table (see
// data/grammar.json); the parser itself is a greedy longest-match phrase
// lexer followed by a small clause grammar.

#include "behaviorplan/data/grammar_json.hpp"
#include "behaviorplan/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace behaviorplan {

enum class Category {
  angle,
  distance,
  relpos_x,
  relpos_y,
  relpos_z,
  pitch_roll,
  ground_contact,
  orientation,
  position,
};

inline constexpr std::array<Category, 9> kAllCategories = {
    Category::angle,       Category::distance,       Category::relpos_x,
    Category::relpos_y,    Category::relpos_z,       Category::pitch_roll,
    Category::ground_contact, Category::orientation, Category::position};

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::angle: return "angle";
    case Category::distance: return "distance";
    case Category::relpos_x: return "relpos_x";
    case Category::relpos_y: return "relpos_y";
    case Category::relpos_z: return "relpos_z";
    case Category::pitch_roll: return "pitch_roll";
    case Category::ground_contact: return "ground_contact";
    case Category::orientation: return "orientation";
    case Category::position: return "position";
  }
  return "?";
}

inline std::optional<Category> category_from_string(std::string_view s) {
  for (Category c : kAllCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

/// Categories whose subject is a pair of joints.
inline bool is_pair_category(Category c) {
  return c == Category::distance || c == Category::relpos_x ||
         c == Category::relpos_y || c == Category::relpos_z;
}

struct PoseCode {
  Category category = Category::angle;
  std::string value;  // canonical vocabulary token
  bool operator==(const PoseCode&) const = default;
};

/// A subject is one joint name, or two for pair categories.
struct PoseStatement {
  std::vector<std::string> subject;
  PoseCode predicate;
  bool operator==(const PoseStatement&) const = default;
};

struct PoseScriptAST {
  std::vector<PoseStatement> statements;
  bool operator==(const PoseScriptAST&) const = default;
};

enum class MotionKind { move_direction, turn, posecode_change };
enum class Direction { forward, backward, left, right, clockwise, counterclockwise };
enum class Speed { very_fast, fast, average_pace, slow, unspecified };
enum class Magnitude { greatly, way_over, slightly, unspecified };

inline std::string_view to_string(MotionKind k) {
  switch (k) {
    case MotionKind::move_direction: return "move_direction";
    case MotionKind::turn: return "turn";
    case MotionKind::posecode_change: return "posecode_change";
  }
  return "?";
}
inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::forward: return "forward";
    case Direction::backward: return "backward";
    case Direction::left: return "left";
    case Direction::right: return "right";
    case Direction::clockwise: return "clockwise";
    case Direction::counterclockwise: return "counterclockwise";
  }
  return "?";
}
inline std::string_view to_string(Speed s) {
  switch (s) {
    case Speed::very_fast: return "very fast";
    case Speed::fast: return "fast";
    case Speed::average_pace: return "average pace";
    case Speed::slow: return "slow";
    case Speed::unspecified: return "unspecified";
  }
  return "?";
}
inline std::string_view to_string(Magnitude m) {
  switch (m) {
    case Magnitude::greatly: return "greatly";
    case Magnitude::way_over: return "way over";
    case Magnitude::slightly: return "slightly";
    case Magnitude::unspecified: return "unspecified";
  }
  return "?";
}

template <class E, std::size_t N>
std::optional<E> enum_from_string(std::string_view s, const std::array<E, N>& all) {
  for (E e : all)
    if (to_string(e) == s) return e;
  return std::nullopt;
}

inline constexpr std::array<MotionKind, 3> kAllMotionKinds = {
    MotionKind::move_direction, MotionKind::turn, MotionKind::posecode_change};
inline constexpr std::array<Direction, 6> kAllDirections = {
    Direction::forward, Direction::backward, Direction::left,
    Direction::right, Direction::clockwise, Direction::counterclockwise};
inline constexpr std::array<Speed, 5> kAllSpeeds = {
    Speed::very_fast, Speed::fast, Speed::average_pace, Speed::slow, Speed::unspecified};
inline constexpr std::array<Magnitude, 4> kAllMagnitudes = {
    Magnitude::greatly, Magnitude::way_over, Magnitude::slightly, Magnitude::unspecified};

inline constexpr const char* kRootSubject = "root";

struct MotionPrimitive {
  std::vector<std::string> subject;  // {"root"} or joint name(s)
  MotionKind kind = MotionKind::move_direction;
  std::optional<Direction> direction;
  std::optional<PoseCode> target;
  Speed speed = Speed::unspecified;
  Magnitude magnitude = Magnitude::unspecified;
  int phase = 0;
  bool operator==(const MotionPrimitive&) const = default;
};

/// Outer list is temporal order, inner list holds concurrent primitives. A
/// phase may be empty when the transition only holds the pose.
struct MotionScriptAST {
  std::vector<std::vector<MotionPrimitive>> phases;
  bool operator==(const MotionScriptAST&) const = default;

  std::size_t primitive_count() const {
    std::size_t n = 0;
    for (const auto& p : phases) n += p.size();
    return n;
  }
};

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

class GrammarError : public Error {
 public:
  enum class Kind { unknown_subject, unknown_predicate, arity_mismatch, conflict, empty };

  GrammarError(Kind kind, const std::string& what, Span span)
      : Error(what), kind_(kind), span_(span) {}
  Kind kind() const { return kind_; }
  Span span() const { return span_; }

 private:
  Kind kind_;
  Span span_;
};

/// One unparseable fragment (sentence) of a text.
struct GrammarIssue {
  Span span;
  GrammarError::Kind kind;
  std::string message;
};

/// Orientation/position tokens carry an axis and a signed level in [-1, 1].
struct ScaleValue {
  char axis = 'x';
  double level = 0.0;
};

class Grammar {
 public:
  static Grammar from_json(const nlohmann::ordered_json& j);
  static Grammar from_string(std::string_view text) {
    try {
      return from_json(nlohmann::ordered_json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("grammar: ") + e.what(), json_error_offset(e.byte));
    }
  }

  PoseScriptAST parse_pose_script(std::string_view text) const;
  MotionScriptAST parse_motion_script(std::string_view text) const;
  std::vector<GrammarIssue> diagnose_pose_script(std::string_view text) const;
  std::vector<GrammarIssue> diagnose_motion_script(std::string_view text) const;

  std::string render_pose_script(const PoseScriptAST& ast) const;
  std::string render_motion_script(const MotionScriptAST& ast) const;

  /// Throws GrammarError when the AST breaks a PoseScriptAST invariant.
  void validate(const PoseScriptAST& ast) const;
  void validate(const MotionScriptAST& ast) const;

  /// Canonical tokens of a category in vocabulary order.
  const std::vector<std::string>& vocabulary(Category c) const {
    return vocab_.at(static_cast<std::size_t>(c));
  }
  bool is_token(const PoseCode& code) const {
    const auto& v = vocabulary(code.category);
    return std::find(v.begin(), v.end(), code.value) != v.end();
  }
  std::optional<ScaleValue> scale(const std::string& token) const {
    auto it = scales_.find(token);
    if (it == scales_.end()) return std::nullopt;
    return it->second;
  }
  /// True when the joint's base name (side stripped) is a hinge.
  bool is_hinge_joint(std::string_view joint) const {
    return hinges_.count(std::string(base_of(joint))) > 0;
  }
  /// Joint names reachable as single subjects of the given category.
  std::vector<std::string> subjects_for(Category c) const;

  std::string subject_phrase(const std::string& joint) const {
    if (joint == kRootSubject) return "the person";
    std::string s = joint;
    std::replace(s.begin(), s.end(), '_', ' ');
    return "the " + s;
  }

 private:
  enum class Lex { subject, pose, verb, direction, speed, magnitude, connective,
                   copula, conj, with, filler, comma, unknown };
  struct Lexeme {
    Lex kind = Lex::unknown;
    std::string a;  // primary payload
    std::string b;  // secondary payload
    Span span;
  };
  struct Word {
    std::string text;
    Span span;
    bool comma = false;
  };
  struct RawSubject {
    std::string side;
    std::string base;
    Span span;
  };
  struct RawItem {
    bool motion = false;
    std::vector<RawSubject> subjects;
    std::optional<RawSubject> object;
    std::optional<PoseCode> code;  // pose item predicate or motion target
    std::string verb;
    std::optional<Direction> direction;
    Speed speed = Speed::unspecified;
    Magnitude magnitude = Magnitude::unspecified;
    Span span;
  };
  struct Clause {
    std::vector<Lexeme> lex;
    std::string connective;  // "", "same" or "next"
    bool sentence_start = false;
    Span span;
  };

  static std::string_view base_of(std::string_view joint) {
    if (joint.starts_with("left_")) return joint.substr(5);
    if (joint.starts_with("right_")) return joint.substr(6);
    return joint;
  }

  std::vector<std::vector<Word>> split_sentences(std::string_view text) const;
  std::vector<Lexeme> lex_sentence(const std::vector<Word>& words) const;
  std::vector<Clause> clauses_of(std::string_view text) const;
  std::vector<RawItem> parse_clause(const Clause& c) const;
  std::vector<std::string> resolve(const RawSubject& s, const std::string& category,
                                   Span where) const;
  std::vector<PoseStatement> statements_of(const RawItem& item) const;
  std::vector<MotionPrimitive> primitives_of(const RawItem& item) const;

  std::unordered_map<std::string, Lexeme> phrases_;
  std::size_t max_phrase_words_ = 1;
  std::array<std::vector<std::string>, 9> vocab_;
  std::unordered_map<std::string, ScaleValue> scales_;
  std::unordered_map<std::string, std::string> parts_;
  std::set<std::string> hinges_;
};

// ---------------------------------------------------------------------------

inline Grammar Grammar::from_json(const nlohmann::ordered_json& j) {
  Grammar g;
  auto split_colon = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
      auto c = s.find(':', pos);
      out.push_back(s.substr(pos, c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    return out;
  };
  auto add = [&](const std::string& phrase, Lexeme lx) {
    if (g.phrases_.count(phrase))
      throw StructuralError("grammar: duplicate phrase '" + phrase + "'");
    std::size_t words = 1 + std::count(phrase.begin(), phrase.end(), ' ');
    g.max_phrase_words_ = std::max(g.max_phrase_words_, words);
    g.phrases_.emplace(phrase, std::move(lx));
  };
  try {
    for (const auto& [phrase, v] : j.at("tokens").items()) {
      auto parts = split_colon(v.get<std::string>());
      if (parts.size() != 2) throw StructuralError("grammar: bad token entry '" + phrase + "'");
      auto cat = category_from_string(parts[0]);
      if (!cat) throw StructuralError("grammar: unknown category '" + parts[0] + "'");
      auto& voc = g.vocab_[static_cast<std::size_t>(*cat)];
      if (std::find(voc.begin(), voc.end(), parts[1]) == voc.end()) voc.push_back(parts[1]);
      add(phrase, Lexeme{Lex::pose, parts[0], parts[1], {}});
    }
    for (const auto& [token, v] : j.at("scales").items()) {
      auto parts = split_colon(v.get<std::string>());
      if (parts.size() != 2 || parts[0].size() != 1)
        throw StructuralError("grammar: bad scale entry '" + token + "'");
      g.scales_[token] = ScaleValue{parts[0][0], std::stod(parts[1])};
    }
    for (const auto& [phrase, v] : j.at("subjects").items()) {
      auto parts = split_colon(v.get<std::string>());
      if (parts.size() != 2) throw StructuralError("grammar: bad subject entry '" + phrase + "'");
      add(phrase, Lexeme{Lex::subject, parts[0], parts[1], {}});
    }
    for (const auto& [key, v] : j.at("parts").items()) g.parts_[key] = v.get<std::string>();
    for (const auto& [key, v] : j.at("hinges").items()) {
      (void)v;
      g.hinges_.insert(key);
    }
    for (const auto& [phrase, v] : j.at("motion").items()) {
      auto parts = split_colon(v.get<std::string>());
      Lexeme lx;
      const std::string& k = parts[0];
      if (k == "verb") lx.kind = Lex::verb;
      else if (k == "direction") lx.kind = Lex::direction;
      else if (k == "speed") lx.kind = Lex::speed;
      else if (k == "magnitude") lx.kind = Lex::magnitude;
      else if (k == "connective") lx.kind = Lex::connective;
      else throw StructuralError("grammar: bad motion entry '" + phrase + "'");
      lx.a = parts.size() > 1 ? parts[1] : "";
      lx.b = parts.size() > 2 ? parts[2] : "";
      add(phrase, lx);
    }
    for (const auto& [word, v] : j.at("words").items()) {
      const auto s = v.get<std::string>();
      Lexeme lx;
      if (s == "copula") lx.kind = Lex::copula;
      else if (s == "and") lx.kind = Lex::conj;
      else if (s == "with") lx.kind = Lex::with;
      else if (s == "filler") lx.kind = Lex::filler;
      else throw StructuralError("grammar: bad word entry '" + word + "'");
      add(word, lx);
    }
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("grammar: ") + e.what());
  }
  for (Category c : kAllCategories)
    if (g.vocab_[static_cast<std::size_t>(c)].empty())
      throw StructuralError("grammar: category '" + std::string(to_string(c)) + "' has no tokens");
  return g;
}

inline const Grammar& default_grammar() {
  static const Grammar g = Grammar::from_string(data::kGrammarJson);
  return g;
}

inline std::vector<std::vector<Grammar::Word>> Grammar::split_sentences(
    std::string_view text) const {
  std::vector<std::vector<Word>> sentences(1);
  std::size_t i = 0;
  auto flush = [&] {
    if (!sentences.back().empty()) sentences.emplace_back();
  };
  while (i < text.size()) {
    const unsigned char ch = static_cast<unsigned char>(text[i]);
    if (ch == '.' || ch == ';' || ch == '!' || ch == '?' || ch == '\n') {
      flush();
      ++i;
    } else if (ch == ',') {
      sentences.back().push_back(Word{",", {i, i + 1}, true});
      ++i;
    } else if (std::isspace(ch) || ch == '-' || ch == '"' || ch == '(' || ch == ')' || ch == ':') {
      ++i;
    } else {
      std::size_t j = i;
      std::string w;
      while (j < text.size()) {
        const unsigned char c = static_cast<unsigned char>(text[j]);
        if (c == '.' || c == ';' || c == '!' || c == '?' || c == ',' || c == '-' ||
            c == '"' || c == '(' || c == ')' || c == ':' || std::isspace(c))
          break;
        w.push_back(c < 128 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
        ++j;
      }
      sentences.back().push_back(Word{w, {i, j}, false});
      i = j;
    }
  }
  if (sentences.back().empty()) sentences.pop_back();
  return sentences;
}

inline std::vector<Grammar::Lexeme> Grammar::lex_sentence(const std::vector<Word>& words) const {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  while (i < words.size()) {
    if (words[i].comma) {
      out.push_back(Lexeme{Lex::comma, ",", "", words[i].span});
      ++i;
      continue;
    }
    bool matched = false;
    std::size_t limit = std::min(max_phrase_words_, words.size() - i);
    for (std::size_t n = limit; n >= 1 && !matched; --n) {
      std::string phrase;
      bool crosses_comma = false;
      for (std::size_t k = 0; k < n; ++k) {
        if (words[i + k].comma) {
          crosses_comma = true;
          break;
        }
        if (k) phrase.push_back(' ');
        phrase += words[i + k].text;
      }
      if (crosses_comma) continue;
      auto it = phrases_.find(phrase);
      if (it != phrases_.end()) {
        Lexeme lx = it->second;
        lx.span = {words[i].span.begin, words[i + n - 1].span.end};
        out.push_back(std::move(lx));
        i += n;
        matched = true;
      }
    }
    if (!matched) {
      out.push_back(Lexeme{Lex::unknown, words[i].text, "", words[i].span});
      ++i;
    }
  }
  return out;
}

inline std::vector<Grammar::Clause> Grammar::clauses_of(std::string_view text) const {
  std::vector<Clause> clauses;
  for (const auto& words : split_sentences(text)) {
    auto lex = lex_sentence(words);
    Clause cur;
    cur.sentence_start = true;
    auto push = [&] {
      // Trailing and leading separators carry no meaning.
      while (!cur.lex.empty() && (cur.lex.back().kind == Lex::comma ||
                                  cur.lex.back().kind == Lex::conj))
        cur.lex.pop_back();
      if (!cur.lex.empty()) {
        cur.span = {cur.lex.front().span.begin, cur.lex.back().span.end};
        clauses.push_back(cur);
      }
    };
    for (const auto& lx : lex) {
      if (lx.kind == Lex::filler) continue;
      if (lx.kind == Lex::connective) {
        const bool start = cur.lex.empty() && cur.sentence_start;
        push();
        cur = Clause{};
        cur.connective = lx.a;
        cur.sentence_start = start;
        cur.span = lx.span;
        // A connective with nothing after it still marks a clause boundary.
        continue;
      }
      if (cur.lex.empty() && (lx.kind == Lex::comma || lx.kind == Lex::conj)) continue;
      cur.lex.push_back(lx);
    }
    push();
  }
  return clauses;
}

inline std::vector<Grammar::RawItem> Grammar::parse_clause(const Clause& c) const {
  const auto& lx = c.lex;
  std::size_t i = 0;
  auto read_subjects = [&](const std::vector<RawSubject>* inherit) {
    std::vector<RawSubject> subs;
    while (i < lx.size() && lx[i].kind == Lex::subject) {
      RawSubject s{lx[i].a, lx[i].b, lx[i].span};
      if (s.side == "inherit") {
        std::string side;
        if (inherit)
          for (const auto& p : *inherit)
            if (p.side == "left" || p.side == "right") {
              side = p.side;
              break;
            }
        if (side.empty())
          throw GrammarError(GrammarError::Kind::unknown_subject,
                             "subject '" + s.base + "' needs a left/right side", s.span);
        s.side = side;
      }
      subs.push_back(s);
      ++i;
      if (i + 1 < lx.size() && lx[i].kind == Lex::conj && lx[i + 1].kind == Lex::subject) ++i;
      else break;
    }
    return subs;
  };

  // Out-of-vocabulary words after a subject are predicate errors, reported
  // before any subject resolution problem.
  if (!lx.empty() && lx.front().kind == Lex::subject)
    for (std::size_t k = 1; k < lx.size(); ++k)
      if (lx[k].kind == Lex::unknown)
        throw GrammarError(GrammarError::Kind::unknown_predicate,
                           "unknown predicate phrase '" + lx[k].a + "'", lx[k].span);

  std::vector<RawSubject> main = read_subjects(nullptr);
  if (main.empty()) {
    const Span s = lx.empty() ? c.span : lx.front().span;
    throw GrammarError(GrammarError::Kind::unknown_subject,
                       "unknown subject phrase '" + (lx.empty() ? std::string() : lx.front().a) + "'", s);
  }
  std::vector<RawSubject> current = main;
  std::vector<RawItem> items;
  auto last_motion = [&]() -> RawItem* {
    if (items.empty()) return nullptr;
    return &items.back();
  };
  auto predicate_error = [&](const Lexeme& l) {
    return GrammarError(GrammarError::Kind::unknown_predicate,
                        "unknown predicate phrase '" + l.a + "'", l.span);
  };
  auto read_object = [&](RawItem& item) {
    if (i < lx.size() && lx[i].kind == Lex::subject) {
      RawSubject obj{lx[i].a, lx[i].b, lx[i].span};
      if (obj.side == "both")
        throw GrammarError(GrammarError::Kind::arity_mismatch,
                           "expected a single object subject", obj.span);
      if (obj.side == "inherit") {
        obj.side.clear();
        for (const auto& p : current)
          if (p.side == "left" || p.side == "right") obj.side = p.side;
        if (obj.side.empty())
          throw GrammarError(GrammarError::Kind::unknown_subject,
                             "subject '" + obj.base + "' needs a left/right side", obj.span);
      }
      item.object = obj;
      item.span.end = obj.span.end;
      ++i;
    }
  };

  while (i < lx.size()) {
    const Lexeme& l = lx[i];
    switch (l.kind) {
      case Lex::copula:
        ++i;
        break;
      case Lex::pose: {
        PoseCode code{*category_from_string(l.a), l.b};
        RawItem* prev = last_motion();
        if (prev && prev->motion && !prev->code &&
            (prev->verb == "change" || prev->verb == "bend" || prev->verb == "extend")) {
          prev->code = code;
          prev->span.end = l.span.end;
          ++i;
          read_object(*prev);
          break;
        }
        RawItem item;
        item.subjects = current;
        item.code = code;
        item.span = {current.front().span.begin, l.span.end};
        ++i;
        read_object(item);
        items.push_back(std::move(item));
        break;
      }
      case Lex::verb: {
        RawItem item;
        item.motion = true;
        item.verb = l.a;
        item.subjects = current;
        item.span = {current.front().span.begin, l.span.end};
        items.push_back(std::move(item));
        ++i;
        break;
      }
      case Lex::direction:
      case Lex::speed:
      case Lex::magnitude: {
        RawItem* prev = last_motion();
        if (!prev) throw predicate_error(l);
        if (l.kind == Lex::direction) {
          if (prev->direction) throw predicate_error(l);
          prev->direction = *enum_from_string(l.a, kAllDirections);
          if (!l.b.empty() && prev->magnitude == Magnitude::unspecified)
            prev->magnitude = *enum_from_string(l.b, kAllMagnitudes);
        } else if (l.kind == Lex::speed) {
          prev->speed = *enum_from_string(l.a, kAllSpeeds);
        } else {
          prev->magnitude = *enum_from_string(l.a, kAllMagnitudes);
        }
        prev->span.end = l.span.end;
        ++i;
        break;
      }
      case Lex::conj:
      case Lex::comma:
        ++i;
        if (i < lx.size() && lx[i].kind == Lex::subject) {
          current = read_subjects(&main);
          main = current;
        }
        break;
      case Lex::with: {
        ++i;
        std::vector<RawSubject> with_subjects = current;
        if (i < lx.size() && lx[i].kind == Lex::subject) with_subjects = read_subjects(&main);
        if (i >= lx.size() || lx[i].kind != Lex::pose)
          throw predicate_error(i < lx.size() ? lx[i] : l);
        RawItem item;
        item.subjects = with_subjects;
        item.code = PoseCode{*category_from_string(lx[i].a), lx[i].b};
        item.span = {with_subjects.front().span.begin, lx[i].span.end};
        ++i;
        std::swap(current, with_subjects);
        read_object(item);
        std::swap(current, with_subjects);
        items.push_back(std::move(item));
        break;
      }
      case Lex::subject:
      case Lex::unknown:
      case Lex::connective:
      case Lex::filler:
        throw predicate_error(l);
    }
  }
  if (items.empty())
    throw GrammarError(GrammarError::Kind::unknown_predicate, "missing predicate", c.span);
  return items;
}

inline std::vector<std::string> Grammar::resolve(const RawSubject& s, const std::string& category,
                                                 Span where) const {
  auto it = parts_.find(s.base + "|" + category);
  if (it == parts_.end()) it = parts_.find(s.base + "|*");
  if (it == parts_.end())
    throw GrammarError(GrammarError::Kind::arity_mismatch,
                       "subject '" + s.base + "' cannot take a " + category + " predicate", where);
  const std::string& joint = it->second;
  if (joint == kRootSubject) return {joint};
  if (s.side == "none") return {joint};
  if (s.side == "both") return {"left_" + joint, "right_" + joint};
  return {s.side + "_" + joint};
}

inline std::vector<PoseStatement> Grammar::statements_of(const RawItem& item) const {
  const PoseCode& code = *item.code;
  const std::string cat(to_string(code.category));
  std::vector<PoseStatement> out;
  if (!is_pair_category(code.category)) {
    if (item.object)
      throw GrammarError(GrammarError::Kind::arity_mismatch,
                         "'" + code.value + "' does not take an object", item.span);
    for (const auto& s : item.subjects)
      for (auto& j : resolve(s, cat, item.span)) {
        if (code.category == Category::angle && !is_hinge_joint(j))
          throw GrammarError(GrammarError::Kind::arity_mismatch,
                             "angle predicates need a hinged joint, got '" + j + "'", item.span);
        out.push_back(PoseStatement{{j}, code});
      }
    return out;
  }
  if (item.object) {
    auto obj = resolve(*item.object, cat, item.span);
    if (obj.size() != 1)
      throw GrammarError(GrammarError::Kind::arity_mismatch, "object must be a single joint",
                         item.span);
    for (const auto& s : item.subjects)
      for (auto& j : resolve(s, cat, item.span)) out.push_back(PoseStatement{{j, obj[0]}, code});
    return out;
  }
  std::vector<std::string> joints;
  for (const auto& s : item.subjects)
    for (auto& j : resolve(s, cat, item.span)) joints.push_back(j);
  if (joints.size() != 2)
    throw GrammarError(GrammarError::Kind::arity_mismatch,
                       "'" + code.value + "' needs a pair of joints", item.span);
  out.push_back(PoseStatement{joints, code});
  return out;
}

inline std::vector<MotionPrimitive> Grammar::primitives_of(const RawItem& item) const {
  std::vector<MotionPrimitive> out;
  auto with_modifiers = [&](MotionPrimitive p) {
    p.speed = item.speed;
    p.magnitude = item.magnitude;
    return p;
  };
  if (!item.motion || item.verb == "change" || item.verb == "extend" || item.verb == "bend") {
    RawItem pose = item;
    if (!pose.code) {
      if (item.verb == "extend") pose.code = PoseCode{Category::angle, "straight"};
      else if (item.verb == "bend") pose.code = PoseCode{Category::angle, "completely bent"};
      else
        throw GrammarError(GrammarError::Kind::unknown_predicate,
                           "'" + item.verb + "' needs a posecode target", item.span);
    }
    if ((item.verb == "extend" || item.verb == "bend") && pose.code->category != Category::angle)
      throw GrammarError(GrammarError::Kind::arity_mismatch,
                         "'" + item.verb + "' targets an angle posecode", item.span);
    if (item.direction)
      throw GrammarError(GrammarError::Kind::unknown_predicate,
                         "posecode changes take no direction", item.span);
    for (auto& st : statements_of(pose)) {
      MotionPrimitive p;
      p.kind = MotionKind::posecode_change;
      p.subject = st.subject;
      p.target = st.predicate;
      out.push_back(with_modifiers(p));
    }
    return out;
  }
  if (item.verb == "hold") return out;
  if (item.code)
    throw GrammarError(GrammarError::Kind::unknown_predicate,
                       "'" + item.verb + "' does not take a posecode", item.span);
  MotionPrimitive p;
  if (item.verb == "move") {
    p.kind = MotionKind::move_direction;
    if (!item.direction || *item.direction == Direction::clockwise ||
        *item.direction == Direction::counterclockwise)
      throw GrammarError(GrammarError::Kind::arity_mismatch,
                         "movement needs forward/backward/left/right", item.span);
    p.direction = item.direction;
  } else {
    p.kind = MotionKind::turn;
    if (!item.direction || *item.direction == Direction::forward ||
        *item.direction == Direction::backward)
      throw GrammarError(GrammarError::Kind::arity_mismatch, "turn needs a rotation direction",
                         item.span);
    Direction d = *item.direction;
    if (d == Direction::left) d = Direction::counterclockwise;
    if (d == Direction::right) d = Direction::clockwise;
    p.direction = d;
  }
  for (const auto& s : item.subjects)
    for (auto& j : resolve(s, "motion", item.span)) {
      MotionPrimitive q = p;
      q.subject = {j};
      out.push_back(with_modifiers(q));
    }
  return out;
}

inline void Grammar::validate(const PoseScriptAST& ast) const {
  if (ast.statements.empty())
    throw GrammarError(GrammarError::Kind::empty, "pose script has no statements", {});
  std::set<std::string> angled;
  for (const auto& st : ast.statements) {
    if (!is_token(st.predicate))
      throw GrammarError(GrammarError::Kind::unknown_predicate,
                         "'" + st.predicate.value + "' is not a " +
                             std::string(to_string(st.predicate.category)) + " token",
                         {});
    const std::size_t want = is_pair_category(st.predicate.category) ? 2 : 1;
    if (st.subject.size() != want)
      throw GrammarError(GrammarError::Kind::arity_mismatch,
                         "statement on '" + st.predicate.value + "' has wrong subject arity", {});
    if (st.predicate.category == Category::angle) {
      if (!is_hinge_joint(st.subject[0]))
        throw GrammarError(GrammarError::Kind::arity_mismatch,
                           "angle predicate on non-hinged joint '" + st.subject[0] + "'", {});
      if (!angled.insert(st.subject[0]).second)
        throw GrammarError(GrammarError::Kind::conflict,
                           "conflicting angle predicates on '" + st.subject[0] + "'", {});
    }
  }
}

inline void Grammar::validate(const MotionScriptAST& ast) const {
  if (ast.phases.empty())
    throw GrammarError(GrammarError::Kind::empty, "motion script has no phases", {});
  for (std::size_t p = 0; p < ast.phases.size(); ++p)
    for (const auto& m : ast.phases[p]) {
      if (m.phase != static_cast<int>(p))
        throw StructuralError("primitive phase index does not match its phase", static_cast<long>(p));
      if ((m.kind == MotionKind::posecode_change) != m.target.has_value() ||
          (m.kind != MotionKind::posecode_change) != m.direction.has_value())
        throw StructuralError("primitive fields do not match its kind", static_cast<long>(p));
      if (m.target && !is_token(*m.target))
        throw GrammarError(GrammarError::Kind::unknown_predicate,
                           "'" + m.target->value + "' is not a vocabulary token", {});
    }
}

inline PoseScriptAST Grammar::parse_pose_script(std::string_view text) const {
  PoseScriptAST ast;
  std::vector<Span> spans;
  for (const auto& clause : clauses_of(text)) {
    if (!clause.connective.empty())
      throw GrammarError(GrammarError::Kind::unknown_predicate,
                         "temporal connective in a static pose description", clause.span);
    for (const auto& item : parse_clause(clause)) {
      if (item.motion || item.direction || item.speed != Speed::unspecified ||
          item.magnitude != Magnitude::unspecified)
        throw GrammarError(GrammarError::Kind::unknown_predicate,
                           "motion phrase in a static pose description", item.span);
      for (auto& st : statements_of(item)) {
        ast.statements.push_back(std::move(st));
        spans.push_back(item.span);
      }
    }
  }
  if (ast.statements.empty())
    throw GrammarError(GrammarError::Kind::empty, "pose script has no statements", {0, text.size()});
  std::map<std::string, std::size_t> angled;
  for (std::size_t k = 0; k < ast.statements.size(); ++k) {
    const auto& st = ast.statements[k];
    if (st.predicate.category != Category::angle) continue;
    if (!angled.emplace(st.subject[0], k).second)
      throw GrammarError(GrammarError::Kind::conflict,
                         "conflicting angle predicates on '" + st.subject[0] + "'", spans[k]);
  }
  return ast;
}

inline MotionScriptAST Grammar::parse_motion_script(std::string_view text) const {
  MotionScriptAST ast;
  int phase = -1;
  for (const auto& clause : clauses_of(text)) {
    // Unmarked sentences read as sequential; "at the same time" joins the
    // current phase.
    if (phase < 0 || clause.connective == "next" ||
        (clause.connective.empty() && clause.sentence_start))
      ++phase;
    if (static_cast<int>(ast.phases.size()) <= phase) ast.phases.resize(phase + 1);
    for (const auto& item : parse_clause(clause))
      for (auto& p : primitives_of(item)) {
        p.phase = phase;
        ast.phases[phase].push_back(std::move(p));
      }
  }
  if (ast.phases.empty())
    throw GrammarError(GrammarError::Kind::empty, "motion script has no phases", {0, text.size()});
  return ast;
}

inline std::vector<GrammarIssue> Grammar::diagnose_pose_script(std::string_view text) const {
  std::vector<GrammarIssue> issues;
  bool any = false;
  for (const auto& clause : clauses_of(text)) {
    try {
      if (!clause.connective.empty())
        throw GrammarError(GrammarError::Kind::unknown_predicate,
                           "temporal connective in a static pose description", clause.span);
      for (const auto& item : parse_clause(clause)) {
        if (item.motion || item.direction || item.speed != Speed::unspecified ||
            item.magnitude != Magnitude::unspecified)
          throw GrammarError(GrammarError::Kind::unknown_predicate,
                             "motion phrase in a static pose description", item.span);
        statements_of(item);
      }
      any = true;
    } catch (const GrammarError& e) {
      issues.push_back({e.span(), e.kind(), e.what()});
    }
  }
  if (issues.empty()) {
    if (!any) {
      issues.push_back({{0, text.size()}, GrammarError::Kind::empty, "pose script has no statements"});
    } else {
      try {
        parse_pose_script(text);
      } catch (const GrammarError& e) {
        issues.push_back({e.span(), e.kind(), e.what()});
      }
    }
  }
  return issues;
}

inline std::vector<GrammarIssue> Grammar::diagnose_motion_script(std::string_view text) const {
  std::vector<GrammarIssue> issues;
  bool any = false;
  for (const auto& clause : clauses_of(text)) {
    try {
      for (const auto& item : parse_clause(clause)) primitives_of(item);
      any = true;
    } catch (const GrammarError& e) {
      issues.push_back({e.span(), e.kind(), e.what()});
    }
  }
  if (issues.empty() && !any)
    issues.push_back({{0, text.size()}, GrammarError::Kind::empty, "motion script has no phases"});
  return issues;
}

namespace detail {
inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}
inline std::string speed_phrase(Speed s) {
  switch (s) {
    case Speed::very_fast: return "very fast";
    case Speed::fast: return "fast";
    case Speed::average_pace: return "at an average pace";
    case Speed::slow: return "slowly";
    case Speed::unspecified: return "";
  }
  return "";
}
inline std::string direction_phrase(Direction d) {
  switch (d) {
    case Direction::forward: return "forward";
    case Direction::backward: return "backward";
    case Direction::left: return "to the left";
    case Direction::right: return "to the right";
    case Direction::clockwise: return "clockwise";
    case Direction::counterclockwise: return "counterclockwise";
  }
  return "";
}
}  // namespace detail

inline std::string Grammar::render_pose_script(const PoseScriptAST& ast) const {
  validate(ast);
  std::string out;
  for (const auto& st : ast.statements) {
    std::string sentence;
    const std::string& token = st.predicate.value;
    if (st.predicate.category == Category::distance) {
      sentence = subject_phrase(st.subject[0]) + " and " + subject_phrase(st.subject[1]) +
                 " are " + token;
    } else if (is_pair_category(st.predicate.category)) {
      sentence = subject_phrase(st.subject[0]) + " is " + token + " " + subject_phrase(st.subject[1]);
    } else {
      sentence = subject_phrase(st.subject[0]) + " is " + token;
    }
    if (!out.empty()) out.push_back(' ');
    out += detail::capitalize(sentence) + ".";
  }
  return out;
}

inline std::string Grammar::render_motion_script(const MotionScriptAST& ast) const {
  validate(ast);
  std::string out;
  auto append = [&](const std::string& s) {
    if (!out.empty()) out.push_back(' ');
    out += s;
  };
  for (std::size_t p = 0; p < ast.phases.size(); ++p) {
    const std::string lead = p == 0 ? "" : "A moment later, ";
    if (ast.phases[p].empty()) {
      append(detail::capitalize(lead + "the person holds the pose."));
      continue;
    }
    for (std::size_t k = 0; k < ast.phases[p].size(); ++k) {
      const auto& m = ast.phases[p][k];
      std::string subj;
      for (std::size_t s = 0; s < m.subject.size(); ++s) {
        if (s) subj += " and ";
        subj += subject_phrase(m.subject[s]);
      }
      const bool plural = m.subject.size() > 1;
      std::string body;
      switch (m.kind) {
        case MotionKind::move_direction:
          body = subj + " moves";
          break;
        case MotionKind::turn:
          body = subj + " turns";
          break;
        case MotionKind::posecode_change:
          body = subj + (plural ? " become " : " becomes ") + m.target->value;
          break;
      }
      if (m.magnitude != Magnitude::unspecified) body += " " + std::string(to_string(m.magnitude));
      if (m.direction) body += " " + detail::direction_phrase(*m.direction);
      if (m.speed != Speed::unspecified) body += " " + detail::speed_phrase(m.speed);
      std::string prefix = k == 0 ? lead : "At the same time, ";
      append(detail::capitalize(prefix + body + "."));
    }
  }
  return out;
}

inline std::vector<std::string> Grammar::subjects_for(Category c) const {
  std::set<std::string> out;
  const std::string cat(to_string(c));
  for (const auto& [phrase, lx] : phrases_) {
    if (lx.kind != Lex::subject || lx.a == "inherit") continue;
    try {
      for (auto& j : resolve(RawSubject{lx.a, lx.b, {}}, cat, {}))
        if (j != kRootSubject && (c != Category::angle || is_hinge_joint(j))) out.insert(j);
    } catch (const GrammarError&) {
    }
  }
  return {out.begin(), out.end()};
}

// Free-function surface over the shipped grammar.
inline PoseScriptAST parse_pose_script(std::string_view text) {
  return default_grammar().parse_pose_script(text);
}
inline MotionScriptAST parse_motion_script(std::string_view text) {
  return default_grammar().parse_motion_script(text);
}
inline std::string render_pose_script(const PoseScriptAST& ast) {
  return default_grammar().render_pose_script(ast);
}
inline std::string render_motion_script(const MotionScriptAST& ast) {
  return default_grammar().render_motion_script(ast);
}

}  // namespace behaviorplan

// Transition relations over session types: immediate, inductive and full.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skit/types.hpp"

namespace skit {

enum class Dir { In, Out };
enum class Mode { Must, Ind, Full };

struct Label {
  enum class Msg { Star, Tag, Chan };
  Dir dir = Dir::In;
  Msg msg = Msg::Star;
  std::string tag;
  unsigned measure = 0;
  TypeP payload;  // canonical, Chan only

  static Label star(Dir d) { return Label{d, Msg::Star, {}, 0, nullptr}; }
  static Label tagged(Dir d, std::string t, unsigned m = 0) { return Label{d, Msg::Tag, std::move(t), m, nullptr}; }
  static Label chan(Dir d, const TypeAutomaton& p);

  bool first_order() const { return msg != Msg::Chan; }
  Label flipped() const;
  bool operator==(const Label& o) const;
  std::string key() const;
  std::string str() const;  // ?a  !a@2  ?*  !(end!)
};

Label parse_label(const std::string& text);

struct Derivative {
  Label label;
  TypeAutomaton result;
};

std::vector<Derivative> immediate_transitions(const TypeAutomaton& t);
std::optional<TypeAutomaton> enabled(const TypeAutomaton& t, const Label& l, Mode mode);

// Every message that can label a transition of t: *, the tags (with their
// measures) and the payload types it mentions.
std::vector<Label> candidate_labels(const TypeAutomaton& t, Dir d);
std::vector<Label> enumerate_labels(const TypeAutomaton& t, Dir d, Mode mode);
std::vector<Derivative> transitions(const TypeAutomaton& t, Dir d, Mode mode);

// Independent characterisation of full transitions by fair runs of
// immediate transitions in the opposite direction.
bool fas_oracle(const TypeAutomaton& t, const Label& l);

std::optional<TypeAutomaton> derivative_seq(const TypeAutomaton& t, const std::vector<Label>& ls, Mode mode);

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

}  // namespace skit

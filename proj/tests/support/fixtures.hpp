#pragma once

#include <string>

#include "flowco/flowgraph.hpp"

namespace fixtures {

inline const std::string kFun1Source = "def fun1(x):\n    y = ((16 + x) - 20)\n    return y\n";

// Reference node texts, including the upper-case "input: X".
inline flowco::FlowGraph fun1_reference_graph() {
  using flowco::BlockKind;
  using flowco::EdgeLabel;
  return {{{"n0", BlockKind::Terminal, "start fun1"},
           {"n1", BlockKind::InputOutput, "input: X"},
           {"n2", BlockKind::Process, "y = ((16 + x) - 20)"},
           {"n3", BlockKind::InputOutput, "output: y"},
           {"n4", BlockKind::Terminal, "end function return"}},
          {{"n0", "n1", EdgeLabel::Unlabeled},
           {"n1", "n2", EdgeLabel::Unlabeled},
           {"n2", "n3", EdgeLabel::Unlabeled},
           {"n3", "n4", EdgeLabel::Unlabeled}}};
}

inline const std::string kFun1Tuple =
    "[('start fun1', 'OVAL'), ('input: X', 'PARALLELOGRAM'), ('y = ((16 + x) - 20)', 'RECTANGLE'), "
    "('output: y', 'PARALLELOGRAM'), ('end function return', 'OVAL')]";
inline const std::string kFun1String =
    "{start fun1,OVAL},{input: X,PARALLELOGRAM},{y = ((16 + x) - 20),RECTANGLE},{output: y,PARALLELOGRAM},"
    "{end function return,OVAL}";
inline const std::string kFun1Modified =
    "start fun1, OVAL [SEP] input: X, PARALLELOGRAM [SEP] y = ((16 + x) - 20), RECTANGLE [SEP] output: y, "
    "PARALLELOGRAM [SEP] end function return, OVAL";

// Decision with yes branch P1, no branch P2, join J.
inline flowco::FlowGraph diamond_graph() {
  using flowco::BlockKind;
  using flowco::EdgeLabel;
  return {{{"s", BlockKind::Terminal, "start f"},
           {"d", BlockKind::Decision, "a > 0"},
           {"p1", BlockKind::Process, "b = 1"},
           {"p2", BlockKind::Process, "b = 2"},
           {"j", BlockKind::InputOutput, "output: b"},
           {"e", BlockKind::Terminal, "end function return"}},
          {{"s", "d", EdgeLabel::Unlabeled},
           {"d", "p1", EdgeLabel::Yes},
           {"d", "p2", EdgeLabel::No},
           {"p1", "j", EdgeLabel::Unlabeled},
           {"p2", "j", EdgeLabel::Unlabeled},
           {"j", "e", EdgeLabel::Unlabeled}}};
}

}  // namespace fixtures

#ifndef MARO_CASE_STUDY_H_
#define MARO_CASE_STUDY_H_

#include <optional>
#include <string>
#include <vector>

#include "maro/problem.h"

namespace maro {

// SP1: one design variable x, one operating variable y, u in [-1, 1].
//   f1 = x^2 + y + 0.2 u (1 - y)
//   f2 = (1 - x)^2 + 0.5 (1 - y) + 0.2 u y
//   g  = u (0.5 - y) - 0.3 <= 0
ProblemSpec BuildSp1();

// SP2: SP1 objectives driven by u1, plus a capacity constraint
//   g2 = x + y + 0.3 (u1 + u2) - 1.6 <= 0
// whose worst case over the box [-1, 1]^2 is the corner (1, 1).
ProblemSpec BuildSp2();

// Smooth stand-in for a binary methanol / methyl formate distillation
// column. Here-and-now: stages N, feed stage N_f, diameter D, reboiler and
// condenser areas A_r, A_c. Wait-and-see: reflux ratio R_V and specific
// reboiler duty Q_r. Uncertain: thermodynamic factor F_12, feed mass
// fraction w_MF and load l (in that order, so lexicographic scenario numbers
// run with l fastest). Objectives: CAPEX (design only) and OPEX per ton
// (independent of the load).
ProblemSpec BuildColumnSurrogate();

std::vector<std::string> BuiltinModelNames();
std::optional<ProblemSpec> BuildBuiltin(const std::string& name);

}  // namespace maro

#endif  // MARO_CASE_STUDY_H_

#pragma once

#include <string>
#include <vector>

namespace mrn {

// maximize c.x  subject to  a_ub x <= b_ub,  a_eq x = b_eq,  x >= 0.
struct LinearProgram {
    int n = 0;
    std::vector<double> c;
    std::vector<std::vector<double>> a_ub;
    std::vector<double> b_ub;
    std::vector<std::vector<double>> a_eq;
    std::vector<double> b_eq;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
};

// Dense two-phase simplex. Pivoting is deterministic: largest-improvement
// entering column with lowest-index ties, lowest basis index on ratio ties;
// falls back to Bland's rule after a degenerate stall so cycling terminates.
LpSolution solve_lp(const LinearProgram& lp);

// Plain-text dump of the program for debugging.
std::string lp_to_text(const LinearProgram& lp);

} // namespace mrn

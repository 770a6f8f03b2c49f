#pragma once

// Bias-cancelling weight vectors over neighbour ranks 1..k. Three constraint
// families share one solver: the general polynomial-moment class, the KL
// class with Gamma-ratio moments, and the Renyi class with shifted
// Gamma-ratio moments. Weights sum to one, vanish identically below rank
// ceil(c*k), and among all vectors satisfying the constraints we return the
// one of minimum Euclidean norm (smallest variance inflation).

#include <vector>

namespace nnfe {

enum class WeightClassKind { General, KL, Renyi };

struct WeightVector {
    std::vector<double> w;  // length k; w[j-1] is the weight on rank j
    int k = 0;
    int d = 0;
    double c = 0.25;
    WeightClassKind classkind = WeightClassKind::General;
    int I = 0;       // General only
    double b = 0.0;  // Renyi only

    int first_allowed = 1;  // smallest rank j with j >= c*k
    double l1_norm = 0.0;
    // ||w||_1 <= 1/c is a hypothesis of the risk theory, not of the
    // computation; a violation is surfaced, never fatal.
    bool l1_exceeds_bound = false;
    std::vector<double> residuals;  // |row . w - rhs| per unit-norm constraint row
    double max_residual = 0.0;
};

// Constraints: sum_j w_j = 1 and sum_j j^{2l/d - i} w_j = 0 for every pair
// (l,i) in {0..ceil(d/2)-1} x {0..I} other than (0,0).
WeightVector solve_general_weights(int k, int d, int I, double c);

// Constraints: sum_j w_j = 1 and sum_j Gamma(j+2l/d)/Gamma(j) w_j = 0 for
// l in {1..ceil(d/2)-1}; for d <= 2 only the sum constraint binds.
WeightVector solve_kl_weights(int k, int d, double c);

// Constraints: sum_j w_j = 1 and sum_j Gamma(j-b+2l/d)/Gamma(j-b) w_j = 0
// for l in {1..ceil(d/2)-1}. Requires j > b for every allowed rank j.
// b = 0 coincides with the KL class.
WeightVector solve_renyi_weights(int k, int d, double b, double c);

// Memoised variants for the estimators' hot path; safe under concurrent
// calls, returning references that stay valid for the process lifetime.
const WeightVector& cached_general_weights(int k, int d, int I, double c);
const WeightVector& cached_kl_weights(int k, int d, double c);
const WeightVector& cached_renyi_weights(int k, int d, double b, double c);

}  // namespace nnfe

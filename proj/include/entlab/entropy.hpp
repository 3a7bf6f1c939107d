#pragma once

// Entropy functionals in nats.

#include <vector>

#include "entlab/layout.hpp"
#include "entlab/separable.hpp"

namespace entlab {

struct DivergenceValue {
  double value = 0.0;      // +inf when support_ok is false
  bool support_ok = true;
  bool finite() const { return support_ok; }
};

/// −Σ λ log λ over the nonzero spectrum.
double entropy_of(const Mat& rho);
double vn_entropy(const LabeledOperator& rho, const LabelSet& subsystems);

/// tr ρ(log ρ − log σ); +inf unless supp ρ ⊆ supp σ. σ need not be normalized.
DivergenceValue umegaki(const Mat& rho, const Mat& sigma);
DivergenceValue umegaki(const LabeledOperator& rho, const LabeledOperator& sigma);

/// Label sets must be disjoint; they need not cover the layout (the marginal
/// on their union is used).
double cqmi(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b, const LabelSet& c);
double mutual_info(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b);
/// H(A) + H(B) + H(C) − H(ABC).
double tripartite_mi(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b, const LabelSet& c);
/// I(AĀ:BB̄) − I(Ā:B̄).
double cemi_term(const LabeledOperator& rho, const LabelSet& a, const LabelSet& abar, const LabelSet& b,
                 const LabelSet& bbar);
/// I(AĀ:BB̄:CC̄) − I(Ā:B̄:C̄).
double cemi_term3(const LabeledOperator& rho, const LabelSet& a, const LabelSet& abar, const LabelSet& b,
                  const LabelSet& bbar, const LabelSet& c, const LabelSet& cbar);
/// I(A₁:A₂|C) + I(A₁A₂:A₃|C).
double tripartite_cqmi(const LabeledOperator& rho, const LabelSet& a1, const LabelSet& a2,
                       const LabelSet& a3, const LabelSet& c);

struct ExpStateForm {
  LabeledOperator op;   // exp(log ρ_AC + log ρ_BC − log ρ_C) on the layout of ρ restricted to ABC
  double divergence;    // D(ρ_ABC ‖ op)
};

/// Throws DomainError when ρ_C is rank deficient.
ExpStateForm exp_state_form(const LabeledOperator& rho, const LabelSet& a, const LabelSet& b,
                            const LabelSet& c);

/// Joint pmf on X×Y×Z, row-major p[(x·ny + y)·nz + z].
struct Pmf3 {
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> p;
  double operator()(int x, int y, int z) const { return p[(x * ny + y) * nz + z]; }
};

struct ClassicalIdentities {
  double cmi = 0.0;             // I(X:Y|Z) from entropies
  double recovery = 0.0;        // D(P ‖ P_{Y|Z} P_{XZ})
  double markov = 0.0;          // D(P ‖ P_Z P_{X|Z} P_{Y|Z})
  double max_deviation = 0.0;
};

ClassicalIdentities classical_identities(const Pmf3& pmf);

/// One block p_k σ^k_{A C_L} ⊗ σ^k_{C_R B} of a Markov state.
struct MarkovBlock {
  double weight = 0.0;
  Mat left;     // state on A ⊗ C_L
  int dim_left = 1;
  Mat right;    // state on C_R ⊗ B
  int dim_right = 1;
};

/// ⊕_k p_k σ^k_{AC_L} ⊗ σ^k_{C_R B} on the layout [a, c, b] with
/// dim C = Σ_k dim_left·dim_right.
QuantumState markov_state(const std::vector<MarkovBlock>& blocks, const Label& a, int dim_a,
                          const Label& c, const Label& b, int dim_b);
/// Σ_k p_k σ^k_A ⊗ σ^k_B on [a, b].
SeparableDecomposition markov_marginal_decomposition(const std::vector<MarkovBlock>& blocks,
                                                     const Label& a, int dim_a, const Label& b,
                                                     int dim_b);

}  // namespace entlab

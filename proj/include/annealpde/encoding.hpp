#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "annealpde/ising.hpp"
#include "annealpde/pubo.hpp"

namespace annealpde {

/// One real variable represented by n_spin spins:
///
///     w = center + scale * sum_{a=0}^{n_spin-1} sigma^(a) / 2^a
///
/// so exactly n_spin spins per variable and a representable range of
/// center +- scale * (2 - 2^(1-n_spin)) in steps of scale * 2^(1-n_spin).
struct VariableEncoding {
    double center = 0.0;
    double scale = 1.0;
    int n_spin = 1;
};

double decode(const VariableEncoding& enc, const SpinVector& spins);

/// Start offset of each variable's spin block, plus the total as last entry.
std::vector<int> spin_offsets(const std::vector<VariableEncoding>& encodings);

Eigen::VectorXd decode_all(const std::vector<VariableEncoding>& encodings, const SpinVector& spins);

enum class CostDegree { quadratic, quartic };

// Sorted index quadruple for a quartic monomial.
using QuarticKey = std::array<int, 4>;

/// Real-coefficient cost
///
///     C(w) = w^T J w + h^T w + constant + sum_t q_t * w_a w_b w_c w_d
///
/// with J symmetric and the quartic terms stored once per sorted index
/// multiset with the permutation-summed monomial coefficient q_t.
class RealCost {
public:
    RealCost() = default;
    RealCost(CostDegree degree, int n_vars);

    static RealCost from_quadratic(Eigen::MatrixXd J, Eigen::VectorXd h, double constant);

    CostDegree degree() const { return degree_; }
    int n_vars() const { return static_cast<int>(h_.size()); }
    const Eigen::MatrixXd& quadratic_matrix() const { return J_; }
    const Eigen::VectorXd& linear() const { return h_; }
    double constant() const { return constant_; }
    const std::map<QuarticKey, double>& quartic_terms() const { return quartic_; }

    void add_constant(double v) { constant_ += v; }
    void add_linear(int i, double v);
    /// Adds v to both J_ij and J_ji halves (i.e. contributes v * 2 * w_i w_j
    /// for i != j); pass i == j for the diagonal.
    void add_quadratic_sym(int i, int j, double v);
    /// Adds the monomial coefficient for the sorted quadruple.
    void add_quartic(QuarticKey key, double v);

private:
    CostDegree degree_ = CostDegree::quadratic;
    Eigen::MatrixXd J_;
    Eigen::VectorXd h_;
    double constant_ = 0.0;
    std::map<QuarticKey, double> quartic_;
};

double evaluate(const RealCost& cost, const Eigen::VectorXd& w);

/// Substitutes the per-variable spin expansion into the cost, producing a
/// spin-basis polynomial over sum(n_spin) spins whose value at any spin state
/// equals the cost at the decoded point. Quadratic costs yield degree <= 2,
/// quartic costs degree <= 4 (sigma^2 = 1 folding applied throughout).
SpinPolynomial substitute_encoding(const RealCost& cost,
                                   const std::vector<VariableEncoding>& encodings);

/// Degree-<=2 spin polynomial viewed as an Ising model (constant -> offset,
/// singletons -> fields, pairs -> couplings).
IsingModel ising_from_quadratic(const SpinPolynomial& poly);

struct EpochRecord {
    Eigen::VectorXd w;
    double cost = 0.0;
};

/// Epoch bookkeeping for the zoom iteration: after each epoch the centers
/// move to the solution being zoomed around and every scale shrinks by the
/// factor S, so scale(epoch I) = S^I * initial scale.
struct ZoomState {
    int epoch = 0;
    std::vector<VariableEncoding> encodings;
    double zoom_factor = 0.8;  // S in (0, 1]
    std::vector<EpochRecord> history;
};

ZoomState zoom_update(const ZoomState& state, const Eigen::VectorXd& w, double cost);

/// Per-epoch search context: the derived seed plus the spin blocks of the
/// encoded variables (annealers can exploit them for joint block moves; the
/// blocks never cover reduction auxiliaries).
struct EpochContext {
    std::uint64_t seed = 0;
    int epoch = 0;
    std::vector<std::vector<int>> spin_groups;
    // Nearest representable spin pattern to the incumbent solution under the
    // current encodings (empty at epoch 0). Annealers may seed a read with it
    // so the zoom never regresses behind its own incumbent.
    SpinVector warm_start;
};

/// Ground-state search callback: given a (degree-reduced) Ising model and
/// the epoch context, return a full spin state.
using AnnealerFn = std::function<SpinVector(const IsingModel&, const EpochContext&)>;

/// Exhaustive-search annealer for small models; the reference oracle used in
/// tests and available from the CLI for tiny problems.
AnnealerFn exact_annealer(int max_spins = 24);

struct IterativeParams {
    double zoom_factor = 0.8;
    int n_spin = 3;
    int epochs = 30;
    double initial_center = 0.0;
    double initial_scale = 1.0;
    // Optional per-variable initial centers; overrides initial_center if set.
    Eigen::VectorXd initial_centers;
    std::uint64_t seed = 0;
};

struct IterativeResult {
    std::vector<Eigen::VectorXd> epoch_w;  // decoded solution per epoch
    std::vector<double> epoch_cost;        // real cost per epoch (not Ising energy)
    std::vector<double> best_cost_series;  // running minimum, non-increasing
    Eigen::VectorXd best_w;
    double best_cost = 0.0;
    int best_epoch = -1;
    int total_spins = 0;   // spins per epoch before degree reduction
    int aux_vars = 0;      // auxiliaries added by reduction (0 for quadratic)
};

/// Runs substitute -> (reduce if quartic) -> anneal -> decode -> zoom per
/// epoch. The reported per-epoch quality is the real-valued cost at the
/// decoded point, and each zoom step re-centers on the best-so-far solution
/// so a bad epoch cannot drag subsequent epochs away from the incumbent.
IterativeResult solve_iterative(const RealCost& cost, const IterativeParams& params,
                                const AnnealerFn& annealer);

}  // namespace annealpde

#include "annealpde/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace annealpde {

namespace {

void validate_encoding(const VariableEncoding& enc) {
    if (enc.scale < 0.0 || !std::isfinite(enc.scale) || !std::isfinite(enc.center)) {
        throw DomainError("VariableEncoding: scale must be finite and >= 0");
    }
    if (enc.n_spin < 1) throw DomainError("VariableEncoding: n_spin must be >= 1");
}

}  // namespace

double decode(const VariableEncoding& enc, const SpinVector& spins) {
    validate_encoding(enc);
    if (static_cast<int>(spins.size()) != enc.n_spin) {
        throw DimensionError("decode: expected " + std::to_string(enc.n_spin) + " spins, got " +
                             std::to_string(spins.size()));
    }
    double sum = 0.0;
    double weight = 1.0;
    for (int a = 0; a < enc.n_spin; ++a, weight *= 0.5) sum += weight * spins[a];
    return enc.center + enc.scale * sum;
}

std::vector<int> spin_offsets(const std::vector<VariableEncoding>& encodings) {
    std::vector<int> offsets(encodings.size() + 1, 0);
    for (std::size_t i = 0; i < encodings.size(); ++i) {
        validate_encoding(encodings[i]);
        offsets[i + 1] = offsets[i] + encodings[i].n_spin;
    }
    return offsets;
}

Eigen::VectorXd decode_all(const std::vector<VariableEncoding>& encodings,
                           const SpinVector& spins) {
    const std::vector<int> offsets = spin_offsets(encodings);
    if (static_cast<int>(spins.size()) != offsets.back()) {
        throw DimensionError("decode_all: spin vector length mismatch");
    }
    Eigen::VectorXd w(encodings.size());
    for (std::size_t i = 0; i < encodings.size(); ++i) {
        SpinVector block(spins.begin() + offsets[i], spins.begin() + offsets[i + 1]);
        w[static_cast<Eigen::Index>(i)] = decode(encodings[i], block);
    }
    return w;
}

RealCost::RealCost(CostDegree degree, int n_vars) : degree_(degree) {
    if (n_vars < 0) throw DimensionError("RealCost: negative variable count");
    J_ = Eigen::MatrixXd::Zero(n_vars, n_vars);
    h_ = Eigen::VectorXd::Zero(n_vars);
}

RealCost RealCost::from_quadratic(Eigen::MatrixXd J, Eigen::VectorXd h, double constant) {
    if (J.rows() != J.cols() || J.rows() != h.size()) {
        throw DimensionError("RealCost: J/h shape mismatch");
    }
    if (!J.allFinite() || !h.allFinite() || !std::isfinite(constant)) {
        throw DomainError("RealCost: non-finite coefficient");
    }
    RealCost cost(CostDegree::quadratic, static_cast<int>(h.size()));
    cost.J_ = 0.5 * (J + J.transpose());  // enforce exact symmetry
    cost.h_ = std::move(h);
    cost.constant_ = constant;
    return cost;
}

void RealCost::add_linear(int i, double v) {
    if (i < 0 || i >= n_vars()) throw DimensionError("RealCost: index out of range");
    h_[i] += v;
}

void RealCost::add_quadratic_sym(int i, int j, double v) {
    if (i < 0 || i >= n_vars() || j < 0 || j >= n_vars()) {
        throw DimensionError("RealCost: index out of range");
    }
    if (i == j) {
        J_(i, i) += v;
    } else {
        J_(i, j) += v;
        J_(j, i) += v;
    }
}

void RealCost::add_quartic(QuarticKey key, double v) {
    if (degree_ != CostDegree::quartic) {
        throw DomainError("RealCost: quartic term on a quadratic cost");
    }
    std::sort(key.begin(), key.end());
    if (key[0] < 0 || key[3] >= n_vars()) throw DimensionError("RealCost: index out of range");
    double& slot = quartic_[key];
    slot += v;
    if (slot == 0.0) quartic_.erase(key);
}

double evaluate(const RealCost& cost, const Eigen::VectorXd& w) {
    if (w.size() != cost.linear().size()) {
        throw DimensionError("evaluate(RealCost): vector length mismatch");
    }
    double total = w.dot(cost.quadratic_matrix() * w) + cost.linear().dot(w) + cost.constant();
    for (const auto& [key, coeff] : cost.quartic_terms()) {
        total += coeff * w[key[0]] * w[key[1]] * w[key[2]] * w[key[3]];
    }
    return total;
}

SpinPolynomial substitute_encoding(const RealCost& cost,
                                   const std::vector<VariableEncoding>& encodings) {
    if (static_cast<int>(encodings.size()) != cost.n_vars()) {
        throw DimensionError("substitute_encoding: " + std::to_string(encodings.size()) +
                             " encodings for " + std::to_string(cost.n_vars()) + " variables");
    }
    const std::vector<int> offsets = spin_offsets(encodings);
    const int total = offsets.back();

    // Linear spin polynomial for each real variable.
    std::vector<SpinPolynomial> expansion;
    expansion.reserve(encodings.size());
    for (std::size_t i = 0; i < encodings.size(); ++i) {
        SpinPolynomial lin(Basis::spin, total);
        lin.add_term({}, encodings[i].center);
        double weight = encodings[i].scale;
        for (int a = 0; a < encodings[i].n_spin; ++a, weight *= 0.5) {
            lin.add_term({offsets[i] + a}, weight);
        }
        expansion.push_back(std::move(lin));
    }

    SpinPolynomial out(Basis::spin, total);
    out.add_term({}, cost.constant());
    const Eigen::VectorXd& h = cost.linear();
    for (int i = 0; i < cost.n_vars(); ++i) {
        if (h[i] != 0.0) out.add_polynomial(expansion[i], h[i]);
    }
    const Eigen::MatrixXd& J = cost.quadratic_matrix();
    for (int i = 0; i < cost.n_vars(); ++i) {
        for (int j = 0; j < cost.n_vars(); ++j) {
            if (J(i, j) != 0.0) {
                out.add_polynomial(multiply(expansion[i], expansion[j]), J(i, j));
            }
        }
    }
    for (const auto& [key, coeff] : cost.quartic_terms()) {
        SpinPolynomial prod = multiply(multiply(expansion[key[0]], expansion[key[1]]),
                                       multiply(expansion[key[2]], expansion[key[3]]));
        out.add_polynomial(prod, coeff);
    }
    return out;
}

IsingModel ising_from_quadratic(const SpinPolynomial& poly) {
    if (poly.basis() != Basis::spin) {
        throw DomainError("ising_from_quadratic: polynomial must be in the spin basis");
    }
    if (poly.degree() > 2) {
        throw DomainError("ising_from_quadratic: degree " + std::to_string(poly.degree()) +
                          " > 2; reduce first");
    }
    IsingModel model(poly.n_vars());
    for (const auto& [m, c] : poly.terms()) {
        switch (m.size()) {
            case 0: model.add_offset(c); break;
            case 1: model.add_field(m[0], c); break;
            default: model.add_coupling(m[0], m[1], c); break;
        }
    }
    return model;
}

ZoomState zoom_update(const ZoomState& state, const Eigen::VectorXd& w, double cost) {
    if (w.size() != static_cast<Eigen::Index>(state.encodings.size())) {
        throw DimensionError("zoom_update: solution length mismatch");
    }
    if (state.zoom_factor <= 0.0 || state.zoom_factor > 1.0) {
        throw DomainError("zoom_update: zoom factor must lie in (0, 1]");
    }
    ZoomState next = state;
    next.epoch = state.epoch + 1;
    for (std::size_t i = 0; i < next.encodings.size(); ++i) {
        next.encodings[i].center = w[static_cast<Eigen::Index>(i)];
        next.encodings[i].scale *= state.zoom_factor;
    }
    next.history.push_back({w, cost});
    return next;
}

AnnealerFn exact_annealer(int max_spins) {
    return [max_spins](const IsingModel& model, const EpochContext&) {
        return brute_force_ground_state(model, max_spins).state;
    };
}

IterativeResult solve_iterative(const RealCost& cost, const IterativeParams& params,
                                const AnnealerFn& annealer) {
    if (params.epochs < 1) throw ConfigError("solve_iterative: epochs must be >= 1");
    if (params.n_spin < 1) throw ConfigError("solve_iterative: n_spin must be >= 1");
    if (params.zoom_factor <= 0.0 || params.zoom_factor > 1.0) {
        throw ConfigError("solve_iterative: zoom factor must lie in (0, 1]");
    }
    if (params.initial_centers.size() != 0 && params.initial_centers.size() != cost.n_vars()) {
        throw DimensionError("solve_iterative: initial_centers length mismatch");
    }

    std::vector<VariableEncoding> encodings(static_cast<std::size_t>(cost.n_vars()));
    for (int i = 0; i < cost.n_vars(); ++i) {
        encodings[static_cast<std::size_t>(i)] = {
            params.initial_centers.size() ? params.initial_centers[i] : params.initial_center,
            params.initial_scale, params.n_spin};
    }
    ZoomState state{0, std::move(encodings), params.zoom_factor, {}};

    IterativeResult result;
    const std::vector<int> offsets = spin_offsets(state.encodings);
    result.total_spins = offsets.back();
    result.best_cost = std::numeric_limits<double>::infinity();

    std::vector<std::vector<int>> spin_groups(state.encodings.size());
    for (std::size_t i = 0; i < state.encodings.size(); ++i) {
        for (int a = offsets[i]; a < offsets[i + 1]; ++a) spin_groups[i].push_back(a);
    }

    const auto nearest_pattern = [&](const Eigen::VectorXd& target) {
        SpinVector pattern(static_cast<std::size_t>(result.total_spins));
        for (std::size_t i = 0; i < state.encodings.size(); ++i) {
            const VariableEncoding& enc = state.encodings[i];
            if (enc.n_spin > 16) return SpinVector{};
            SpinVector block(static_cast<std::size_t>(enc.n_spin));
            SpinVector best_block;
            double best_err = std::numeric_limits<double>::infinity();
            for (std::uint32_t bits = 0; bits < (1u << enc.n_spin); ++bits) {
                for (int a = 0; a < enc.n_spin; ++a) {
                    block[static_cast<std::size_t>(a)] = ((bits >> a) & 1u) ? 1 : -1;
                }
                const double err = std::abs(decode(enc, block) - target[static_cast<Eigen::Index>(i)]);
                if (err < best_err) {
                    best_err = err;
                    best_block = block;
                }
            }
            std::copy(best_block.begin(), best_block.end(),
                      pattern.begin() + offsets[i]);
        }
        return pattern;
    };

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        SpinPolynomial poly = substitute_encoding(cost, state.encodings);
        IsingModel model;
        if (poly.degree() <= 2) {
            model = ising_from_quadratic(poly);
        } else {
            ReductionResult reduced = reduce_to_quadratic(poly);
            result.aux_vars = reduced.n_aux;
            model = ising_from_quadratic(reduced.quadratic);
        }

        SpinVector spins;
        EpochContext context{derive_seed(params.seed, static_cast<std::uint64_t>(epoch)), epoch,
                             spin_groups,
                             epoch > 0 ? nearest_pattern(result.best_w) : SpinVector{}};
        try {
            spins = annealer(model, context);
        } catch (const EmbeddingError& e) {
            throw EmbeddingError("solve_iterative: annealer failed at epoch " +
                                 std::to_string(epoch) + ": " + e.what());
        } catch (const std::exception& e) {
            throw NumericError("solve_iterative: annealer failed at epoch " +
                               std::to_string(epoch) + ": " + e.what());
        }
        if (static_cast<int>(spins.size()) != model.n_spins()) {
            throw DimensionError("solve_iterative: annealer returned " +
                                 std::to_string(spins.size()) + " spins at epoch " +
                                 std::to_string(epoch) + ", expected " +
                                 std::to_string(model.n_spins()));
        }

        SpinVector original(spins.begin(), spins.begin() + result.total_spins);
        const Eigen::VectorXd w = decode_all(state.encodings, original);
        const double c = evaluate(cost, w);

        result.epoch_w.push_back(w);
        result.epoch_cost.push_back(c);
        if (c < result.best_cost) {
            result.best_cost = c;
            result.best_w = w;
            result.best_epoch = epoch;
        }
        result.best_cost_series.push_back(result.best_cost);

        state = zoom_update(state, result.best_w, result.best_cost);
    }
    return result;
}

}  // namespace annealpde

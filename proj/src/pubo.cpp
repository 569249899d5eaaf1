#include "annealpde/pubo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace annealpde {

SpinPolynomial::SpinPolynomial(Basis basis, int n_vars) : basis_(basis), n_vars_(n_vars) {
    if (n_vars < 0) throw DimensionError("SpinPolynomial: negative variable count");
}

int SpinPolynomial::degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, static_cast<int>(m.size()));
    return d;
}

double SpinPolynomial::constant() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? 0.0 : it->second;
}

double SpinPolynomial::coefficient(const Monomial& raw) const {
    auto it = terms_.find(canonicalize(raw));
    return it == terms_.end() ? 0.0 : it->second;
}

Monomial SpinPolynomial::canonicalize(Monomial raw) const {
    for (int i : raw) {
        if (i < 0 || i >= n_vars_) {
            throw DimensionError("SpinPolynomial: variable index " + std::to_string(i) +
                                 " out of range [0, " + std::to_string(n_vars_) + ")");
        }
    }
    std::sort(raw.begin(), raw.end());
    Monomial out;
    out.reserve(raw.size());
    for (std::size_t k = 0; k < raw.size();) {
        std::size_t run = k + 1;
        while (run < raw.size() && raw[run] == raw[k]) ++run;
        const std::size_t count = run - k;
        if (basis_ == Basis::spin) {
            if (count % 2 == 1) out.push_back(raw[k]);  // sigma^2 = 1
        } else {
            out.push_back(raw[k]);  // x^2 = x
        }
        k = run;
    }
    return out;
}

void SpinPolynomial::add_term(Monomial raw, double coeff) {
    if (!std::isfinite(coeff)) throw DomainError("SpinPolynomial: non-finite coefficient");
    if (coeff == 0.0) return;
    Monomial key = canonicalize(std::move(raw));
    double& slot = terms_[key];
    slot += coeff;
    if (slot == 0.0) terms_.erase(key);
}

void SpinPolynomial::add_polynomial(const SpinPolynomial& other, double scale) {
    if (other.basis_ != basis_) throw DomainError("add_polynomial: basis mismatch");
    n_vars_ = std::max(n_vars_, other.n_vars_);
    for (const auto& [m, c] : other.terms_) add_term(m, scale * c);
}

bool SpinPolynomial::operator==(const SpinPolynomial& other) const {
    return basis_ == other.basis_ && n_vars_ == other.n_vars_ && terms_ == other.terms_;
}

double evaluate(const SpinPolynomial& poly, const Assignment& assignment) {
    if (static_cast<int>(assignment.size()) != poly.n_vars()) {
        throw DimensionError("evaluate: assignment length " + std::to_string(assignment.size()) +
                             " != n_vars " + std::to_string(poly.n_vars()));
    }
    for (std::int8_t v : assignment) {
        const bool ok = poly.basis() == Basis::spin ? (v == -1 || v == 1) : (v == 0 || v == 1);
        if (!ok) throw DomainError("evaluate: assignment value outside basis domain");
    }
    double total = 0.0;
    for (const auto& [m, c] : poly.terms()) {
        double prod = c;
        for (int i : m) prod *= assignment[i];
        total += prod;
    }
    return total;
}

SpinPolynomial multiply(const SpinPolynomial& a, const SpinPolynomial& b) {
    if (a.basis() != b.basis()) throw DomainError("multiply: basis mismatch");
    SpinPolynomial out(a.basis(), std::max(a.n_vars(), b.n_vars()));
    for (const auto& [ma, ca] : a.terms()) {
        for (const auto& [mb, cb] : b.terms()) {
            Monomial m = ma;
            m.insert(m.end(), mb.begin(), mb.end());
            out.add_term(std::move(m), ca * cb);
        }
    }
    return out;
}

SpinPolynomial convert_basis(const SpinPolynomial& poly, Basis target) {
    if (poly.basis() == target) return poly;
    SpinPolynomial out(target, poly.n_vars());
    // sigma_i = 2 x_i - 1 one way, x_i = (sigma_i + 1) / 2 the other; expand
    // the product of binomials per term by iterating subsets of the monomial.
    const bool to_binary = target == Basis::binary;
    const double keep = to_binary ? 2.0 : 0.5;
    const double drop = to_binary ? -1.0 : 0.5;
    for (const auto& [m, c] : poly.terms()) {
        const std::size_t k = m.size();
        for (std::uint32_t subset = 0; subset < (1u << k); ++subset) {
            Monomial sub;
            double coeff = c;
            for (std::size_t b = 0; b < k; ++b) {
                if ((subset >> b) & 1u) {
                    sub.push_back(m[b]);
                    coeff *= keep;
                } else {
                    coeff *= drop;
                }
            }
            out.add_term(std::move(sub), coeff);
        }
    }
    return out;
}

ReductionResult reduce_to_quadratic(const SpinPolynomial& poly) {
    const int deg = poly.degree();
    if (deg > 4) {
        throw DomainError("reduce_to_quadratic: unsupported degree " + std::to_string(deg));
    }
    if (deg <= 2) return {poly, {}, 0};

    const Basis original = poly.basis();
    const SpinPolynomial work =
        original == Basis::binary ? poly : convert_basis(poly, Basis::binary);

    int n_aux = 0;
    for (const auto& [m, c] : work.terms()) {
        (void)c;
        if (m.size() > 2) ++n_aux;
    }

    SpinPolynomial quad(Basis::binary, work.n_vars() + n_aux);
    std::vector<AuxRecord> aux_map;
    aux_map.reserve(static_cast<std::size_t>(n_aux));

    int next_aux = work.n_vars();
    for (const auto& [m, c] : work.terms()) {
        const int k = static_cast<int>(m.size());
        if (k <= 2) {
            quad.add_term(m, c);
            continue;
        }
        const int y = next_aux++;
        aux_map.push_back({y, m});
        if (c < 0.0) {
            // c * prod(x) = min_y c*y*(S1 - (k-1))
            for (int i : m) quad.add_term({y, i}, c);
            quad.add_term({y}, -c * (k - 1));
        } else if (k == 3) {
            // c * x1x2x3 = min_y c*[ y*(1 - S1) + S2 ]
            for (int i : m) quad.add_term({y, i}, -c);
            quad.add_term({y}, c);
            for (int a = 0; a < k; ++a)
                for (int b = a + 1; b < k; ++b) quad.add_term({m[a], m[b]}, c);
        } else {
            // c * x1x2x3x4 = min_y c*[ y*(3 - 2*S1) + S2 ]
            for (int i : m) quad.add_term({y, i}, -2.0 * c);
            quad.add_term({y}, 3.0 * c);
            for (int a = 0; a < k; ++a)
                for (int b = a + 1; b < k; ++b) quad.add_term({m[a], m[b]}, c);
        }
    }

    ReductionResult result;
    result.quadratic = original == Basis::binary ? quad : convert_basis(quad, Basis::spin);
    result.aux_map = std::move(aux_map);
    result.n_aux = n_aux;
    return result;
}

void write_polynomial(std::ostream& os, const SpinPolynomial& poly) {
    os << poly.n_vars() << ' ' << (poly.basis() == Basis::spin ? "spin" : "binary") << '\n';
    for (const auto& [m, c] : poly.terms()) {
        os << m.size();
        for (int i : m) os << ' ' << i;
        os << ' ' << format_double(c) << '\n';
    }
}

SpinPolynomial read_polynomial(std::istream& is) {
    int n = 0;
    std::string basis_name;
    if (!(is >> n >> basis_name)) throw IoError("read_polynomial: bad header");
    Basis basis;
    if (basis_name == "spin") {
        basis = Basis::spin;
    } else if (basis_name == "binary") {
        basis = Basis::binary;
    } else {
        throw IoError("read_polynomial: unknown basis '" + basis_name + "'");
    }
    SpinPolynomial poly(basis, n);
    std::size_t k = 0;
    while (is >> k) {
        Monomial m(k);
        for (std::size_t i = 0; i < k; ++i) {
            if (!(is >> m[i])) throw IoError("read_polynomial: truncated term");
        }
        double coeff = 0.0;
        if (!(is >> coeff)) throw IoError("read_polynomial: missing coefficient");
        poly.add_term(std::move(m), coeff);
    }
    return poly;
}

}  // namespace annealpde

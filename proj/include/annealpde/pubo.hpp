#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "annealpde/common.hpp"

namespace annealpde {

enum class Basis { spin, binary };  // spin: {-1,+1}, binary: {0,1}

// Sorted, duplicate-free variable indices; the empty monomial is the constant.
using Monomial = std::vector<int>;

// Variable assignment; values must lie in the polynomial's basis domain.
using Assignment = std::vector<std::int8_t>;

/// Multilinear polynomial over spin or binary variables, degree <= 4.
///
/// Terms are canonicalized on insertion: indices sorted, idempotence applied
/// (sigma_i^2 = 1 in the spin basis, x_i^2 = x_i in the binary basis), and
/// zero coefficients pruned. Immutable once built, in the sense that all
/// operations below are pure functions.
class SpinPolynomial {
public:
    using TermMap = std::map<Monomial, double>;

    SpinPolynomial() = default;
    SpinPolynomial(Basis basis, int n_vars);

    Basis basis() const { return basis_; }
    int n_vars() const { return n_vars_; }
    const TermMap& terms() const { return terms_; }
    int degree() const;
    double constant() const;
    double coefficient(const Monomial& raw) const;

    /// Adds coeff * product of the (possibly repeated, unsorted) variables.
    void add_term(Monomial raw, double coeff);
    /// this += scale * other (same basis; variable count widens as needed).
    void add_polynomial(const SpinPolynomial& other, double scale = 1.0);

    bool operator==(const SpinPolynomial& other) const;

private:
    Monomial canonicalize(Monomial raw) const;

    Basis basis_ = Basis::spin;
    int n_vars_ = 0;
    TermMap terms_;
};

double evaluate(const SpinPolynomial& poly, const Assignment& assignment);

SpinPolynomial multiply(const SpinPolynomial& a, const SpinPolynomial& b);

/// Rewrites the polynomial over the target basis so that evaluation agrees
/// on every assignment under sigma = 2x - 1. Exact for the round trip: the
/// bridge coefficients are powers of two.
SpinPolynomial convert_basis(const SpinPolynomial& poly, Basis target);

struct AuxRecord {
    int aux_index;     // variable index of the auxiliary in the quadratic
    Monomial monomial; // binary-basis monomial the auxiliary serves
};

struct ReductionResult {
    SpinPolynomial quadratic;     // degree <= 2, same basis as the input
    std::vector<AuxRecord> aux_map;
    int n_aux = 0;
};

/// Exact quadratization of a degree-<=4 polynomial: for EVERY assignment of
/// the original variables, the minimum of the quadratic over the auxiliary
/// variables equals the original value. Gadgets operate in the binary basis
/// (the input is converted and the result converted back when needed):
///
///   c < 0:  c*prod(x_i) = min_y c*y*(sum x_i - (k-1))
///   c > 0, k=3:  c*x1x2x3    = min_y c*[ y*(1 - S1) + S2 ]
///   c > 0, k=4:  c*x1x2x3x4  = min_y c*[ y*(3 - 2*S1) + S2 ]
///
/// with S1 the sum and S2 the pairwise-product sum of the monomial's
/// variables (Ishikawa's construction; one auxiliary per monomial).
/// Auxiliaries are appended after the original variables in term order.
/// Degree-<=2 inputs pass through unchanged with n_aux = 0.
ReductionResult reduce_to_quadratic(const SpinPolynomial& poly);

/// Text form: header `n_vars spin|binary`, then one `k i1 ... ik coeff` line
/// per term (k = monomial size, so the constant term is `0 coeff`).
void write_polynomial(std::ostream& os, const SpinPolynomial& poly);
SpinPolynomial read_polynomial(std::istream& is);

}  // namespace annealpde

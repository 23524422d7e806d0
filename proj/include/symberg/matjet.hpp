#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "symberg/numerics.hpp"

namespace symberg {

struct SymBasis;

// Exponent of a monomial in up to three variables; unused slots are zero.
using Exponent = std::array<int, 3>;

// Dense enumeration of all monomials of total degree <= order in num_vars
// variables. Ordered by total degree, then lexicographically descending,
// so (1,0,0) precedes (0,1,0). Tables are shared and immutable.
struct MonomialTable {
  int num_vars = 0;
  int order = 0;
  std::vector<Exponent> exps;
  std::vector<int> degree;
  std::vector<int> dense;    // (order+1)^num_vars lookup, -1 when too high
  std::vector<int> sum_idx;  // size^2 table: index of exps[a] + exps[b] or -1

  int size() const { return static_cast<int>(exps.size()); }
  int index_of(const Exponent& e) const;  // -1 when degree exceeds order
  int sum(int a, int b) const { return sum_idx[static_cast<size_t>(a) * exps.size() + b]; }

  static std::shared_ptr<const MonomialTable> get(int num_vars, int order);
};

// Truncated power series in named variables with square complex matrix
// coefficients. Coefficients are stored densely in MonomialTable order.
class MatrixJet {
 public:
  MatrixJet() = default;
  MatrixJet(std::vector<std::string> vars, int order, int dim);

  static MatrixJet constant(std::vector<std::string> vars, int order, const CMatrix& c);
  static MatrixJet identity(std::vector<std::string> vars, int order, int dim);
  // coeff * v, where v is the named variable.
  static MatrixJet variable(std::vector<std::string> vars, int order, const std::string& v,
                            const CMatrix& coeff);

  const std::vector<std::string>& vars() const { return vars_; }
  int num_vars() const { return static_cast<int>(vars_.size()); }
  int order() const { return order_; }
  int dim() const { return dim_; }
  const MonomialTable& table() const { return *table_; }
  int var_index(const std::string& name) const;  // throws InvalidInput

  int size() const { return static_cast<int>(coeffs_.size()); }
  CMatrix& at(int idx) { return coeffs_[idx]; }
  const CMatrix& at(int idx) const { return coeffs_[idx]; }
  // Coefficient of the monomial; a zero matrix when above the order.
  CMatrix coeff(const Exponent& e) const;
  CMatrix& coeff_ref(const Exponent& e);
  const CMatrix& constant_term() const { return coeffs_[0]; }

  double max_norm() const;  // max over coefficients of the Frobenius norm
  double l1_norm() const;   // sum over coefficients of the operator-1 norm
  CMatrix evaluate(const std::vector<cplx>& point) const;
  MatrixJet truncated(int order) const;
  // Require at least the given order; names the consumer on failure.
  void require_order(int needed, const std::string& consumer) const;

  // One line per monomial: "deg=(a,b,c) norm=... matrix=[[...]]".
  std::string dump() const;

  MatrixJet& operator+=(const MatrixJet& o);
  MatrixJet& operator-=(const MatrixJet& o);
  MatrixJet& operator*=(cplx s);

 private:
  std::vector<std::string> vars_;
  int order_ = 0;
  int dim_ = 0;
  std::shared_ptr<const MonomialTable> table_;
  std::vector<CMatrix> coeffs_;
};

MatrixJet operator+(MatrixJet a, const MatrixJet& b);
MatrixJet operator-(MatrixJet a, const MatrixJet& b);
MatrixJet operator-(MatrixJet a);
MatrixJet operator*(MatrixJet a, cplx s);
MatrixJet operator*(cplx s, MatrixJet a);

// Cauchy product (order preserved). A dim-1 operand acts as a scalar.
MatrixJet jet_mul(const MatrixJet& a, const MatrixJet& b);
MatrixJet operator*(const MatrixJet& a, const MatrixJet& b);
// Left/right multiplication by a constant matrix.
MatrixJet jet_mul(const CMatrix& c, const MatrixJet& a);
MatrixJet jet_mul(const MatrixJet& a, const CMatrix& c);

MatrixJet jet_inverse(const MatrixJet& j);
MatrixJet jet_exp(const MatrixJet& j);
MatrixJet jet_log(const MatrixJet& j);
MatrixJet jet_partial(const MatrixJet& j, int var_index);
MatrixJet jet_partial(const MatrixJet& j, const std::string& var);

// First variable x1 is replaced by t*x + (1-t)*y (y = second variable) and
// t is integrated over [0,1]. The first variable is renamed to new_name.
MatrixJet segment_average(const MatrixJet& j, const std::string& new_name);

// J / (x - y) for a jet that vanishes on y = x. Order drops by one. The
// divisibility tolerance is relative to scale, which defaults to the max
// coefficient norm of J; callers forming J as a difference pass the size of
// the operands instead.
MatrixJet divide_by_xy(const MatrixJet& j, const std::string& x, const std::string& y,
                       double scale = -1.0);

// Substitute y = x (y disappears from the variable list).
MatrixJet restrict_diagonal(const MatrixJet& j, const std::string& y, const std::string& x);

// Substitute var = 0 (var disappears from the variable list).
MatrixJet pin_zero(const MatrixJet& j, const std::string& var);

// View a jet in a larger variable set. rename maps the jet's variable names
// to names in target; unmapped names must already occur in target.
MatrixJet embed(const MatrixJet& j, const std::vector<std::string>& target,
                const std::map<std::string, std::string>& rename = {});

// Coefficientwise maps.
MatrixJet lift_sk(const MatrixJet& j, const SymBasis& basis);
MatrixJet conjugate_by(const CMatrix& left, const MatrixJet& j, const CMatrix& right);

// Swap the two variables of a 2-variable jet and take adjoints of all
// coefficients. A Hermitian-symmetric jet is fixed by this map.
MatrixJet hermitian_swap(const MatrixJet& j);

}  // namespace symberg

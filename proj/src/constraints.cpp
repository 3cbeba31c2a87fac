#include "cbf/constraints.hpp"

#include <cmath>
#include <stdexcept>

namespace cbf {

namespace {

void require_finite(const ConstraintRow& row) {
  if (!row.coeffs.allFinite() || !std::isfinite(row.bound))
    throw std::invalid_argument("constraint row has non-finite entries at " +
                                row.label);
}

}  // namespace

ClassK::ClassK(double k) : slope(k) {
  if (!(k > 0.0))
    throw std::invalid_argument("class-K slope must be positive");
}

double ClassK::operator()(double s) const {
  switch (kind) {
    case Kind::Linear:
      return slope * s;
  }
  throw std::logic_error("unknown class-K kind");
}

void HocbfSpec::validate() const {
  if (relative_degree != 1 && relative_degree != 2)
    throw std::invalid_argument("relative degree must be 1 or 2");
  if (!value) throw std::invalid_argument("barrier value callable missing");
  if (alphas.size() != static_cast<size_t>(relative_degree))
    throw std::invalid_argument("need one class-K function per degree");
  if (!lf_value) throw std::invalid_argument("L_f b callable missing");
  if (relative_degree == 1) {
    if (!lg_value) throw std::invalid_argument("L_g b callable missing");
  } else {
    if (!lf2_value) throw std::invalid_argument("L_f^2 b callable missing");
    if (!lglf_value) throw std::invalid_argument("L_g L_f b callable missing");
    if (!mixed_term) throw std::invalid_argument("S(b) callable missing");
  }
}

double HocbfSpec::top_lf(const Eigen::VectorXd& x) const {
  return relative_degree == 1 ? lf_value(x) : lf2_value(x) + mixed_term(x);
}

Eigen::RowVectorXd HocbfSpec::top_lg(const Eigen::VectorXd& x) const {
  return relative_degree == 1 ? lg_value(x) : lglf_value(x);
}

void ClfSpec::validate() const {
  if (!value || !lf_value || !lg_value)
    throw std::invalid_argument("Lyapunov callables missing");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(relax_weight > 0.0))
    throw std::invalid_argument("relax_weight must be positive");
}

std::vector<double> psi_chain(const HocbfSpec& spec, const Eigen::VectorXd& x) {
  spec.validate();
  std::vector<double> psi{spec.value(x)};
  if (spec.relative_degree == 2)
    psi.push_back(spec.lf_value(x) + spec.alphas[0](psi[0]));
  return psi;
}

ConstraintRow hocbf_row(const HocbfSpec& spec, const Eigen::VectorXd& x) {
  const std::vector<double> psi = psi_chain(spec, x);
  const Eigen::RowVectorXd lg = spec.top_lg(x);
  ConstraintRow row;
  row.coeffs = Eigen::RowVectorXd::Zero(lg.size() + 1);
  row.coeffs.head(lg.size()) = -lg;
  row.bound = spec.top_lf(x) + spec.alphas.back()(psi.back());
  row.label = "safety";
  require_finite(row);
  return row;
}

ConstraintRow clf_row(const ClfSpec& spec, const Eigen::VectorXd& x,
                      int control_dim) {
  spec.validate();
  const Eigen::RowVectorXd lg = spec.lg_value(x);
  if (lg.size() != control_dim)
    throw std::invalid_argument("L_g V size does not match control dimension");
  ConstraintRow row;
  row.coeffs.resize(control_dim + 1);
  row.coeffs << lg, -1.0;
  row.bound = -spec.lf_value(x) - spec.epsilon * spec.value(x);
  row.label = "clf";
  require_finite(row);
  return row;
}

std::vector<ConstraintRow> bound_rows(const ControlBounds& bounds) {
  const int q = static_cast<int>(bounds.lower.size());
  if (bounds.upper.size() != q)
    throw std::invalid_argument("control bound sizes do not match");
  std::vector<ConstraintRow> rows;
  rows.reserve(2 * q);
  for (int i = 0; i < q; ++i) {
    ConstraintRow hi;
    hi.coeffs = Eigen::RowVectorXd::Zero(q + 1);
    hi.coeffs(i) = 1.0;
    hi.bound = bounds.upper(i);
    hi.label = "u_upper";
    require_finite(hi);
    rows.push_back(std::move(hi));

    ConstraintRow lo;
    lo.coeffs = Eigen::RowVectorXd::Zero(q + 1);
    lo.coeffs(i) = -1.0;
    lo.bound = -bounds.lower(i);
    lo.label = "u_lower";
    require_finite(lo);
    rows.push_back(std::move(lo));
  }
  return rows;
}

double fd_lie_f(const ScalarFn& h, const AffineSystem& sys,
                const Eigen::VectorXd& x, double step) {
  const Eigen::VectorXd f = sys.drift(x);
  return (h(x + step * f) - h(x - step * f)) / (2.0 * step);
}

Eigen::RowVectorXd fd_lie_g(const ScalarFn& h, const AffineSystem& sys,
                            const Eigen::VectorXd& x, double step) {
  const Eigen::MatrixXd g = sys.input_matrix(x);
  Eigen::RowVectorXd out(g.cols());
  for (int j = 0; j < g.cols(); ++j) {
    const Eigen::VectorXd dir = g.col(j);
    out(j) = (h(x + step * dir) - h(x - step * dir)) / (2.0 * step);
  }
  return out;
}

}  // namespace cbf

#include "pire/penalty.hpp"

#include <cmath>
#include <sstream>

#include "pire/errors.hpp"

namespace pire {

ConcavePenalty::ConcavePenalty(PenaltyKind kind, double p, double epsilon, double theta)
    : kind_(kind), p_(p), epsilon_(epsilon), theta_(theta) {
  validate();
}

ConcavePenalty ConcavePenalty::lp(double p, double epsilon) {
  return ConcavePenalty(PenaltyKind::LpPower, p, epsilon, 0.0);
}

ConcavePenalty ConcavePenalty::log(double epsilon) {
  return ConcavePenalty(PenaltyKind::Logarithm, 1.0, epsilon, 0.0);
}

ConcavePenalty ConcavePenalty::capped_l1(double theta) {
  return ConcavePenalty(PenaltyKind::CappedL1, 1.0, 0.0, theta);
}

ConcavePenalty ConcavePenalty::identity() {
  return ConcavePenalty(PenaltyKind::Identity, 1.0, 0.0, 0.0);
}

void ConcavePenalty::validate() const {
  switch (kind_) {
    case PenaltyKind::LpPower:
      if (!(p_ > 0.0 && p_ <= 1.0)) {
        throw ParameterError("lp penalty needs 0 < p <= 1, got p = " + std::to_string(p_));
      }
      // p = 1 is linear and well defined at 0 for any eps >= 0.
      if (p_ < 1.0 ? !(epsilon_ > 0.0) : !(epsilon_ >= 0.0)) {
        throw ParameterError("lp penalty needs epsilon > 0, got " + std::to_string(epsilon_));
      }
      break;
    case PenaltyKind::Logarithm:
      if (!(epsilon_ > 0.0)) {
        throw ParameterError("log penalty needs epsilon > 0, got " + std::to_string(epsilon_));
      }
      break;
    case PenaltyKind::CappedL1:
      if (!(theta_ > 0.0)) {
        throw ParameterError("capped-l1 penalty needs theta > 0, got " + std::to_string(theta_));
      }
      break;
    case PenaltyKind::Identity:
      break;
  }
}

bool ConcavePenalty::uses_epsilon() const {
  return kind_ == PenaltyKind::LpPower || kind_ == PenaltyKind::Logarithm;
}

ConcavePenalty ConcavePenalty::with_epsilon(double epsilon) const {
  if (!uses_epsilon()) return *this;
  return ConcavePenalty(kind_, p_, epsilon, theta_);
}

double ConcavePenalty::phi(double y) const {
  switch (kind_) {
    case PenaltyKind::LpPower:
      return p_ == 1.0 ? y + epsilon_ : std::pow(y + epsilon_, p_);
    case PenaltyKind::Logarithm:
      return std::log1p(y / epsilon_);
    case PenaltyKind::CappedL1:
      return std::min(y, theta_);
    case PenaltyKind::Identity:
      return y;
  }
  return 0.0;
}

double ConcavePenalty::slope(double y) const {
  switch (kind_) {
    case PenaltyKind::LpPower:
      return p_ == 1.0 ? 1.0 : p_ * std::pow(y + epsilon_, p_ - 1.0);
    case PenaltyKind::Logarithm:
      return 1.0 / (y + epsilon_);
    case PenaltyKind::CappedL1:
      // Tie at y == theta resolves to 0.
      return y < theta_ ? 1.0 : 0.0;
    case PenaltyKind::Identity:
      return 1.0;
  }
  return 0.0;
}

void ConcavePenalty::check_domain(const VectorRef& y) const {
  for (Index i = 0; i < y.size(); ++i) {
    if (!(y[i] >= 0.0)) {
      std::ostringstream msg;
      msg << "penalty argument must be nonnegative, y[" << i << "] = " << y[i];
      throw DomainError(msg.str());
    }
  }
}

double ConcavePenalty::value(const VectorRef& y) const {
  check_domain(y);
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) total += phi(y[i]);
  return total;
}

Vector ConcavePenalty::weight(const VectorRef& y) const {
  check_domain(y);
  Vector w(y.size());
  for (Index i = 0; i < y.size(); ++i) w[i] = slope(y[i]);
  return w;
}

std::string ConcavePenalty::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case PenaltyKind::LpPower:
      out << "lp(p=" << p_ << ", eps=" << epsilon_ << ")";
      break;
    case PenaltyKind::Logarithm:
      out << "log(eps=" << epsilon_ << ")";
      break;
    case PenaltyKind::CappedL1:
      out << "capped_l1(theta=" << theta_ << ")";
      break;
    case PenaltyKind::Identity:
      out << "identity";
      break;
  }
  return out.str();
}

double EpsilonSchedule::at(int k) const { return epsilon0 / std::pow(rho, k); }

void EpsilonSchedule::validate() const {
  if (!(epsilon0 > 0.0)) throw ParameterError("epsilon schedule needs epsilon0 > 0");
  if (!(rho > 1.0)) throw ParameterError("epsilon schedule needs rho > 1");
}

ConcavePenalty epsilon_step(const ConcavePenalty& pen, const EpsilonSchedule& sched) {
  if (!pen.uses_epsilon()) return pen;
  return pen.with_epsilon(pen.epsilon() / sched.rho);
}

}  // namespace pire

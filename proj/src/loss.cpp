#include "pire/loss.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <variant>

#include "kernels.hpp"
#include "pire/errors.hpp"

namespace pire {

namespace {

struct LeastSquaresData {
  Matrix A;
  Matrix B;
};

struct LogisticData {
  Matrix A;
  Vector labels;
};

struct MultiTaskData {
  std::vector<Task> tasks;
  Index features = 0;
};

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

Matrix gather_columns(const Matrix& M, const std::vector<Index>& cols) {
  Matrix out(M.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = M.col(cols[k]);
  return out;
}

std::vector<Index> sorted_unique(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

struct SmoothLoss::Data {
  std::variant<LeastSquaresData, LogisticData, MultiTaskData> payload;
  Index dim = 0;
};

double spectral_norm_sq(const Matrix& M, std::uint64_t seed) {
  if (M.size() == 0 || M.isZero(0.0)) return 0.0;
  std::mt19937_64 gen(seed);
  Vector v(M.cols());
  for (Index i = 0; i < v.size(); ++i) {
    v[i] = static_cast<double>(gen() >> 11) * 0x1.0p-52 - 1.0;
  }
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < 500; ++it) {
    const Vector u = M * v;
    const Vector w = M.transpose() * u;
    const double norm = w.norm();
    if (norm == 0.0) break;
    const double previous = estimate;
    estimate = norm;
    v = w / norm;
    if (it > 0 && std::abs(estimate - previous) <= 1e-6 * estimate) break;
  }
  return estimate * kSpectralSafetyFactor;
}

SmoothLoss SmoothLoss::least_squares(Matrix A, Vector b) {
  Matrix B = b;
  return least_squares(std::move(A), std::move(B));
}

SmoothLoss SmoothLoss::least_squares(Matrix A, Matrix B) {
  if (A.rows() == 0 || A.cols() == 0) throw DimensionError("least squares: empty design matrix");
  if (A.rows() != B.rows()) {
    throw DimensionError("least squares: A has " + std::to_string(A.rows()) +
                         " rows but the right-hand side has " + std::to_string(B.rows()));
  }
  if (B.cols() == 0) throw DimensionError("least squares: empty right-hand side");
  auto data = std::make_shared<Data>();
  data->dim = A.cols() * B.cols();
  data->payload = LeastSquaresData{std::move(A), std::move(B)};
  return SmoothLoss(std::move(data));
}

SmoothLoss SmoothLoss::logistic(Matrix A, Vector labels) {
  if (A.rows() == 0 || A.cols() == 0) throw DimensionError("logistic: empty sample matrix");
  if (A.rows() != labels.size()) throw DimensionError("logistic: one label per sample required");
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0) {
      throw ParameterError("logistic labels must be +1 or -1");
    }
  }
  auto data = std::make_shared<Data>();
  data->dim = A.cols();
  data->payload = LogisticData{std::move(A), std::move(labels)};
  return SmoothLoss(std::move(data));
}

SmoothLoss SmoothLoss::multitask(std::vector<Task> tasks) {
  if (tasks.empty()) throw DimensionError("multi-task loss needs at least one task");
  const Index d = tasks.front().X.cols();
  if (d == 0) throw DimensionError("multi-task loss: zero features");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& task = tasks[i];
    if (task.X.rows() == 0) throw DimensionError("task " + std::to_string(i) + " is empty");
    if (task.X.cols() != d) {
      throw DimensionError("task " + std::to_string(i) + " has " + std::to_string(task.X.cols()) +
                           " features, expected " + std::to_string(d));
    }
    if (task.y.size() != task.X.rows()) {
      throw DimensionError("task " + std::to_string(i) + ": label count does not match samples");
    }
  }
  auto data = std::make_shared<Data>();
  data->dim = d * static_cast<Index>(tasks.size());
  data->payload = MultiTaskData{std::move(tasks), d};
  return SmoothLoss(std::move(data));
}

LossKind SmoothLoss::kind() const {
  switch (data_->payload.index()) {
    case 0:
      return LossKind::LeastSquares;
    case 1:
      return LossKind::Logistic;
    default:
      return LossKind::MultiTaskLS;
  }
}

Index SmoothLoss::dim() const { return data_->dim; }

const Matrix& SmoothLoss::design() const {
  if (const auto* ls = std::get_if<LeastSquaresData>(&data_->payload)) return ls->A;
  if (const auto* lg = std::get_if<LogisticData>(&data_->payload)) return lg->A;
  throw ParameterError("multi-task loss has no single design matrix");
}

const Matrix& SmoothLoss::rhs() const {
  if (const auto* ls = std::get_if<LeastSquaresData>(&data_->payload)) return ls->B;
  throw ParameterError("only the least-squares loss has a right-hand side");
}

const Vector& SmoothLoss::labels() const {
  if (const auto* lg = std::get_if<LogisticData>(&data_->payload)) return lg->labels;
  throw ParameterError("only the logistic loss has labels");
}

Index SmoothLoss::variable_cols() const {
  if (const auto* ls = std::get_if<LeastSquaresData>(&data_->payload)) return ls->B.cols();
  if (const auto* mt = std::get_if<MultiTaskData>(&data_->payload)) {
    return static_cast<Index>(mt->tasks.size());
  }
  return 1;
}

const std::vector<Task>& SmoothLoss::tasks() const {
  if (const auto* mt = std::get_if<MultiTaskData>(&data_->payload)) return mt->tasks;
  throw ParameterError("only the multi-task loss has tasks");
}

void SmoothLoss::check_dim(Index size) const {
  if (size != data_->dim) {
    throw DimensionError("loss expects a variable of dimension " + std::to_string(data_->dim) +
                         ", got " + std::to_string(size));
  }
}

SmoothLoss::State SmoothLoss::evaluate(const VectorRef& x) const {
  check_dim(x.size());
  State state;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LeastSquaresData>) {
          const Index t = d.B.cols();
          const Index m = d.A.rows();
          state.residual = -d.B;
          for (Index c = 0; c < t; ++c) {
            double* r = state.residual.col(c).data();
            for (Index j = 0; j < d.A.cols(); ++j) {
              const double v = x[j * t + c];
              if (v != 0.0) kernels::axpy(v, d.A.col(j).data(), r, m);
            }
          }
        } else if constexpr (std::is_same_v<T, LogisticData>) {
          const Index n = d.A.rows();
          state.margins = Vector::Zero(n);
          for (Index j = 0; j < d.A.cols(); ++j) {
            if (x[j] != 0.0) kernels::axpy(x[j], d.A.col(j).data(), state.margins.data(), n);
          }
          state.coef.resize(n);
          for (Index i = 0; i < n; ++i) {
            state.coef[i] = -d.labels[i] * sigmoid(-d.labels[i] * state.margins[i]) /
                            static_cast<double>(n);
          }
        } else {
          const Index m = static_cast<Index>(d.tasks.size());
          state.task_residual.resize(d.tasks.size());
          for (Index i = 0; i < m; ++i) {
            const auto& task = d.tasks[static_cast<std::size_t>(i)];
            Vector& r = state.task_residual[static_cast<std::size_t>(i)];
            r = -task.y;
            for (Index j = 0; j < d.features; ++j) {
              const double v = x[j * m + i];
              if (v != 0.0) kernels::axpy(v, task.X.col(j).data(), r.data(), r.size());
            }
          }
        }
      },
      data_->payload);
  return state;
}

double SmoothLoss::value(const State& state) const {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LeastSquaresData>) {
          double total = 0.0;
          for (Index c = 0; c < state.residual.cols(); ++c) {
            total += kernels::squared_norm(state.residual.col(c).data(), state.residual.rows());
          }
          return 0.5 * total;
        } else if constexpr (std::is_same_v<T, LogisticData>) {
          double total = 0.0;
          for (Index i = 0; i < state.margins.size(); ++i) {
            total += softplus(-d.labels[i] * state.margins[i]);
          }
          return total / static_cast<double>(state.margins.size());
        } else {
          const double m = static_cast<double>(d.tasks.size());
          double total = 0.0;
          for (std::size_t i = 0; i < d.tasks.size(); ++i) {
            const Vector& r = state.task_residual[i];
            total += kernels::squared_norm(r.data(), r.size()) / (m * static_cast<double>(r.size()));
          }
          return total;
        }
      },
      data_->payload);
}

void SmoothLoss::gradient_at(const State& state, std::span<const Index> indices,
                             Eigen::Ref<Vector> out) const {
  check_dim(out.size());
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LeastSquaresData>) {
          const Index t = d.B.cols();
          const Index m = d.A.rows();
          for (Index i : indices) {
            out[i] = kernels::dot(d.A.col(i / t).data(), state.residual.col(i % t).data(), m);
          }
        } else if constexpr (std::is_same_v<T, LogisticData>) {
          const Index n = d.A.rows();
          for (Index i : indices) out[i] = kernels::dot(d.A.col(i).data(), state.coef.data(), n);
        } else {
          const Index m = static_cast<Index>(d.tasks.size());
          for (Index i : indices) {
            const Index task_id = i % m;
            const auto& task = d.tasks[static_cast<std::size_t>(task_id)];
            const Vector& r = state.task_residual[static_cast<std::size_t>(task_id)];
            const double scale = 2.0 / (static_cast<double>(m) * static_cast<double>(r.size()));
            out[i] = scale * kernels::dot(task.X.col(i / m).data(), r.data(), r.size());
          }
        }
      },
      data_->payload);
}

void SmoothLoss::shift(State& state, std::span<const Index> indices, const VectorRef& from,
                       const VectorRef& to) const {
  check_dim(from.size());
  check_dim(to.size());
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LeastSquaresData>) {
          const Index t = d.B.cols();
          const Index m = d.A.rows();
          for (Index i : indices) {
            const double delta = to[i] - from[i];
            if (delta != 0.0) {
              kernels::axpy(delta, d.A.col(i / t).data(), state.residual.col(i % t).data(), m);
            }
          }
        } else if constexpr (std::is_same_v<T, LogisticData>) {
          const Index n = d.A.rows();
          for (Index i : indices) {
            const double delta = to[i] - from[i];
            if (delta != 0.0) kernels::axpy(delta, d.A.col(i).data(), state.margins.data(), n);
          }
          for (Index k = 0; k < n; ++k) {
            state.coef[k] =
                -d.labels[k] * sigmoid(-d.labels[k] * state.margins[k]) / static_cast<double>(n);
          }
        } else {
          const Index m = static_cast<Index>(d.tasks.size());
          for (Index i : indices) {
            const double delta = to[i] - from[i];
            if (delta == 0.0) continue;
            const auto& task = d.tasks[static_cast<std::size_t>(i % m)];
            Vector& r = state.task_residual[static_cast<std::size_t>(i % m)];
            kernels::axpy(delta, task.X.col(i / m).data(), r.data(), r.size());
          }
        }
      },
      data_->payload);
}

double SmoothLoss::value(const VectorRef& x) const { return value(evaluate(x)); }

Vector SmoothLoss::gradient(const VectorRef& x) const {
  const State state = evaluate(x);
  Vector g(dim());
  std::vector<Index> all(static_cast<std::size_t>(dim()));
  for (Index i = 0; i < dim(); ++i) all[static_cast<std::size_t>(i)] = i;
  gradient_at(state, all, g);
  return g;
}

Vector SmoothLoss::block_gradient(const VectorRef& x, Index s, const BlockStructure& blocks) const {
  if (blocks.dim() != dim()) throw DimensionError("block structure does not match the loss");
  const auto idx = blocks.block(s);
  const State state = evaluate(x);
  Vector full = Vector::Zero(dim());
  gradient_at(state, idx, full);
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = full[idx[k]];
  return out;
}

double SmoothLoss::lipschitz() const { return block_lipschitz(BlockStructure::single(dim()))[0]; }

std::vector<double> SmoothLoss::block_lipschitz(const BlockStructure& blocks) const {
  if (blocks.dim() != dim()) {
    throw DimensionError("block structure has dimension " + std::to_string(blocks.dim()) +
                         ", loss has " + std::to_string(dim()));
  }
  std::vector<double> out;
  for (Index s = 0; s < blocks.count(); ++s) {
    const auto idx = blocks.block(s);
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, LeastSquaresData>) {
            const Index t = d.B.cols();
            std::vector<Index> cols;
            for (Index i : idx) cols.push_back(i / t);
            out.push_back(spectral_norm_sq(gather_columns(d.A, sorted_unique(std::move(cols)))));
          } else if constexpr (std::is_same_v<T, LogisticData>) {
            std::vector<Index> cols(idx.begin(), idx.end());
            const double n = static_cast<double>(d.A.rows());
            out.push_back(spectral_norm_sq(gather_columns(d.A, sorted_unique(std::move(cols)))) /
                          (4.0 * n));
          } else {
            // The Hessian is block diagonal across tasks, so the constant of a
            // block is the largest constant among the task pieces it touches.
            const Index m = static_cast<Index>(d.tasks.size());
            std::vector<std::vector<Index>> per_task(d.tasks.size());
            for (Index i : idx) per_task[static_cast<std::size_t>(i % m)].push_back(i / m);
            double best = 0.0;
            for (std::size_t task_id = 0; task_id < d.tasks.size(); ++task_id) {
              if (per_task[task_id].empty()) continue;
              const auto& task = d.tasks[task_id];
              const double norm_sq =
                  spectral_norm_sq(gather_columns(task.X, sorted_unique(per_task[task_id])));
              best = std::max(best, 2.0 * norm_sq /
                                        (static_cast<double>(m) * static_cast<double>(task.X.rows())));
            }
            out.push_back(best);
          }
        },
        data_->payload);
  }
  return out;
}

}  // namespace pire

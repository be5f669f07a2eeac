#include "pire/bench/csv_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "pire/errors.hpp"

namespace pire::bench {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::string where(const std::string& path, long line) {
  return path + ":" + std::to_string(line) + ": ";
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& field : split(line)) {
      double v;
      if (!parse_double(field, v)) {
        throw DataError(where(path, line_no) + "malformed number '" + field + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(where(path, line_no) + "expected " + std::to_string(rows.front().size()) +
                      " fields, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return M;
}

Vector read_vector_csv(const std::string& path) {
  const Matrix M = read_matrix_csv(path);
  if (M.cols() != 1) throw DataError(path + ": expected a single column");
  return M.col(0);
}

void write_matrix_csv(const std::string& path, const Matrix& M) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
}

Dataset load_csv_dataset(const std::string& path, const CsvSchema& schema) {
  std::ifstream in = open_input(path);
  std::string line;
  long line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw DataError(path + ": missing header");

  const auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(path + ": no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t label_col = column(schema.label_column);
  const std::size_t task_col = column(schema.task_column);
  std::vector<std::size_t> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != label_col && c != task_col) feature_cols.push_back(c);
    }
  } else {
    for (const auto& name : schema.feature_columns) feature_cols.push_back(column(name));
  }
  if (feature_cols.empty()) throw DataError(path + ": no feature columns");

  std::map<long, std::vector<std::vector<double>>> rows;
  std::map<long, std::vector<double>> labels;
  for (long id : schema.task_ids) {
    rows[id];
    labels[id];
  }
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw DataError(where(path, line_no) + "expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    double task_value;
    if (!parse_double(fields[task_col], task_value) || task_value != static_cast<double>(static_cast<long>(task_value))) {
      throw DataError(where(path, line_no) + "task id '" + fields[task_col] + "' is not an integer");
    }
    const long id = static_cast<long>(task_value);
    if (!schema.task_ids.empty() && !rows.count(id)) {
      throw DataError(where(path, line_no) + "unknown task id " + std::to_string(id));
    }
    std::vector<double> features;
    for (std::size_t c : feature_cols) {
      double v;
      if (!parse_double(fields[c], v)) {
        throw DataError(where(path, line_no) + "malformed number '" + fields[c] + "'");
      }
      features.push_back(v);
    }
    double label;
    if (!parse_double(fields[label_col], label)) {
      throw DataError(where(path, line_no) + "malformed label '" + fields[label_col] + "'");
    }
    rows[id].push_back(std::move(features));
    labels[id].push_back(label);
    any = true;
  }
  if (!any) throw DataError(path + ": no data rows");

  Dataset data;
  const auto d = static_cast<Index>(feature_cols.size());
  for (const auto& [id, task_rows] : rows) {
    if (task_rows.empty()) throw DataError(path + ": task " + std::to_string(id) + " has no rows");
    Task task;
    task.X.resize(static_cast<Index>(task_rows.size()), d);
    task.y.resize(static_cast<Index>(task_rows.size()));
    for (std::size_t r = 0; r < task_rows.size(); ++r) {
      for (Index j = 0; j < d; ++j) task.X(static_cast<Index>(r), j) = task_rows[r][static_cast<std::size_t>(j)];
      task.y[static_cast<Index>(r)] = labels[id][r];
    }
    data.task_ids.push_back(id);
    data.row_counts.push_back(task.X.rows());
    data.tasks.push_back(std::move(task));
  }
  return data;
}

void write_csv_dataset(const std::string& path, const std::vector<Task>& tasks,
                       const std::vector<long>& task_ids) {
  if (tasks.empty()) throw DataError("no tasks to write");
  if (!task_ids.empty() && task_ids.size() != tasks.size()) {
    throw DataError("one task id per task required");
  }
  const Index d = tasks.front().X.cols();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "task";
  for (Index j = 0; j < d; ++j) out << ",f" << j;
  out << ",y\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& task = tasks[i];
    if (task.X.cols() != d) throw DataError("tasks disagree on the feature count");
    const long id = task_ids.empty() ? static_cast<long>(i) : task_ids[i];
    for (Index r = 0; r < task.X.rows(); ++r) {
      out << id;
      for (Index j = 0; j < d; ++j) out << ',' << format_double(task.X(r, j));
      out << ',' << format_double(task.y[r]) << '\n';
    }
  }
}

}  // namespace pire::bench

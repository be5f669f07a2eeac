#pragma once

#include <string>
#include <vector>

#include "pire/loss.hpp"
#include "pire/types.hpp"

namespace pire::bench {

// Matrices: one row per line, comma-separated decimals, no header.
// Vectors: a single column.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& M);
Vector read_vector_csv(const std::string& path);

/// Column layout of a multi-task dataset file. The file has a header row;
/// columns are referred to by name.
struct CsvSchema {
  std::vector<std::string> feature_columns;  // empty: every other column
  std::string label_column = "y";
  std::string task_column = "task";
  std::vector<long> task_ids;  // empty: accept any integer id
};

struct Dataset {
  std::vector<Task> tasks;      // ordered by ascending task id
  std::vector<long> task_ids;
  std::vector<Index> row_counts;
};

Dataset load_csv_dataset(const std::string& path, const CsvSchema& schema);

// Header "task,f0,...,f{d-1},y"; loads back with the default schema.
void write_csv_dataset(const std::string& path, const std::vector<Task>& tasks,
                       const std::vector<long>& task_ids = {});

}  // namespace pire::bench

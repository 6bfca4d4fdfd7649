#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eiwv/rng.hpp"

namespace eiwv::dataset {

// Sparse worker x task label records. Workers and tasks are kept by index
// after load; the original string ids are retained for round-tripping.
struct ResponseTable {
  std::vector<std::string> workers;
  std::vector<std::string> tasks;
  int num_classes = 0;

  // responses_by_task[t] = list of (worker index, label); the per-worker view
  // mirrors it for batch assembly.
  std::vector<std::vector<std::pair<std::size_t, int>>> responses_by_task;
  std::vector<std::vector<std::pair<std::size_t, int>>> responses_by_worker;

  std::size_t num_workers() const { return workers.size(); }
  std::size_t num_tasks() const { return tasks.size(); }
  std::size_t num_responses() const;

  std::optional<int> label_of(std::size_t worker, std::size_t task) const;
  bool dense() const;  // every worker labeled every task
  void validate() const;
};

/// task index -> gold label; tasks without gold hold -1.
struct GoldLabels {
  std::vector<int> by_task;  // aligned with ResponseTable.tasks
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  bool covers(std::size_t task) const {
    return task < by_task.size() && by_task[task] >= 0;
  }
};

/// One timestep's task sample and the dataset-induced assignment.
struct TaskBatch {
  long long timestep = 0;
  std::vector<std::size_t> task_indices;               // size m, distinct
  std::vector<std::vector<std::size_t>> worker_tasks;  // per worker, indices into task_indices
  std::vector<std::size_t> tasks_per_worker;           // m_{i,t}

  std::size_t assignment_pairs() const;
};

ResponseTable load_responses(const std::string& path, int num_classes_override = 0);
void save_responses(const ResponseTable& table, const std::string& path);

// Gold rows are `task_id,label`. When `table` is given, task ids must exist in
// it and the result is index-aligned; labels are checked against num_classes
// when known.
GoldLabels load_gold(const std::string& path, const ResponseTable& table);
void save_gold(const GoldLabels& gold, const ResponseTable& table, const std::string& path);

TaskBatch sample_batch(const ResponseTable& table, std::size_t m, long long timestep, Rng& rng);

struct SynthSpec {
  std::size_t n_workers = 0;
  std::size_t n_tasks = 0;
  int num_classes = 2;
  double accuracy_lo = 0.5;
  double accuracy_hi = 1.0;
  double density = 1.0;
};

// Synthetic crowd labels: gold uniform over classes; each worker answers with
// its drawn accuracy, wrong answers uniform over the other classes; every
// (worker, task) pair kept with probability `density`. Rows/columns that end
// up empty get one forced response so table invariants hold.
std::pair<ResponseTable, GoldLabels> synth_generate(const SynthSpec& spec, Rng& rng);

}  // namespace eiwv::dataset

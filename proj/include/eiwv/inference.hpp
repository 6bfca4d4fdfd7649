#pragma once

#include <cstddef>
#include <vector>

namespace eiwv::inference {

/// One timestep's responses, indexed locally: task slot -> (worker, label).
struct ResponseBatch {
  int num_classes = 0;
  std::size_t num_workers = 0;  // global worker count, indices below this
  std::vector<std::vector<std::pair<std::size_t, int>>> responses;  // per task slot

  std::size_t num_tasks() const { return responses.size(); }
};

struct InferenceResult {
  std::vector<std::vector<double>> posteriors;  // per included task slot, sums to 1
  std::vector<int> hard_labels;                 // argmax, ties to the lowest label
  std::vector<std::size_t> task_slots;          // slots that had responses
  std::vector<double> worker_accuracy;          // estimated accuracy per worker
  std::vector<bool> worker_seen;                // worker had >= 1 response in the batch
  double batch_confidence = 0.0;                // mean max-posterior over included tasks
  bool converged = true;
  std::size_t iterations = 0;
  std::size_t skipped_tasks = 0;                // slots with zero responses
  std::vector<double> loglik_trace;             // EM objective per iteration

  // Worker confusion matrices (row: true class, col: reported), EM only.
  std::vector<std::vector<double>> confusion;
  std::vector<double> class_prior;
};

InferenceResult majority_vote(const ResponseBatch& batch);

struct EmOptions {
  std::size_t max_iters = 100;
  double tol = 1e-6;  // max absolute posterior change
};

// Dawid-Skene EM with full per-worker confusion matrices, Laplace add-1
// smoothing on the confusion counts, initialized from majority vote.
// Posteriors are computed in log space.
InferenceResult ds_em(const ResponseBatch& batch, const EmOptions& opts = {});

// Carry-forward state update: participating workers take the new estimate,
// everyone else keeps the previous value; entries stay in [0,1].
std::vector<double> update_state(const std::vector<double>& prev, const InferenceResult& result);

}  // namespace eiwv::inference

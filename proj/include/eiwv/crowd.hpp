#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eiwv/dataset.hpp"
#include "eiwv/rng.hpp"

namespace eiwv::crowd {

struct Worker {
  std::size_t id = 0;
  double base_cost = 1.0;  // in [1, h]
  double epsilon = 0.0;    // rationality slack on the effort decision
};

struct EffortDecision {
  std::size_t worker = 0;
  double effort = 0.0;     // in {0} U [c_i, h]
  double cost = 0.0;       // effort * tasks assigned
  bool participates = false;
};

struct CollusionSpec {
  bool enabled = false;
  long long rate = 50;          // onset every `rate` timesteps
  double group_fraction = 1.0;  // leading fraction of the crowd that colludes
};

// Group membership, activation schedule and the agreed per-task label. The
// agreed response is gold+1 mod K when gold exists, otherwise a fixed
// pseudorandom label per task, so members always match each other.
class CollusionController {
 public:
  CollusionController() = default;
  CollusionController(const CollusionSpec& spec, std::size_t n_workers);

  // Onset when t hits the schedule; stop when the posted payments give every
  // member at most p_min + tol.
  void tick(long long t, std::span<const double> payments, double p_min, double tol);

  bool active() const { return active_; }
  bool member(std::size_t worker) const;
  int agreed_label(std::size_t task, const dataset::GoldLabels& gold, int num_classes) const;
  const std::vector<std::size_t>& group() const { return group_; }
  void reset() { active_ = false; }

 private:
  CollusionSpec spec_;
  std::vector<std::size_t> group_;
  std::vector<bool> is_member_;
  bool active_ = false;
};

class Crowd {
 public:
  Crowd() = default;
  // Base costs drawn uniformly from [1, h]; hidden from the platform.
  Crowd(std::size_t n, double max_cost, double epsilon, const CollusionSpec& collusion,
        Rng& rng);

  std::size_t size() const { return workers_.size(); }
  double max_cost() const { return max_cost_; }
  const Worker& worker(std::size_t i) const { return workers_[i]; }
  CollusionController& collusion() { return collusion_; }
  const CollusionController& collusion() const { return collusion_; }

 private:
  std::vector<Worker> workers_;
  double max_cost_ = 10.0;
  CollusionController collusion_;
};

// Greedy one-step effort choice: work at the base cost when the posted payment
// covers it over the assigned tasks, otherwise stay out. Epsilon-noise is
// added to the decision and snapped back into {0} U [c, h].
EffortDecision best_effort(const Worker& worker, double payment, std::size_t tasks_assigned,
                           double max_cost, Rng& rng);

// Label emission: the dataset label with probability effort/h, otherwise a
// uniform label. Active colluders always emit the agreed label instead.
int respond(const Worker& worker, std::size_t task, double effort, int dataset_label,
            int num_classes, double max_cost, const CollusionController& collusion,
            const dataset::GoldLabels& gold, Rng& rng);

}  // namespace eiwv::crowd

#include "eiwv/crowd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eiwv::crowd {

CollusionController::CollusionController(const CollusionSpec& spec, std::size_t n_workers)
    : spec_(spec), is_member_(n_workers, false) {
  if (spec.enabled && spec.rate < 1)
    throw std::invalid_argument("collusion rate must be >= 1");
  if (spec.group_fraction < 0.0 || spec.group_fraction > 1.0)
    throw std::invalid_argument("collusion group fraction must be in [0,1]");
  if (!spec.enabled) return;
  const auto g = std::size_t(std::llround(spec.group_fraction * double(n_workers)));
  for (std::size_t i = 0; i < std::min(g, n_workers); ++i) {
    group_.push_back(i);
    is_member_[i] = true;
  }
}

void CollusionController::tick(long long t, std::span<const double> payments, double p_min,
                               double tol) {
  if (!spec_.enabled || group_.empty()) return;
  if (t % spec_.rate == 0) active_ = true;
  if (active_) {
    bool all_min = true;
    for (std::size_t w : group_) {
      if (payments[w] > p_min + tol) {
        all_min = false;
        break;
      }
    }
    if (all_min) active_ = false;
  }
}

bool CollusionController::member(std::size_t worker) const {
  return worker < is_member_.size() && is_member_[worker];
}

int CollusionController::agreed_label(std::size_t task, const dataset::GoldLabels& gold,
                                      int num_classes) const {
  if (gold.covers(task)) return (gold.by_task[task] + 1) % num_classes;
  // fixed per-task pseudorandom label, stable across members and timesteps
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ (std::uint64_t(task) * 0xbf58476d1ce4e5b9ull);
  h ^= h >> 31;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 29;
  return int(h % std::uint64_t(num_classes));
}

Crowd::Crowd(std::size_t n, double max_cost, double epsilon, const CollusionSpec& collusion,
             Rng& rng)
    : max_cost_(max_cost) {
  if (n < 1) throw std::invalid_argument("crowd: need at least one worker");
  if (max_cost < 1.0) throw std::invalid_argument("crowd: max effort cost must be >= 1");
  if (epsilon < 0.0) throw std::invalid_argument("crowd: epsilon must be >= 0");
  workers_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    workers_[i].id = i;
    workers_[i].base_cost = uniform(rng, 1.0, max_cost);
    workers_[i].epsilon = epsilon;
  }
  collusion_ = CollusionController(collusion, n);
}

EffortDecision best_effort(const Worker& worker, double payment, std::size_t tasks_assigned,
                           double max_cost, Rng& rng) {
  if (payment < 0.0) throw std::invalid_argument("best_effort: payment must be >= 0");
  EffortDecision d;
  d.worker = worker.id;
  if (tasks_assigned == 0) return d;

  const double c = worker.base_cost;
  double target = (payment >= c * double(tasks_assigned)) ? c : 0.0;
  if (worker.epsilon > 0.0) {
    target += uniform(rng, -worker.epsilon, worker.epsilon);
    // snap into {0} U [c, h]: the nearer of staying out or working at c
    if (target <= 0.0)
      target = 0.0;
    else if (target < c)
      target = (target < c - target) ? 0.0 : c;
    else
      target = std::min(target, max_cost);
  }
  d.effort = target;
  d.participates = target > 0.0;
  d.cost = d.effort * double(tasks_assigned);
  return d;
}

int respond(const Worker& worker, std::size_t task, double effort, int dataset_label,
            int num_classes, double max_cost, const CollusionController& collusion,
            const dataset::GoldLabels& gold, Rng& rng) {
  if (collusion.active() && collusion.member(worker.id))
    return collusion.agreed_label(task, gold, num_classes);
  if (uniform(rng, 0.0, 1.0) < effort / max_cost) return dataset_label;
  return int(uniform_index(rng, num_classes));
}

}  // namespace eiwv::crowd

#include "eiwv/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eiwv::inference {

namespace {

int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (int k = 1; k < int(v.size()); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

// estimated accuracy = prior-weighted mean of the confusion diagonal
double diag_accuracy(const std::vector<double>& confusion, const std::vector<double>& prior,
                     int num_classes) {
  double acc = 0.0;
  for (int k = 0; k < num_classes; ++k) acc += prior[k] * confusion[k * num_classes + k];
  return acc;
}

}  // namespace

InferenceResult majority_vote(const ResponseBatch& batch) {
  const int num_classes = batch.num_classes;
  InferenceResult result;
  result.worker_accuracy.assign(batch.num_workers, 0.0);
  result.worker_seen.assign(batch.num_workers, false);

  for (std::size_t slot = 0; slot < batch.responses.size(); ++slot) {
    const auto& votes = batch.responses[slot];
    if (votes.empty()) {
      ++result.skipped_tasks;
      continue;
    }
    std::vector<double> hist(num_classes, 0.0);
    for (const auto& [worker, label] : votes) {
      hist[label] += 1.0;
      result.worker_seen[worker] = true;
    }
    for (auto& h : hist) h /= double(votes.size());
    result.task_slots.push_back(slot);
    result.hard_labels.push_back(argmax_lowest(hist));
    result.posteriors.push_back(std::move(hist));
  }

  // per-worker agreement rate with the voted labels
  std::vector<double> agree(batch.num_workers, 0.0), total(batch.num_workers, 0.0);
  for (std::size_t i = 0; i < result.task_slots.size(); ++i) {
    for (const auto& [worker, label] : batch.responses[result.task_slots[i]]) {
      total[worker] += 1.0;
      if (label == result.hard_labels[i]) agree[worker] += 1.0;
    }
  }
  for (std::size_t w = 0; w < batch.num_workers; ++w)
    if (total[w] > 0.0) result.worker_accuracy[w] = agree[w] / total[w];

  double conf = 0.0;
  for (const auto& post : result.posteriors) conf += *std::max_element(post.begin(), post.end());
  result.batch_confidence = result.posteriors.empty() ? 0.0 : conf / double(result.posteriors.size());
  return result;
}

InferenceResult ds_em(const ResponseBatch& batch, const EmOptions& opts) {
  if (opts.max_iters < 1) throw std::invalid_argument("ds_em: max_iters must be >= 1");
  const int K = batch.num_classes;
  InferenceResult result = majority_vote(batch);
  const std::size_t T = result.task_slots.size();
  if (T == 0) return result;

  const std::size_t W = batch.num_workers;
  std::vector<std::vector<double>>& post = result.posteriors;
  std::vector<double> prior(K, 0.0);
  std::vector<std::vector<double>> confusion(W, std::vector<double>(std::size_t(K) * K, 0.0));

  // responses grouped per worker over included slots only
  std::vector<std::vector<std::pair<std::size_t, int>>> by_worker(W);
  for (std::size_t i = 0; i < T; ++i)
    for (const auto& [worker, label] : batch.responses[result.task_slots[i]])
      by_worker[worker].emplace_back(i, label);

  auto m_step = [&] {
    for (int k = 0; k < K; ++k) prior[k] = 0.0;
    for (std::size_t i = 0; i < T; ++i)
      for (int k = 0; k < K; ++k) prior[k] += post[i][k];
    for (int k = 0; k < K; ++k) prior[k] /= double(T);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (W >= 512)
#endif
    for (long long wi = 0; wi < (long long)W; ++wi) {
      const auto w = std::size_t(wi);
      auto& conf = confusion[w];
      std::fill(conf.begin(), conf.end(), 1.0);  // Laplace add-1
      for (const auto& [slot, label] : by_worker[w])
        for (int k = 0; k < K; ++k) conf[k * K + label] += post[slot][k];
      for (int k = 0; k < K; ++k) {
        double row = 0.0;
        for (int l = 0; l < K; ++l) row += conf[k * K + l];
        for (int l = 0; l < K; ++l) conf[k * K + l] /= row;
      }
    }
  };

  // E-step in log space; per-task scratch keeps the parallel loop free of
  // shared writes and the serial reductions bit-identical across thread counts.
  std::vector<double> loglik_per_task(T);
  std::vector<double> change_per_task(T);
  auto e_step = [&](double& max_change) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (T >= 256)
#endif
    for (long long ti = 0; ti < (long long)T; ++ti) {
      const auto i = std::size_t(ti);
      std::vector<double> logp(K);
      for (int k = 0; k < K; ++k)
        logp[k] = prior[k] > 0.0 ? std::log(prior[k]) : -1e300;
      for (const auto& [worker, label] : batch.responses[result.task_slots[i]])
        for (int k = 0; k < K; ++k) logp[k] += std::log(confusion[worker][k * K + label]);
      const double mx = *std::max_element(logp.begin(), logp.end());
      double z = 0.0;
      for (int k = 0; k < K; ++k) z += std::exp(logp[k] - mx);
      loglik_per_task[i] = mx + std::log(z);
      double task_change = 0.0;
      for (int k = 0; k < K; ++k) {
        const double p = std::exp(logp[k] - mx) / z;
        task_change = std::max(task_change, std::abs(p - post[i][k]));
        post[i][k] = p;
      }
      change_per_task[i] = task_change;
    }
    double ll = 0.0;
    max_change = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
      ll += loglik_per_task[i];
      max_change = std::max(max_change, change_per_task[i]);
    }
    return ll;
  };

  result.converged = false;
  for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
    m_step();
    double max_change = 0.0;
    const double ll = e_step(max_change);
    result.loglik_trace.push_back(ll);
    result.iterations = iter + 1;
    if (max_change < opts.tol) {
      result.converged = true;
      break;
    }
  }

  for (std::size_t i = 0; i < T; ++i) result.hard_labels[i] = argmax_lowest(post[i]);
  for (std::size_t w = 0; w < W; ++w)
    if (result.worker_seen[w])
      result.worker_accuracy[w] = diag_accuracy(confusion[w], prior, K);

  double conf_sum = 0.0;
  for (const auto& p : post) conf_sum += *std::max_element(p.begin(), p.end());
  result.batch_confidence = conf_sum / double(T);
  result.confusion = std::move(confusion);
  result.class_prior = std::move(prior);
  return result;
}

std::vector<double> update_state(const std::vector<double>& prev, const InferenceResult& result) {
  if (prev.size() != result.worker_seen.size())
    throw std::invalid_argument("update_state: state dimension mismatch");
  std::vector<double> next = prev;
  for (std::size_t w = 0; w < prev.size(); ++w)
    if (result.worker_seen[w])
      next[w] = std::clamp(result.worker_accuracy[w], 0.0, 1.0);
  return next;
}

}  // namespace eiwv::inference

#include "eiwv/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eiwv::dataset {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

int parse_label(const std::string& s, const std::string& path, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument("bad");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) +
                             ": malformed label '" + s + "'");
  }
}

}  // namespace

std::size_t ResponseTable::num_responses() const {
  std::size_t n = 0;
  for (const auto& row : responses_by_task) n += row.size();
  return n;
}

std::optional<int> ResponseTable::label_of(std::size_t worker, std::size_t task) const {
  for (const auto& [w, label] : responses_by_task[task])
    if (w == worker) return label;
  return std::nullopt;
}

bool ResponseTable::dense() const {
  for (const auto& row : responses_by_task)
    if (row.size() != workers.size()) return false;
  return true;
}

void ResponseTable::validate() const {
  if (num_classes <= 0) throw std::runtime_error("response table: num_classes must be positive");
  if (workers.empty() || tasks.empty())
    throw std::runtime_error("response table: empty dataset");
  if (responses_by_task.size() != tasks.size() || responses_by_worker.size() != workers.size())
    throw std::runtime_error("response table: index views out of sync");
  for (const auto& row : responses_by_task) {
    if (row.empty()) throw std::runtime_error("response table: task with no responses");
    for (const auto& [w, label] : row) {
      if (w >= workers.size()) throw std::runtime_error("response table: bad worker index");
      if (label < 0 || label >= num_classes)
        throw std::runtime_error("response table: label out of range");
    }
  }
  for (const auto& row : responses_by_worker)
    if (row.empty()) throw std::runtime_error("response table: worker with no responses");
}

std::size_t GoldLabels::size() const {
  std::size_t n = 0;
  for (int v : by_task)
    if (v >= 0) ++n;
  return n;
}

std::size_t TaskBatch::assignment_pairs() const {
  std::size_t n = 0;
  for (std::size_t c : tasks_per_worker) n += c;
  return n;
}

ResponseTable load_responses(const std::string& path, int num_classes_override) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open responses file: " + path);

  ResponseTable table;
  std::unordered_map<std::string, std::size_t> worker_index, task_index;
  std::vector<std::vector<std::pair<std::size_t, int>>> by_task;
  int max_label = -1;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected worker_id,task_id,label");
    const int label = parse_label(fields[2], path, line_no);

    auto [wit, winserted] = worker_index.try_emplace(fields[0], table.workers.size());
    if (winserted) {
      table.workers.push_back(fields[0]);
      table.responses_by_worker.emplace_back();
    }
    auto [tit, tinserted] = task_index.try_emplace(fields[1], table.tasks.size());
    if (tinserted) {
      table.tasks.push_back(fields[1]);
      by_task.emplace_back();
    }
    by_task[tit->second].emplace_back(wit->second, label);
    table.responses_by_worker[wit->second].emplace_back(tit->second, label);
    max_label = std::max(max_label, label);
  }
  if (table.workers.empty()) throw std::runtime_error("empty dataset: " + path);

  table.responses_by_task = std::move(by_task);
  table.num_classes = num_classes_override > 0 ? num_classes_override : max_label + 1;
  if (table.num_classes < 2) table.num_classes = 2;
  table.validate();
  return table;
}

void save_responses(const ResponseTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (std::size_t w = 0; w < table.num_workers(); ++w)
    for (const auto& [task, label] : table.responses_by_worker[w])
      out << table.workers[w] << ',' << table.tasks[task] << ',' << label << '\n';
}

GoldLabels load_gold(const std::string& path, const ResponseTable& table) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gold file: " + path);

  std::unordered_map<std::string, std::size_t> task_index;
  for (std::size_t t = 0; t < table.tasks.size(); ++t) task_index.emplace(table.tasks[t], t);

  GoldLabels gold;
  gold.by_task.assign(table.num_tasks(), -1);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 2 || fields[0].empty())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected task_id,label");
    const int label = parse_label(fields[1], path, line_no);
    const auto it = task_index.find(fields[0]);
    if (it == task_index.end())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown task id '" +
                               fields[0] + "'");
    if (table.num_classes > 0 && label >= table.num_classes)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": label " +
                               std::to_string(label) + " out of range for K=" +
                               std::to_string(table.num_classes));
    if (gold.by_task[it->second] >= 0)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": duplicate task id '" +
                               fields[0] + "'");
    gold.by_task[it->second] = label;
  }
  return gold;
}

void save_gold(const GoldLabels& gold, const ResponseTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (std::size_t t = 0; t < table.num_tasks(); ++t)
    if (gold.covers(t)) out << table.tasks[t] << ',' << gold.by_task[t] << '\n';
}

TaskBatch sample_batch(const ResponseTable& table, std::size_t m, long long timestep, Rng& rng) {
  if (m < 1 || m > table.num_tasks())
    throw std::invalid_argument("sample_batch: m must be in [1, num_tasks]");

  // partial Fisher-Yates over task indices, without replacement
  std::vector<std::size_t> pool(table.num_tasks());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  TaskBatch batch;
  batch.timestep = timestep;
  batch.task_indices.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = k + uniform_index(rng, pool.size() - k);
    std::swap(pool[k], pool[j]);
    batch.task_indices.push_back(pool[k]);
  }

  batch.worker_tasks.assign(table.num_workers(), {});
  batch.tasks_per_worker.assign(table.num_workers(), 0);
  for (std::size_t slot = 0; slot < batch.task_indices.size(); ++slot) {
    for (const auto& [worker, label] : table.responses_by_task[batch.task_indices[slot]]) {
      (void)label;
      batch.worker_tasks[worker].push_back(slot);
      ++batch.tasks_per_worker[worker];
    }
  }
  return batch;
}

std::pair<ResponseTable, GoldLabels> synth_generate(const SynthSpec& spec, Rng& rng) {
  if (spec.n_workers == 0 || spec.n_tasks == 0)
    throw std::invalid_argument("synth_generate: need at least one worker and one task");
  if (spec.num_classes < 2) throw std::invalid_argument("synth_generate: K must be >= 2");
  if (spec.accuracy_lo > spec.accuracy_hi || spec.accuracy_lo < 0.0 || spec.accuracy_hi > 1.0)
    throw std::invalid_argument("synth_generate: bad accuracy range");
  if (spec.density <= 0.0 || spec.density > 1.0)
    throw std::invalid_argument("synth_generate: density must be in (0,1]");

  ResponseTable table;
  table.num_classes = spec.num_classes;
  for (std::size_t w = 0; w < spec.n_workers; ++w) table.workers.push_back("w" + std::to_string(w));
  for (std::size_t t = 0; t < spec.n_tasks; ++t) table.tasks.push_back("t" + std::to_string(t));
  table.responses_by_task.assign(spec.n_tasks, {});
  table.responses_by_worker.assign(spec.n_workers, {});

  GoldLabels gold;
  gold.by_task.resize(spec.n_tasks);
  for (auto& g : gold.by_task) g = int(uniform_index(rng, spec.num_classes));

  std::vector<double> accuracy(spec.n_workers);
  for (auto& a : accuracy) a = uniform(rng, spec.accuracy_lo, spec.accuracy_hi);

  auto draw_label = [&](std::size_t w, std::size_t t) {
    if (uniform(rng, 0.0, 1.0) < accuracy[w]) return gold.by_task[t];
    // uniform over the K-1 wrong labels
    int wrong = int(uniform_index(rng, spec.num_classes - 1));
    if (wrong >= gold.by_task[t]) ++wrong;
    return wrong;
  };
  auto add = [&](std::size_t w, std::size_t t) {
    const int label = draw_label(w, t);
    table.responses_by_task[t].emplace_back(w, label);
    table.responses_by_worker[w].emplace_back(t, label);
  };

  for (std::size_t w = 0; w < spec.n_workers; ++w)
    for (std::size_t t = 0; t < spec.n_tasks; ++t)
      if (spec.density >= 1.0 || uniform(rng, 0.0, 1.0) < spec.density) add(w, t);

  // keep the at-least-one-response-per-row/column invariant under low density
  for (std::size_t w = 0; w < spec.n_workers; ++w)
    if (table.responses_by_worker[w].empty()) add(w, uniform_index(rng, spec.n_tasks));
  for (std::size_t t = 0; t < spec.n_tasks; ++t)
    if (table.responses_by_task[t].empty()) add(uniform_index(rng, spec.n_workers), t);

  table.validate();
  return {std::move(table), std::move(gold)};
}

}  // namespace eiwv::dataset

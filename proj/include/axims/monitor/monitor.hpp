// Copyright 2026 The AXIMS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "axims/attack/inject.hpp"
#include "axims/capture/capture.hpp"
#include "axims/errors.hpp"
#include "axims/features/pipeline.hpp"
#include "axims/nn/metrics.hpp"
#include "axims/nn/quantized.hpp"
#include "axims/sim/simulator.hpp"

namespace axims {

inline constexpr std::size_t kDefaultQueueCapacity = 4096;

struct DetectionVerdict {
  std::uint64_t sample_index = 0;
  double score = 0.0;
  bool malicious = false;
  std::optional<bool> ground_truth;  // true when the sample was tagged
  std::optional<AttackKind> attack_kind;
  std::uint64_t latency_ns = 0;
};

// Fixed-capacity FIFO shared by one producer and one consumer.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("queue capacity must be positive");
  }

  bool try_push(T&& v) {
    {
      std::lock_guard lock(mu_);
      if (items_.size() >= capacity_) return false;
      items_.push_back(std::move(v));
    }
    cv_.notify_one();
    return true;
  }

  void push(T&& v) {
    std::unique_lock lock(mu_);
    space_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(v));
    lock.unlock();
    cv_.notify_one();
  }

  // Blocks until an item arrives or the queue is closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    lock.unlock();
    space_.notify_one();
    return v;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable cv_, space_;
  std::deque<T> items_;
  bool closed_ = false;
};

struct MonitorOptions {
  double threshold = kDefaultThreshold;
  std::size_t queue_capacity = kDefaultQueueCapacity;
};

struct MonitorResult {
  std::vector<DetectionVerdict> verdicts;
  SimTrace trace;
  std::size_t max_backlog = 0;  // records parked on the producer side
};

inline void check_compatible(const FeatureTransform& ft, const QuantizedMlpModel& model) {
  if (ft.output_dim() != model.input_dim()) {
    throw DimensionError("transform yields " + std::to_string(ft.output_dim()) + " components, model expects " +
                         std::to_string(model.input_dim()));
  }
}

// Runs the simulator with a passive tap. Each retired transaction is
// captured on the simulator thread and handed to an inference thread; if
// the queue is full the record waits in a local backlog so the simulator
// never stalls. Verdicts come out in capture order.
inline MonitorResult monitor(const SimConfig& cfg, const std::vector<AttackPlan>& plans, const FeatureTransform& ft,
                             const QuantizedMlpModel& model, const MonitorOptions& opt = {},
                             const std::function<void(const DetectionVerdict&)>& sink = {}) {
  check_compatible(ft, model);
  MonitorResult res;
  BoundedQueue<CaptureRecord> queue(opt.queue_capacity);
  std::exception_ptr consumer_error;

  std::thread consumer([&] {
    try {
      Projector project(ft, capture_schema());
      IntegerEngine engine(model);
      while (auto rec = queue.pop()) {
        const auto t0 = std::chrono::steady_clock::now();
        const Eigen::VectorXd& v = project(rec->values);
        DetectionVerdict d;
        d.score = engine.score(v);
        const auto t1 = std::chrono::steady_clock::now();
        d.sample_index = rec->sample_index;
        d.malicious = d.score >= opt.threshold;
        d.ground_truth = rec->label == 1;
        d.attack_kind = rec->attack_kind;
        d.latency_ns = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
        if (sink) sink(d);
        res.verdicts.push_back(d);
      }
    } catch (...) {
      consumer_error = std::current_exception();
      // Keep draining so the producer's final flush cannot deadlock.
      while (queue.pop()) {
      }
    }
  });

  CaptureBuilder builder(cfg);
  std::deque<CaptureRecord> backlog;
  Simulator sim(cfg, plans);
  sim.set_observer([&](std::size_t, const AxiTransaction& t) {
    backlog.push_back(builder.add(t));
    while (!backlog.empty() && queue.try_push(std::move(backlog.front()))) backlog.pop_front();
    res.max_backlog = std::max(res.max_backlog, backlog.size());
  });
  try {
    res.trace = sim.run();
  } catch (...) {
    queue.close();
    consumer.join();
    throw;
  }
  while (!backlog.empty()) {
    queue.push(std::move(backlog.front()));
    backlog.pop_front();
  }
  queue.close();
  consumer.join();
  if (consumer_error) std::rethrow_exception(consumer_error);
  return res;
}

inline nlohmann::json to_json(const DetectionVerdict& d) {
  nlohmann::json j = {{"sample_index", d.sample_index},
                      {"score", d.score},
                      {"decision", d.malicious ? "malicious" : "normal"},
                      {"latency_ns", d.latency_ns}};
  if (d.ground_truth) j["ground_truth"] = *d.ground_truth ? "malicious" : "normal";
  if (d.attack_kind) j["attack_kind"] = std::string(to_string(*d.attack_kind));
  return j;
}

inline void write_verdict_line(const DetectionVerdict& d, std::ostream& os) { os << to_json(d).dump() << '\n'; }

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

struct BenchRow {
  int load_percent = 0;
  std::size_t samples = 0;
  double mean_latency_ns = 0.0;
  double p99_latency_ns = 0.0;
  double throughput = 0.0;  // inferences per second
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

struct BenchOptions {
  std::vector<int> loads = {10, 25, 50, 75, 100};
  std::uint64_t duration_cycles = 100'000;
  int repetitions = 20;
};

namespace detail {

inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0.0 : v[v.size() / 2];
}

}  // namespace detail

// Per load: simulate `duration_cycles` of traffic (normal only), capture it,
// then time transform + integer inference per sample. Repetitions are
// interleaved across loads so slow drifts in machine state hit every load
// alike, and the starting load rotates each repetition. Each row reports
// medians over repetitions.
inline BenchReport bench(const SimConfig& base, const FeatureTransform& ft, const QuantizedMlpModel& model,
                         const BenchOptions& opt = {}) {
  check_compatible(ft, model);
  BenchReport report;
  if (opt.duration_cycles == 0 || opt.loads.empty()) return report;
  std::vector<int> loads = opt.loads;
  for (int l : loads) {
    if (l < 1 || l > 100) throw ConfigError("bench loads must be within [1, 100], got " + std::to_string(l));
  }
  std::sort(loads.begin(), loads.end());
  loads.erase(std::unique(loads.begin(), loads.end()), loads.end());

  std::vector<Dataset> streams;
  for (int l : loads) {
    SimConfig cfg = base;
    cfg.load_percent = l;
    cfg.cycles = opt.duration_cycles;
    cfg.normal_quota.reset();
    streams.push_back(capture(simulate(cfg), cfg));
  }

  Projector project(ft, capture_schema());
  IntegerEngine engine(model);
  std::vector<std::vector<double>> means(loads.size()), p99s(loads.size()), rates(loads.size());
  volatile double sink = 0.0;
  std::vector<double> lat;
  // Untimed pass so caches and branch predictors are warm for every load.
  for (const auto& st : streams) {
    for (const auto& r : st.rows) sink = sink + engine.score(project(r.values));
  }
  for (int rep = 0; rep < std::max(1, opt.repetitions); ++rep) {
    for (std::size_t step = 0; step < loads.size(); ++step) {
      // Rotate the starting load so no load always runs first or last.
      const std::size_t li = (step + static_cast<std::size_t>(rep)) % loads.size();
      const auto& rows = streams[li].rows;
      if (rows.empty()) continue;
      lat.clear();
      lat.reserve(rows.size());
      for (const auto& r : rows) {
        const auto t0 = std::chrono::steady_clock::now();
        sink = sink + engine.score(project(r.values));
        const auto t1 = std::chrono::steady_clock::now();
        lat.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
      }
      const auto b0 = std::chrono::steady_clock::now();
      for (const auto& r : rows) sink = sink + engine.score(project(r.values));
      const auto b1 = std::chrono::steady_clock::now();
      double total = 0.0;
      for (double x : lat) total += x;
      means[li].push_back(total / static_cast<double>(lat.size()));
      p99s[li].push_back(detail::percentile(lat, 0.99));
      rates[li].push_back(static_cast<double>(rows.size()) / std::chrono::duration<double>(b1 - b0).count());
    }
  }
  for (std::size_t li = 0; li < loads.size(); ++li) {
    BenchRow row;
    row.load_percent = loads[li];
    row.samples = streams[li].rows.size();
    if (row.samples) {
      row.mean_latency_ns = detail::median(means[li]);
      row.p99_latency_ns = detail::median(p99s[li]);
      row.throughput = detail::median(rates[li]);
    }
    report.rows.push_back(row);
  }
  return report;
}

inline void write_bench_csv(const BenchReport& r, std::ostream& os) {
  os << "load_percent,samples,mean_latency_ns,p99_latency_ns,throughput_inferences_per_s\n";
  for (const auto& row : r.rows) {
    os << row.load_percent << ',' << row.samples << ',' << row.mean_latency_ns << ',' << row.p99_latency_ns << ','
       << row.throughput << '\n';
  }
}

}  // namespace axims

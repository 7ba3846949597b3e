#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "kfbi/errors.hpp"

namespace kfbi {

/// Kernel names used by the solver pipeline. Timings are accumulated per name.
namespace kernels {
inline constexpr std::string_view classify_nodes = "classify-nodes";
inline constexpr std::string_view edge_intersections = "edge-intersections";
inline constexpr std::string_view jumps_and_corrections = "jumps-and-corrections";
inline constexpr std::string_view transform_rows = "transform-rows";
inline constexpr std::string_view transform_cols = "transform-cols";
inline constexpr std::string_view diagonal_scale = "diagonal-scale";
inline constexpr std::string_view extract_traces = "extract-traces";
inline constexpr std::string_view density_update = "density-update";
inline constexpr std::string_view rhs_update = "rhs-update";
}  // namespace kernels

inline constexpr std::size_t default_chunk_size = 256;

/// Number of chunks needed to cover `items` work items, i.e. the CUDA-style
/// block count (N + Threads - 1) / Threads.
constexpr std::size_t chunk_count(std::size_t items, std::size_t chunk) noexcept {
  return (items + chunk - 1) / chunk;
}

enum class BackendKind { serial, workers };

struct BackendSpec {
  BackendKind kind = BackendKind::serial;
  int workers = 1;

  static BackendSpec serial() { return {}; }
  static BackendSpec with_workers(int count) { return {BackendKind::workers, count}; }

  /// Parses "serial" or "workers:N".
  static BackendSpec parse(std::string_view text) {
    if (text == "serial") return serial();
    constexpr std::string_view prefix = "workers:";
    if (text.substr(0, prefix.size()) == prefix) {
      const std::string count(text.substr(prefix.size()));
      int n = 0;
      try {
        std::size_t used = 0;
        n = std::stoi(count, &used);
        if (used != count.size()) n = 0;
      } catch (const std::exception&) {
        n = 0;
      }
      if (n < 1) throw ConfigError("invalid worker count in backend '" + std::string(text) + "'");
      return with_workers(n);
    }
    throw ConfigError("unknown backend '" + std::string(text) + "' (expected serial or workers:N)");
  }

  std::string to_string() const {
    return kind == BackendKind::serial ? std::string("serial")
                                       : "workers:" + std::to_string(workers);
  }

  friend bool operator==(const BackendSpec&, const BackendSpec&) = default;
};

struct KernelTiming {
  std::size_t calls = 0;
  double seconds = 0.0;
};

/// Fork-join executor for data-parallel kernels.
///
/// Every kernel is a pure function of its item index that writes only its own
/// output slots, so the result does not depend on the backend or on how chunks
/// are scheduled. `dispatch` returns once all items are done.
///
/// An Executor is owned by one orchestrating thread; dispatch is not reentrant.
class Executor {
 public:
  explicit Executor(BackendSpec spec = BackendSpec::serial(),
                    std::size_t chunk = default_chunk_size)
      : spec_(spec), chunk_(chunk) {
    if (chunk_ == 0) throw ConfigError("chunk size must be positive");
    if (spec_.kind == BackendKind::workers) {
      if (spec_.workers < 1) throw ConfigError("worker count must be positive");
      threads_.reserve(static_cast<std::size_t>(spec_.workers));
      for (int w = 0; w < spec_.workers; ++w) threads_.emplace_back([this] { worker_loop(); });
    }
  }

  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  ~Executor() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  const BackendSpec& backend() const noexcept { return spec_; }
  std::size_t chunk_size() const noexcept { return chunk_; }

  /// Runs fn(i) for every i in [0, items).
  template <class Fn>
  void dispatch(std::string_view kernel, std::size_t items, Fn&& fn) {
    dispatch_chunks(kernel, items, [&fn](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }

  /// Runs fn(begin, end) over consecutive chunks covering [0, items).
  template <class Fn>
  void dispatch_chunks(std::string_view kernel, std::size_t items, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if (items > 0) {
      if (threads_.empty()) {
        run_serial(kernel, items, fn);
      } else {
        run_parallel(kernel, items, std::function<void(std::size_t, std::size_t)>(fn));
      }
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    auto& t = timings_[std::string(kernel)];
    ++t.calls;
    t.seconds += elapsed.count();
  }

  const std::map<std::string, KernelTiming>& timings() const noexcept { return timings_; }
  void reset_timings() { timings_.clear(); }

 private:
  template <class Fn>
  void run_serial(std::string_view kernel, std::size_t items, Fn& fn) {
    try {
      for (std::size_t begin = 0; begin < items; begin += chunk_) {
        fn(begin, std::min(items, begin + chunk_));
      }
    } catch (const std::exception& e) {
      throw DispatchError(std::string(kernel), e.what());
    }
  }

  void run_parallel(std::string_view kernel, std::size_t items,
                    std::function<void(std::size_t, std::size_t)> fn) {
    {
      std::lock_guard lock(mutex_);
      job_ = std::move(fn);
      job_items_ = items;
      job_chunks_ = chunk_count(items, chunk_);
      next_chunk_.store(0);
      pending_ = threads_.size();
      failure_ = nullptr;
      ++generation_;
    }
    wake_.notify_all();
    std::unique_lock lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    if (failure_) {
      auto failure = failure_;
      failure_ = nullptr;
      try {
        std::rethrow_exception(failure);
      } catch (const std::exception& e) {
        throw DispatchError(std::string(kernel), e.what());
      } catch (...) {
        throw DispatchError(std::string(kernel), "unknown failure");
      }
    }
  }

  void worker_loop() {
    std::size_t seen = 0;
    for (;;) {
      std::function<void(std::size_t, std::size_t)>* job = nullptr;
      std::size_t items = 0;
      std::size_t chunks = 0;
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
        if (stopping_) return;
        seen = generation_;
        job = &job_;
        items = job_items_;
        chunks = job_chunks_;
      }
      for (;;) {
        const std::size_t c = next_chunk_.fetch_add(1);
        if (c >= chunks) break;
        const std::size_t begin = c * chunk_;
        try {
          (*job)(begin, std::min(items, begin + chunk_));
        } catch (...) {
          std::lock_guard lock(mutex_);
          if (!failure_) failure_ = std::current_exception();
        }
      }
      {
        std::lock_guard lock(mutex_);
        if (--pending_ == 0) done_.notify_one();
      }
    }
  }

  BackendSpec spec_;
  std::size_t chunk_;
  std::map<std::string, KernelTiming> timings_;

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  std::function<void(std::size_t, std::size_t)> job_;
  std::size_t job_items_ = 0;
  std::size_t job_chunks_ = 0;
  std::atomic<std::size_t> next_chunk_{0};
  std::size_t pending_ = 0;
  std::size_t generation_ = 0;
  bool stopping_ = false;
  std::exception_ptr failure_;
};

}  // namespace kfbi

#include "lasco/kernels/thread_pool.hpp"

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "lasco/kernels/dispatch.hpp"

namespace lasco::kernels {

namespace {

// Minimal persistent pool. parallel_for splits [0,n) into one contiguous
// chunk per participating thread; the caller claims chunks like any worker
// and then sleeps until the stragglers finish. Chunks are fixed by
// (n, n_threads), not by scheduling, so output is identical no matter which
// thread picks up which chunk.
class Pool {
 public:
  static Pool& instance() {
    static Pool p;
    return p;
  }

  struct Job {
    const std::function<void(int64_t, int64_t)>* body = nullptr;
    int64_t n = 0;
    int64_t per = 0;
    int chunks = 0;
    std::atomic<int> next{0};
    std::atomic<int> remaining{0};
  };

  void run(int64_t n, const std::function<void(int64_t, int64_t)>& body,
           int n_threads) {
    // one job at a time; concurrent callers serialize here
    std::lock_guard<std::mutex> run_lk(run_mu_);
    ensure_workers(n_threads - 1);

    auto job = std::make_shared<Job>();
    job->body = &body;
    job->n = n;
    job->chunks = n_threads;
    job->per = (n + n_threads - 1) / n_threads;
    job->remaining.store(n_threads, std::memory_order_relaxed);
    {
      std::lock_guard<std::mutex> lk(mu_);
      job_ = job;
      ++generation_;
    }
    cv_.notify_all();

    claim_chunks(*job);

    if (job->remaining.load(std::memory_order_acquire) > 0) {
      std::unique_lock<std::mutex> lk(done_mu_);
      done_cv_.wait(lk, [&] {
        return job->remaining.load(std::memory_order_acquire) == 0;
      });
    }
    std::lock_guard<std::mutex> lk(mu_);
    job_.reset();
  }

  void shutdown() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
      ++generation_;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
    workers_.clear();
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = false;
    }
  }

  ~Pool() { shutdown(); }

 private:
  void claim_chunks(Job& job) {
    for (;;) {
      const int c = job.next.fetch_add(1, std::memory_order_relaxed);
      if (c >= job.chunks) return;
      const int64_t b = static_cast<int64_t>(c) * job.per;
      const int64_t e = b + job.per < job.n ? b + job.per : job.n;
      if (b < e) (*job.body)(b, e);
      if (job.remaining.fetch_sub(1, std::memory_order_release) == 1) {
        std::lock_guard<std::mutex> lk(done_mu_);
        done_cv_.notify_all();
      }
    }
  }

  void ensure_workers(int want) {
    std::unique_lock<std::mutex> lk(mu_);
    while (static_cast<int>(workers_.size()) < want)
      workers_.emplace_back([this] { worker_loop(); });
  }

  void worker_loop() {
    uint64_t seen = 0;
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
        seen = generation_;
        if (stop_) return;
        job = job_;  // keeps the job alive past its replacement
      }
      if (!job) continue;
      claim_chunks(*job);
    }
  }

  std::mutex run_mu_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::mutex done_mu_;
  std::condition_variable done_cv_;
  std::vector<std::thread> workers_;
  bool stop_ = false;
  uint64_t generation_ = 0;
  std::shared_ptr<Job> job_;
};

}  // namespace

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body) {
  if (n <= 0) return;
  const int threads = thread_count();
  if (threads <= 1 || n < 2) {
    body(0, n);
    return;
  }
  const int use = n < threads ? static_cast<int>(n) : threads;
  Pool::instance().run(n, body, use);
}

void shutdown_pool() { Pool::instance().shutdown(); }

}  // namespace lasco::kernels

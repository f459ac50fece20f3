#include "ecosim/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace ecosim {

WorkerPool::WorkerPool(int workers) : workers_(std::max(1, workers)) {
  for (int id = 1; id < workers_; ++id) {
    threads_.emplace_back([this, id] { worker_loop(id); });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

namespace {

std::pair<std::size_t, std::size_t> chunk_of(std::size_t n, int workers, int id) {
  const std::size_t per = n / static_cast<std::size_t>(workers);
  const std::size_t extra = n % static_cast<std::size_t>(workers);
  const auto uid = static_cast<std::size_t>(id);
  const std::size_t begin = uid * per + std::min(uid, extra);
  return {begin, begin + per + (uid < extra ? 1 : 0)};
}

}  // namespace

void WorkerPool::parallel_for(std::size_t n,
                              const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (workers_ == 1 || n < static_cast<std::size_t>(workers_)) {
    fn(0, n);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    job_ = &fn;
    job_size_ = n;
    pending_ = workers_ - 1;
    ++generation_;
  }
  wake_.notify_all();
  const auto [begin, end] = chunk_of(n, workers_, 0);
  fn(begin, end);
  std::unique_lock lock(mutex_);
  done_.wait(lock, [this] { return pending_ == 0; });
  job_ = nullptr;
}

void WorkerPool::worker_loop(int id) {
  std::size_t seen = 0;
  while (true) {
    const std::function<void(std::size_t, std::size_t)>* job = nullptr;
    std::size_t n = 0;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
      job = job_;
      n = job_size_;
    }
    const auto [begin, end] = chunk_of(n, workers_, id);
    if (begin < end) (*job)(begin, end);
    {
      std::lock_guard lock(mutex_);
      --pending_;
    }
    done_.notify_one();
  }
}

}  // namespace ecosim

#include "ctfkit/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ctfkit {

namespace {

std::size_t initial_thread_count()
{
  if (const char* env = std::getenv("CTFKIT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0)
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<std::size_t>& configured_threads()
{
  static std::atomic<std::size_t> n{initial_thread_count()};
  return n;
}

thread_local bool t_inside_worker = false;

} // namespace

std::size_t thread_count()
{
  return configured_threads().load();
}

void set_thread_count(std::size_t n)
{
  configured_threads().store(std::max<std::size_t>(1, n));
}

void parallel_for(std::size_t count, std::size_t chunk,
                  const std::function<void(std::size_t, std::size_t)>& body)
{
  if (count == 0)
    return;
  chunk = std::max<std::size_t>(1, chunk);
  const std::size_t chunks = (count + chunk - 1) / chunk;
  const std::size_t workers = std::min(thread_count(), chunks);

  if (workers <= 1 || t_inside_worker) {
    for (std::size_t c = 0; c < chunks; ++c)
      body(c * chunk, std::min(count, (c + 1) * chunk));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run = [&] {
    t_inside_worker = true;
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks)
        break;
      try {
        body(c * chunk, std::min(count, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        next.store(chunks);
      }
    }
    t_inside_worker = false;
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t i = 1; i < workers; ++i)
    pool.emplace_back(run);
  run();
  pool.clear();

  if (failure)
    std::rethrow_exception(failure);
}

void parallel_for_each(std::size_t count,
                       const std::function<void(std::size_t)>& body)
{
  parallel_for(count, 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      body(i);
  });
}

} // namespace ctfkit

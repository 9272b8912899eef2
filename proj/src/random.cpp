#include "binchoice/random.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace binchoice {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::seed_seq make_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (stream * 0xD1B54A32D192ED03ULL);
    std::uint32_t words[8];
    for (int k = 0; k < 4; ++k) {
        const std::uint64_t w = splitmix64(state);
        words[2 * k] = static_cast<std::uint32_t>(w);
        words[2 * k + 1] = static_cast<std::uint32_t>(w >> 32);
    }
    return std::seed_seq(std::begin(words), std::end(words));
}

}  // namespace

UniformStream::UniformStream(std::uint64_t seed, std::uint64_t stream) {
    auto seq = make_seed(seed, stream);
    engine_.seed(seq);
}

unsigned resolve_threads(std::optional<unsigned> requested) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("BINARY_DEMAND_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void for_each_chunk(std::size_t n, std::size_t chunk, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    chunk = std::max<std::size_t>(chunk, 1);
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    const auto run = [&](std::size_t c) { body(c, c * chunk, std::min(n, (c + 1) * chunk)); };

    const std::size_t workers = std::min<std::size_t>(std::max(1U, threads), n_chunks);
    if (workers == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t c = next++; c < n_chunks; c = next++) {
                    try {
                        run(c);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace binchoice

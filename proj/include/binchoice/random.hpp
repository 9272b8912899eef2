#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>

namespace binchoice {

/// Seeded source of uniforms on the open interval (0, 1).
///
/// Substreams are keyed by (seed, stream) so that work split into chunks
/// draws the same numbers regardless of how chunks land on threads. The
/// conversion to double is done by hand so results do not depend on the
/// standard library's distribution implementation.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed, std::uint64_t stream = 0);

    double next() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }
    std::uint64_t next_u64() noexcept { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Thread count from an explicit request, else BINARY_DEMAND_THREADS, else
/// the hardware concurrency. Always at least 1.
[[nodiscard]] unsigned resolve_threads(std::optional<unsigned> requested = std::nullopt);

/// Runs `body(chunk_index, begin, end)` over [0, n) cut into fixed-size
/// chunks. Chunk boundaries depend only on `n` and `chunk`, never on
/// `threads`, so per-chunk seeding keeps results thread-count independent.
void for_each_chunk(std::size_t n, std::size_t chunk, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

}  // namespace binchoice

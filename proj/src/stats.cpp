#include "multiacc/stats.hpp"

#include <cmath>
#include <thread>
#include <vector>

namespace multiacc {

namespace {

constexpr std::uint64_t kChunk = 1 << 16;

struct Partial {
    double sum = 0.0;
    double sum_sq = 0.0;
    double sum_abs = 0.0;
};

Partial run_chunk(std::uint64_t seed, std::uint64_t chunk_index, std::uint64_t count,
                  const std::function<double(Rng&)>& draw) {
    Rng rng(mix_seed(seed, chunk_index));
    Partial p;
    for (std::uint64_t i = 0; i < count; ++i) {
        const double x = draw(rng);
        p.sum += x;
        p.sum_sq += x * x;
        p.sum_abs += std::fabs(x);
    }
    return p;
}

}  // namespace

McSummary mc_run(std::uint64_t total, std::uint64_t seed, int threads,
                 const std::function<double(Rng&)>& draw) {
    McSummary out;
    out.count = total;
    if (total == 0) return out;

    const std::uint64_t chunks = (total + kChunk - 1) / kChunk;
    std::vector<Partial> partials(chunks);

    auto chunk_size = [&](std::uint64_t c) {
        return (c + 1 == chunks) ? total - c * kChunk : kChunk;
    };

    if (threads <= 1 || chunks == 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) partials[c] = run_chunk(seed, c, chunk_size(c), draw);
    } else {
        const unsigned nw = static_cast<unsigned>(threads);
        std::vector<std::thread> workers;
        workers.reserve(nw);
        for (unsigned w = 0; w < nw; ++w) {
            workers.emplace_back([&, w]() {
                for (std::uint64_t c = w; c < chunks; c += nw)
                    partials[c] = run_chunk(seed, c, chunk_size(c), draw);
            });
        }
        for (auto& t : workers) t.join();
    }

    Partial all;
    for (const auto& p : partials) {
        all.sum += p.sum;
        all.sum_sq += p.sum_sq;
        all.sum_abs += p.sum_abs;
    }
    const double n = static_cast<double>(total);
    out.mean = all.sum / n;
    out.mean_abs = all.sum_abs / n;
    if (total > 1) {
        double var = (all.sum_sq - all.sum * all.sum / n) / (n - 1.0);
        if (var < 0.0) var = 0.0;
        out.std_error = std::sqrt(var / n);
    }
    return out;
}

}  // namespace multiacc

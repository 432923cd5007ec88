#include "cotgan/rng.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cotgan {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : base_seed_(seed) {
    std::uint64_t s = seed;
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s))};
    engine_.seed(seq);
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
    // Top 53 bits -> [0, 1) on the double grid.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double Rng::normal(double mean, double stddev) { return mean + stddev * normal(); }

index_t Rng::uniform_int(index_t n) {
    if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n must be positive");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<index_t>(x % un);
}

Tensor Rng::normal_tensor(const Shape& shape) {
    Tensor out(shape);
    for (double& v : out.data) v = normal();
    return out;
}

Tensor Rng::uniform_tensor(const Shape& shape, double lo, double hi) {
    Tensor out(shape);
    for (double& v : out.data) v = uniform(lo, hi);
    return out;
}

Rng Rng::derive(std::uint64_t stream) const {
    std::uint64_t s = base_seed_ ^ (0x6a09e667f3bcc909ULL + stream);
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    return Rng(a ^ (b + stream * 0x9e3779b97f4a7c15ULL));
}

std::string Rng::serialize() const {
    std::ostringstream os;
    os << base_seed_ << ' ' << (has_spare_ ? 1 : 0) << ' '
       << std::bit_cast<std::uint64_t>(spare_) << ' ' << engine_;
    return os.str();
}

Rng Rng::deserialize(const std::string& text) {
    std::istringstream is(text);
    Rng r(0);
    int flag = 0;
    std::uint64_t spare_bits = 0;
    is >> r.base_seed_ >> flag >> spare_bits >> r.engine_;
    if (!is) throw std::invalid_argument("Rng::deserialize: malformed state string");
    r.spare_ = std::bit_cast<double>(spare_bits);
    r.has_spare_ = flag != 0;
    return r;
}

}  // namespace cotgan

#include "somfrechet/parallel.hpp"

#include <cstdlib>
#include <string>

namespace somfrechet {

std::size_t default_workers()
{
    if (const char* env = std::getenv("SOMFRECHET_WORKERS")) {
        try {
            const long n = std::stol(env);
            if (n >= 1) return static_cast<std::size_t>(n);
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace somfrechet

#include "wlalign/parallel.hpp"

#include <cstdlib>
#include <string>

namespace wlalign {

int thread_cap() {
    static const int cap = [] {
        const char* env = std::getenv("WLALIGN_THREADS");
        if (env == nullptr || *env == '\0') return 1;
        try {
            const int v = std::stoi(env);
            return v >= 1 ? v : 1;
        } catch (...) {
            return 1;
        }
    }();
    return cap;
}

}  // namespace wlalign

#include "ledmaint/parallel.hpp"

#include <omp.h>

namespace ledmaint {

void set_worker_count(int workers) {
    if (workers > 0) {
        omp_set_num_threads(workers);
    }
}

} // namespace ledmaint

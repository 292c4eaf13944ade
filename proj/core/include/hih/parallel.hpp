#pragma once

namespace hih {

// Worker count for intra-op parallelism. Defaults to HIH_THREADS when set,
// otherwise the number of hardware threads.
int thread_count();
void set_thread_count(int n);

}  // namespace hih

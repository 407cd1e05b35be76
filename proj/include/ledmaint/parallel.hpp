#pragma once

namespace ledmaint {

/// Selects between the OpenMP kernel and the serial reference loop it is
/// tested against. Both produce bit-identical results: every work item owns
/// its random stream and writes only to its own output slot.
enum class Execution { serial, parallel };

/// Sets the OpenMP worker count; values <= 0 leave the runtime default.
void set_worker_count(int workers);

} // namespace ledmaint

#pragma once

namespace offsetmodel {

// Kernel execution policy. Parallel paths are OpenMP loops over
// order-independent work items and produce bit-identical results to the
// serial reference.
enum class Exec { serial, parallel };

} // namespace offsetmodel

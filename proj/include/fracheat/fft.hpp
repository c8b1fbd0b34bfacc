#pragma once
#include <mutex>

namespace fracheat {

// FFTW's planner is not re-entrant; plan creation and destruction take this lock.
std::mutex& fftw_planner_mutex();

}  // namespace fracheat

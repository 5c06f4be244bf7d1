// log.hpp — process-wide warning sink (stderr by default, silenced by the CLI's --quiet)

#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <string>

namespace qthermo::log {

inline std::atomic<bool>& quiet_flag() {
    static std::atomic<bool> quiet{false};
    return quiet;
}

inline void set_quiet(bool quiet) { quiet_flag().store(quiet); }

inline std::atomic<long>& warning_count() {
    static std::atomic<long> count{0};
    return count;
}

inline void warn(const std::string& message) {
    ++warning_count();
    if (quiet_flag().load()) return;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    std::cerr << "warning: " << message << '\n';
}

}  // namespace qthermo::log

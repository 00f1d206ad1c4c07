#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nestsim/lts.hpp"

namespace nestsim {

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero means unlimited.
struct SearchCaps {
  std::uint64_t max_nodes = 0;
};

struct Stats {
  std::uint64_t search_nodes = 0;
  std::uint64_t sat_calls = 0;
  double runtime_ms = 0;
};

struct Verdict {
  std::string problem;
  bool value = false;
  bool complete = true;
  std::optional<Process> witness;
  std::optional<std::pair<Process, Process>> counterexample;
  Stats stats;
  std::vector<std::string> trace;
  std::string note;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace nestsim
